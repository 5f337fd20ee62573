#pragma once

// Domain types and the cost arithmetic shared by every policy: the performance
// matrix pe[i, j] (loss of the model trained at step i on the data of step j),
// retraining schedules, the total-cost objective, AUC over an alpha grid and the
// retrain-count bound driven by the adjacent-model gap L.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace retrain {

// Loss of model i evaluated at time j. Indices run from -w (first offline step)
// to T (last online step); model 0 is the final offline model, always trained.
class PerformanceMatrix {
 public:
  PerformanceMatrix() = default;
  PerformanceMatrix(int offline_w, int horizon_T, bool loss_bounded = true);

  int offline_w() const { return w_; }
  int horizon_T() const { return T_; }
  int horizon_total() const { return w_ + 1 + T_; }
  int min_index() const { return -w_; }
  int max_index() const { return T_; }
  bool loss_bounded() const { return bounded_; }

  void set(int i, int j, double loss);
  bool has(int i, int j) const;
  // pe[i, j]; 0 for i > j, DataError naming (i, j) if the entry was never set.
  double at(int i, int j) const;
  double max_entry() const;
  // True when every i <= j pair in [from, T] is populated.
  bool covers(int from) const;

  bool operator==(const PerformanceMatrix& other) const;

 private:
  std::size_t offset(int i, int j) const;

  int w_ = 0;
  int T_ = 0;
  bool bounded_ = true;
  std::vector<double> cells_;
};

// CSV with header `i,j,value`; offline indices negative, rows with i > j rejected.
PerformanceMatrix read_pe_csv(std::istream& in);
PerformanceMatrix read_pe_csv_file(const std::string& path);
void write_pe_csv(std::ostream& out, const PerformanceMatrix& pe);

// theta in {0,1}^T, addressed with online times t = 1..T.
class DecisionVector {
 public:
  DecisionVector() = default;
  explicit DecisionVector(int horizon_T);
  static DecisionVector from_bits(const std::vector<int>& bits);
  static DecisionVector all(int horizon_T, bool value);

  int horizon() const { return static_cast<int>(bits_.size()); }
  bool bit(int t) const;
  void set(int t, bool value);
  int retrains() const;
  const std::vector<std::uint8_t>& bits() const { return bits_; }
  std::string to_string() const;

  bool operator==(const DecisionVector&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct CostSpec {
  double alpha = 0.0;    // retrain cost over per-step error cost, c / (eN)
  double scale_eN = 1.0;
  int horizon_T = 1;
  int offline_w = 0;

  void validate() const;
};

struct BoundInputs {
  double L = 0.0;
  double alpha = 0.0;
  int horizon_T = 1;
};

// max t' <= t with theta_t' = 1, or 0 when no prefix bit is set.
int last_train_index(const DecisionVector& theta, int t);

// Sum over t of pe[r(t), t], the performance-only part of the objective.
double performance_sum(const PerformanceMatrix& pe, const DecisionVector& theta);

// scale_eN * (alpha * |theta|_1 + sum_t pe[r(t), t]).
double total_cost(const PerformanceMatrix& pe, const DecisionVector& theta, const CostSpec& spec);

// n evenly spaced values on [0, alpha_max].
std::vector<double> alpha_grid(double alpha_max, int n_points = 10);

// Trapezoidal area under cost(alpha).
double auc_over_alpha(const std::vector<double>& grid, const std::vector<double>& costs);

// Largest adjacent-model gap |pe[i, t] - pe[i+1, t]| over all i + 1 <= t.
double empirical_L(const PerformanceMatrix& pe);

// T - sqrt(alpha / L); T when L == 0. A value below 1 means no retrain is justified.
double retrain_upper_bound(const BoundInputs& b);

// Smallest alpha for which retrain_upper_bound drops below 1, i.e. L * (T - 1)^2.
double never_retrain_alpha(double L, int horizon_T);

struct FixedCountSchedule {
  DecisionVector schedule;
  double value = 0.0;  // performance-only sum M_r of the best schedule
};

// Exhaustive minimum of the performance-only sum over schedules with exactly r retrains.
FixedCountSchedule best_schedule_with_r_retrains(const PerformanceMatrix& pe, int r);

}  // namespace retrain
