#include "retrain/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "retrain/csv.hpp"
#include "retrain/errors.hpp"

namespace retrain {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string pair_name(int i, int j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

}  // namespace

// ---------------------------------------------------------------------------
// PerformanceMatrix

PerformanceMatrix::PerformanceMatrix(int offline_w, int horizon_T, bool loss_bounded)
    : w_(offline_w), T_(horizon_T), bounded_(loss_bounded) {
  if (offline_w < 0) throw ArgumentError("offline window w must be >= 0");
  if (horizon_T < 1) throw ArgumentError("online horizon T must be >= 1");
  auto n = static_cast<std::size_t>(horizon_total());
  cells_.assign(n * n, kMissing);
}

std::size_t PerformanceMatrix::offset(int i, int j) const {
  if (i < -w_ || i > T_ || j < -w_ || j > T_) {
    throw std::out_of_range("index " + pair_name(i, j) + " outside [" + std::to_string(-w_) +
                            ", " + std::to_string(T_) + "]");
  }
  auto n = static_cast<std::size_t>(horizon_total());
  return static_cast<std::size_t>(i + w_) * n + static_cast<std::size_t>(j + w_);
}

void PerformanceMatrix::set(int i, int j, double loss) {
  if (i > j) throw DataError("pe entry " + pair_name(i, j) + " has model index after time index");
  if (!std::isfinite(loss)) throw DataError("pe entry " + pair_name(i, j) + " is not finite");
  if (bounded_ && (loss < 0.0 || loss > 1.0)) {
    throw DataError("pe entry " + pair_name(i, j) + " outside [0,1]");
  }
  cells_[offset(i, j)] = loss;
}

bool PerformanceMatrix::has(int i, int j) const {
  if (i < -w_ || i > T_ || j < -w_ || j > T_) return false;
  if (i > j) return true;
  return !std::isnan(cells_[offset(i, j)]);
}

double PerformanceMatrix::at(int i, int j) const {
  if (i > j) return 0.0;
  if (i < -w_ || i > T_ || j < -w_ || j > T_) {
    throw DataError("pe entry " + pair_name(i, j) + " outside the covered window");
  }
  double v = cells_[offset(i, j)];
  if (std::isnan(v)) throw DataError("missing pe entry " + pair_name(i, j));
  return v;
}

double PerformanceMatrix::max_entry() const {
  double m = 0.0;
  for (double v : cells_) {
    if (!std::isnan(v)) m = std::max(m, v);
  }
  return m;
}

bool PerformanceMatrix::covers(int from) const {
  for (int j = from; j <= T_; ++j) {
    for (int i = from; i <= j; ++i) {
      if (!has(i, j)) return false;
    }
  }
  return true;
}

bool PerformanceMatrix::operator==(const PerformanceMatrix& other) const {
  if (w_ != other.w_ || T_ != other.T_ || bounded_ != other.bounded_) return false;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    bool a = std::isnan(cells_[k]);
    bool b = std::isnan(other.cells_[k]);
    if (a != b || (!a && cells_[k] != other.cells_[k])) return false;
  }
  return true;
}

PerformanceMatrix read_pe_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("pe csv: empty input");
  auto header = csv::split_row(line);
  if (header != std::vector<std::string>{"i", "j", "value"}) {
    throw DataError("pe csv: expected header 'i,j,value'");
  }
  std::map<std::pair<int, int>, double> rows;
  int lo = 0;
  int hi = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto f = csv::split_row(line);
    if (f.size() != 3) throw DataError("pe csv line " + std::to_string(line_no) + ": expected 3 fields");
    int i = static_cast<int>(csv::parse_int(f[0], "i"));
    int j = static_cast<int>(csv::parse_int(f[1], "j"));
    double v = csv::parse_double(f[2], "value");
    if (i > j) throw DataError("pe csv line " + std::to_string(line_no) + ": row " + pair_name(i, j) + " has i > j");
    if (!rows.emplace(std::make_pair(i, j), v).second) {
      throw DataError("pe csv: duplicate entry " + pair_name(i, j));
    }
    lo = std::min(lo, i);
    hi = std::max(hi, j);
  }
  if (rows.empty()) throw DataError("pe csv: no rows");
  if (hi < 1) throw DataError("pe csv: no online time steps (j >= 1)");
  PerformanceMatrix pe(-lo, hi, true);
  for (const auto& [key, v] : rows) pe.set(key.first, key.second, v);
  return pe;
}

PerformanceMatrix read_pe_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pe csv '" + path + "'");
  return read_pe_csv(in);
}

void write_pe_csv(std::ostream& out, const PerformanceMatrix& pe) {
  out << "i,j,value\n";
  for (int i = pe.min_index(); i <= pe.max_index(); ++i) {
    for (int j = i; j <= pe.max_index(); ++j) {
      if (!pe.has(i, j)) continue;
      out << i << ',' << j << ',' << csv::format_double(pe.at(i, j)) << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// DecisionVector

DecisionVector::DecisionVector(int horizon_T) {
  if (horizon_T < 0) throw ArgumentError("negative horizon");
  bits_.assign(static_cast<std::size_t>(horizon_T), 0);
}

DecisionVector DecisionVector::from_bits(const std::vector<int>& bits) {
  DecisionVector d(static_cast<int>(bits.size()));
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] != 0 && bits[k] != 1) throw ArgumentError("decision bits must be 0 or 1");
    d.bits_[k] = static_cast<std::uint8_t>(bits[k]);
  }
  return d;
}

DecisionVector DecisionVector::all(int horizon_T, bool value) {
  DecisionVector d(horizon_T);
  std::fill(d.bits_.begin(), d.bits_.end(), value ? 1 : 0);
  return d;
}

bool DecisionVector::bit(int t) const {
  if (t < 1 || t > horizon()) throw std::out_of_range("time " + std::to_string(t) + " outside 1..T");
  return bits_[static_cast<std::size_t>(t - 1)] != 0;
}

void DecisionVector::set(int t, bool value) {
  if (t < 1 || t > horizon()) throw std::out_of_range("time " + std::to_string(t) + " outside 1..T");
  bits_[static_cast<std::size_t>(t - 1)] = value ? 1 : 0;
}

int DecisionVector::retrains() const {
  int r = 0;
  for (auto b : bits_) r += b;
  return r;
}

std::string DecisionVector::to_string() const {
  std::string s;
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

void CostSpec::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ArgumentError("alpha must be a finite value >= 0");
  if (!(scale_eN > 0.0)) throw ArgumentError("scale_eN must be > 0");
  if (horizon_T < 1) throw ArgumentError("horizon_T must be >= 1");
  if (offline_w < 0) throw ArgumentError("offline_w must be >= 0");
}

// ---------------------------------------------------------------------------
// Operations

int last_train_index(const DecisionVector& theta, int t) {
  if (t < 1 || t > theta.horizon()) {
    throw std::out_of_range("time " + std::to_string(t) + " outside 1.." + std::to_string(theta.horizon()));
  }
  for (int s = t; s >= 1; --s) {
    if (theta.bit(s)) return s;
  }
  return 0;
}

double performance_sum(const PerformanceMatrix& pe, const DecisionVector& theta) {
  double sum = 0.0;
  int last = 0;
  for (int t = 1; t <= theta.horizon(); ++t) {
    if (theta.bit(t)) last = t;
    sum += pe.at(last, t);
  }
  return sum;
}

double total_cost(const PerformanceMatrix& pe, const DecisionVector& theta, const CostSpec& spec) {
  spec.validate();
  if (theta.horizon() != spec.horizon_T) throw ArgumentError("schedule length differs from horizon_T");
  return spec.scale_eN * (spec.alpha * theta.retrains() + performance_sum(pe, theta));
}

std::vector<double> alpha_grid(double alpha_max, int n_points) {
  if (!(alpha_max > 0.0) || !std::isfinite(alpha_max)) throw ArgumentError("alpha_max must be > 0");
  if (n_points < 2) throw ArgumentError("alpha grid needs at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(n_points));
  for (int k = 0; k < n_points; ++k) grid[k] = alpha_max * k / (n_points - 1);
  grid.back() = alpha_max;
  return grid;
}

double auc_over_alpha(const std::vector<double>& grid, const std::vector<double>& costs) {
  if (grid.size() != costs.size()) throw ArgumentError("alpha grid and costs differ in length");
  if (grid.size() < 2) throw ArgumentError("AUC needs at least 2 points");
  double area = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    double h = grid[k] - grid[k - 1];
    if (!(h > 0.0)) throw ArgumentError("alpha grid must be strictly increasing");
    area += 0.5 * h * (costs[k] + costs[k - 1]);
  }
  return area;
}

double empirical_L(const PerformanceMatrix& pe) {
  if (pe.horizon_total() < 2) throw ArgumentError("empirical L needs at least two models");
  double L = 0.0;
  for (int t = pe.min_index() + 1; t <= pe.max_index(); ++t) {
    for (int i = pe.min_index(); i + 1 <= t; ++i) {
      if (!pe.has(i, t) || !pe.has(i + 1, t)) continue;
      L = std::max(L, std::abs(pe.at(i, t) - pe.at(i + 1, t)));
    }
  }
  return L;
}

double retrain_upper_bound(const BoundInputs& b) {
  if (!(b.alpha >= 0.0)) throw ArgumentError("alpha must be >= 0");
  if (!(b.L >= 0.0)) throw ArgumentError("L must be >= 0");
  if (b.horizon_T < 1) throw ArgumentError("horizon_T must be >= 1");
  if (b.L == 0.0) return static_cast<double>(b.horizon_T);
  return b.horizon_T - std::sqrt(b.alpha / b.L);
}

double never_retrain_alpha(double L, int horizon_T) {
  if (!(L >= 0.0)) throw ArgumentError("L must be >= 0");
  double gap = horizon_T - 1.0;
  return L * gap * gap;
}

FixedCountSchedule best_schedule_with_r_retrains(const PerformanceMatrix& pe, int r) {
  const int T = pe.horizon_T();
  if (r < 0 || r > T) throw ArgumentError("retrain count r must lie in 0..T");
  // Mask with r trailing ones, walked in lexicographic order by next_permutation.
  std::vector<int> mask(static_cast<std::size_t>(T), 0);
  std::fill(mask.end() - r, mask.end(), 1);
  FixedCountSchedule best;
  best.value = std::numeric_limits<double>::infinity();
  do {
    auto theta = DecisionVector::from_bits(mask);
    double v = performance_sum(pe, theta);
    if (v < best.value) {
      best.value = v;
      best.schedule = theta;
    }
  } while (std::next_permutation(mask.begin(), mask.end()));
  return best;
}

}  // namespace retrain
