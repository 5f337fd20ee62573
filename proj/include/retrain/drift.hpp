#pragma once

// Drift-triggered retraining: ADWIN watches the label stream, FHDDM and KSWIN watch
// the deployed model's per-sample correctness. A flag retrains and resets.

#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "retrain/policy.hpp"
#include "retrain/rng.hpp"

namespace retrain {

enum class DetectorKind { ADWIN, FHDDM, KSWIN };

const char* detector_name(DetectorKind k);
DetectorKind parse_detector(const std::string& name);

struct DriftDetectorConfig {
  DetectorKind kind = DetectorKind::ADWIN;
  double significance = 0.05;
  int window = 1500;
  std::uint64_t seed = 0;  // KSWIN reference sampling

  void validate() const;
};

class DriftDetector {
 public:
  virtual ~DriftDetector() = default;
  // Consumes one observation; true when drift is flagged.
  bool update(double x);
  virtual void reset() = 0;

 protected:
  virtual bool consume(double x) = 0;
};

// Adaptive window: drops the older part whenever two adjacent sub-windows have
// means further apart than the Hoeffding-style cut, checked every `clock` inputs.
class Adwin final : public DriftDetector {
 public:
  explicit Adwin(double delta, int clock = 32, int min_side = 5);
  void reset() override;
  std::size_t width() const { return window_.size(); }
  double mean() const;

 protected:
  bool consume(double x) override;

 private:
  bool shrink();

  double delta_;
  int clock_;
  int min_side_;
  int ticks_ = 0;
  std::deque<double> window_;
};

// Flags when the best windowed accuracy seen so far exceeds the current windowed
// accuracy by more than sqrt(ln(1/delta) / (2 n)).
class Fhddm final : public DriftDetector {
 public:
  Fhddm(int window, double delta);
  void reset() override;
  double epsilon() const { return epsilon_; }

 protected:
  bool consume(double x) override;

 private:
  int n_;
  double epsilon_;
  std::deque<double> window_;
  double sum_ = 0.0;
  double best_ = -1.0;
};

// Two-sample Kolmogorov-Smirnov test between the newest `stat_size` values and
// an equally sized uniform sample of the older part of the window.
class Kswin final : public DriftDetector {
 public:
  Kswin(int window, double alpha, std::uint64_t seed, int stat_size = 30);
  void reset() override;
  double critical_value() const;

 protected:
  bool consume(double x) override;

 private:
  int window_size_;
  int stat_size_;
  double alpha_;
  std::uint64_t seed_;
  Rng rng_;
  std::deque<double> window_;
};

double ks_statistic(std::vector<double> a, std::vector<double> b);

std::unique_ptr<DriftDetector> make_detector(const DriftDetectorConfig& cfg);

// Observation stream a detector of this kind reads from dataset t while model f_i is deployed.
std::vector<double> detector_stream(DetectorKind kind, const World& world, int deployed, int t);

// Detector warm-started on the deployed model's own dataset; at step t it reads D_t,
// and a flag retrains f_t then restarts the detector on D_t.
PolicyTrace run_drift(const World& world, const CostSpec& spec, const DriftDetectorConfig& cfg);

}  // namespace retrain
