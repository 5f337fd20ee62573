#include "retrain/drift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "retrain/errors.hpp"

namespace retrain {

const char* detector_name(DetectorKind k) {
  switch (k) {
    case DetectorKind::ADWIN: return "adwin";
    case DetectorKind::FHDDM: return "fhddm";
    case DetectorKind::KSWIN: return "kswin";
  }
  return "?";
}

DetectorKind parse_detector(const std::string& name) {
  if (name == "adwin") return DetectorKind::ADWIN;
  if (name == "fhddm") return DetectorKind::FHDDM;
  if (name == "kswin") return DetectorKind::KSWIN;
  throw ArgumentError("unknown drift detector '" + name + "'");
}

void DriftDetectorConfig::validate() const {
  if (!(significance > 0.0 && significance < 1.0)) throw ArgumentError("significance must lie in (0, 1)");
  if (window < 2) throw ArgumentError("detector window must be >= 2");
}

bool DriftDetector::update(double x) {
  if (!std::isfinite(x)) throw DataError("detector observation must be finite");
  return consume(x);
}

// ---------------------------------------------------------------------------
// ADWIN

Adwin::Adwin(double delta, int clock, int min_side) : delta_(delta), clock_(clock), min_side_(min_side) {
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("ADWIN delta must lie in (0, 1)");
  if (clock < 1 || min_side < 1) throw ArgumentError("ADWIN clock and side length must be >= 1");
}

void Adwin::reset() {
  window_.clear();
  ticks_ = 0;
}

double Adwin::mean() const {
  if (window_.empty()) return 0.0;
  return std::accumulate(window_.begin(), window_.end(), 0.0) / static_cast<double>(window_.size());
}

bool Adwin::consume(double x) {
  window_.push_back(x);
  if (++ticks_ % clock_ != 0) return false;
  bool changed = false;
  while (shrink()) changed = true;
  return changed;
}

bool Adwin::shrink() {
  const auto n = window_.size();
  if (n < static_cast<std::size_t>(2 * min_side_)) return false;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + window_[k];
  const double total = prefix[n];
  const double mu = total / static_cast<double>(n);
  double var = 0.0;
  for (double v : window_) var += (v - mu) * (v - mu);
  var /= static_cast<double>(n);
  const double dd = std::log(2.0 * std::log(static_cast<double>(n)) / delta_);

  for (auto k = static_cast<std::size_t>(min_side_); k + static_cast<std::size_t>(min_side_) <= n; ++k) {
    const double n0 = static_cast<double>(k);
    const double n1 = static_cast<double>(n - k);
    const double gap = std::abs(prefix[k] / n0 - (total - prefix[k]) / n1);
    const double m = 1.0 / (1.0 / n0 + 1.0 / n1);
    const double eps = std::sqrt(2.0 * var * dd / m) + 2.0 * dd / (3.0 * m);
    if (gap > eps) {
      window_.erase(window_.begin(), window_.begin() + static_cast<std::ptrdiff_t>(k));
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// FHDDM

Fhddm::Fhddm(int window, double delta)
    : n_(window), epsilon_(std::sqrt(std::log(1.0 / delta) / (2.0 * window))) {
  if (window < 1) throw ArgumentError("FHDDM window must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("FHDDM delta must lie in (0, 1)");
}

void Fhddm::reset() {
  window_.clear();
  sum_ = 0.0;
  best_ = -1.0;
}

bool Fhddm::consume(double x) {
  window_.push_back(x);
  sum_ += x;
  if (static_cast<int>(window_.size()) > n_) {
    sum_ -= window_.front();
    window_.pop_front();
  }
  if (static_cast<int>(window_.size()) < n_) return false;
  const double acc = sum_ / n_;
  best_ = std::max(best_, acc);
  if (best_ - acc > epsilon_) {
    reset();
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// KSWIN

Kswin::Kswin(int window, double alpha, std::uint64_t seed, int stat_size)
    : window_size_(window), stat_size_(stat_size), alpha_(alpha), seed_(seed), rng_(seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("KSWIN alpha must lie in (0, 1)");
  if (stat_size < 1 || window < 2 * stat_size) throw ArgumentError("KSWIN window must hold two statistic samples");
}

void Kswin::reset() {
  window_.clear();
  rng_.seed(seed_);
}

double Kswin::critical_value() const {
  const double r = stat_size_;
  return std::sqrt(-std::log(alpha_ / 2.0) / 2.0) * std::sqrt(2.0 * r / (r * r));
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("KS statistic needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t ia = 0, ib = 0;
  double d = 0.0;
  while (ia < a.size() && ib < b.size()) {
    double x = std::min(a[ia], b[ib]);
    while (ia < a.size() && a[ia] <= x) ++ia;
    while (ib < b.size() && b[ib] <= x) ++ib;
    d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return d;
}

bool Kswin::consume(double x) {
  window_.push_back(x);
  if (static_cast<int>(window_.size()) > window_size_) window_.pop_front();
  if (static_cast<int>(window_.size()) < window_size_) return false;

  const auto older = window_.size() - static_cast<std::size_t>(stat_size_);
  std::vector<double> recent(window_.end() - stat_size_, window_.end());
  std::vector<double> reference;
  reference.reserve(static_cast<std::size_t>(stat_size_));
  std::uniform_int_distribution<std::size_t> pick(0, older - 1);
  for (int k = 0; k < stat_size_; ++k) reference.push_back(window_[pick(rng_)]);
  if (ks_statistic(recent, reference) > critical_value()) {
    // Keep only the recent part, as in the reference formulation.
    window_.erase(window_.begin(), window_.begin() + static_cast<std::ptrdiff_t>(older));
    return true;
  }
  return false;
}

std::unique_ptr<DriftDetector> make_detector(const DriftDetectorConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case DetectorKind::ADWIN: return std::make_unique<Adwin>(cfg.significance);
    case DetectorKind::FHDDM: return std::make_unique<Fhddm>(cfg.window, cfg.significance);
    case DetectorKind::KSWIN: return std::make_unique<Kswin>(cfg.window, cfg.significance, cfg.seed);
  }
  throw ArgumentError("unknown detector kind");
}

// ---------------------------------------------------------------------------
// Policy

std::vector<double> detector_stream(DetectorKind kind, const World& world, int deployed, int t) {
  if (!world.has_samples()) throw StateError("drift detectors need a sample-level world");
  const auto& d = world.dataset(t);
  std::vector<double> out;
  if (kind == DetectorKind::ADWIN) {
    for (int y : d.eval_labels()) out.push_back(y);
  } else {
    for (int c : eval_correctness(world.model(deployed), d)) out.push_back(c);
  }
  return out;
}

PolicyTrace run_drift(const World& world, const CostSpec& spec, const DriftDetectorConfig& cfg) {
  spec.validate();
  auto detector = make_detector(cfg);
  OnlineSession session(world);
  auto warm = [&](int model) {
    detector->reset();
    for (double x : detector_stream(cfg.kind, world, model, model)) detector->update(x);
  };
  warm(0);
  while (!session.done()) {
    const int t = session.current_step();
    bool flagged = false;
    for (double x : detector_stream(cfg.kind, world, session.deployed_model(), t)) {
      if (detector->update(x)) {
        flagged = true;
        break;
      }
    }
    session.step(flagged);
    if (flagged) warm(t);
  }
  return session.finish(spec);
}

}  // namespace retrain
