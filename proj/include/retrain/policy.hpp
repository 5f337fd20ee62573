#pragma once

// Online replay of a realized world: the session walks t = 1..T, asks a policy
// for a bit, trains on demand and reveals dataset t only after the decision.

#include <iosfwd>
#include <string>
#include <vector>

#include "retrain/core.hpp"
#include "retrain/forecaster.hpp"
#include "retrain/synthetic.hpp"

namespace retrain {

struct PolicyTrace {
  DecisionVector decisions;
  std::vector<int> models_used;        // index t - 1
  std::vector<double> realized_losses; // index t - 1
  double realized_total_cost = 0.0;

  int retrains() const { return decisions.retrains(); }
};

// CSV `t,decision,model_used,realized_loss`.
void write_trace_csv(std::ostream& out, const PolicyTrace& trace);

// Replays a fixed schedule against the realized matrix.
PolicyTrace trace_from_schedule(const PerformanceMatrix& pe, const DecisionVector& theta,
                                const CostSpec& spec);

class OnlineSession {
 public:
  // Starts with every offline model -w..0 trained and every offline dataset seen.
  explicit OnlineSession(const World& world);

  const World& world() const { return *world_; }
  int horizon_T() const { return world_->horizon_T(); }
  // Next step awaiting a decision, in 1..T; T + 1 once finished.
  int current_step() const { return t_; }
  bool done() const { return t_ > horizon_T(); }
  int deployed_model() const { return deployed_; }
  const InformationSet& info() const { return info_; }

  // Applies the decision for the current step, then reveals dataset t.
  void step(bool retrain);

  PolicyTrace finish(const CostSpec& spec) const;

 private:
  void reveal(int j);

  const World* world_;
  InformationSet info_;
  int t_ = 1;
  int deployed_ = 0;
  DecisionVector decisions_;
  std::vector<int> used_;
  std::vector<double> losses_;
};

}  // namespace retrain
