#include "retrain/policy.hpp"

#include <ostream>

#include "retrain/csv.hpp"
#include "retrain/errors.hpp"

namespace retrain {

void write_trace_csv(std::ostream& out, const PolicyTrace& trace) {
  out << "t,decision,model_used,realized_loss\n";
  for (int t = 1; t <= trace.decisions.horizon(); ++t) {
    auto k = static_cast<std::size_t>(t - 1);
    out << t << ',' << (trace.decisions.bit(t) ? 1 : 0) << ',' << trace.models_used[k] << ','
        << csv::format_double(trace.realized_losses[k]) << '\n';
  }
}

PolicyTrace trace_from_schedule(const PerformanceMatrix& pe, const DecisionVector& theta,
                                const CostSpec& spec) {
  PolicyTrace trace;
  trace.decisions = theta;
  for (int t = 1; t <= theta.horizon(); ++t) {
    int r = last_train_index(theta, t);
    trace.models_used.push_back(r);
    trace.realized_losses.push_back(pe.at(r, t));
  }
  trace.realized_total_cost = total_cost(pe, theta, spec);
  return trace;
}

OnlineSession::OnlineSession(const World& world)
    : world_(&world), decisions_(world.horizon_T()) {
  const auto& pe = world.pe();
  for (int i = -world.offline_w(); i <= 0; ++i) {
    info_.add_model(i, [&](int j) { return pe.at(i, j); });
    reveal(i);
  }
}

void OnlineSession::reveal(int j) {
  const auto& pe = world_->pe();
  info_.add_dataset(j, world_->feature_means(j), [&](int i) { return pe.at(i, j); });
}

void OnlineSession::step(bool retrain) {
  if (done()) throw StateError("session already reached the end of the horizon");
  const auto& pe = world_->pe();
  int t = t_;
  if (retrain) {
    decisions_.set(t, true);
    deployed_ = t;
    // f_t is trained on D_t; its losses join the information set with D_t below.
    info_.add_model(t, [&](int j) { return pe.at(t, j); });
  }
  used_.push_back(deployed_);
  losses_.push_back(pe.at(deployed_, t));
  reveal(t);
  ++t_;
}

PolicyTrace OnlineSession::finish(const CostSpec& spec) const {
  if (!done()) throw StateError("session finished before the end of the horizon");
  PolicyTrace trace;
  trace.decisions = decisions_;
  trace.models_used = used_;
  trace.realized_losses = losses_;
  trace.realized_total_cost = total_cost(world_->pe(), decisions_, spec);
  return trace;
}

}  // namespace retrain
