#pragma once

#include "retrain/core.hpp"

namespace retrain {

// Exact minimizer of the total cost over all 2^T schedules, by dynamic programming
// over states (last model, time). Ties keep the current model.
DecisionVector oracle_schedule(const PerformanceMatrix& pe, const CostSpec& spec);

// Optimal cost value (same units as total_cost).
double oracle_cost(const PerformanceMatrix& pe, const CostSpec& spec);

// Smallest alpha (bisection to 1e-4 on [0, T * max pe]) at which the oracle
// schedule has no retrain.
double alpha_max(const PerformanceMatrix& pe, const CostSpec& spec_template);

}  // namespace retrain
