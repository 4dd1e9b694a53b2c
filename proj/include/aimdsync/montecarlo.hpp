#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "aimdsync/config.hpp"
#include "aimdsync/engine.hpp"

namespace aimdsync {

/// Ensemble mean and population variance of the allocations, aligned by
/// per-resource capacity-event index.
struct MomentSeries {
  int n = 0;
  long events = 0;  // indices 0..events-1 per resource
  long replicas = 0;
  std::vector<double> mean;      // [resource][event][agent], flattened
  std::vector<double> variance;  // same layout

  size_t at(Resource c, long event, int agent) const {
    return (static_cast<size_t>(c) * static_cast<size_t>(events) + static_cast<size_t>(event)) *
               static_cast<size_t>(n) +
           static_cast<size_t>(agent);
  }
};

struct ReplicaSummary {
  std::uint64_t seed = 0;
  std::array<Vec, 2> long_term_mean;  // per resource
  double final_time = 0.0;
};

struct McResult {
  MomentSeries series;
  std::vector<ReplicaSummary> replicas;
  InvariantTally tally;
};

/// R independent replicas with seeds master ^ i; moments merged in replica
/// order so the output is identical for any thread count.
McResult run_montecarlo(const ExperimentConfig& cfg);

/// Initial raw demands for one replica, uniform per agent on [low, high].
std::array<Vec, 2> sample_demands(const InitSpec& init, int n, Rng& rng);

/// Mean over the last quarter of the ensemble-mean series, per agent.
Vec last_quartile_mean(const MomentSeries& s, Resource c);

/// Largest (max - min) swing of the ensemble variance over the last quarter
/// of the series, across agents.
double last_quartile_variance_drift(const MomentSeries& s, Resource c);

}  // namespace aimdsync
