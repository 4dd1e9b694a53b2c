#pragma once

#include <string>
#include <vector>

#include "aimdsync/engine.hpp"
#include "aimdsync/montecarlo.hpp"

namespace aimdsync {

/// %.17g — enough digits to round-trip a double exactly.
std::string format_g17(double v);

/// One row per capacity-event response:
/// resource,event,window,psi,dt,pattern,share_0..share_{n-1}
void write_trajectory_csv(const std::string& path, const RunResult& run, int n);

/// One row per meta event: l,tau,psi followed by the 2nN entries of zeta,
/// blocks za_b{j}_a{i} then zb_b{j}_a{i}.
void write_zeta_csv(const std::string& path, const std::vector<MetaEventRecord>& metas);

/// resource,event,agent,mean,variance
void write_moments_csv(const std::string& path, const MomentSeries& series);

/// replica,seed,resource,agent,long_term_mean
void write_replicas_csv(const std::string& path, const std::vector<ReplicaSummary>& reps);

/// Fig-1 style: total utilization of both resources over model time,
/// including the frozen plateaus before each meta event.
void write_utilization_svg(const std::string& path, const RunResult& run,
                           const ResourceParams& params_a, const ResourceParams& params_b,
                           long max_windows = 25);

/// Fig-2 style: per-agent ensemble mean with a +-sqrt(variance) band,
/// indexed by capacity events of one resource.
void write_moments_svg(const std::string& path, const MomentSeries& series, Resource c);

void ensure_directory(const std::string& path);

}  // namespace aimdsync
