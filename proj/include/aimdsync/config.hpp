#pragma once

#include <memory>
#include <string>

#include "aimdsync/core.hpp"
#include "aimdsync/policy.hpp"
#include "aimdsync/toml.hpp"

namespace aimdsync {

struct PolicySpec {
  enum class Kind { constant, window_mean, utility_gradient };

  Kind kind = Kind::window_mean;
  double floor_eps = 0.01;
  Vec constant_probs;                 // kind = constant
  double xi = 0.0;                    // kind = utility_gradient; 0 = auto
  std::string utility = "quadratic";  // quadratic | log_barrier | power
  Vec weights;                        // per agent, or one value broadcast
  double exponent = 2.0;              // power family

  std::vector<UtilitySpec> utility_specs(int n) const;
};

struct InitSpec {
  double low = 0.0;
  double high = 0.25;
};

/// Everything one experiment needs, loadable from a single TOML file.
struct ExperimentConfig {
  ResourceParams resource_a;
  ResourceParams resource_b;
  PolicySpec policy;
  int window = 5;           // N = M, capacity events per window
  long meta_events = 1000;  // L
  int replicas = 1;         // R
  std::uint64_t seed = 0;
  InitSpec init;
  std::string out_dir;  // empty = AIMDSYNC_OUT env var, then "out"
  bool global_md = false;
  int threads = 0;  // 0 = hardware concurrency

  int agents() const { return resource_a.size(); }

  /// Throws std::invalid_argument with a field path on the first problem.
  void validate() const;

  std::shared_ptr<DropPolicy> make_policy() const;
  std::string resolved_out_dir() const;

  static ExperimentConfig from_toml(const toml::Table& table);
  static ExperimentConfig load(const std::string& path);
  toml::Table to_toml() const;
};

}  // namespace aimdsync
