#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "aimdsync/core.hpp"
#include "aimdsync/lifted.hpp"
#include "aimdsync/policy.hpp"
#include "aimdsync/rng.hpp"

namespace aimdsync {

/// One capacity-event response.
struct EventRecord {
  Resource resource;
  long index = 0;     // per-resource capacity-event index of this response
  long window = 0;    // synchronization window l
  double psi = 0.0;   // synchronized model time of the response
  double dt = 0.0;    // time to the next capacity event
  DropPattern pattern;
  Vec post_shares;    // state produced by this response, on the simplex
  int cross_events = 0;  // other resource's events visible at evaluation
};

/// Everything one synchronization window produced.
struct MetaEventRecord {
  long index = 0;      // l, 0-based
  double tau = 0.0;    // max of the two window durations
  double psi_a = 0.0;  // synchronized clocks right after the meta event;
  double psi_b = 0.0;  // equal bit-for-bit by construction
  std::array<std::vector<EventRecord>, 2> events;  // exactly N per resource
  std::vector<PatternWindow::Entry> order;         // merged response order
  std::array<double, 2> duration{};                // sum of T per resource
  LiftedState zeta_next;                           // zeta(l+1)
};

PatternWindow pattern_window_from(const MetaEventRecord& rec);

/// Counters for the runtime invariants the engine audits on every event.
struct InvariantTally {
  long capacity_checks = 0, capacity_violations = 0;
  long sync_checks = 0, sync_violations = 0;
  long window_count_checks = 0, window_count_violations = 0;
  long frozen_checks = 0, frozen_violations = 0;

  bool clean() const {
    return capacity_violations == 0 && sync_violations == 0 &&
           window_count_violations == 0 && frozen_violations == 0;
  }
  void merge(const InvariantTally& o);
};

/// Two AIMD processes evolving in event time and synchronizing every
/// window = N = M capacity events per resource. A resource that finishes
/// its window first freezes at capacity until the other catches up.
class CoupledEngine {
 public:
  CoupledEngine(ResourceParams params_a, ResourceParams params_b,
                std::shared_ptr<const DropPolicy> policy, int window, const Vec& demand_a,
                const Vec& demand_b, std::uint64_t seed, bool global_md = false);

  /// Fires the next capacity-event response (resource with the earlier
  /// pending event; ties fire a first). Returns the meta record when this
  /// response completes a window.
  std::optional<MetaEventRecord> step();

  /// Steps until a meta event fires.
  MetaEventRecord advance_window();

  const ResourceParams& params(Resource c) const;
  const Vec& initial_shares(Resource c) const;
  const Vec& shares(Resource c) const;   // state at the pending occurrence
  double clock(Resource c) const;        // time of the pending occurrence
  long events(Resource c) const;         // responses fired so far
  long windows() const { return meta_index_; }
  /// Duration of the pre-model additive-increase phase, per resource.
  std::array<double, 2> lead_in() const { return lead_in_; }
  const AverageWindow& average_window(Resource c) const;
  const RunningMean& long_term(Resource c) const;
  const InvariantTally& tally() const { return tally_; }

  /// Lifted state from the currently buffered window histories.
  LiftedState zeta() const;

 private:
  struct Rs {
    ResourceParams params;
    AverageWindow window;
    RunningMean long_term;
    Vec x0;               // state at the first capacity event
    Vec x_next;           // state at the pending occurrence
    double t_next = 0.0;  // time of the pending occurrence
    bool pushed = false;  // pending occurrence already entered the window
    int responses = 0;    // responses in the current window, 0..M
    int occurred = 0;     // within-window occurrences visible to the peer
    long fired = 0;       // total responses
    double sum_t = 0.0;   // accumulated window duration
    std::vector<EventRecord> window_events;
    Vec frozen_snapshot;

    Rs(ResourceParams p, int win)
        : params(std::move(p)), window(params.size(), win), long_term(params.size()) {}
  };

  Rs& rs(Resource c) { return res_[static_cast<int>(c)]; }
  const Rs& rs(Resource c) const { return res_[static_cast<int>(c)]; }

  void fire(Resource c);
  MetaEventRecord meta_event();

  std::array<Rs, 2> res_;
  std::shared_ptr<const DropPolicy> policy_;
  int window_;
  bool global_md_;
  Rng rng_;
  long meta_index_ = 0;
  double window_start_ = 0.0;
  std::array<double, 2> lead_in_{};
  std::vector<PatternWindow::Entry> merged_order_;
  InvariantTally tally_;
};

struct RunResult {
  std::vector<MetaEventRecord> metas;
  InvariantTally tally;
  std::array<double, 2> lead_in{};
  std::array<Vec, 2> initial_shares;
};

/// Runs Algorithm-style forced synchronization for `meta_events` windows.
RunResult run_coupled(const ResourceParams& params_a, const ResourceParams& params_b,
                      std::shared_ptr<const DropPolicy> policy, int window,
                      const Vec& demand_a, const Vec& demand_b, long meta_events,
                      std::uint64_t seed, bool global_md = false);

/// Single-resource place-dependent AIMD process. The policy receives this
/// resource's average history in both slots.
class SingleResourceEngine {
 public:
  SingleResourceEngine(ResourceParams params, std::shared_ptr<const DropPolicy> policy,
                       int window, const Vec& demand, std::uint64_t seed);

  /// One capacity event: sample the pattern at the current averages, apply
  /// the AIMD matrix, advance the clock. Returns the new state.
  const Vec& step();

  const Vec& shares() const { return x_; }
  const Vec& initial_shares() const { return x0_; }
  long events() const { return fired_; }
  double clock() const { return t_; }
  double lead_in() const { return lead_in_; }
  const AverageWindow& average_window() const { return window_; }
  const RunningMean& long_term() const { return long_term_; }
  const DropPattern& last_pattern() const { return last_pattern_; }

 private:
  ResourceParams params_;
  std::shared_ptr<const DropPolicy> policy_;
  AverageWindow window_;
  RunningMean long_term_;
  Vec x0_, x_;
  double t_ = 0.0;
  double lead_in_ = 0.0;
  long fired_ = 0;
  DropPattern last_pattern_;
  Rng rng_;
};

/// Time average (1/(k+1)) sum_j phi(x(j)) over a trajectory, computed with
/// an incremental mean.
template <class Range, class F>
double ergodic_average(const Range& xs, F&& phi) {
  double mean = 0.0;
  long k = 0;
  for (const auto& x : xs) mean += (phi(x) - mean) / double(++k);
  if (k == 0) throw std::invalid_argument("ergodic_average: empty trajectory");
  return mean;
}

/// Normalizes raw demands into the state at the first capacity event and
/// the duration of the pre-model growth phase. Demands above capacity are
/// scaled onto the simplex directly.
std::pair<Vec, double> normalize_demand(const ResourceParams& params, const Vec& demand);

}  // namespace aimdsync
