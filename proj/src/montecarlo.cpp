#include "aimdsync/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace aimdsync {

namespace {

struct ReplicaOutput {
  // States x(0..L*N) per resource, flattened [event][agent].
  std::array<std::vector<double>, 2> states;
  ReplicaSummary summary;
  InvariantTally tally;
};

ReplicaOutput run_replica(const ExperimentConfig& cfg, std::uint64_t seed) {
  const int n = cfg.agents();
  Rng init_rng(seed);
  const auto demands = sample_demands(cfg.init, n, init_rng);
  const std::uint64_t engine_seed = init_rng();

  CoupledEngine engine(cfg.resource_a, cfg.resource_b, cfg.make_policy(), cfg.window,
                       demands[0], demands[1], engine_seed, cfg.global_md);

  const long events = cfg.meta_events * cfg.window + 1;
  ReplicaOutput out;
  for (Resource c : {Resource::a, Resource::b}) {
    auto& s = out.states[static_cast<int>(c)];
    s.reserve(static_cast<size_t>(events) * n);
    const Vec& x0 = engine.initial_shares(c);
    s.insert(s.end(), x0.begin(), x0.end());
  }
  for (long l = 0; l < cfg.meta_events; ++l) {
    const MetaEventRecord rec = engine.advance_window();
    for (Resource c : {Resource::a, Resource::b}) {
      auto& s = out.states[static_cast<int>(c)];
      for (const auto& ev : rec.events[static_cast<int>(c)])
        s.insert(s.end(), ev.post_shares.begin(), ev.post_shares.end());
    }
  }
  out.summary.seed = seed;
  out.summary.long_term_mean = {engine.long_term(Resource::a).mean(),
                                engine.long_term(Resource::b).mean()};
  out.summary.final_time = engine.clock(Resource::a);
  out.tally = engine.tally();
  return out;
}

}  // namespace

std::array<Vec, 2> sample_demands(const InitSpec& init, int n, Rng& rng) {
  std::uniform_real_distribution<double> dist(init.low, init.high);
  std::array<Vec, 2> out;
  for (auto& d : out) {
    d.resize(static_cast<size_t>(n));
    for (auto& v : d) v = dist(rng);
  }
  return out;
}

McResult run_montecarlo(const ExperimentConfig& cfg) {
  cfg.validate();
  const int n = cfg.agents();
  const long events = cfg.meta_events * cfg.window + 1;
  const int replicas = cfg.replicas;

  std::vector<ReplicaOutput> slots(static_cast<size_t>(replicas));
  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, replicas);

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load()) {
      const int i = next.fetch_add(1);
      if (i >= replicas) return;
      try {
        slots[static_cast<size_t>(i)] =
            run_replica(cfg, replica_seed(cfg.seed, static_cast<std::uint64_t>(i)));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        failed.store(true);
        if (error.empty()) error = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw std::runtime_error("montecarlo replica failed: " + error);

  // Single-pass moments merged in replica order: identical output for any
  // thread count.
  McResult out;
  out.series.n = n;
  out.series.events = events;
  out.series.replicas = replicas;
  const size_t cells = static_cast<size_t>(2) * static_cast<size_t>(events) * n;
  out.series.mean.assign(cells, 0.0);
  std::vector<double> m2(cells, 0.0);
  for (int r = 0; r < replicas; ++r) {
    const double count = r + 1;
    for (Resource c : {Resource::a, Resource::b}) {
      const auto& states = slots[static_cast<size_t>(r)].states[static_cast<int>(c)];
      const size_t base = static_cast<size_t>(c) * static_cast<size_t>(events) * n;
      for (size_t j = 0; j < states.size(); ++j) {
        const size_t cell = base + j;
        const double delta = states[j] - out.series.mean[cell];
        out.series.mean[cell] += delta / count;
        m2[cell] += delta * (states[j] - out.series.mean[cell]);
      }
    }
    out.replicas.push_back(slots[static_cast<size_t>(r)].summary);
    out.tally.merge(slots[static_cast<size_t>(r)].tally);
  }
  out.series.variance.resize(cells);
  for (size_t i = 0; i < cells; ++i) out.series.variance[i] = m2[i] / replicas;
  return out;
}

Vec last_quartile_mean(const MomentSeries& s, Resource c) {
  const long start = s.events - s.events / 4;
  Vec acc(static_cast<size_t>(s.n), 0.0);
  long count = 0;
  for (long e = start; e < s.events; ++e) {
    for (int i = 0; i < s.n; ++i) acc[static_cast<size_t>(i)] += s.mean[s.at(c, e, i)];
    ++count;
  }
  if (count == 0) throw std::invalid_argument("last_quartile_mean: empty series");
  for (auto& v : acc) v /= double(count);
  return acc;
}

double last_quartile_variance_drift(const MomentSeries& s, Resource c) {
  const long start = s.events - s.events / 4;
  double drift = 0.0;
  for (int i = 0; i < s.n; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (long e = start; e < s.events; ++e) {
      const double v = s.variance[s.at(c, e, i)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    drift = std::max(drift, hi - lo);
  }
  return drift;
}

}  // namespace aimdsync
