#include "aimdsync/engine.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace aimdsync {

namespace {

constexpr double kCapacityTol = 1e-9;

ResourceParams checked(ResourceParams p) {
  p.validate();
  return p;
}

std::vector<Vec> copy_states(const std::deque<Vec>& d) {
  return {d.begin(), d.end()};
}

}  // namespace

PatternWindow pattern_window_from(const MetaEventRecord& rec) {
  PatternWindow pw;
  pw.nu.reserve(rec.events[0].size());
  pw.mu.reserve(rec.events[1].size());
  for (const auto& ev : rec.events[0]) pw.nu.push_back(ev.pattern);
  for (const auto& ev : rec.events[1]) pw.mu.push_back(ev.pattern);
  pw.order = rec.order;
  return pw;
}

void InvariantTally::merge(const InvariantTally& o) {
  capacity_checks += o.capacity_checks;
  capacity_violations += o.capacity_violations;
  sync_checks += o.sync_checks;
  sync_violations += o.sync_violations;
  window_count_checks += o.window_count_checks;
  window_count_violations += o.window_count_violations;
  frozen_checks += o.frozen_checks;
  frozen_violations += o.frozen_violations;
}

std::pair<Vec, double> normalize_demand(const ResourceParams& params, const Vec& demand) {
  const int n = params.size();
  if (static_cast<int>(demand.size()) != n)
    throw std::invalid_argument("demand length does not match agent count");
  double sum = 0.0;
  for (double d : demand) {
    if (d < 0.0 || !std::isfinite(d))
      throw std::invalid_argument("demands must be nonnegative and finite");
    sum += d;
  }
  const double cap = params.capacity;
  if (sum >= cap) {
    // Already at or above capacity: enter the model at the normalized point.
    Vec x(demand);
    for (auto& v : x) v /= sum;
    return {std::move(x), 0.0};
  }
  // Grow linearly until the total reaches capacity.
  const double t0 = (cap - sum) / params.alpha_sum();
  Vec x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    x[static_cast<size_t>(i)] =
        (demand[static_cast<size_t>(i)] + params.agents[static_cast<size_t>(i)].alpha * t0) / cap;
  return {std::move(x), t0};
}

CoupledEngine::CoupledEngine(ResourceParams params_a, ResourceParams params_b,
                             std::shared_ptr<const DropPolicy> policy, int window,
                             const Vec& demand_a, const Vec& demand_b, std::uint64_t seed,
                             bool global_md)
    : res_{{Rs(checked(std::move(params_a)), window), Rs(checked(std::move(params_b)), window)}},
      policy_(std::move(policy)),
      window_(window),
      global_md_(global_md),
      rng_(seed) {
  if (window_ < 1) throw std::invalid_argument("window must be >= 1");
  if (res_[0].params.size() != res_[1].params.size())
    throw std::invalid_argument("both resources must have the same number of agents");
  if (!policy_) throw std::invalid_argument("policy must not be null");

  for (Resource c : {Resource::a, Resource::b}) {
    Rs& r = rs(c);
    const Vec& demand = (c == Resource::a) ? demand_a : demand_b;
    auto [x0, t0] = normalize_demand(r.params, demand);
    lead_in_[static_cast<int>(c)] = t0;
    r.x0 = x0;
    r.x_next = std::move(x0);
    r.t_next = 0.0;
    // The state at capacity event 0 enters both windows before any response.
    r.window.push(r.x_next);
    r.long_term.push(r.x_next);
    r.pushed = true;
  }
}

const ResourceParams& CoupledEngine::params(Resource c) const { return rs(c).params; }
const Vec& CoupledEngine::initial_shares(Resource c) const { return rs(c).x0; }
const Vec& CoupledEngine::shares(Resource c) const { return rs(c).x_next; }
double CoupledEngine::clock(Resource c) const { return rs(c).t_next; }
long CoupledEngine::events(Resource c) const { return rs(c).fired; }
const AverageWindow& CoupledEngine::average_window(Resource c) const { return rs(c).window; }
const RunningMean& CoupledEngine::long_term(Resource c) const { return rs(c).long_term; }

LiftedState CoupledEngine::zeta() const {
  return build_zeta(copy_states(res_[0].window.states()), copy_states(res_[1].window.states()),
                    window_);
}

void CoupledEngine::fire(Resource c) {
  Rs& r = rs(c);
  Rs& o = rs(other(c));

  // A frozen peer's terminal state becomes visible once its occurrence time
  // is strictly in the past.
  if (o.responses == window_ && !o.pushed && o.t_next < r.t_next) {
    o.window.push(o.x_next);
    o.long_term.push(o.x_next);
    o.pushed = true;
    o.occurred = window_;
  }

  if (!r.pushed) {
    r.window.push(r.x_next);
    r.long_term.push(r.x_next);
    r.pushed = true;
    r.occurred = r.responses;
  }

  // Capacity-event invariant: the pre-response total sits at capacity.
  ++tally_.capacity_checks;
  double total = 0.0;
  for (double v : r.x_next) total += v;
  if (std::fabs(total - 1.0) > kCapacityTol) ++tally_.capacity_violations;

  const Vec probs =
      policy_->evaluate(c, res_[0].window.average_history(), res_[1].window.average_history());
  const DropPattern pattern = sample_pattern(probs, rng_);
  const double dt = inter_event_time(r.params, pattern, r.x_next);
  Vec post = apply_aimd(r.params, pattern, r.x_next);

  EventRecord rec;
  rec.resource = c;
  rec.index = r.fired;
  rec.window = meta_index_;
  rec.psi = r.t_next;
  rec.dt = dt;
  rec.pattern = pattern;
  rec.post_shares = post;
  rec.cross_events = o.occurred;
  r.window_events.push_back(std::move(rec));
  merged_order_.push_back({c, r.responses, o.occurred});

  ++r.fired;
  ++r.responses;
  r.sum_t += dt;
  r.x_next = std::move(post);
  r.t_next += dt;
  r.pushed = false;

  if (r.responses == window_) r.frozen_snapshot = r.x_next;
}

MetaEventRecord CoupledEngine::meta_event() {
  // Both windows are complete; flush any terminal state not yet visible.
  for (Resource c : {Resource::a, Resource::b}) {
    Rs& r = rs(c);
    if (!r.pushed) {
      r.window.push(r.x_next);
      r.long_term.push(r.x_next);
      r.pushed = true;
    }
    // While waiting, a frozen resource's state must not change at all.
    ++tally_.frozen_checks;
    if (r.frozen_snapshot.size() != r.x_next.size() ||
        std::memcmp(r.frozen_snapshot.data(), r.x_next.data(),
                    r.x_next.size() * sizeof(double)) != 0)
      ++tally_.frozen_violations;
  }

  const double tau = std::max(res_[0].sum_t, res_[1].sum_t);
  double psi_new = window_start_ + tau;

  if (global_md_) {
    // Optional extra decrease at the synchronization point. The states it
    // produces are not capacity events: they are neither counted nor pushed
    // into the averaging windows, and lifted-chain consistency does not
    // cover runs with this switch on.
    double extra = 0.0;
    for (Resource c : {Resource::a, Resource::b}) {
      Rs& r = rs(c);
      const Vec probs = policy_->evaluate(c, res_[0].window.average_history(),
                                          res_[1].window.average_history());
      const DropPattern pattern = sample_pattern(probs, rng_);
      extra = std::max(extra, inter_event_time(r.params, pattern, r.x_next));
      r.x_next = apply_aimd(r.params, pattern, r.x_next);
    }
    psi_new += extra;
  }

  MetaEventRecord rec;
  rec.index = meta_index_;
  rec.tau = tau;
  rec.duration = {res_[0].sum_t, res_[1].sum_t};

  res_[0].t_next = psi_new;
  res_[1].t_next = psi_new;
  rec.psi_a = res_[0].t_next;
  rec.psi_b = res_[1].t_next;
  ++tally_.sync_checks;
  if (std::memcmp(&rec.psi_a, &rec.psi_b, sizeof(double)) != 0) ++tally_.sync_violations;

  for (Resource c : {Resource::a, Resource::b}) {
    Rs& r = rs(c);
    ++tally_.window_count_checks;
    if (static_cast<int>(r.window_events.size()) != window_) ++tally_.window_count_violations;
    rec.events[static_cast<int>(c)] = std::move(r.window_events);
    r.window_events.clear();
    r.responses = 0;
    r.occurred = 0;
    r.sum_t = 0.0;
    r.frozen_snapshot.clear();
  }
  rec.order = std::move(merged_order_);
  merged_order_.clear();
  rec.zeta_next =
      build_zeta(copy_states(res_[0].window.states()), copy_states(res_[1].window.states()),
                 window_);

  window_start_ = psi_new;
  ++meta_index_;
  return rec;
}

std::optional<MetaEventRecord> CoupledEngine::step() {
  const bool a_open = res_[0].responses < window_;
  const bool b_open = res_[1].responses < window_;
  Resource c;
  if (a_open && b_open)
    c = (res_[1].t_next < res_[0].t_next) ? Resource::b : Resource::a;
  else if (a_open)
    c = Resource::a;
  else if (b_open)
    c = Resource::b;
  else
    throw std::logic_error("CoupledEngine::step: both windows already complete");

  fire(c);
  if (res_[0].responses == window_ && res_[1].responses == window_) return meta_event();
  return std::nullopt;
}

MetaEventRecord CoupledEngine::advance_window() {
  while (true) {
    if (auto rec = step()) return std::move(*rec);
  }
}

RunResult run_coupled(const ResourceParams& params_a, const ResourceParams& params_b,
                      std::shared_ptr<const DropPolicy> policy, int window,
                      const Vec& demand_a, const Vec& demand_b, long meta_events,
                      std::uint64_t seed, bool global_md) {
  if (meta_events < 0) throw std::invalid_argument("meta_events must be >= 0");
  CoupledEngine engine(params_a, params_b, std::move(policy), window, demand_a, demand_b, seed,
                       global_md);
  RunResult out;
  out.metas.reserve(static_cast<size_t>(meta_events));
  for (long l = 0; l < meta_events; ++l) out.metas.push_back(engine.advance_window());
  out.tally = engine.tally();
  out.lead_in = engine.lead_in();
  out.initial_shares = {engine.initial_shares(Resource::a), engine.initial_shares(Resource::b)};
  return out;
}

SingleResourceEngine::SingleResourceEngine(ResourceParams params,
                                           std::shared_ptr<const DropPolicy> policy, int window,
                                           const Vec& demand, std::uint64_t seed)
    : params_(checked(std::move(params))),
      policy_(std::move(policy)),
      window_(params_.size(), window),
      long_term_(params_.size()),
      last_pattern_(DropPattern::no_drop(params_.size())),
      rng_(seed) {
  if (!policy_) throw std::invalid_argument("policy must not be null");
  auto [x0, t0] = normalize_demand(params_, demand);
  x0_ = x0;
  x_ = std::move(x0);
  lead_in_ = t0;
  window_.push(x_);
  long_term_.push(x_);
}

const Vec& SingleResourceEngine::step() {
  const Vec probs =
      policy_->evaluate(Resource::a, window_.average_history(), window_.average_history());
  last_pattern_ = sample_pattern(probs, rng_);
  const double dt = inter_event_time(params_, last_pattern_, x_);
  x_ = apply_aimd(params_, last_pattern_, x_);
  t_ += dt;
  ++fired_;
  window_.push(x_);
  long_term_.push(x_);
  return x_;
}

}  // namespace aimdsync
