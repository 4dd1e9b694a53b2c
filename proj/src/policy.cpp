#include "aimdsync/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace aimdsync {

namespace {
constexpr double kDegenerateAverage = 1e-9;
}

AverageWindow::AverageWindow(int n, int window) : n_(n), window_(window) {
  if (n < 1 || window < 1) throw std::invalid_argument("AverageWindow: n and window must be >= 1");
}

void AverageWindow::push(const Vec& x) {
  if (static_cast<int>(x.size()) != n_)
    throw std::invalid_argument("AverageWindow::push: dimension mismatch");
  states_.push_back(x);
  if (static_cast<int>(states_.size()) > window_) states_.pop_front();

  // Recompute the average from the buffer; exact, no incremental drift.
  Vec avg(static_cast<size_t>(n_), 0.0);
  for (const auto& s : states_)
    for (int i = 0; i < n_; ++i) avg[static_cast<size_t>(i)] += s[static_cast<size_t>(i)];
  const double inv = 1.0 / double(states_.size());
  for (auto& v : avg) v *= inv;

  avg_history_.push_front(std::move(avg));
  if (static_cast<int>(avg_history_.size()) > window_ + 1) avg_history_.pop_back();
}

const Vec& AverageWindow::average() const {
  if (avg_history_.empty()) throw std::logic_error("AverageWindow: no events buffered yet");
  return avg_history_.front();
}

double UtilitySpec::value(double xa, double xb) const {
  auto g = [this](double x) {
    switch (kind) {
      case Kind::quadratic: return weight * x * x;
      case Kind::log_barrier: return -weight * std::log(x);
      case Kind::power: return std::pow(x, exponent) / exponent;
    }
    return 0.0;
  };
  return g(xa) + g(xb);
}

double UtilitySpec::partial(Resource c, double xa, double xb) const {
  const double x = (c == Resource::a) ? xa : xb;
  switch (kind) {
    case Kind::quadratic: return 2.0 * weight * x;
    case Kind::log_barrier: return -weight / x;
    case Kind::power: return std::pow(x, exponent - 1.0);
  }
  return 0.0;
}

Vec clamp_probabilities(Vec p, double floor_eps) {
  for (auto& v : p) v = std::min(1.0, std::max(floor_eps, v));
  return p;
}

Vec window_mean_probabilities(const History& xt_a, const History& xt_b, int N,
                              double floor_eps) {
  if (xt_a.empty() || xt_b.empty())
    throw std::invalid_argument("window_mean_probabilities: empty history");
  const size_t n = xt_a.front().size();
  if (xt_b.front().size() != n)
    throw std::invalid_argument("window_mean_probabilities: dimension mismatch");

  Vec p(n, 0.0);
  const size_t terms = static_cast<size_t>(N) + 1;
  for (size_t l = 0; l < terms && l < xt_a.size(); ++l)
    for (size_t i = 0; i < n; ++i) p[i] += xt_a[l][i];
  for (size_t l = 0; l < terms && l < xt_b.size(); ++l)
    for (size_t i = 0; i < n; ++i) p[i] += xt_b[l][i];
  const double inv = 1.0 / (2.0 * N);
  for (auto& v : p) v *= inv;
  return clamp_probabilities(std::move(p), floor_eps);
}

Vec utility_gradient_probabilities(Resource c, const Vec& xtilde_a, const Vec& xtilde_b,
                                   const std::vector<UtilitySpec>& utilities, double xi,
                                   double floor_eps) {
  const size_t n = xtilde_a.size();
  if (xtilde_b.size() != n || utilities.size() != n)
    throw std::invalid_argument("utility_gradient_probabilities: size mismatch");
  const Vec& own = (c == Resource::a) ? xtilde_a : xtilde_b;
  Vec p(n);
  for (size_t i = 0; i < n; ++i) {
    if (own[i] <= kDegenerateAverage)
      throw std::domain_error("utility_gradient_probabilities: degenerate average for agent " +
                              std::to_string(i));
    p[i] = xi * utilities[i].partial(c, xtilde_a[i], xtilde_b[i]) / own[i];
  }
  return clamp_probabilities(std::move(p), floor_eps);
}

double default_xi(const std::vector<UtilitySpec>& utilities, int n) {
  if (n < 1 || utilities.size() != static_cast<size_t>(n))
    throw std::invalid_argument("default_xi: size mismatch");
  const double u = 1.0 / n;
  double worst = 0.0;
  for (const auto& spec : utilities)
    for (Resource c : {Resource::a, Resource::b})
      worst = std::max(worst, spec.partial(c, u, u) / u);
  if (!(worst > 0.0))
    throw std::invalid_argument(
        "default_xi: utility has nonpositive marginal at the uniform allocation; "
        "set the scaling constant explicitly");
  return 0.5 / worst;
}

double pattern_probability(const Vec& p, const DropPattern& pattern) {
  if (pattern.size() != static_cast<int>(p.size()))
    throw std::invalid_argument("pattern_probability: size mismatch");
  double prob = 1.0;
  for (size_t i = 0; i < p.size(); ++i) prob *= pattern[static_cast<int>(i)] ? p[i] : 1.0 - p[i];
  return prob;
}

DropPattern sample_pattern(const Vec& p, Rng& rng) {
  DropPattern pat = DropPattern::no_drop(static_cast<int>(p.size()));
  for (size_t i = 0; i < p.size(); ++i)
    if (uniform01(rng) < p[i]) pat.drops[i] = 1;
  return pat;
}

ConstantPolicy::ConstantPolicy(Vec probs, double floor_eps)
    : probs_(clamp_probabilities(std::move(probs), floor_eps)), eps_(floor_eps) {
  if (probs_.empty()) throw std::invalid_argument("ConstantPolicy: empty probabilities");
}

Vec UtilityGradientPolicy::evaluate(Resource c, const History& xt_a,
                                    const History& xt_b) const {
  if (xt_a.empty() || xt_b.empty())
    throw std::invalid_argument("UtilityGradientPolicy: empty history");
  return utility_gradient_probabilities(c, xt_a.front(), xt_b.front(), utilities_, xi_, eps_);
}

}  // namespace aimdsync
