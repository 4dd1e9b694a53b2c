#pragma once

#include <deque>
#include <memory>
#include <vector>

#include "aimdsync/core.hpp"
#include "aimdsync/rng.hpp"

namespace aimdsync {

/// Finite averages indexed by this resource's capacity events,
/// most recent first.
using History = std::deque<Vec>;

/// Sliding window of the last N states of one resource, with the finite
/// average recomputed at every event. During the initial fill the divisor
/// is the number of buffered states.
class AverageWindow {
 public:
  AverageWindow(int n, int window);

  void push(const Vec& x);

  int dimension() const { return n_; }
  int window_length() const { return window_; }
  int fill() const { return static_cast<int>(states_.size()); }

  /// Finite average at the latest event.
  const Vec& average() const;

  /// Last <= window+1 finite averages, most recent first.
  const History& average_history() const { return avg_history_; }

  /// Buffered raw states, oldest first.
  const std::deque<Vec>& states() const { return states_; }

 private:
  int n_, window_;
  std::deque<Vec> states_;
  History avg_history_;
};

/// Built-in two-resource utility family, applied separably per resource:
/// f(x_a, x_b) = g(x_a) + g(x_b).
struct UtilitySpec {
  enum class Kind { quadratic, log_barrier, power };

  Kind kind = Kind::quadratic;
  double weight = 1.0;    // quadratic a*x^2, log barrier -w*log(x)
  double exponent = 2.0;  // power x^gamma / gamma, gamma > 1

  double value(double xa, double xb) const;
  /// Partial derivative with respect to the share of resource c.
  double partial(Resource c, double xa, double xb) const;

  static UtilitySpec quadratic(double a) { return {Kind::quadratic, a, 2.0}; }
  static UtilitySpec log_barrier(double w) { return {Kind::log_barrier, w, 0.0}; }
  static UtilitySpec power(double gamma) { return {Kind::power, 1.0, gamma}; }
};

/// Clamp probabilities into [floor_eps, 1].
Vec clamp_probabilities(Vec p, double floor_eps);

/// Per-agent MD probabilities from the buffered finite averages of both
/// resources: p_i = (1/2N) (sum_{l=0..N} xt_a_i(l) + sum_{l=0..N} xt_b_i(l)),
/// summing over the averages available when the history is still short.
Vec window_mean_probabilities(const History& xt_a, const History& xt_b, int N,
                              double floor_eps);

/// Per-agent MD probabilities p_i = xi * (1/xt_c_i) * df_i/dx_c evaluated at
/// (xt_a_i, xt_b_i), clamped into [floor_eps, 1]. Throws std::domain_error
/// when any xt_c_i is below the degeneracy floor 1e-9.
Vec utility_gradient_probabilities(Resource c, const Vec& xtilde_a, const Vec& xtilde_b,
                                   const std::vector<UtilitySpec>& utilities, double xi,
                                   double floor_eps);

/// Scaling constant that puts the largest initial probability near 0.5 when
/// evaluated at the uniform allocation.
double default_xi(const std::vector<UtilitySpec>& utilities, int n);

/// Probability of one drop pattern under independent per-agent responses.
double pattern_probability(const Vec& p, const DropPattern& pattern);

/// Independent Bernoulli response per agent.
DropPattern sample_pattern(const Vec& p, Rng& rng);

/// Numerically stable running mean over an unbounded trajectory.
class RunningMean {
 public:
  explicit RunningMean(int n) : mean_(static_cast<size_t>(n), 0.0) {}

  void push(const Vec& x) {
    ++count_;
    for (size_t i = 0; i < mean_.size(); ++i) mean_[i] += (x[i] - mean_[i]) / double(count_);
  }

  const Vec& mean() const { return mean_; }
  long count() const { return count_; }

 private:
  Vec mean_;
  long count_ = 0;
};

/// Drop policy interface: maps the finite-average histories of both
/// resources to per-agent MD probabilities for resource c.
class DropPolicy {
 public:
  virtual ~DropPolicy() = default;
  virtual Vec evaluate(Resource c, const History& xt_a, const History& xt_b) const = 0;
  /// True when the probabilities do not depend on the state.
  virtual bool state_independent() const { return false; }
  virtual double floor_eps() const = 0;
};

class ConstantPolicy final : public DropPolicy {
 public:
  ConstantPolicy(Vec probs, double floor_eps);
  Vec evaluate(Resource, const History&, const History&) const override { return probs_; }
  bool state_independent() const override { return true; }
  double floor_eps() const override { return eps_; }
  const Vec& probabilities() const { return probs_; }

 private:
  Vec probs_;
  double eps_;
};

class WindowMeanPolicy final : public DropPolicy {
 public:
  WindowMeanPolicy(int window, double floor_eps) : window_(window), eps_(floor_eps) {}
  Vec evaluate(Resource, const History& xt_a, const History& xt_b) const override {
    return window_mean_probabilities(xt_a, xt_b, window_, eps_);
  }
  double floor_eps() const override { return eps_; }

 private:
  int window_;
  double eps_;
};

class UtilityGradientPolicy final : public DropPolicy {
 public:
  UtilityGradientPolicy(std::vector<UtilitySpec> utilities, double xi, double floor_eps)
      : utilities_(std::move(utilities)), xi_(xi), eps_(floor_eps) {}
  Vec evaluate(Resource c, const History& xt_a, const History& xt_b) const override;
  double floor_eps() const override { return eps_; }
  double xi() const { return xi_; }

 private:
  std::vector<UtilitySpec> utilities_;
  double xi_;
  double eps_;
};

}  // namespace aimdsync
