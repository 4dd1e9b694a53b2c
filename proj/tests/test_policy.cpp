#include "doctest.h"

#include <cmath>

#include "aimdsync/policy.hpp"
#include "oracles.hpp"

using namespace aimdsync;

namespace {

History constant_history(const Vec& x, int count) {
  History h;
  for (int i = 0; i < count; ++i) h.push_back(x);
  return h;
}

}  // namespace

TEST_CASE("average window tracks the finite average exactly") {
  AverageWindow win(2, 3);
  Rng rng(3);
  std::vector<Vec> pushed;
  for (int k = 0; k < 10; ++k) {
    const Vec x = random_simplex_point(2, rng);
    pushed.push_back(x);
    win.push(x);
    // average over the last min(k+1, 3) pushes, exact to 1e-12
    const size_t take = std::min<size_t>(pushed.size(), 3);
    Vec expect(2, 0.0);
    for (size_t j = pushed.size() - take; j < pushed.size(); ++j)
      for (int i = 0; i < 2; ++i) expect[size_t(i)] += pushed[j][size_t(i)];
    for (auto& v : expect) v /= double(take);
    CHECK(norm1_diff(win.average(), expect) < 1e-12);
    CHECK(win.fill() == int(take));
    CHECK(win.average_history().size() <= 4);
  }
}

TEST_CASE("window mean policy: constant averages") {
  // all buffered averages 0.25, N = 5: p = 0.25 * (2*(N+1)) / (2N) = 0.3
  const Vec quarter(4, 0.25);
  const auto h = constant_history(quarter, 6);
  const Vec p = window_mean_probabilities(h, h, 5, 0.01);
  for (double v : p) CHECK(v == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("window mean policy: floor and ceiling clamps") {
  const Vec zeros{0.0, 0.5};
  const auto h = constant_history(zeros, 6);
  const Vec p = window_mean_probabilities(h, h, 5, 0.01);
  CHECK(p[0] == 0.01);  // clamped up

  // N=1, single buffered value (1,0): agent 0 hits the ceiling
  const auto single = constant_history({1.0, 0.0}, 1);
  const Vec q = window_mean_probabilities(single, single, 1, 0.01);
  CHECK(q[0] == 1.0);
  CHECK(q[1] == 0.01);
}

TEST_CASE("window mean policy: lipschitz in the averages") {
  // |dp_i| <= (N+1)/(2N) * (sup_l |da_i(l)| + sup_l |db_i(l)|) off the clamps
  Rng rng(5);
  const int N = 4, n = 3;
  const double bound = double(N + 1) / (2 * N);
  for (int trial = 0; trial < 200; ++trial) {
    auto gen = [&](double lo, double hi) {
      History h;
      for (int l = 0; l <= N; ++l) {
        Vec x(size_t(n));
        for (auto& v : x) v = lo + (hi - lo) * uniform01(rng);
        h.push_back(x);
      }
      return h;
    };
    const auto ha1 = gen(0.2, 0.5), hb1 = gen(0.2, 0.5);
    const auto ha2 = gen(0.2, 0.5), hb2 = gen(0.2, 0.5);
    const Vec p1 = window_mean_probabilities(ha1, hb1, N, 1e-6);
    const Vec p2 = window_mean_probabilities(ha2, hb2, N, 1e-6);
    for (int i = 0; i < n; ++i) {
      double sup_a = 0.0, sup_b = 0.0;
      for (int l = 0; l <= N; ++l) {
        sup_a = std::max(sup_a, std::fabs(ha1[size_t(l)][size_t(i)] - ha2[size_t(l)][size_t(i)]));
        sup_b = std::max(sup_b, std::fabs(hb1[size_t(l)][size_t(i)] - hb2[size_t(l)][size_t(i)]));
      }
      CHECK(std::fabs(p1[size_t(i)] - p2[size_t(i)]) <= bound * (sup_a + sup_b) + 1e-12);
    }
  }
}

TEST_CASE("utility gradient policy") {
  // f = x^2/2 per resource: (1/x) f' = 1, so p = xi everywhere
  const std::vector<UtilitySpec> half_quad(3, UtilitySpec::quadratic(0.5));
  const Vec xt{0.2, 0.3, 0.5};
  const Vec p = utility_gradient_probabilities(Resource::a, xt, xt, half_quad, 0.4, 0.01);
  for (double v : p) CHECK(v == doctest::Approx(0.4).epsilon(1e-14));

  // linear utility (power with exponent 1): p = xi / xt
  const std::vector<UtilitySpec> linear(2, UtilitySpec::power(1.0));
  const Vec q =
      utility_gradient_probabilities(Resource::b, {0.9, 0.9}, {0.5, 0.5}, linear, 0.1, 0.01);
  CHECK(q[0] == doctest::Approx(0.2).epsilon(1e-12));

  // oversized xi clamps to 1
  const Vec r =
      utility_gradient_probabilities(Resource::a, {0.5, 0.5}, {0.5, 0.5}, linear, 10.0, 0.01);
  CHECK(r[0] == 1.0);

  // degenerate average
  CHECK_THROWS_AS(
      utility_gradient_probabilities(Resource::a, {1e-12, 1.0}, {0.5, 0.5}, linear, 0.1, 0.01),
      std::domain_error);
}

TEST_CASE("default xi scales the worst marginal to one half") {
  const std::vector<UtilitySpec> quad(4, UtilitySpec::quadratic(2.0));
  // (1/u) * 2*w*u = 2w = 4, so xi = 0.5/4
  CHECK(default_xi(quad, 4) == doctest::Approx(0.125).epsilon(1e-14));
  const std::vector<UtilitySpec> barrier(2, UtilitySpec::log_barrier(1.0));
  CHECK_THROWS_AS(default_xi(barrier, 2), std::invalid_argument);
}

TEST_CASE("pattern probability: products and exhaustive sums") {
  CHECK(pattern_probability({0.5, 0.5}, DropPattern::all_drop(2)) == doctest::Approx(0.25));
  CHECK(pattern_probability({1.0, 1.0}, DropPattern::all_drop(2)) == 1.0);
  CHECK(pattern_probability({1.0, 1.0}, DropPattern::from_mask(2, 0b01)) == 0.0);
  CHECK(pattern_probability({0.3, 0.6}, DropPattern::from_mask(2, 0b01)) ==
        doctest::Approx(0.12).epsilon(1e-14));

  Rng rng(23);
  for (int n = 1; n <= 10; ++n) {
    Vec p(size_t(n));
    for (auto& v : p) v = uniform01(rng);
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
      total += pattern_probability(p, DropPattern::from_mask(n, mask));
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("sample_pattern: degenerate and statistical behaviour") {
  Rng rng(29);
  CHECK(sample_pattern({1.0, 1.0, 1.0}, rng).is_full_drop());
  CHECK(sample_pattern({0.0, 0.0}, rng).is_no_drop());

  // n=2, p=(0.5,0.5): joint frequencies near 1/4, marginals within 3 sigma
  const long samples = 100000;
  long joint[4] = {0, 0, 0, 0};
  long marginal[2] = {0, 0};
  for (long s = 0; s < samples; ++s) {
    const DropPattern pat = sample_pattern({0.5, 0.5}, rng);
    joint[pat.mask()]++;
    for (int i = 0; i < 2; ++i)
      if (pat[i]) marginal[i]++;
  }
  for (long count : joint) CHECK(std::fabs(double(count) / samples - 0.25) < 0.01);
  const double sigma = std::sqrt(0.25 / samples);
  for (long count : marginal) CHECK(std::fabs(double(count) / samples - 0.5) < 3 * sigma);
}

TEST_CASE("policy outputs respect the floor, keeping full drop reachable") {
  Rng rng(31);
  const double eps = 0.01;
  const WindowMeanPolicy policy(3, eps);
  for (int trial = 0; trial < 50; ++trial) {
    const auto h = constant_history(random_simplex_point(4, rng), 4);
    const Vec p = policy.evaluate(Resource::a, h, h);
    double full = 1.0;
    for (double v : p) {
      CHECK(v >= eps);
      CHECK(v <= 1.0);
      full *= v;
    }
    CHECK(full >= std::pow(eps, 4) * (1 - 1e-12));
  }
}

TEST_CASE("running mean matches the batch mean") {
  Rng rng(37);
  RunningMean rm(3);
  std::vector<Vec> xs;
  for (int k = 0; k < 1000; ++k) {
    xs.push_back(random_simplex_point(3, rng));
    rm.push(xs.back());
  }
  CHECK(norm1_diff(rm.mean(), oracles::batch_mean(xs)) < 1e-12);
  CHECK(rm.count() == 1000);

  RunningMean constant(2);
  for (int k = 0; k < 100; ++k) constant.push({0.25, 0.75});
  CHECK(constant.mean() == Vec{0.25, 0.75});
}
