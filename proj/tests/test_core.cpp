#include "doctest.h"

#include <cmath>

#include "aimdsync/core.hpp"
#include "aimdsync/rng.hpp"
#include "oracles.hpp"

using namespace aimdsync;

namespace {

ResourceParams table1_a() {
  return ResourceParams::from_vectors({0.01, 0.08, 0.61, 0.045}, {0.95, 0.9, 0.85, 0.75});
}

ResourceParams table1_b() {
  return ResourceParams::from_vectors({0.07, 0.08, 0.025, 0.02}, {0.65, 0.7, 0.8, 0.85});
}

ResourceParams random_params(int n, Rng& rng) {
  std::uniform_real_distribution<double> alpha(0.01, 2.0);
  std::uniform_real_distribution<double> beta(0.0, 0.99);
  Vec a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
  for (auto& v : a) v = alpha(rng);
  for (auto& v : b) v = beta(rng);
  return ResourceParams::from_vectors(a, b);
}

double max_abs_diff(const Matrix& x, const Matrix& y) {
  double d = 0.0;
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) d = std::max(d, std::fabs(x(r, c) - y(r, c)));
  return d;
}

}  // namespace

TEST_CASE("aimd matrix: symmetric two-agent full drop") {
  const auto params = ResourceParams::from_vectors({1.0, 1.0}, {0.5, 0.5});
  const Matrix m = build_aimd_matrix(params, DropPattern::all_drop(2));
  CHECK(m(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(m(0, 1) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(m(1, 1) == doctest::Approx(0.75).epsilon(1e-14));
  // independent route: per-agent update on the basis points
  CHECK(max_abs_diff(m, oracles::bf_matrix(params, DropPattern::all_drop(2))) < 1e-12);
}

TEST_CASE("aimd matrix: no-drop pattern is the identity") {
  Rng rng(7);
  const auto params = random_params(5, rng);
  const Matrix m = build_aimd_matrix(params, DropPattern::no_drop(5));
  CHECK(max_abs_diff(m, Matrix::identity(5)) == 0.0);
}

TEST_CASE("aimd matrix: every Table-1 pattern is column-stochastic") {
  for (const auto& params : {table1_a(), table1_b()}) {
    for (std::uint64_t mask = 0; mask < 16; ++mask) {
      const Matrix m = build_aimd_matrix(params, DropPattern::from_mask(4, mask));
      CHECK(is_column_stochastic(m, 1e-12));
    }
  }
}

TEST_CASE("apply_aimd matches the dense multiply and stays on the simplex") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + int(rng() % 8);
    const auto params = random_params(n, rng);
    const auto pattern = DropPattern::from_mask(n, rng() & ((1u << n) - 1));
    const Vec x = random_simplex_point(n, rng);
    const Vec fast = apply_aimd(params, pattern, x);
    const Vec dense = build_aimd_matrix(params, pattern).apply(x);
    CHECK(norm1_diff(fast, dense) < 1e-12);
    double sum = 0.0;
    for (double v : fast) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("apply_aimd: no-drop returns x, symmetry fixes the uniform point") {
  Rng rng(13);
  const auto params = ResourceParams::from_vectors({1.0, 1.0, 1.0}, {0.5, 0.5, 0.5});
  const Vec x = random_simplex_point(3, rng);
  CHECK(apply_aimd(params, DropPattern::no_drop(3), x) == x);

  const Vec uniform(3, 1.0 / 3);
  const Vec next = apply_aimd(params, DropPattern::all_drop(3), uniform);
  CHECK(norm1_diff(next, uniform) < 1e-15);

  const Vec corner = apply_aimd(ResourceParams::from_vectors({1.0, 1.0}, {0.5, 0.5}),
                                DropPattern::all_drop(2), {1.0, 0.0});
  CHECK(corner[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(corner[1] == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("inter_event_time: closed form vs growth bisection") {
  const auto params = ResourceParams::from_vectors({1.0, 1.0}, {0.5, 0.5});
  const Vec x{0.5, 0.5};
  const double t = inter_event_time(params, DropPattern::all_drop(2), x);
  CHECK(t == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(t == doctest::Approx(oracles::bf_inter_event_time(params, DropPattern::all_drop(2), x))
               .epsilon(1e-10));

  CHECK(inter_event_time(params, DropPattern::no_drop(2), x) == 0.0);

  const auto one = ResourceParams::from_vectors({0.7}, {0.3});
  const double t1 = inter_event_time(one, DropPattern::all_drop(1), {1.0});
  CHECK(t1 == doctest::Approx((1.0 - 0.3) / 0.7).epsilon(1e-14));
  CHECK(t1 == doctest::Approx(oracles::bf_inter_event_time(one, DropPattern::all_drop(1), {1.0}))
                .epsilon(1e-10));
}

TEST_CASE("inter_event_time: additive growth restores capacity exactly") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + int(rng() % 6);
    auto params = random_params(n, rng);
    params.capacity = 1.0 + uniform01(rng) * 4.0;
    const auto pattern = DropPattern::from_mask(n, rng() & ((1u << n) - 1));
    const Vec x = random_simplex_point(n, rng);
    const double t = inter_event_time(params, pattern, x);
    CHECK(t >= 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double beta = pattern[i] ? params.agents[size_t(i)].beta : 1.0;
      total += beta * x[size_t(i)] * params.capacity + params.agents[size_t(i)].alpha * t;
    }
    CHECK(std::fabs(total - params.capacity) < 1e-12);
  }
}

TEST_CASE("contraction_factor") {
  CHECK(contraction_factor(0.5, 1) == doctest::Approx(0.5));
  CHECK(contraction_factor(0.5, 2) == doctest::Approx(0.375));
  CHECK(contraction_factor(0.0, 7) == 0.0);
  CHECK(contraction_factor(0.9, 50) < 1.0);
  CHECK_THROWS_AS(contraction_factor(1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(contraction_factor(-0.1, 3), std::invalid_argument);
  CHECK_THROWS_AS(contraction_factor(0.5, 0), std::invalid_argument);
}

TEST_CASE("is_column_stochastic") {
  CHECK(is_column_stochastic(Matrix::identity(4), 1e-12));
  Matrix m(2, 2);
  m(0, 0) = 0.75;
  m(0, 1) = 0.25;
  m(1, 0) = 0.25;
  m(1, 1) = 0.75;
  CHECK(is_column_stochastic(m, 1e-12));
  Matrix bad(2, 2);
  bad(0, 0) = 1.0;
  bad(1, 0) = 0.1;
  bad(1, 1) = 1.0;
  CHECK_FALSE(is_column_stochastic(bad, 1e-12));
  CHECK_THROWS_AS(is_column_stochastic(Matrix(2, 3), 1e-12), std::invalid_argument);
}

TEST_CASE("full-drop matrix contracts zero-sum differences by max beta") {
  Rng rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + int(rng() % 7);
    const auto params = random_params(n, rng);
    const Vec x = random_simplex_point(n, rng);
    const Vec y = random_simplex_point(n, rng);
    Vec d(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) d[size_t(i)] = x[size_t(i)] - y[size_t(i)];
    const Vec ad = build_aimd_matrix(params, DropPattern::all_drop(n)).apply(d);
    CHECK(norm1(ad) <= params.max_beta() * norm1(d) + 1e-12);
  }
}

TEST_CASE("simplex helpers and drop patterns") {
  CHECK(is_simplex({0.5, 0.5}));
  CHECK_FALSE(is_simplex({0.5, 0.6}));
  CHECK_FALSE(is_simplex({1.5, -0.5}));
  CHECK(normalize_to_simplex({1.0, 3.0}) == Vec{0.25, 0.75});
  CHECK_THROWS_AS(normalize_to_simplex({0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(normalize_to_simplex({-1.0, 2.0}), std::invalid_argument);

  const auto p = DropPattern::from_mask(4, 0b0101);
  CHECK(p[0]);
  CHECK_FALSE(p[1]);
  CHECK(p.bits() == "1010");
  CHECK(p.mask() == 0b0101);
  CHECK(DropPattern::all_drop(3).is_full_drop());
  CHECK(DropPattern::no_drop(3).is_no_drop());
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ResourceParams::from_vectors({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(ResourceParams::from_vectors({0.0}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(ResourceParams::from_vectors({1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ResourceParams::from_vectors({1.0}, {-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(ResourceParams::from_vectors({1.0, 2.0}, {0.5}), std::invalid_argument);
  auto p = ResourceParams::from_vectors({1.0}, {0.0});  // beta = 0 is admitted
  CHECK(p.agents[0].beta == 0.0);
  p.capacity = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
