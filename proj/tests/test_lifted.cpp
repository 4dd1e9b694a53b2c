#include "doctest.h"

#include <cmath>

#include "aimdsync/engine.hpp"
#include "aimdsync/lifted.hpp"
#include "oracles.hpp"

using namespace aimdsync;

namespace {

PatternWindow uniform_window(int n, int window, bool full) {
  PatternWindow pw;
  for (int j = 0; j < window; ++j) {
    pw.nu.push_back(full ? DropPattern::all_drop(n) : DropPattern::no_drop(n));
    pw.mu.push_back(full ? DropPattern::all_drop(n) : DropPattern::no_drop(n));
  }
  return pw;
}

PatternWindow random_window(int n, int window, Rng& rng) {
  PatternWindow pw;
  for (int j = 0; j < window; ++j) {
    pw.nu.push_back(DropPattern::from_mask(n, rng() & ((1u << n) - 1)));
    pw.mu.push_back(DropPattern::from_mask(n, rng() & ((1u << n) - 1)));
  }
  return pw;
}

LiftedState random_zeta(int n, int window, Rng& rng) {
  Vec flat;
  for (int b = 0; b < 2 * window; ++b) {
    const Vec blk = random_simplex_point(n, rng);
    flat.insert(flat.end(), blk.begin(), blk.end());
  }
  return LiftedState::from_flat(flat, n, window);
}

}  // namespace

TEST_CASE("build_zeta") {
  SUBCASE("constant history fills every block with the same point") {
    const Vec x{0.3, 0.7};
    const auto z = build_zeta({x, x, x}, {x, x, x}, 3);
    CHECK_FALSE(z.partial);
    for (int j = 1; j <= 3; ++j) {
      CHECK(norm1_diff(Vec(z.block(Resource::a, j).begin(), z.block(Resource::a, j).end()), x) <
            1e-15);
    }
  }
  SUBCASE("hand-computed two-state window") {
    const auto z = build_zeta({{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}, 2);
    const auto b1 = z.block(Resource::a, 1);
    const auto b2 = z.block(Resource::a, 2);
    CHECK(b1[0] == 0.0);
    CHECK(b1[1] == 1.0);
    CHECK(b2[0] == doctest::Approx(0.5));
    CHECK(b2[1] == doctest::Approx(0.5));
  }
  SUBCASE("short history marks the state partial") {
    const auto z = build_zeta({{1.0, 0.0}}, {{1.0, 0.0}}, 3);
    CHECK(z.partial);
    // all blocks fall back to the prefix average
    CHECK(z.block(Resource::a, 3)[0] == 1.0);
  }
  SUBCASE("window of one is the raw state pair") {
    const auto z = build_zeta({{0.2, 0.8}}, {{0.6, 0.4}}, 1);
    CHECK(z.za == Vec{0.2, 0.8});
    CHECK(z.zb == Vec{0.6, 0.4});
    CHECK_FALSE(z.partial);
  }
}

TEST_CASE("gamma matrix structure") {
  const auto pa = ResourceParams::from_vectors({1.0, 2.0}, {0.5, 0.6});
  const auto pb = ResourceParams::from_vectors({0.5, 1.5}, {0.4, 0.8});

  SUBCASE("no-drop window copies block one everywhere") {
    const GammaMatrix g(pa, pb, uniform_window(2, 3, false));
    Rng rng(5);
    const LiftedState z = random_zeta(2, 3, rng);
    const LiftedState out = g.apply(z);
    for (int j = 1; j <= 3; ++j)
      for (Resource c : {Resource::a, Resource::b})
        CHECK(norm1_diff(Vec(out.block(c, j).begin(), out.block(c, j).end()),
                         Vec(z.block(c, 1).begin(), z.block(c, 1).end())) < 1e-15);
  }

  SUBCASE("full-drop window blocks are averaged powers of the drop matrix") {
    const int N = 3;
    const GammaMatrix g(pa, pb, uniform_window(2, N, true));
    const Matrix a1 = build_aimd_matrix(pa, DropPattern::all_drop(2));
    // dense power oracle
    std::vector<Matrix> pow{Matrix::identity(2)};
    for (int j = 1; j <= N; ++j) pow.push_back(a1.mul(pow.back()));
    for (int k = 1; k <= N; ++k) {
      Matrix expect(2, 2);
      for (int i = 0; i < k; ++i) expect.add_scaled(pow[size_t(N - i)], 1.0);
      expect.scale(1.0 / k);
      const Matrix got = g.block(Resource::a, k);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) CHECK(got(r, c) == doctest::Approx(expect(r, c)).epsilon(1e-13));
    }
    CHECK(norm1_diff(g.phi(Resource::a, N).apply({1.0, 0.0}), pow[size_t(N)].apply({1.0, 0.0})) <
          1e-13);
  }

  SUBCASE("window of one reduces to the single aimd matrix") {
    PatternWindow pw;
    pw.nu.push_back(DropPattern::from_mask(2, 0b01));
    pw.mu.push_back(DropPattern::all_drop(2));
    const GammaMatrix g(pa, pb, pw);
    const Matrix expect = build_aimd_matrix(pa, pw.nu[0]);
    const Matrix got = g.block(Resource::a, 1);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) CHECK(got(r, c) == expect(r, c));
  }
}

TEST_CASE("step_lifted equals the dense product and preserves the simplex") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + int(rng() % 4);
    const int N = 1 + int(rng() % 5);
    std::uniform_real_distribution<double> alpha(0.05, 2.0), beta(0.0, 0.95);
    Vec a(size_t(n)), b(size_t(n));
    for (auto& v : a) v = alpha(rng);
    for (auto& v : b) v = beta(rng);
    const auto pa = ResourceParams::from_vectors(a, b);
    for (auto& v : a) v = alpha(rng);
    for (auto& v : b) v = beta(rng);
    const auto pb = ResourceParams::from_vectors(a, b);

    const GammaMatrix g(pa, pb, random_window(n, N, rng));
    const LiftedState z = random_zeta(n, N, rng);
    const LiftedState fast = step_lifted(z, g);
    const Vec dense = g.dense().apply(z.flat());
    CHECK(norm1_diff(fast.flat(), dense) < 1e-12);
    // image blocks stay on the simplex
    for (Resource c : {Resource::a, Resource::b})
      for (int j = 1; j <= N; ++j) {
        const auto blk = fast.block(c, j);
        CHECK(is_simplex(Vec(blk.begin(), blk.end()), 1e-9));
      }
  }
}

TEST_CASE("norm_n1") {
  CHECK(norm_n1(Vec{1.0, -1.0, 0.5, 0.5}, 2) == 2.0);
  CHECK(norm_n1(Vec{0.0, 0.0, 0.0}, 3) == 0.0);
  Rng rng(11);
  const LiftedState z = random_zeta(3, 4, rng);
  CHECK(norm_n1(z.flat(), 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(norm_n1(Vec{1.0, 2.0, 3.0}, 2), std::invalid_argument);

  // norm axioms on random triples
  for (int trial = 0; trial < 100; ++trial) {
    Vec u(12), v(12);
    for (auto& x : u) x = uniform01(rng) * 2 - 1;
    for (auto& x : v) x = uniform01(rng) * 2 - 1;
    Vec sum(12);
    for (int i = 0; i < 12; ++i) sum[size_t(i)] = u[size_t(i)] + v[size_t(i)];
    CHECK(norm_n1(sum, 3) <= norm_n1(u, 3) + norm_n1(v, 3) + 1e-12);
    Vec scaled(12);
    for (int i = 0; i < 12; ++i) scaled[size_t(i)] = 2.5 * u[size_t(i)];
    CHECK(norm_n1(scaled, 3) == doctest::Approx(2.5 * norm_n1(u, 3)).epsilon(1e-12));
  }
}

TEST_CASE("reconstruct_running_average matches the engine's finite averages") {
  const auto pa = ResourceParams::from_vectors({1.0, 2.0}, {0.5, 0.6});
  const auto pb = ResourceParams::from_vectors({0.5, 1.5}, {0.4, 0.8});
  const int N = 3;
  CoupledEngine engine(pa, pb, std::make_shared<WindowMeanPolicy>(N, 0.01), N, {0.1, 0.2},
                       {0.05, 0.1}, 31);

  // raw per-resource trajectories, oldest first
  std::array<std::vector<Vec>, 2> traj;
  traj[0].push_back(engine.initial_shares(Resource::a));
  traj[1].push_back(engine.initial_shares(Resource::b));

  std::vector<MetaEventRecord> metas;
  for (int l = 0; l < 12; ++l) {
    metas.push_back(engine.advance_window());
    for (Resource c : {Resource::a, Resource::b})
      for (const auto& ev : metas.back().events[static_cast<int>(c)])
        traj[static_cast<int>(c)].push_back(ev.post_shares);
  }

  // batch oracle: xt_c(e) = mean of the last min(N, e+1) states up to e
  auto batch_average = [&](Resource c, long e) {
    const auto& t = traj[static_cast<int>(c)];
    const long take = std::min<long>(N, e + 1);
    Vec acc(2, 0.0);
    for (long j = e - take + 1; j <= e; ++j)
      for (int i = 0; i < 2; ++i) acc[size_t(i)] += t[size_t(j)][size_t(i)];
    for (auto& v : acc) v /= double(take);
    return acc;
  };

  for (size_t l = 1; l + 1 < metas.size(); ++l) {
    const LiftedState& zeta = metas[l - 1].zeta_next;  // zeta(l)
    const PatternWindow pw = pattern_window_from(metas[l]);
    const GammaMatrix gamma(pa, pb, pw);
    for (Resource c : {Resource::a, Resource::b})
      for (int k = 0; k <= N; ++k) {
        const Vec got = reconstruct_running_average(zeta, gamma, c, k);
        const Vec want = batch_average(c, long(l) * N + k);
        CHECK(norm1_diff(got, want) < 1e-12);
      }
  }
}

TEST_CASE("lifted and direct evolutions agree window by window") {
  const auto pa = ResourceParams::from_vectors({1.0, 2.0}, {0.5, 0.6});
  const auto pb = ResourceParams::from_vectors({0.5, 1.5}, {0.4, 0.8});
  const int N = 3;
  const RunResult run = run_coupled(pa, pb, std::make_shared<WindowMeanPolicy>(N, 0.01), N,
                                    {0.1, 0.2}, {0.05, 0.1}, 20, 77);

  LiftedState z = run.metas[0].zeta_next;  // zeta(1): first complete window
  for (size_t l = 1; l < run.metas.size(); ++l) {
    const GammaMatrix gamma(pa, pb, pattern_window_from(run.metas[l]));
    z = step_lifted(z, gamma);
    REQUIRE(norm1_diff(z.flat(), run.metas[l].zeta_next.flat()) < 1e-10);
  }
}

TEST_CASE("lifted pattern probability") {
  const auto pa = ResourceParams::from_vectors({1.0, 2.0}, {0.5, 0.6});
  const auto pb = ResourceParams::from_vectors({0.5, 1.5}, {0.4, 0.8});

  SUBCASE("constant policy: product of pattern probabilities, state-free") {
    const ConstantPolicy policy({0.3, 0.7}, 1e-6);
    Rng rng(3);
    const int N = 2;
    const PatternWindow pw = random_window(2, N, rng);
    double expect = 1.0;
    for (const auto& p : pw.nu) expect *= pattern_probability({0.3, 0.7}, p);
    for (const auto& p : pw.mu) expect *= pattern_probability({0.3, 0.7}, p);
    const double got1 = lifted_pattern_probability(random_zeta(2, N, rng), pw, policy, pa, pb);
    const double got2 = lifted_pattern_probability(random_zeta(2, N, rng), pw, policy, pa, pb);
    CHECK(got1 == doctest::Approx(expect).epsilon(1e-12));
    CHECK(got1 == doctest::Approx(got2).epsilon(1e-14));
  }

  SUBCASE("n=1, N=1 reduces to the single-resource law") {
    const auto p1 = ResourceParams::from_vectors({1.0}, {0.5});
    const ConstantPolicy policy({0.35}, 1e-6);
    PatternWindow pw;
    pw.nu.push_back(DropPattern::all_drop(1));
    pw.mu.push_back(DropPattern::no_drop(1));
    const LiftedState z = build_zeta({{1.0}}, {{1.0}}, 1);
    CHECK(lifted_pattern_probability(z, pw, policy, p1, p1) ==
          doctest::Approx(0.35 * 0.65).epsilon(1e-14));
  }

  SUBCASE("probabilities over all windows sum to one (n=1, N=2)") {
    const auto p1 = ResourceParams::from_vectors({1.0}, {0.5});
    const auto p2 = ResourceParams::from_vectors({0.7}, {0.3});
    const ConstantPolicy policy({0.4}, 1e-6);
    const LiftedState z = build_zeta({{1.0}, {1.0}}, {{1.0}, {1.0}}, 2);
    double total = 0.0;
    for (int code = 0; code < 16; ++code) {
      PatternWindow pw;
      pw.nu = {DropPattern::from_mask(1, code & 1), DropPattern::from_mask(1, (code >> 1) & 1)};
      pw.mu = {DropPattern::from_mask(1, (code >> 2) & 1),
               DropPattern::from_mask(1, (code >> 3) & 1)};
      total += lifted_pattern_probability(z, pw, policy, p1, p2);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("probabilities sum to one under a place-dependent policy (n=2, N=2)") {
    // power utility with exponent 3: p_i = xi * xt_i, genuinely state-dependent
    const UtilityGradientPolicy policy(std::vector<UtilitySpec>(2, UtilitySpec::power(3.0)),
                                       0.8, 1e-9);
    Rng rng(13);
    const LiftedState z = random_zeta(2, 2, rng);
    double total = 0.0;
    for (int ca = 0; ca < 16; ++ca)
      for (int cb = 0; cb < 16; ++cb) {
        PatternWindow pw;
        pw.nu = {DropPattern::from_mask(2, ca & 3), DropPattern::from_mask(2, (ca >> 2) & 3)};
        pw.mu = {DropPattern::from_mask(2, cb & 3), DropPattern::from_mask(2, (cb >> 2) & 3)};
        total += lifted_pattern_probability(z, pw, policy, pa, pb);
      }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("full-drop window probability clears the clamp floor") {
    const double eps = 0.01;
    const WindowMeanPolicy policy(2, eps);
    Rng rng(17);
    const LiftedState z = random_zeta(2, 2, rng);
    PatternWindow pw;
    pw.nu = {DropPattern::all_drop(2), DropPattern::all_drop(2)};
    pw.mu = {DropPattern::all_drop(2), DropPattern::all_drop(2)};
    CHECK(lifted_pattern_probability(z, pw, policy, pa, pb) >=
          std::pow(eps, 2.0 * 2 * 2) * (1 - 1e-12));
  }
}

TEST_CASE("simulator interleaving matches the derived T-time order") {
  const auto pa = ResourceParams::from_vectors({1.0, 2.0}, {0.5, 0.6});
  const auto pb = ResourceParams::from_vectors({0.5, 1.5}, {0.4, 0.8});
  const int N = 3;
  const RunResult run = run_coupled(pa, pb, std::make_shared<WindowMeanPolicy>(N, 0.01), N,
                                    {0.1, 0.2}, {0.05, 0.1}, 15, 123);
  for (size_t l = 1; l < run.metas.size(); ++l) {
    const PatternWindow pw = pattern_window_from(run.metas[l]);
    const auto derived = derive_order(run.metas[l - 1].zeta_next, pw, pa, pb);
    REQUIRE(derived.size() == pw.order.size());
    for (size_t i = 0; i < derived.size(); ++i) {
      CHECK(derived[i].resource == pw.order[i].resource);
      CHECK(derived[i].index == pw.order[i].index);
      CHECK(derived[i].cross == pw.order[i].cross);
    }
  }
}
