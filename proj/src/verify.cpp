#include "aimdsync/verify.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "aimdsync/rng.hpp"

namespace aimdsync {

namespace {

void check_dense_guard(const ResourceParams& params_a, const ResourceParams& params_b,
                       int window) {
  if (params_a.size() != params_b.size())
    throw std::invalid_argument("verification: resources must have equal agent counts");
  if (window < 1) throw std::invalid_argument("verification: window must be >= 1");
  if (params_a.size() * window > 64)
    throw std::invalid_argument("verification: nN > 64, dense checks refused");
}

DropPattern random_pattern(int n, Rng& rng) {
  std::uniform_int_distribution<std::uint64_t> dist(0, (std::uint64_t{1} << n) - 1);
  return DropPattern::from_mask(n, dist(rng));
}

PatternWindow random_pattern_window(int n, int window, Rng& rng) {
  PatternWindow pw;
  for (int j = 0; j < window; ++j) {
    pw.nu.push_back(random_pattern(n, rng));
    pw.mu.push_back(random_pattern(n, rng));
  }
  return pw;
}

Vec random_box_vector(size_t len, Rng& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vec v(len);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Blockwise difference of simplex points: every n-block sums to zero, so
/// the first blocks satisfy the subspace constraint.
Vec random_subspace_vector(int n, int window, Rng& rng) {
  Vec v;
  v.reserve(static_cast<size_t>(2 * n * window));
  for (int b = 0; b < 2 * window; ++b) {
    Vec blk = random_zero_sum(n, rng);
    v.insert(v.end(), blk.begin(), blk.end());
  }
  return v;
}

Vec random_lifted_simplex(int n, int window, Rng& rng) {
  Vec v;
  v.reserve(static_cast<size_t>(2 * n * window));
  for (int b = 0; b < 2 * window; ++b) {
    Vec blk = random_simplex_point(n, rng);
    v.insert(v.end(), blk.begin(), blk.end());
  }
  return v;
}

}  // namespace

ContractionReport check_nonexpansive(const ResourceParams& params_a,
                                     const ResourceParams& params_b, int window, long windows,
                                     long samples, std::uint64_t seed) {
  check_dense_guard(params_a, params_b, window);
  const int n = params_a.size();
  Rng rng(seed);

  ContractionReport rep;
  rep.name = "nonexpansive";
  rep.bound = 1.0;
  rep.tolerance = 1e-12;
  rep.seed = seed;
  for (long w = 0; w < windows; ++w) {
    const GammaMatrix gamma(params_a, params_b, random_pattern_window(n, window, rng));
    const Matrix dense = gamma.dense();
    for (long s = 0; s < samples; ++s) {
      const Vec z = random_box_vector(static_cast<size_t>(2 * n * window), rng);
      const double nz = norm_n1(z, n);
      if (nz == 0.0) continue;
      const double ratio = norm_n1(dense.apply(z), n) / nz;
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      ++rep.samples;
    }
  }
  rep.pass = rep.max_ratio <= rep.bound + rep.tolerance;
  return rep;
}

SubspaceReport check_subspace_invariance(const ResourceParams& params_a,
                                         const ResourceParams& params_b, int window,
                                         long samples, std::uint64_t seed) {
  check_dense_guard(params_a, params_b, window);
  const int n = params_a.size();
  Rng rng(seed);

  SubspaceReport rep;
  rep.tolerance = 1e-12;
  rep.seed = seed;
  for (long s = 0; s < samples; ++s) {
    const GammaMatrix gamma(params_a, params_b, random_pattern_window(n, window, rng));
    const Vec z = random_subspace_vector(n, window, rng);
    const Vec gz = gamma.dense().apply(z);
    for (Resource c : {Resource::a, Resource::b}) {
      const size_t off = (c == Resource::a) ? 0 : static_cast<size_t>(n) * window;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) sum += gz[off + static_cast<size_t>(i)];
      rep.max_residual = std::max(rep.max_residual, std::fabs(sum));
    }
    ++rep.samples;
  }
  rep.pass = rep.max_residual <= rep.tolerance;
  return rep;
}

ContractionReport check_full_drop_contraction(const ResourceParams& params_a,
                                              const ResourceParams& params_b, int window,
                                              long samples, std::uint64_t seed) {
  check_dense_guard(params_a, params_b, window);
  const int n = params_a.size();
  Rng rng(seed);

  PatternWindow full;
  for (int j = 0; j < window; ++j) {
    full.nu.push_back(DropPattern::all_drop(n));
    full.mu.push_back(DropPattern::all_drop(n));
  }
  const GammaMatrix gamma1(params_a, params_b, full);
  const Matrix dense = gamma1.dense();

  const double q = std::max(contraction_factor(params_a.max_beta(), window),
                            contraction_factor(params_b.max_beta(), window));

  ContractionReport rep;
  rep.name = "full_drop";
  rep.bound = q;
  rep.tolerance = 1e-9;
  rep.seed = seed;
  for (long s = 0; s < samples; ++s) {
    const Vec z = random_subspace_vector(n, window, rng);
    const double nz = norm_n1(z, n);
    if (nz == 0.0) continue;
    const double ratio = norm_n1(dense.apply(z), n) / nz;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.samples;
  }
  rep.pass = rep.max_ratio <= rep.bound + rep.tolerance;
  return rep;
}

BarnsleyReport check_barnsley(const ResourceParams& params_a, const ResourceParams& params_b,
                              const DropPolicy& policy, int window, long pairs,
                              std::uint64_t seed) {
  const int n = params_a.size();
  if (params_b.size() != n)
    throw std::invalid_argument("check_barnsley: resources must have equal agent counts");
  if (n > 2 || window > 2)
    throw std::invalid_argument("check_barnsley: enumeration requires n <= 2 and N <= 2");

  const int patterns_per_event = 1 << n;
  int seqs = 1;
  for (int j = 0; j < window; ++j) seqs *= patterns_per_event;

  // All per-resource pattern sequences, then all (nu, mu) combinations.
  std::vector<std::vector<DropPattern>> sequences;
  sequences.reserve(static_cast<size_t>(seqs));
  for (int code = 0; code < seqs; ++code) {
    std::vector<DropPattern> seq;
    int rest = code;
    for (int j = 0; j < window; ++j) {
      seq.push_back(DropPattern::from_mask(n, static_cast<std::uint64_t>(rest % patterns_per_event)));
      rest /= patterns_per_event;
    }
    sequences.push_back(std::move(seq));
  }

  struct Kappa {
    PatternWindow pw;
    GammaMatrix gamma;
    bool full_drop;
  };
  std::vector<Kappa> kappas;
  kappas.reserve(static_cast<size_t>(seqs) * seqs);
  for (int ia = 0; ia < seqs; ++ia)
    for (int ib = 0; ib < seqs; ++ib) {
      PatternWindow pw;
      pw.nu = sequences[static_cast<size_t>(ia)];
      pw.mu = sequences[static_cast<size_t>(ib)];
      bool full = true;
      for (const auto& p : pw.nu) full = full && p.is_full_drop();
      for (const auto& p : pw.mu) full = full && p.is_full_drop();
      GammaMatrix gamma(params_a, params_b, pw);
      kappas.push_back({std::move(pw), std::move(gamma), full});
    }

  Rng rng(seed);
  std::vector<std::pair<LiftedState, LiftedState>> sampled;
  sampled.reserve(static_cast<size_t>(pairs));
  for (long s = 0; s < pairs; ++s)
    sampled.emplace_back(
        LiftedState::from_flat(random_lifted_simplex(n, window, rng), n, window),
        LiftedState::from_flat(random_lifted_simplex(n, window, rng), n, window));

  const bool constant = policy.state_independent();
  auto kappa_probability = [&](const Kappa& k, const LiftedState& zeta) {
    return lifted_pattern_probability(zeta, k.pw, policy, params_a, params_b);
  };

  // Constant policies have state-independent probabilities; compute once.
  std::vector<double> const_probs;
  if (constant) {
    const_probs.reserve(kappas.size());
    for (const auto& k : kappas) const_probs.push_back(kappa_probability(k, sampled[0].first));
  }

  BarnsleyReport rep;
  rep.seed = seed;
  rep.q = std::max(contraction_factor(params_a.max_beta(), window),
                   contraction_factor(params_b.max_beta(), window));
  rep.p_hat_floor = std::pow(policy.floor_eps(), 2.0 * n * window);

  // p_hat: infimum of the full-drop window probability over sampled states.
  double p_hat = 1.0;
  size_t full_idx = 0;
  for (size_t i = 0; i < kappas.size(); ++i)
    if (kappas[i].full_drop) full_idx = i;
  if (constant) {
    p_hat = const_probs[full_idx];
  } else {
    for (const auto& [zeta, eta] : sampled) {
      p_hat = std::min(p_hat, kappa_probability(kappas[full_idx], zeta));
      p_hat = std::min(p_hat, kappa_probability(kappas[full_idx], eta));
    }
  }
  rep.p_hat = p_hat;
  rep.r = p_hat * rep.q + (1.0 - p_hat);
  rep.delta = p_hat * p_hat;

  constexpr double kTol = 1e-12;
  std::vector<double> pz(kappas.size()), pe(kappas.size());
  for (const auto& [zeta, eta] : sampled) {
    const Vec dz = [&] {
      Vec d = zeta.flat();
      const Vec e = eta.flat();
      for (size_t i = 0; i < d.size(); ++i) d[i] -= e[i];
      return d;
    }();
    const double nd = norm_n1(dz, n);
    if (nd == 0.0) continue;  // degenerate pair, conditions vacuous

    double sum_pz = 0.0;
    for (size_t i = 0; i < kappas.size(); ++i) {
      pz[i] = constant ? const_probs[i] : kappa_probability(kappas[i], zeta);
      pe[i] = constant ? const_probs[i] : kappa_probability(kappas[i], eta);
      sum_pz += pz[i];
    }
    rep.prob_sum_err = std::max(rep.prob_sum_err, std::fabs(sum_pz - 1.0));

    double lhs = 0.0;
    double mass = 0.0;
    const LiftedState dzs = LiftedState::from_flat(dz, n, window);
    for (size_t i = 0; i < kappas.size(); ++i) {
      const double norm_gd = norm_n1(kappas[i].gamma.apply(dzs).flat(), n);
      lhs += pz[i] * norm_gd;
      if (norm_gd <= rep.r * nd + kTol) mass += pz[i] * pe[i];
    }
    rep.max_lhs_ratio = std::max(rep.max_lhs_ratio, lhs / nd);
    if (lhs > rep.r * nd + kTol) ++rep.violations_a;
    rep.min_c_mass = std::min(rep.min_c_mass, mass);
    if (mass < rep.delta - kTol) ++rep.violations_b;
    ++rep.pairs;
  }

  rep.pass = rep.r < 1.0 && rep.delta > 0.0 && rep.violations_a == 0 && rep.violations_b == 0 &&
             rep.prob_sum_err <= 1e-9;
  return rep;
}

Matrix mean_aimd_matrix(const ResourceParams& params, const Vec& probs) {
  const int n = params.size();
  if (static_cast<int>(probs.size()) != n)
    throw std::invalid_argument("mean_aimd_matrix: probability length mismatch");
  for (double p : probs)
    if (!(p >= 0.0) || !(p <= 1.0))
      throw std::invalid_argument("mean_aimd_matrix: probabilities must lie in [0, 1]");
  Matrix mean(n, n);
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const DropPattern pattern = DropPattern::from_mask(n, mask);
    const double w = pattern_probability(probs, pattern);
    if (w == 0.0) continue;
    mean.add_scaled(build_aimd_matrix(params, pattern), w);
  }
  return mean;
}

Vec perron_oracle(const ResourceParams& params, const Vec& probs) {
  const Matrix mean = mean_aimd_matrix(params, probs);
  const int n = params.size();
  Vec x(static_cast<size_t>(n), 1.0 / n);
  constexpr double kResidualTol = 1e-12;
  constexpr long kMaxIters = 1000000;
  for (long it = 0; it < kMaxIters; ++it) {
    Vec y = mean.apply(x);
    double sum = 0.0;
    for (double v : y) sum += v;
    for (auto& v : y) v /= sum;
    if (norm1_diff(mean.apply(y), y) <= kResidualTol) return y;
    x = std::move(y);
  }
  throw std::runtime_error("perron_oracle: power iteration did not converge");
}

VerificationSuite run_verification(const ResourceParams& params_a,
                                   const ResourceParams& params_b, const DropPolicy& policy,
                                   const VerifyOptions& opts) {
  VerificationSuite suite;
  suite.nonexpansive = check_nonexpansive(params_a, params_b, opts.window, opts.windows,
                                          opts.samples, opts.seed);
  suite.subspace =
      check_subspace_invariance(params_a, params_b, opts.window, opts.samples, opts.seed + 1);
  suite.full_drop =
      check_full_drop_contraction(params_a, params_b, opts.window, opts.samples, opts.seed + 2);
  if (params_a.size() <= 2 && opts.window <= 2)
    suite.barnsley =
        check_barnsley(params_a, params_b, policy, opts.window, opts.pairs, opts.seed + 3);
  return suite;
}

std::string verification_report_json(const VerificationSuite& suite) {
  using nlohmann::json;
  auto contraction_json = [](const ContractionReport& r) {
    return json{{"name", r.name},         {"max_ratio", r.max_ratio},
                {"bound", r.bound},       {"tolerance", r.tolerance},
                {"samples", r.samples},   {"seed", r.seed},
                {"pass", r.pass}};
  };
  json out;
  out["nonexpansive"] = contraction_json(suite.nonexpansive);
  out["subspace_invariance"] = json{{"max_residual", suite.subspace.max_residual},
                                    {"tolerance", suite.subspace.tolerance},
                                    {"samples", suite.subspace.samples},
                                    {"seed", suite.subspace.seed},
                                    {"pass", suite.subspace.pass}};
  out["full_drop_contraction"] = contraction_json(suite.full_drop);
  if (suite.barnsley) {
    const auto& b = *suite.barnsley;
    out["barnsley"] = json{{"q", b.q},
                           {"p_hat", b.p_hat},
                           {"p_hat_floor", b.p_hat_floor},
                           {"r", b.r},
                           {"delta", b.delta},
                           {"max_lhs_ratio", b.max_lhs_ratio},
                           {"min_c_mass", b.min_c_mass},
                           {"prob_sum_err", b.prob_sum_err},
                           {"pairs", b.pairs},
                           {"violations_a", b.violations_a},
                           {"violations_b", b.violations_b},
                           {"seed", b.seed},
                           {"pass", b.pass}};
  } else {
    out["barnsley"] = json{{"skipped", "enumeration guard: requires n <= 2 and N <= 2"}};
  }
  out["pass"] = suite.pass();
  return out.dump(2);
}

}  // namespace aimdsync
