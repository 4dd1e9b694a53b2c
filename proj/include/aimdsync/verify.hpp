#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "aimdsync/core.hpp"
#include "aimdsync/lifted.hpp"
#include "aimdsync/policy.hpp"

namespace aimdsync {

struct ContractionReport {
  std::string name;
  double max_ratio = 0.0;  // max observed ||Gamma z|| / ||z||
  double bound = 1.0;
  double tolerance = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

struct SubspaceReport {
  double max_residual = 0.0;  // max |e^T (Gamma z)_{c,1}| over samples
  double tolerance = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

struct BarnsleyReport {
  double q = 0.0;         // full-drop window contraction factor
  double p_hat = 0.0;     // inf over sampled states of the full-drop window probability
  double p_hat_floor = 0.0;  // closed-form lower bound eps^(2nN) for clamped policies
  double r = 0.0;         // p_hat q + (1 - p_hat)
  double delta = 0.0;     // p_hat^2
  double max_lhs_ratio = 0.0;   // max over pairs of (sum_k p_k ||G_k d||) / ||d||
  double min_c_mass = 1.0;      // min over pairs of the condition-(b) mass
  double prob_sum_err = 0.0;    // max |sum_k p_k(zeta) - 1| observed
  long pairs = 0;
  long violations_a = 0;
  long violations_b = 0;
  std::uint64_t seed = 0;
  bool pass = false;
};

/// Lemma condition (a): no window matrix expands the N,1 norm.
/// Samples `windows` random pattern windows with `samples` random vectors
/// each. Dense materialization; requires nN <= 64.
ContractionReport check_nonexpansive(const ResourceParams& params_a,
                                     const ResourceParams& params_b, int window, long windows,
                                     long samples, std::uint64_t seed);

/// Lemma condition (b): the zero-sum subspace of the first blocks is
/// invariant under every window matrix.
SubspaceReport check_subspace_invariance(const ResourceParams& params_a,
                                         const ResourceParams& params_b, int window,
                                         long samples, std::uint64_t seed);

/// Lemma condition (c): the full-drop window matrix contracts the subspace
/// by q = max_c contraction_factor(max_i beta_i, N).
ContractionReport check_full_drop_contraction(const ResourceParams& params_a,
                                              const ResourceParams& params_b, int window,
                                              long samples, std::uint64_t seed);

/// Exhaustive check of the two ergodicity conditions over all pattern
/// windows, on `pairs` random simplex pairs. Enumeration is (2^n)^(2N);
/// requires n <= 2 and N <= 2.
BarnsleyReport check_barnsley(const ResourceParams& params_a, const ResourceParams& params_b,
                              const DropPolicy& policy, int window, long pairs,
                              std::uint64_t seed);

/// Mean one-step matrix sum_j p_j A_j under constant independent per-agent
/// probabilities, assembled by explicit enumeration of all 2^n patterns.
Matrix mean_aimd_matrix(const ResourceParams& params, const Vec& probs);

/// Unique simplex fixed point of the mean matrix, by power iteration to a
/// 1e-12 one-norm residual. Ground truth for stationary means under
/// constant policies. Throws after 1e6 iterations without convergence.
Vec perron_oracle(const ResourceParams& params, const Vec& probs);

struct VerifyOptions {
  int window = 5;
  long windows = 1000;      // random pattern windows for condition (a)
  long samples = 1000;      // vectors per window / subspace samples
  long pairs = 10000;       // Barnsley pairs
  std::uint64_t seed = 1;
};

struct VerificationSuite {
  ContractionReport nonexpansive;
  SubspaceReport subspace;
  ContractionReport full_drop;
  std::optional<BarnsleyReport> barnsley;  // absent when the size guard bites
  bool pass() const {
    return nonexpansive.pass && subspace.pass && full_drop.pass &&
           (!barnsley || barnsley->pass);
  }
};

VerificationSuite run_verification(const ResourceParams& params_a,
                                   const ResourceParams& params_b, const DropPolicy& policy,
                                   const VerifyOptions& opts);

std::string verification_report_json(const VerificationSuite& suite);

}  // namespace aimdsync
