#pragma once

#include <span>
#include <vector>

#include "aimdsync/core.hpp"
#include "aimdsync/policy.hpp"

namespace aimdsync {

/// Stacked partial averages (z_a, z_b) over one synchronization window.
/// Block j (1-based) of z_c is the mean of the j most recent states of
/// resource c; block 1 is the raw state at the window boundary.
struct LiftedState {
  int n = 0;
  int window = 0;  // N
  Vec za, zb;      // each n*N, block j at offset (j-1)*n
  bool partial = false;

  std::span<const double> block(Resource c, int j) const;
  std::span<double> block(Resource c, int j);
  const Vec& half(Resource c) const { return c == Resource::a ? za : zb; }

  /// Concatenated (z_a, z_b), length 2nN.
  Vec flat() const;
  static LiftedState from_flat(const Vec& v, int n, int window);
};

/// The per-window pattern realization: N drop patterns per resource in
/// response order, plus the merged order the simulator fired them in.
struct PatternWindow {
  struct Entry {
    Resource resource;
    int index;  // local response index within the window, 0-based
    int cross;  // capacity events of the other resource visible at evaluation
  };

  std::vector<DropPattern> nu;  // resource a, response order
  std::vector<DropPattern> mu;  // resource b, response order
  std::vector<Entry> order;     // 2N entries; may be empty (derived on demand)

  int window() const { return static_cast<int>(nu.size()); }
  const std::vector<DropPattern>& patterns(Resource c) const {
    return c == Resource::a ? nu : mu;
  }
};

/// The lifted block transition built from one window's pattern sequences.
/// Only the first block column of each half is nonzero; the matrix is
/// stored as the cached transition-operator products Phi_c(j, 0).
class GammaMatrix {
 public:
  GammaMatrix(const ResourceParams& params_a, const ResourceParams& params_b,
              const PatternWindow& pw);

  int n() const { return n_; }
  int window() const { return window_; }

  /// Product of the first j within-window matrices of resource c, j in [0, N].
  const Matrix& phi(Resource c, int j) const;

  /// First-column block row k (1-based): (1/k) sum_{i=0..k-1} phi(c, N - i).
  Matrix block(Resource c, int k) const;

  LiftedState apply(const LiftedState& zeta) const;

  /// Full 2nN x 2nN materialization; verification only. Guarded to nN <= 64.
  Matrix dense() const;

 private:
  int n_, window_;
  std::vector<Matrix> phi_[2];
};

/// z blocks from raw state history (oldest first). Blocks longer than the
/// available history average the whole prefix and mark the state partial.
LiftedState build_zeta(const std::vector<Vec>& hist_a, const std::vector<Vec>& hist_b,
                       int window);

inline LiftedState step_lifted(const LiftedState& zeta, const GammaMatrix& gamma) {
  return gamma.apply(zeta);
}

/// Finite average of resource c after k of its capacity events in the
/// current window, reconstructed from the lifted state:
/// xt_c(lN+k) = ((N-k)/N) z_{c,N-k} + (1/N) sum_{i=0..k-1} Phi(i+1,0) z_{c,1}.
/// k may be N (full within-window average).
Vec reconstruct_running_average(const LiftedState& zeta, const GammaMatrix& gamma,
                                Resource c, int k);

/// Probability of realizing this pattern window from zeta: the product of
/// per-event pattern probabilities along the merged event order, each
/// evaluated at the averages reconstructed at that event. If pw.order is
/// empty the order is derived by replaying the inter-event times.
double lifted_pattern_probability(const LiftedState& zeta, const PatternWindow& pw,
                                  const DropPolicy& policy, const ResourceParams& params_a,
                                  const ResourceParams& params_b);

/// Derives the merged response order (with cross-event counters) by
/// replaying the inter-event times from the states in zeta's first blocks.
/// Ties fire resource a first; simultaneous events do not see each other.
std::vector<PatternWindow::Entry> derive_order(const LiftedState& zeta,
                                               const PatternWindow& pw,
                                               const ResourceParams& params_a,
                                               const ResourceParams& params_b);

/// max over n-blocks of the block 1-norms. Length must be a multiple of n.
double norm_n1(std::span<const double> v, int n);

}  // namespace aimdsync
