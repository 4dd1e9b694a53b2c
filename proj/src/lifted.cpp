#include "aimdsync/lifted.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace aimdsync {

namespace {

void check_block_index(int j, int window) {
  if (j < 1 || j > window) throw std::out_of_range("lifted block index out of range");
}

}  // namespace

std::span<const double> LiftedState::block(Resource c, int j) const {
  check_block_index(j, window);
  const Vec& half_ = half(c);
  return {half_.data() + static_cast<size_t>(j - 1) * n, static_cast<size_t>(n)};
}

std::span<double> LiftedState::block(Resource c, int j) {
  check_block_index(j, window);
  Vec& half_ = (c == Resource::a) ? za : zb;
  return {half_.data() + static_cast<size_t>(j - 1) * n, static_cast<size_t>(n)};
}

Vec LiftedState::flat() const {
  Vec out;
  out.reserve(za.size() + zb.size());
  out.insert(out.end(), za.begin(), za.end());
  out.insert(out.end(), zb.begin(), zb.end());
  return out;
}

LiftedState LiftedState::from_flat(const Vec& v, int n, int window) {
  const size_t half = static_cast<size_t>(n) * window;
  if (v.size() != 2 * half) throw std::invalid_argument("from_flat: length must be 2nN");
  LiftedState z;
  z.n = n;
  z.window = window;
  z.za.assign(v.begin(), v.begin() + static_cast<long>(half));
  z.zb.assign(v.begin() + static_cast<long>(half), v.end());
  return z;
}

LiftedState build_zeta(const std::vector<Vec>& hist_a, const std::vector<Vec>& hist_b,
                       int window) {
  if (window < 1) throw std::invalid_argument("build_zeta: window must be >= 1");
  if (hist_a.empty() || hist_b.empty()) throw std::invalid_argument("build_zeta: empty history");
  const int n = static_cast<int>(hist_a.front().size());

  LiftedState z;
  z.n = n;
  z.window = window;
  z.za.assign(static_cast<size_t>(n) * window, 0.0);
  z.zb.assign(static_cast<size_t>(n) * window, 0.0);
  z.partial = static_cast<int>(hist_a.size()) < window ||
              static_cast<int>(hist_b.size()) < window;

  for (Resource c : {Resource::a, Resource::b}) {
    const auto& hist = (c == Resource::a) ? hist_a : hist_b;
    const int avail = static_cast<int>(hist.size());
    for (int j = 1; j <= window; ++j) {
      const int take = std::min(j, avail);
      auto blk = z.block(c, j);
      for (int t = 0; t < take; ++t) {
        const Vec& s = hist[static_cast<size_t>(avail - 1 - t)];
        for (int i = 0; i < n; ++i) blk[static_cast<size_t>(i)] += s[static_cast<size_t>(i)];
      }
      for (int i = 0; i < n; ++i) blk[static_cast<size_t>(i)] /= take;
    }
  }
  return z;
}

GammaMatrix::GammaMatrix(const ResourceParams& params_a, const ResourceParams& params_b,
                         const PatternWindow& pw)
    : n_(params_a.size()), window_(pw.window()) {
  if (params_b.size() != n_) throw std::invalid_argument("GammaMatrix: resource size mismatch");
  if (static_cast<int>(pw.mu.size()) != window_ || window_ < 1)
    throw std::invalid_argument("GammaMatrix: pattern sequences must both have length N >= 1");
  for (Resource c : {Resource::a, Resource::b}) {
    const auto& params = (c == Resource::a) ? params_a : params_b;
    auto& phis = phi_[static_cast<int>(c)];
    phis.reserve(static_cast<size_t>(window_) + 1);
    phis.push_back(Matrix::identity(n_));
    for (int j = 1; j <= window_; ++j)
      phis.push_back(build_aimd_matrix(params, pw.patterns(c)[static_cast<size_t>(j - 1)])
                         .mul(phis.back()));
  }
}

const Matrix& GammaMatrix::phi(Resource c, int j) const {
  if (j < 0 || j > window_) throw std::out_of_range("GammaMatrix::phi: index out of range");
  return phi_[static_cast<int>(c)][static_cast<size_t>(j)];
}

Matrix GammaMatrix::block(Resource c, int k) const {
  check_block_index(k, window_);
  Matrix sum(n_, n_);
  for (int i = 0; i < k; ++i) sum.add_scaled(phi(c, window_ - i), 1.0);
  sum.scale(1.0 / k);
  return sum;
}

LiftedState GammaMatrix::apply(const LiftedState& zeta) const {
  if (zeta.n != n_ || zeta.window != window_)
    throw std::invalid_argument("GammaMatrix::apply: dimension mismatch");
  LiftedState out;
  out.n = n_;
  out.window = window_;
  out.za.assign(zeta.za.size(), 0.0);
  out.zb.assign(zeta.zb.size(), 0.0);

  for (Resource c : {Resource::a, Resource::b}) {
    auto z1 = zeta.block(c, 1);
    const Vec z1v(z1.begin(), z1.end());
    // y_j = Phi(j, 0) z1; block k = (1/k) sum_{i=0..k-1} y_{N-i}
    std::vector<Vec> y;
    y.reserve(static_cast<size_t>(window_) + 1);
    for (int j = 0; j <= window_; ++j) y.push_back(phi(c, j).apply(z1v));
    Vec acc(static_cast<size_t>(n_), 0.0);
    for (int k = 1; k <= window_; ++k) {
      const Vec& yk = y[static_cast<size_t>(window_ - k + 1)];
      for (int i = 0; i < n_; ++i) acc[static_cast<size_t>(i)] += yk[static_cast<size_t>(i)];
      auto blk = out.block(c, k);
      for (int i = 0; i < n_; ++i) blk[static_cast<size_t>(i)] = acc[static_cast<size_t>(i)] / k;
    }
  }
  return out;
}

Matrix GammaMatrix::dense() const {
  if (n_ * window_ > 64)
    throw std::invalid_argument("GammaMatrix::dense: nN > 64, refusing to materialize");
  const int half = n_ * window_;
  Matrix out(2 * half, 2 * half);
  for (Resource c : {Resource::a, Resource::b}) {
    const int off = (c == Resource::a) ? 0 : half;
    for (int k = 1; k <= window_; ++k) {
      const Matrix blk = block(c, k);
      for (int r = 0; r < n_; ++r)
        for (int col = 0; col < n_; ++col)
          out(off + (k - 1) * n_ + r, off + col) = blk(r, col);
    }
  }
  return out;
}

Vec reconstruct_running_average(const LiftedState& zeta, const GammaMatrix& gamma,
                                Resource c, int k) {
  const int N = zeta.window;
  if (k < 0 || k > N)
    throw std::out_of_range("reconstruct_running_average: k must lie in [0, N]");
  const int n = zeta.n;
  Vec out(static_cast<size_t>(n), 0.0);
  if (k < N) {
    auto z = zeta.block(c, N - k);
    const double w = double(N - k) / N;
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = w * z[static_cast<size_t>(i)];
  }
  if (k > 0) {
    auto z1 = zeta.block(c, 1);
    const Vec z1v(z1.begin(), z1.end());
    for (int i = 0; i < k; ++i) {
      const Vec y = gamma.phi(c, i + 1).apply(z1v);
      for (int j = 0; j < n; ++j) out[static_cast<size_t>(j)] += y[static_cast<size_t>(j)] / N;
    }
  }
  return out;
}

std::vector<PatternWindow::Entry> derive_order(const LiftedState& zeta,
                                               const PatternWindow& pw,
                                               const ResourceParams& params_a,
                                               const ResourceParams& params_b) {
  const int N = pw.window();
  if (zeta.window != N) throw std::invalid_argument("derive_order: window mismatch");

  // Occurrence times per resource: t(0) = 0, t(j) = t(j-1) + T(x(j-1), pattern).
  std::array<std::vector<double>, 2> times;
  for (Resource c : {Resource::a, Resource::b}) {
    const auto& params = (c == Resource::a) ? params_a : params_b;
    auto z1 = zeta.block(c, 1);
    Vec x(z1.begin(), z1.end());
    auto& t = times[static_cast<int>(c)];
    t.assign(static_cast<size_t>(N) + 1, 0.0);
    for (int j = 0; j < N; ++j) {
      const DropPattern& pat = pw.patterns(c)[static_cast<size_t>(j)];
      t[static_cast<size_t>(j + 1)] = t[static_cast<size_t>(j)] + inter_event_time(params, pat, x);
      x = apply_aimd(params, pat, x);
    }
  }

  // Responses j = 0..N-1 fire at t_c(j); serialize by (time, a first, index).
  auto precedes = [](double t1, Resource c1, double t2, Resource c2) {
    if (t1 != t2) return t1 < t2;
    if (c1 != c2) return c1 == Resource::a;
    return false;
  };

  std::vector<PatternWindow::Entry> order;
  order.reserve(static_cast<size_t>(2 * N));
  int next[2] = {0, 0};
  while (next[0] < N || next[1] < N) {
    Resource c;
    if (next[0] >= N) {
      c = Resource::b;
    } else if (next[1] >= N) {
      c = Resource::a;
    } else {
      const double ta = times[0][static_cast<size_t>(next[0])];
      const double tb = times[1][static_cast<size_t>(next[1])];
      c = precedes(tb, Resource::b, ta, Resource::a) ? Resource::b : Resource::a;
    }
    const int j = next[static_cast<int>(c)]++;
    const double t = times[static_cast<int>(c)][static_cast<size_t>(j)];
    const Resource o = other(c);
    const auto& to = times[static_cast<int>(o)];
    // Cross occurrences visible at this response: responses i = 1..N-1 that
    // precede in serialized order, plus the terminal occurrence if strictly
    // earlier in time.
    int m = 0;
    for (int i = 1; i <= N - 1; ++i)
      if (precedes(to[static_cast<size_t>(i)], o, t, c)) m = i;
    if (to[static_cast<size_t>(N)] < t) m = N;
    order.push_back({c, j, m});
  }
  return order;
}

double lifted_pattern_probability(const LiftedState& zeta, const PatternWindow& pw,
                                  const DropPolicy& policy, const ResourceParams& params_a,
                                  const ResourceParams& params_b) {
  const int N = pw.window();
  GammaMatrix gamma(params_a, params_b, pw);
  std::vector<PatternWindow::Entry> order =
      pw.order.empty() ? derive_order(zeta, pw, params_a, params_b) : pw.order;
  if (static_cast<int>(order.size()) != 2 * N)
    throw std::invalid_argument("lifted_pattern_probability: bad merged order");

  // Memoized reconstructed averages per (resource, event count).
  std::array<std::vector<std::optional<Vec>>, 2> cache;
  cache[0].resize(static_cast<size_t>(N) + 1);
  cache[1].resize(static_cast<size_t>(N) + 1);
  auto average_at = [&](Resource c, int k) -> const Vec& {
    auto& slot = cache[static_cast<int>(c)][static_cast<size_t>(k)];
    if (!slot) slot = reconstruct_running_average(zeta, gamma, c, k);
    return *slot;
  };

  double prob = 1.0;
  for (const auto& ev : order) {
    const Resource c = ev.resource;
    const Vec& own = average_at(c, ev.index);
    const Vec& cross = average_at(other(c), ev.cross);
    History ha{c == Resource::a ? own : cross};
    History hb{c == Resource::a ? cross : own};
    const Vec p = policy.evaluate(c, ha, hb);
    prob *= pattern_probability(p, pw.patterns(c)[static_cast<size_t>(ev.index)]);
  }
  return prob;
}

double norm_n1(std::span<const double> v, int n) {
  if (n < 1 || v.size() % static_cast<size_t>(n) != 0)
    throw std::invalid_argument("norm_n1: length must be a positive multiple of n");
  double best = 0.0;
  for (size_t off = 0; off < v.size(); off += static_cast<size_t>(n))
    best = std::max(best, norm1(v.subspan(off, static_cast<size_t>(n))));
  return best;
}

}  // namespace aimdsync
