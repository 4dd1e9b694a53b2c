#include "aimdsync/core.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace aimdsync {

double ResourceParams::alpha_sum() const {
  double s = 0.0;
  for (const auto& ag : agents) s += ag.alpha;
  return s;
}

double ResourceParams::max_beta() const {
  double m = 0.0;
  for (const auto& ag : agents) m = std::max(m, ag.beta);
  return m;
}

void ResourceParams::validate() const {
  if (agents.empty()) throw std::invalid_argument("resource: needs at least one agent");
  if (!(capacity > 0.0)) throw std::invalid_argument("resource: capacity must be positive");
  for (size_t i = 0; i < agents.size(); ++i) {
    const auto& ag = agents[i];
    if (!(ag.alpha > 0.0) || !std::isfinite(ag.alpha))
      throw std::invalid_argument("agent " + std::to_string(i) + ": alpha must be positive");
    if (!(ag.beta >= 0.0) || !(ag.beta < 1.0))
      throw std::invalid_argument("agent " + std::to_string(i) + ": beta must lie in [0, 1)");
  }
}

ResourceParams ResourceParams::from_vectors(const Vec& alpha, const Vec& beta,
                                            double capacity) {
  if (alpha.size() != beta.size())
    throw std::invalid_argument("alpha and beta must have equal length");
  ResourceParams p;
  p.capacity = capacity;
  p.agents.reserve(alpha.size());
  for (size_t i = 0; i < alpha.size(); ++i)
    p.agents.push_back({alpha[i], beta[i]});
  p.validate();
  return p;
}

bool DropPattern::is_full_drop() const {
  for (auto d : drops)
    if (!d) return false;
  return true;
}

bool DropPattern::is_no_drop() const {
  for (auto d : drops)
    if (d) return false;
  return true;
}

std::uint64_t DropPattern::mask() const {
  std::uint64_t m = 0;
  for (size_t i = 0; i < drops.size(); ++i)
    if (drops[i]) m |= (std::uint64_t{1} << i);
  return m;
}

std::string DropPattern::bits() const {
  std::string s(drops.size(), '0');
  for (size_t i = 0; i < drops.size(); ++i)
    if (drops[i]) s[i] = '1';
  return s;
}

DropPattern DropPattern::all_drop(int n) {
  return DropPattern{std::vector<std::uint8_t>(static_cast<size_t>(n), 1)};
}

DropPattern DropPattern::no_drop(int n) {
  return DropPattern{std::vector<std::uint8_t>(static_cast<size_t>(n), 0)};
}

DropPattern DropPattern::from_mask(int n, std::uint64_t mask) {
  DropPattern p = no_drop(n);
  for (int i = 0; i < n; ++i)
    if (mask & (std::uint64_t{1} << i)) p.drops[static_cast<size_t>(i)] = 1;
  return p;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec Matrix::apply(const Vec& x) const {
  if (static_cast<int>(x.size()) != cols_)
    throw std::invalid_argument("matrix-vector size mismatch");
  Vec y(static_cast<size_t>(rows_), 0.0);
  for (int r = 0; r < rows_; ++r) {
    double acc = 0.0;
    const double* row = a_.data() + size_t(r) * cols_;
    for (int c = 0; c < cols_; ++c) acc += row[c] * x[static_cast<size_t>(c)];
    y[static_cast<size_t>(r)] = acc;
  }
  return y;
}

Matrix Matrix::mul(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("matrix-matrix size mismatch");
  Matrix out(rows_, rhs.cols_);
  for (int r = 0; r < rows_; ++r)
    for (int k = 0; k < cols_; ++k) {
      const double v = (*this)(r, k);
      if (v == 0.0) continue;
      for (int c = 0; c < rhs.cols_; ++c) out(r, c) += v * rhs(k, c);
    }
  return out;
}

Matrix& Matrix::add_scaled(const Matrix& rhs, double s) {
  if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
    throw std::invalid_argument("matrix add size mismatch");
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += s * rhs.a_[i];
  return *this;
}

Matrix& Matrix::scale(double s) {
  for (auto& v : a_) v *= s;
  return *this;
}

double norm1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s;
}

double norm1_diff(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += std::fabs(x[i] - y[i]);
  return s;
}

bool is_simplex(const Vec& x, double tol) {
  if (x.empty()) return false;
  double s = 0.0;
  for (double v : x) {
    if (v < -tol || !std::isfinite(v)) return false;
    s += v;
  }
  return std::fabs(s - 1.0) <= tol;
}

Vec normalize_to_simplex(Vec raw) {
  double s = 0.0;
  for (double v : raw) {
    if (v < 0.0 || !std::isfinite(v))
      throw std::invalid_argument("normalize_to_simplex: entries must be nonnegative");
    s += v;
  }
  if (!(s > 0.0)) throw std::invalid_argument("normalize_to_simplex: sum must be positive");
  for (auto& v : raw) v /= s;
  return raw;
}

bool is_column_stochastic(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw std::invalid_argument("is_column_stochastic: matrix not square");
  for (int c = 0; c < m.cols(); ++c) {
    double s = 0.0;
    for (int r = 0; r < m.rows(); ++r) {
      if (m(r, c) < -tol) return false;
      s += m(r, c);
    }
    if (std::fabs(s - 1.0) > tol) return false;
  }
  return true;
}

Matrix build_aimd_matrix(const ResourceParams& params, const DropPattern& pattern) {
  const int n = params.size();
  if (pattern.size() != n)
    throw std::invalid_argument("build_aimd_matrix: pattern length mismatch");
  const double inv_alpha_sum = 1.0 / params.alpha_sum();
  Matrix m(n, n);
  for (int c = 0; c < n; ++c) {
    const double beta_c = pattern[c] ? params.agents[static_cast<size_t>(c)].beta : 1.0;
    const double gap = 1.0 - beta_c;
    for (int r = 0; r < n; ++r)
      m(r, c) = params.agents[static_cast<size_t>(r)].alpha * gap * inv_alpha_sum;
    m(c, c) += beta_c;
  }
  return m;
}

Vec apply_aimd(const ResourceParams& params, const DropPattern& pattern, const Vec& x) {
  const int n = params.size();
  if (pattern.size() != n || static_cast<int>(x.size()) != n)
    throw std::invalid_argument("apply_aimd: size mismatch");
  // y = beta(k) .* x + alpha * sum_j (1 - beta_j(k)) x_j / sum(alpha)
  double dropped = 0.0;
  for (int i = 0; i < n; ++i) {
    const double beta_i = pattern[i] ? params.agents[static_cast<size_t>(i)].beta : 1.0;
    dropped += (1.0 - beta_i) * x[static_cast<size_t>(i)];
  }
  const double share = dropped / params.alpha_sum();
  Vec y(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double beta_i = pattern[i] ? params.agents[static_cast<size_t>(i)].beta : 1.0;
    y[static_cast<size_t>(i)] =
        beta_i * x[static_cast<size_t>(i)] + params.agents[static_cast<size_t>(i)].alpha * share;
  }
  return y;
}

double inter_event_time(const ResourceParams& params, const DropPattern& pattern,
                        const Vec& x) {
  const int n = params.size();
  if (pattern.size() != n || static_cast<int>(x.size()) != n)
    throw std::invalid_argument("inter_event_time: size mismatch");
  double kept = 0.0;
  for (int i = 0; i < n; ++i) {
    const double beta_i = pattern[i] ? params.agents[static_cast<size_t>(i)].beta : 1.0;
    kept += beta_i * x[static_cast<size_t>(i)];
  }
  const double t = params.capacity * (1.0 - kept) / params.alpha_sum();
  return t > 0.0 ? t : 0.0;
}

double contraction_factor(double beta_resource, int N) {
  if (!(beta_resource >= 0.0) || !(beta_resource < 1.0))
    throw std::invalid_argument("contraction_factor: beta must lie in [0, 1)");
  if (N < 1) throw std::invalid_argument("contraction_factor: N must be >= 1");
  double sum = 0.0, pw = 1.0;
  for (int i = 1; i <= N; ++i) {
    pw *= beta_resource;
    sum += pw;
  }
  return sum / N;
}

}  // namespace aimdsync
