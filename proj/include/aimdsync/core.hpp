#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aimdsync {

using Vec = std::vector<double>;

/// Absolute tolerance for simplex and column-stochasticity checks.
inline constexpr double kSimplexTol = 1e-12;

enum class Resource : int { a = 0, b = 1 };

inline constexpr const char* resource_name(Resource c) {
  return c == Resource::a ? "a" : "b";
}
inline constexpr Resource other(Resource c) {
  return c == Resource::a ? Resource::b : Resource::a;
}

/// Per-agent AIMD parameters: additive-increase rate and
/// multiplicative-decrease factor.
struct AgentParams {
  double alpha = 0.0;  // growth rate, > 0
  double beta = 0.0;   // decrease factor, in [0, 1)
};

/// One shared resource and the agents competing for it.
struct ResourceParams {
  std::vector<AgentParams> agents;
  double capacity = 1.0;

  int size() const { return static_cast<int>(agents.size()); }
  double alpha_sum() const;
  double max_beta() const;

  /// Throws std::invalid_argument if any parameter is out of range.
  void validate() const;

  static ResourceParams from_vectors(const Vec& alpha, const Vec& beta,
                                     double capacity = 1.0);
};

/// Which agents respond to a capacity event with a multiplicative decrease.
struct DropPattern {
  std::vector<std::uint8_t> drops;  // 1 = agent backs off

  int size() const { return static_cast<int>(drops.size()); }
  bool operator[](int i) const { return drops[static_cast<size_t>(i)] != 0; }
  bool is_full_drop() const;
  bool is_no_drop() const;
  std::uint64_t mask() const;  // bit i = agent i
  std::string bits() const;    // "0110...", agent 0 first

  static DropPattern all_drop(int n);
  static DropPattern no_drop(int n);
  static DropPattern from_mask(int n, std::uint64_t mask);

  bool operator==(const DropPattern&) const = default;
};

/// Dense row-major matrix with just the operations this project needs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * cols, 0.0) {}

  static Matrix identity(int n);

  double& operator()(int r, int c) { return a_[size_t(r) * cols_ + c]; }
  double operator()(int r, int c) const { return a_[size_t(r) * cols_ + c]; }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Vec& data() const { return a_; }

  Vec apply(const Vec& x) const;
  Matrix mul(const Matrix& rhs) const;
  Matrix& add_scaled(const Matrix& rhs, double s);
  Matrix& scale(double s);

 private:
  int rows_ = 0, cols_ = 0;
  Vec a_;
};

inline Vec operator*(const Matrix& m, const Vec& x) { return m.apply(x); }
inline Matrix operator*(const Matrix& m, const Matrix& r) { return m.mul(r); }

double norm1(std::span<const double> v);
double norm1_diff(std::span<const double> x, std::span<const double> y);

bool is_simplex(const Vec& x, double tol = kSimplexTol);

/// Scales a nonnegative vector with positive sum onto the simplex.
Vec normalize_to_simplex(Vec raw);

/// True iff the matrix is square, entrywise >= -tol, and every column sums
/// to 1 within tol. Throws on non-square input.
bool is_column_stochastic(const Matrix& m, double tol = kSimplexTol);

/// The AIMD matrix diag(beta(k)) + (e^T alpha)^{-1} alpha (e^T - beta(k)^T)
/// for the given drop pattern. Column-stochastic by construction.
Matrix build_aimd_matrix(const ResourceParams& params, const DropPattern& pattern);

/// One capacity-event cycle applied to a simplex point, computed in O(n)
/// without materializing the matrix. Matches build_aimd_matrix(...) * x.
Vec apply_aimd(const ResourceParams& params, const DropPattern& pattern, const Vec& x);

/// Time between this capacity event and the next one:
/// T = (C - sum_i beta_i(k) x_i C) / sum_i alpha_i, with x on the simplex.
/// Zero for the no-drop pattern.
double inter_event_time(const ResourceParams& params, const DropPattern& pattern,
                        const Vec& x);

/// (1/N) sum_{i=1..N} beta^i, the window contraction factor of the
/// full-drop lifted matrix. Requires 0 <= beta < 1.
double contraction_factor(double beta_resource, int N);

}  // namespace aimdsync
