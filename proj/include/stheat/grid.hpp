#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stheat {

enum class StencilKind { SecondOrder7pt, FourthOrderCompact };

/// Grid function on the interior points of the unit cube, n points per
/// dimension, spacing h = 1/(n+1). The homogeneous Dirichlet boundary is
/// implied and never stored.
class Field {
 public:
  Field() = default;
  explicit Field(std::size_t n, double value = 0.0);

  std::size_t n() const { return n_; }
  double h() const { return 1.0 / static_cast<double>(n_ + 1); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * n_ + j) * n_ + k;
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) { return values_[index(i, j, k)]; }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[index(i, j, k)];
  }
  double& operator[](std::size_t idx) { return values_[idx]; }
  double operator[](std::size_t idx) const { return values_[idx]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// Coordinate of interior index i along any axis.
  double coord(std::size_t i) const { return static_cast<double>(i + 1) * h(); }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double a);
  /// this += a * x
  Field& axpy(double a, const Field& x);
  void fill(double v);

  double max_abs() const;
  bool all_finite() const;

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }
  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// max |a - b|
double max_abs_diff(const Field& a, const Field& b);

/// Samples g(x, y, z) at the interior points of an n^3 grid.
template <class Fn>
Field sample(std::size_t n, Fn&& g) {
  Field f(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) f(i, j, k) = g(f.coord(i), f.coord(j), f.coord(k));
  return f;
}

/// Discrete sine mode sin(a pi x) sin(b pi y) sin(c pi z) on the grid.
Field sine_mode(std::size_t n, int a, int b, int c);

/// Eigenvalue of the 7-point Laplacian for sine mode (a, b, c).
double eigenvalue_7pt(std::size_t n, int a, int b, int c);
/// Eigenvalue of the compact operator B^{-1} A for sine mode (a, b, c).
double eigenvalue_compact(std::size_t n, int a, int b, int c);

/// Standard 7-point Laplacian with zero Dirichlet closure.
Field laplacian_7pt(const Field& u);
/// 19-point Mehrstellen operator A (scaled by 1/h^2).
Field mehrstellen_lhs(const Field& u);
/// Mehrstellen weighting B: centre 1/2, face neighbours 1/12.
Field mehrstellen_weight(const Field& u);
/// Solves B w = r.
Field solve_mehrstellen_weight(const Field& r);

/// Discrete Laplacian of the requested kind. The compact kind returns w with B w = A u.
Field apply_laplacian(const Field& u, StencilKind kind);

/// Injection: coarse(I, J, K) = fine(2I+1, 2J+1, 2K+1). Requires fine.n() odd.
Field restrict_injection(const Field& fine);
/// Full-weighting (27-point) restriction used for multigrid residuals.
Field restrict_full_weighting(const Field& fine);
/// Trilinear interpolation onto the grid with 2n+1 points, zero boundary.
Field interpolate_trilinear(const Field& coarse);

bool is_power_of_two_minus_one(std::size_t n);

}  // namespace stheat
