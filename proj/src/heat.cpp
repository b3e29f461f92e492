#include "stheat/heat.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "stheat/errors.hpp"

namespace stheat {

namespace {

double forcing_coefficient(ForcingMode mode) {
  switch (mode) {
    case ForcingMode::Corrected:
      return 3.0;
    case ForcingMode::PaperLiteral:
      return 1.0;
    case ForcingMode::None:
      return 0.0;
  }
  return 0.0;
}

double sine_product(double x, double y, double z) {
  using std::numbers::pi;
  return std::sin(pi * x) * std::sin(pi * y) * std::sin(pi * z);
}

}  // namespace

namespace {

// amplitude * sin(pi x) sin(pi y) sin(pi z), evaluated separably.
Field scaled_sine_product(std::size_t n, double amplitude) {
  Field f(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(std::numbers::pi * f.coord(i));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) f(i, j, k) = amplitude * (s[i] * s[j] * s[k]);
  return f;
}

}  // namespace

Field exact_solution(double t, std::size_t n) { return scaled_sine_product(n, std::cos(t)); }

Field source_term(double t, std::size_t n, ForcingMode mode, double nu) {
  if (mode == ForcingMode::None) return Field(n);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double amp = -(std::sin(t) - forcing_coefficient(mode) * nu * pi2 * std::cos(t));
  return scaled_sine_product(n, amp);
}

double pde_residual(double x, double y, double z, double t, ForcingMode mode, double nu) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double s = sine_product(x, y, z);
  const double u_t = -s * std::sin(t);
  const double lap_u = -3.0 * pi2 * s * std::cos(t);
  const double f =
      mode == ForcingMode::None
          ? 0.0
          : -s * (std::sin(t) - forcing_coefficient(mode) * nu * pi2 * std::cos(t));
  return u_t - nu * lap_u - f;
}

Field f_explicit(const HeatProblem& problem, const Field& u, double t) {
  return source_term(t, u.n(), problem.forcing, problem.nu);
}

Field f_implicit(const Field& u, StencilKind kind, double nu) {
  Field out = apply_laplacian(u, kind);
  out *= nu;
  return out;
}

double rel_max_error(const Field& u, double t) {
  const Field ref = exact_solution(t, u.n());
  const double scale = ref.max_abs();
  // cos(t) at its zeros only rounds to ~1e-17, so treat that as zero as well
  if (scale <= 1e-14) throw DegenerateReference("rel_max_error: exact solution vanishes at this time");
  return max_abs_diff(u, ref) / scale;
}

HeatDiscretization::HeatDiscretization(HeatProblem problem, std::size_t n, StencilKind kind,
                                       MgConfig mg)
    : problem_(problem), n_(n), kind_(kind), mg_(mg) {
  if (!(problem.nu > 0.0)) throw InvalidArgument("HeatProblem: nu must be positive");
  if (!is_power_of_two_minus_one(n)) throw InvalidArgument("grid size must be of the form 2^k - 1");
}

Field HeatDiscretization::f_explicit(const Field& u, double t) const {
  return stheat::f_explicit(problem_, u, t);
}

Field HeatDiscretization::f_implicit(const Field& u, double /*t*/) const {
  return stheat::f_implicit(u, kind_, problem_.nu);
}

Field HeatDiscretization::solve(double dtm, const Field& rhs, const Field& guess) const {
  auto res = solve_implicit(problem_.nu * dtm, rhs, kind_, mg_, std::cref(guess));
  if (!res.converged) {
    throw SolverDiverged("implicit solve did not reach tolerance within max_cycles", res.cycles,
                         res.residual);
  }
  return std::move(res.solution);
}

}  // namespace stheat
