#pragma once

#include <cstddef>

#include "stheat/grid.hpp"
#include "stheat/pmg.hpp"

namespace stheat {

/// How the source term is built.
///  Corrected:    f = -s(x) (sin t - 3 nu pi^2 cos t), for which s(x) cos t solves the PDE.
///  PaperLiteral: f = -s(x) (sin t - nu pi^2 cos t), literal nu pi^2 coefficient.
///  None:         f = 0 (used for homogeneous test problems).
enum class ForcingMode { Corrected, PaperLiteral, None };

struct HeatProblem {
  double nu = 0.1;
  ForcingMode forcing = ForcingMode::Corrected;
};

/// u(x, t) = sin(pi x) sin(pi y) sin(pi z) cos(t) at the interior points.
Field exact_solution(double t, std::size_t n);

Field source_term(double t, std::size_t n, ForcingMode mode, double nu);

/// Continuous PDE residual u_t - nu Lap u - f for the analytic u at one point.
double pde_residual(double x, double y, double z, double t, ForcingMode mode, double nu);

/// Explicit part of the right-hand side. It only depends on t here but keeps
/// the general f^E(u, t) signature.
Field f_explicit(const HeatProblem& problem, const Field& u, double t);

/// nu * L u for the chosen stencil.
Field f_implicit(const Field& u, StencilKind kind, double nu);

/// max |u - u_exact(t)| / max |u_exact(t)|
double rel_max_error(const Field& u, double t);

/// Spatial discretization of the heat problem on one grid: the IMEX split and
/// the implicit Euler solve used by the sweepers.
class HeatDiscretization {
 public:
  HeatDiscretization(HeatProblem problem, std::size_t n, StencilKind kind, MgConfig mg = {});

  std::size_t n() const { return n_; }
  StencilKind kind() const { return kind_; }
  const HeatProblem& problem() const { return problem_; }
  const MgConfig& mg_config() const { return mg_; }

  Field f_explicit(const Field& u, double t) const;
  Field f_implicit(const Field& u, double t) const;

  /// Solves u - dtm * f_implicit(u) = rhs, starting from `guess`.
  Field solve(double dtm, const Field& rhs, const Field& guess) const;

 private:
  HeatProblem problem_;
  std::size_t n_;
  StencilKind kind_;
  MgConfig mg_;
};

}  // namespace stheat
