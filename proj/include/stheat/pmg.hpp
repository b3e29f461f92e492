#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "stheat/grid.hpp"

namespace stheat {

/// Smoother for the compact kind. Red-black ordering does not decouple the
/// 19-point stencil; eight parity colours do.
enum class CompactSmoother { MulticolourGaussSeidel, WeightedJacobi };

struct MgConfig {
  int pre_smooth = 2;
  int post_smooth = 2;
  int max_cycles = 50;
  double tol = 1e-12;            ///< relative residual, max norm
  std::size_t coarsest_n = 1;    ///< direct solve at this size (at most 7)
  CompactSmoother compact_smoother = CompactSmoother::MulticolourGaussSeidel;
  double jacobi_weight = 0.85;   ///< used with CompactSmoother::WeightedJacobi
};

struct MgResult {
  Field solution;
  int cycles = 0;
  double residual = 0.0;  ///< final relative residual
  bool converged = true;
};

/// Operator of the implicit Euler system on one grid:
///   SecondOrder7pt:      u - lambda * L7 u
///   FourthOrderCompact:  B u - lambda * A u
Field apply_implicit_operator(const Field& u, double lambda, StencilKind kind);

/// Solves the implicit Euler system for the given right-hand side b:
///   (I - lambda L7) u = b          (SecondOrder7pt)
///   (B - lambda A) u = B b         (FourthOrderCompact)
/// with geometric V-cycles down to cfg.coarsest_n.
///
/// Throws SolverDiverged if the residual grows over three consecutive cycles.
MgResult solve_implicit(double lambda, const Field& rhs, StencilKind kind,
                        const MgConfig& cfg = {},
                        std::optional<std::reference_wrapper<const Field>> guess = std::nullopt);

}  // namespace stheat
