#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stheat/grid.hpp"
#include "stheat/heat.hpp"
#include "stheat/perfmodel.hpp"
#include "stheat/quadrature.hpp"

namespace stheat {

/// Node values and cached right-hand side evaluations of one time step.
/// u[0] is the initial value of the step; sweeps never modify it.
struct SweepState {
  CollocationSet colloc;
  std::vector<Field> u;
  std::vector<Field> fe;
  std::vector<Field> fi;
  int k = 0;

  std::size_t num_nodes() const { return u.size(); }
  const Field& end_value() const { return u.back(); }
};

SweepState make_sweep_state(CollocationSet colloc, std::size_t n);

/// u_m := u0 for every node, caches evaluated at the node times.
void spread_initial(SweepState& state, const Field& u0, const HeatDiscretization& disc);

/// Replaces u[0] and re-evaluates the node-0 caches.
void set_initial_value(SweepState& state, const Field& u0, const HeatDiscretization& disc);

/// Re-evaluates f^E and f^I at every node.
void reevaluate(SweepState& state, const HeatDiscretization& disc);

/// dt * sum_i s(m, i) (f^E_i + f^I_i) for every substep m.
std::vector<Field> node_to_node_integrals(const SweepState& state);

/// One IMEX sweep. `tau`, when non-empty, holds one FAS correction per substep
/// and is added to the quadrature term.
void sweep(SweepState& state, const HeatDiscretization& disc, std::span<const Field> tau = {});

/// Max-norm defect of the collocation system (plus accumulated tau), relative
/// to the largest max|u[m]| over the nodes when that is non-zero.
double residual(const SweepState& state, std::span<const Field> tau = {});

struct StepReport {
  Field u_end;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Single-level SDC over [t_n, t_n + dt]: spread, then sweep until the residual
/// drops to `tol` or `max_iter` sweeps were done (at least one sweep).
StepReport sdc_step(const Field& u0, double t_n, double dt, double tol, int max_iter,
                    const HeatDiscretization& disc, std::size_t num_nodes = 5,
                    TimingRecord* timing = nullptr);

}  // namespace stheat
