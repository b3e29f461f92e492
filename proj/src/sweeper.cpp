#include "stheat/sweeper.hpp"

#include <algorithm>
#include <limits>

#include "stheat/errors.hpp"

namespace stheat {

SweepState make_sweep_state(CollocationSet colloc, std::size_t n) {
  SweepState s;
  const std::size_t nodes = colloc.size();
  s.colloc = std::move(colloc);
  s.u.assign(nodes, Field(n));
  s.fe.assign(nodes, Field(n));
  s.fi.assign(nodes, Field(n));
  return s;
}

void spread_initial(SweepState& state, const Field& u0, const HeatDiscretization& disc) {
  for (auto& um : state.u) um = u0;
  state.k = 0;
  reevaluate(state, disc);
}

void set_initial_value(SweepState& state, const Field& u0, const HeatDiscretization& disc) {
  state.u[0] = u0;
  const double t0 = state.colloc.nodes[0];
  state.fe[0] = disc.f_explicit(state.u[0], t0);
  state.fi[0] = disc.f_implicit(state.u[0], t0);
}

void reevaluate(SweepState& state, const HeatDiscretization& disc) {
  for (std::size_t m = 0; m < state.num_nodes(); ++m) {
    const double t = state.colloc.nodes[m];
    state.fe[m] = disc.f_explicit(state.u[m], t);
    state.fi[m] = disc.f_implicit(state.u[m], t);
  }
}

std::vector<Field> node_to_node_integrals(const SweepState& state) {
  const auto& cs = state.colloc;
  const std::size_t nodes = state.num_nodes();
  const double dt = cs.dt();
  std::vector<Field> out;
  out.reserve(nodes - 1);
  for (std::size_t m = 0; m + 1 < nodes; ++m) {
    Field acc(state.u[0].n());
    for (std::size_t i = 0; i < nodes; ++i) {
      const double w = dt * cs.s(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i));
      acc.axpy(w, state.fe[i]);
      acc.axpy(w, state.fi[i]);
    }
    out.push_back(std::move(acc));
  }
  return out;
}

void sweep(SweepState& state, const HeatDiscretization& disc, std::span<const Field> tau) {
  const auto& cs = state.colloc;
  const std::size_t nodes = state.num_nodes();
  if (!tau.empty() && tau.size() != nodes - 1) {
    throw InvalidArgument("sweep: need one FAS correction per substep");
  }
  std::vector<Field> integrals = node_to_node_integrals(state);
  if (!tau.empty()) {
    for (std::size_t m = 0; m + 1 < nodes; ++m) integrals[m] += tau[m];
  }
  const std::vector<Field> fe_old = state.fe;
  const std::vector<Field> fi_old = state.fi;

  for (std::size_t m = 0; m + 1 < nodes; ++m) {
    const double dtm = cs.dtau[m];
    const double t_next = cs.nodes[m + 1];
    Field rhs = state.u[m];
    rhs.axpy(dtm, state.fe[m]);
    rhs.axpy(-dtm, fe_old[m]);
    rhs.axpy(-dtm, fi_old[m + 1]);
    rhs += integrals[m];
    if (!rhs.all_finite()) {
      throw SolverDiverged("sweep: iterate is no longer finite", state.k,
                           std::numeric_limits<double>::infinity());
    }
    state.u[m + 1] = disc.solve(dtm, rhs, state.u[m + 1]);
    state.fe[m + 1] = disc.f_explicit(state.u[m + 1], t_next);
    state.fi[m + 1] = disc.f_implicit(state.u[m + 1], t_next);
  }
  ++state.k;
}

double residual(const SweepState& state, std::span<const Field> tau) {
  const auto& cs = state.colloc;
  const std::size_t nodes = state.num_nodes();
  const double dt = cs.dt();
  double worst = 0.0;
  Field tau_sum(state.u[0].n());
  for (std::size_t m = 1; m < nodes; ++m) {
    if (!tau.empty()) tau_sum += tau[m - 1];
    Field r = state.u[0];
    for (std::size_t i = 0; i < nodes; ++i) {
      const double w = dt * cs.q(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(i));
      r.axpy(w, state.fe[i]);
      r.axpy(w, state.fi[i]);
    }
    if (!tau.empty()) r += tau_sum;
    r -= state.u[m];
    worst = std::max(worst, r.max_abs());
  }
  // scale by the solution over the whole step, not just U0, which may sit near a zero of u
  double scale = 0.0;
  for (const Field& u : state.u) scale = std::max(scale, u.max_abs());
  return scale > 0.0 ? worst / scale : worst;
}

StepReport sdc_step(const Field& u0, double t_n, double dt, double tol, int max_iter,
                    const HeatDiscretization& disc, std::size_t num_nodes, TimingRecord* timing) {
  if (!(tol >= 0.0)) throw InvalidArgument("sdc_step: tol must be non-negative");
  if (max_iter < 1) throw InvalidArgument("sdc_step: max_iter must be >= 1");
  SweepState state = make_sweep_state(lobatto_collocation(num_nodes, t_n, dt), u0.n());
  spread_initial(state, u0, disc);
  StepReport rep;
  for (int k = 1; k <= max_iter; ++k) {
    {
      ScopedTimer timer(timing != nullptr ? &timing->fine_sweep : nullptr);
      sweep(state, disc);
    }
    if (timing != nullptr) ++timing->fine_sweeps;
    rep.iterations = k;
    rep.residual = residual(state);
    if (rep.residual <= tol) {
      rep.converged = true;
      break;
    }
  }
  rep.u_end = state.end_value();
  return rep;
}

}  // namespace stheat
