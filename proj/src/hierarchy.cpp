#include "stheat/hierarchy.hpp"

#include "stheat/errors.hpp"
#include "stheat/quadrature.hpp"

namespace stheat {

Field restrict_space(const Field& fine, std::size_t n_coarse) {
  if (fine.n() == n_coarse) return fine;
  if (fine.n() != 2 * n_coarse + 1) {
    throw UnsupportedConfiguration("spatial grids are not nested");
  }
  return restrict_injection(fine);
}

Field interpolate_space(const Field& coarse, std::size_t n_fine) {
  if (coarse.n() == n_fine) return coarse;
  if (n_fine != 2 * coarse.n() + 1) {
    throw UnsupportedConfiguration("spatial grids are not nested");
  }
  return interpolate_trilinear(coarse);
}

Hierarchy::Hierarchy(HeatProblem problem, LevelConfig fine, LevelConfig coarse, MgConfig mg,
                     int coarse_sweeps)
    : fine_{0, HeatDiscretization(problem, fine.n, fine.kind, mg), fine.num_nodes, {}, {}},
      coarse_{1, HeatDiscretization(problem, coarse.n, coarse.kind, mg), coarse.num_nodes, {}, {}},
      coarse_sweeps_(coarse_sweeps) {
  if (coarse.n != fine.n && fine.n != 2 * coarse.n + 1) {
    throw UnsupportedConfiguration("coarse grid must equal the fine grid or have (n_fine - 1) / 2 points");
  }
  if (coarse.num_nodes > fine.num_nodes) {
    throw UnsupportedConfiguration("coarse level cannot have more nodes than the fine level");
  }
  if (coarse_sweeps < 1) throw InvalidArgument("coarse_sweeps must be >= 1");
  begin_step(0.0, 1.0);
}

void Hierarchy::begin_step(double t0, double dt) {
  fine_.state = make_sweep_state(lobatto_collocation(fine_.num_nodes, t0, dt), fine_.disc.n());
  coarse_.state = make_sweep_state(lobatto_collocation(coarse_.num_nodes, t0, dt), coarse_.disc.n());
  injection_ = coincident_nodes(coarse_.state.colloc.nodes, fine_.state.colloc.nodes);
  interp_ = time_interp_matrix(coarse_.state.colloc.nodes, fine_.state.colloc.nodes);
  coarse_.tau.clear();
  coarse_old_.clear();
}

void Hierarchy::spread(const Field& u0) { spread_initial(fine_.state, u0, fine_.disc); }

void Hierarchy::set_fine_initial(const Field& u0) { set_initial_value(fine_.state, u0, fine_.disc); }

void Hierarchy::set_coarse_initial(const Field& u0) {
  set_initial_value(coarse_.state, u0, coarse_.disc);
}

void Hierarchy::restrict_state() {
  ScopedTimer timer(&timing_.restrict_fas);
  const std::size_t nc = coarse_.disc.n();
  for (std::size_t m = 0; m < coarse_.state.num_nodes(); ++m) {
    coarse_.state.u[m] = restrict_space(fine_.state.u[injection_[m]], nc);
  }
  reevaluate(coarse_.state, coarse_.disc);
  coarse_old_ = coarse_.state.u;
}

const std::vector<Field>& Hierarchy::fas_correction() {
  ScopedTimer timer(&timing_.restrict_fas);
  const std::size_t nc = coarse_.disc.n();
  // tau_m = R(fine integral over coarse substep m) - coarse integral of the restricted state
  const std::vector<Field> fine_int = node_to_node_integrals(fine_.state);
  const std::vector<Field> coarse_int = node_to_node_integrals(coarse_.state);
  std::vector<Field> tau;
  tau.reserve(coarse_int.size());
  for (std::size_t m = 0; m < coarse_int.size(); ++m) {
    Field acc(fine_.disc.n());
    for (std::size_t j = injection_[m]; j < injection_[m + 1]; ++j) acc += fine_int[j];
    Field t = restrict_space(acc, nc);
    t -= coarse_int[m];
    tau.push_back(std::move(t));
  }
  coarse_.tau = std::move(tau);
  return coarse_.tau;
}

void Hierarchy::coarse_correction() {
  ScopedTimer timer(&timing_.interpolation);
  const std::size_t nc_nodes = coarse_.state.num_nodes();
  const std::size_t nf = fine_.disc.n();
  std::vector<Field> delta;
  delta.reserve(nc_nodes);
  for (std::size_t c = 0; c < nc_nodes; ++c) delta.push_back(coarse_.state.u[c] - coarse_old_[c]);
  for (std::size_t f = 0; f < fine_.state.num_nodes(); ++f) {
    Field d(coarse_.disc.n());
    for (std::size_t c = 0; c < nc_nodes; ++c) {
      const double w = interp_(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(c));
      if (w != 0.0) d.axpy(w, delta[c]);
    }
    fine_.state.u[f] += interpolate_space(d, nf);
  }
  reevaluate(fine_.state, fine_.disc);
}

void Hierarchy::fine_sweep() {
  {
    ScopedTimer timer(&timing_.fine_sweep);
    sweep(fine_.state, fine_.disc);
  }
  ++timing_.fine_sweeps;
}

void Hierarchy::coarse_sweep() {
  {
    ScopedTimer timer(&timing_.coarse_sweep);
    sweep(coarse_.state, coarse_.disc, coarse_.tau);
  }
  ++timing_.coarse_sweeps;
}

double Hierarchy::fine_residual() const { return residual(fine_.state); }

double Hierarchy::coarse_residual() const { return residual(coarse_.state, coarse_.tau); }

void Hierarchy::coarse_predictor() {
  restrict_state();
  fas_correction();
  for (int s = 0; s < coarse_sweeps_; ++s) coarse_sweep();
  coarse_correction();
}

double Hierarchy::iteration() {
  fine_sweep();
  restrict_state();
  fas_correction();
  for (int s = 0; s < coarse_sweeps_; ++s) coarse_sweep();
  coarse_correction();
  return fine_residual();
}

StepReport mlsdc_step(Hierarchy& h, const Field& u0, double t_n, double dt, double tol,
                      int max_iter, bool coarse_predictor) {
  if (max_iter < 1) throw InvalidArgument("mlsdc_step: max_iter must be >= 1");
  h.begin_step(t_n, dt);
  h.spread(u0);
  if (coarse_predictor) h.coarse_predictor();
  StepReport rep;
  for (int k = 1; k <= max_iter; ++k) {
    rep.residual = h.iteration();
    rep.iterations = k;
    if (rep.residual <= tol) {
      rep.converged = true;
      break;
    }
  }
  rep.u_end = h.fine().state.end_value();
  return rep;
}

}  // namespace stheat
