#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "stheat/heat.hpp"
#include "stheat/perfmodel.hpp"
#include "stheat/sweeper.hpp"

namespace stheat {

struct LevelConfig {
  std::size_t n = 31;
  StencilKind kind = StencilKind::FourthOrderCompact;
  std::size_t num_nodes = 5;
};

/// One rung of the space-time hierarchy.
struct Level {
  std::size_t index = 0;  ///< 0 = fine, 1 = coarse
  HeatDiscretization disc;
  std::size_t num_nodes;
  SweepState state;
  std::vector<Field> tau;  ///< FAS correction per substep; empty on the fine level
};

/// Spatial restriction between level grids: identity for equal sizes,
/// injection for nested grids.
Field restrict_space(const Field& fine, std::size_t n_coarse);
/// Spatial interpolation between level grids: identity or trilinear.
Field interpolate_space(const Field& coarse, std::size_t n_fine);

/// Two-level MLSDC hierarchy for one time step. Owned by a single time rank.
class Hierarchy {
 public:
  Hierarchy(HeatProblem problem, LevelConfig fine, LevelConfig coarse, MgConfig mg = {},
            int coarse_sweeps = 1);

  /// Rebuilds nodes and transfer matrices for [t0, t0 + dt]; clears tau.
  void begin_step(double t0, double dt);

  Level& fine() { return fine_; }
  Level& coarse() { return coarse_; }
  const Level& fine() const { return fine_; }
  const Level& coarse() const { return coarse_; }
  const Eigen::MatrixXd& time_interpolation() const { return interp_; }
  const std::vector<std::size_t>& coarse_in_fine() const { return injection_; }
  const std::vector<Field>& coarse_old() const { return coarse_old_; }
  int coarse_sweeps() const { return coarse_sweeps_; }

  TimingRecord& timing() { return timing_; }
  const TimingRecord& timing() const { return timing_; }

  void spread(const Field& u0);
  void set_fine_initial(const Field& u0);
  void set_coarse_initial(const Field& u0);

  /// Coarse u_m := injection of the fine value at the coincident node;
  /// coarse caches re-evaluated; the restricted values are saved as coarse_old.
  void restrict_state();
  /// Computes and stores the FAS correction on the coarse level.
  const std::vector<Field>& fas_correction();
  /// Fine u_m += I_space(P_time (coarse u - coarse_old))_m; fine caches re-evaluated.
  void coarse_correction();

  void fine_sweep();
  void coarse_sweep();
  double fine_residual() const;
  /// Coarse residual including the accumulated FAS correction.
  double coarse_residual() const;

  /// restrict + FAS, one round of coarse sweeps, coarse correction.
  void coarse_predictor();
  /// fine sweep, restrict + FAS, coarse sweeps, coarse correction; returns the fine residual.
  double iteration();

 private:
  Level fine_;
  Level coarse_;
  int coarse_sweeps_;
  Eigen::MatrixXd interp_;
  std::vector<std::size_t> injection_;
  std::vector<Field> coarse_old_;
  TimingRecord timing_;
};

/// Serial MLSDC over one time step. The step starts from the spread initial
/// value followed by one coarse predictor sweep when `coarse_predictor` is set.
StepReport mlsdc_step(Hierarchy& h, const Field& u0, double t_n, double dt, double tol,
                      int max_iter, bool coarse_predictor = true);

}  // namespace stheat
