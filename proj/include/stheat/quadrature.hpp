#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stheat {

/// Collocation nodes on one time step together with the integration
/// matrices used by the collocation system and the SDC sweeps.
///
/// Weights are dimensionless: multiply by dt() to integrate over physical time.
struct CollocationSet {
  std::vector<double> nodes;  ///< t_0 < ... < t_M, endpoints included
  Eigen::MatrixXd q;          ///< q(m, i) = int_{t_0}^{t_m} l_i(s) ds / dt
  Eigen::MatrixXd s;          ///< s(m, i) = q(m+1, i) - q(m, i)
  std::vector<double> dtau;   ///< t_{m+1} - t_m

  std::size_t size() const { return nodes.size(); }
  double t0() const { return nodes.front(); }
  double t1() const { return nodes.back(); }
  double dt() const { return nodes.back() - nodes.front(); }
};

/// Gauss-Lobatto points of the given count, mapped affinely onto [t0, t1].
std::vector<double> lobatto_nodes(std::size_t count, double t0, double t1);

CollocationSet build_collocation(std::span<const double> nodes);

/// Convenience: Lobatto collocation set of `count` nodes on [t0, t0 + dt].
CollocationSet lobatto_collocation(std::size_t count, double t0, double dt);

/// Lagrange interpolation matrix P (fine x coarse): fine = P * coarse.
/// The coarse nodes have to be a subset of the fine nodes.
Eigen::MatrixXd time_interp_matrix(std::span<const double> coarse_nodes,
                                   std::span<const double> fine_nodes);

/// Index of each coarse node inside the fine node set (restriction in time
/// is injection at these indices).
std::vector<std::size_t> coincident_nodes(std::span<const double> coarse_nodes,
                                          std::span<const double> fine_nodes);

}  // namespace stheat
