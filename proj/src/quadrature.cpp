#include "stheat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stheat/errors.hpp"

namespace stheat {

namespace {

struct LegendreEval {
  double p;    // P_n(x)
  double dp;   // P_n'(x)
  double d2p;  // P_n''(x)
};

// Valid for |x| < 1 only; the derivative relations are singular at the endpoints.
LegendreEval legendre(std::size_t n, double x) {
  double p_prev = 1.0;
  double p = x;
  for (std::size_t k = 2; k <= n; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    p_prev = p;
    p = p_next;
  }
  const double nn = static_cast<double>(n);
  const double one_minus_x2 = 1.0 - x * x;
  const double dp = nn * (p_prev - x * p) / one_minus_x2;
  const double d2p = (2.0 * x * dp - nn * (nn + 1.0) * p) / one_minus_x2;
  return {p, dp, d2p};
}

// Root of P_n' inside [lo, hi], where P_n' changes sign.
double bracketed_root(std::size_t n, double lo, double hi) {
  double f_lo = legendre(n, lo).dp;
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const auto ev = legendre(n, x);
    if (ev.dp == 0.0) return x;
    if ((ev.dp < 0.0) == (f_lo < 0.0)) {
      lo = x;
      f_lo = ev.dp;
    } else {
      hi = x;
    }
    double next = x - ev.dp / ev.d2p;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    if (step < 1e-14 || hi - lo < 1e-14) break;
  }
  return x;
}

std::vector<double> lobatto_reference(std::size_t count) {
  const std::size_t n = count - 1;
  std::vector<double> x{-1.0};
  if (count > 2) {
    const std::size_t samples = 64 * count;
    double prev_x = -1.0 + 1e-12;
    double prev_f = legendre(n, prev_x).dp;
    for (std::size_t s = 1; s <= samples; ++s) {
      const double cur_x = (s == samples) ? 1.0 - 1e-12 : -1.0 + 2.0 * s / samples;
      const double cur_f = legendre(n, cur_x).dp;
      if ((prev_f < 0.0) != (cur_f < 0.0)) x.push_back(bracketed_root(n, prev_x, cur_x));
      prev_x = cur_x;
      prev_f = cur_f;
    }
  }
  x.push_back(1.0);
  if (x.size() != count) {
    throw InvalidArgument("lobatto_nodes: root isolation failed for count " +
                          std::to_string(count));
  }
  // exact symmetry about 0
  for (std::size_t j = 0; j < count / 2; ++j) {
    const double v = 0.5 * (x[count - 1 - j] - x[j]);
    x[j] = -v;
    x[count - 1 - j] = v;
  }
  if (count % 2 == 1) x[count / 2] = 0.0;
  return x;
}

void check_increasing(std::span<const double> nodes, const char* who) {
  if (nodes.size() < 2) throw InvalidArgument(std::string(who) + ": need at least 2 nodes");
  for (std::size_t m = 1; m < nodes.size(); ++m) {
    if (!(nodes[m] > nodes[m - 1])) {
      throw InvalidArgument(std::string(who) + ": nodes must be strictly increasing");
    }
  }
}

}  // namespace

std::vector<double> lobatto_nodes(std::size_t count, double t0, double t1) {
  if (count < 2) throw InvalidArgument("lobatto_nodes: count must be >= 2");
  if (!(t1 > t0)) throw InvalidArgument("lobatto_nodes: require t1 > t0");
  const auto ref = lobatto_reference(count);
  std::vector<double> t(count);
  const double len = t1 - t0;
  for (std::size_t m = 0; m < count; ++m) t[m] = t0 + 0.5 * (ref[m] + 1.0) * len;
  t.front() = t0;
  t.back() = t1;
  return t;
}

CollocationSet build_collocation(std::span<const double> nodes) {
  check_increasing(nodes, "build_collocation");
  const auto count = static_cast<Eigen::Index>(nodes.size());
  const double t0 = nodes.front();
  const double len = nodes.back() - t0;

  // Work on normalized times tau in [0, 1]; Lagrange basis l_i(tau) = sum_k c(k, i) tau^k
  // with V c = I, V(j, k) = tau_j^k.
  Eigen::VectorXd tau(count);
  for (Eigen::Index m = 0; m < count; ++m) tau(m) = (nodes[m] - t0) / len;

  Eigen::MatrixXd vander(count, count);
  Eigen::MatrixXd integ(count, count);  // integ(m, k) = tau_m^{k+1} / (k+1)
  for (Eigen::Index j = 0; j < count; ++j) {
    double pw = 1.0;
    for (Eigen::Index k = 0; k < count; ++k) {
      vander(j, k) = pw;
      pw *= tau(j);
      integ(j, k) = pw / static_cast<double>(k + 1);
    }
  }
  // q = integ * V^{-1}  <=>  V^T q^T = integ^T
  Eigen::MatrixXd q = vander.transpose().fullPivLu().solve(integ.transpose()).transpose();
  q.row(0).setZero();

  CollocationSet cs;
  cs.nodes.assign(nodes.begin(), nodes.end());
  cs.q = std::move(q);
  cs.s.resize(count - 1, count);
  for (Eigen::Index m = 0; m + 1 < count; ++m) cs.s.row(m) = cs.q.row(m + 1) - cs.q.row(m);
  cs.dtau.resize(nodes.size() - 1);
  for (std::size_t m = 0; m + 1 < nodes.size(); ++m) cs.dtau[m] = nodes[m + 1] - nodes[m];
  return cs;
}

CollocationSet lobatto_collocation(std::size_t count, double t0, double dt) {
  const auto nodes = lobatto_nodes(count, t0, t0 + dt);
  return build_collocation(nodes);
}

std::vector<std::size_t> coincident_nodes(std::span<const double> coarse_nodes,
                                          std::span<const double> fine_nodes) {
  check_increasing(coarse_nodes, "coincident_nodes");
  check_increasing(fine_nodes, "coincident_nodes");
  const double scale = std::max(1.0, std::abs(fine_nodes.back() - fine_nodes.front()));
  std::vector<std::size_t> idx;
  idx.reserve(coarse_nodes.size());
  for (double tc : coarse_nodes) {
    auto it = std::find_if(fine_nodes.begin(), fine_nodes.end(),
                           [&](double tf) { return std::abs(tf - tc) <= 1e-12 * scale; });
    if (it == fine_nodes.end()) {
      throw UnsupportedConfiguration("coarse time node is not part of the fine node set");
    }
    idx.push_back(static_cast<std::size_t>(it - fine_nodes.begin()));
  }
  return idx;
}

Eigen::MatrixXd time_interp_matrix(std::span<const double> coarse_nodes,
                                   std::span<const double> fine_nodes) {
  const auto idx = coincident_nodes(coarse_nodes, fine_nodes);
  const auto nc = static_cast<Eigen::Index>(coarse_nodes.size());
  const auto nf = static_cast<Eigen::Index>(fine_nodes.size());
  Eigen::MatrixXd p(nf, nc);
  for (Eigen::Index f = 0; f < nf; ++f) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      double l = 1.0;
      for (Eigen::Index j = 0; j < nc; ++j) {
        if (j == c) continue;
        l *= (fine_nodes[f] - coarse_nodes[j]) / (coarse_nodes[c] - coarse_nodes[j]);
      }
      p(f, c) = l;
    }
  }
  // coincident rows are exact unit vectors
  for (Eigen::Index c = 0; c < nc; ++c) {
    p.row(static_cast<Eigen::Index>(idx[c])).setZero();
    p(static_cast<Eigen::Index>(idx[c]), c) = 1.0;
  }
  return p;
}

}  // namespace stheat
