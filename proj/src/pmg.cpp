#include "stheat/pmg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stheat/errors.hpp"

namespace stheat {

namespace {

// One grid of the V-cycle hierarchy, stored with a zero boundary layer so that
// stencil loops need no bounds checks.
struct MgGrid {
  std::size_t n = 0;
  std::size_t stride_j = 0;  // n + 2
  std::size_t stride_i = 0;  // (n + 2)^2
  // op(u) = c_centre u + c_face * sum(faces) + c_edge * sum(edges)
  double c_centre = 0.0;
  double c_face = 0.0;
  double c_edge = 0.0;
  std::vector<double> u, f, r;

  MgGrid(std::size_t n_, double lambda, StencilKind kind)
      : n(n_), stride_j(n_ + 2), stride_i((n_ + 2) * (n_ + 2)) {
    const double h = 1.0 / static_cast<double>(n + 1);
    const double lh2 = lambda / (h * h);
    if (kind == StencilKind::SecondOrder7pt) {
      c_centre = 1.0 + 6.0 * lh2;
      c_face = -lh2;
    } else {
      c_centre = 0.5 + 4.0 * lh2;
      c_face = 1.0 / 12.0 - lh2 / 3.0;
      c_edge = -lh2 / 6.0;
    }
    const std::size_t len = stride_i * (n + 2);
    u.assign(len, 0.0);
    f.assign(len, 0.0);
    r.assign(len, 0.0);
  }

  std::size_t at(std::size_t i, std::size_t j, std::size_t k) const {
    return (i + 1) * stride_i + (j + 1) * stride_j + (k + 1);
  }

  double faces(const std::vector<double>& v, std::size_t p) const {
    return v[p - stride_i] + v[p + stride_i] + v[p - stride_j] + v[p + stride_j] + v[p - 1] +
           v[p + 1];
  }

  double edges(const std::vector<double>& v, std::size_t p) const {
    const std::size_t si = stride_i, sj = stride_j;
    return v[p - si - sj] + v[p - si + sj] + v[p + si - sj] + v[p + si + sj] + v[p - si - 1] +
           v[p - si + 1] + v[p + si - 1] + v[p + si + 1] + v[p - sj - 1] + v[p - sj + 1] +
           v[p + sj - 1] + v[p + sj + 1];
  }

  double apply(const std::vector<double>& v, std::size_t p) const {
    double val = c_centre * v[p] + c_face * faces(v, p);
    if (c_edge != 0.0) val += c_edge * edges(v, p);
    return val;
  }

  // r = f - op(u); returns max |r|
  double residual() {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t p = at(i, j, k);
          r[p] = f[p] - apply(u, p);
          m = std::max(m, std::abs(r[p]));
        }
    return m;
  }

  void red_black_gauss_seidel() {
    for (std::size_t colour = 0; colour < 2; ++colour)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t k0 = (i + j + colour) % 2;
          for (std::size_t k = k0; k < n; k += 2) {
            const std::size_t p = at(i, j, k);
            u[p] = (f[p] - c_face * faces(u, p)) / c_centre;
          }
        }
  }

  // Points whose indices share all three parities are never stencil neighbours,
  // so each of the eight colour classes can be relaxed independently.
  void multicolour_gauss_seidel() {
    for (std::size_t ci = 0; ci < 2; ++ci)
      for (std::size_t cj = 0; cj < 2; ++cj)
        for (std::size_t ck = 0; ck < 2; ++ck)
          for (std::size_t i = ci; i < n; i += 2)
            for (std::size_t j = cj; j < n; j += 2)
              for (std::size_t k = ck; k < n; k += 2) {
                const std::size_t p = at(i, j, k);
                double off = c_face * faces(u, p);
                if (c_edge != 0.0) off += c_edge * edges(u, p);
                u[p] = (f[p] - off) / c_centre;
              }
  }

  void weighted_jacobi(double omega) {
    residual();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
          const std::size_t p = at(i, j, k);
          u[p] += omega * r[p] / c_centre;
        }
  }

  void direct_solve() {
    const auto dim = static_cast<Eigen::Index>(n * n * n);
    if (dim == 1) {
      u[at(0, 0, 0)] = f[at(0, 0, 0)] / c_centre;
      return;
    }
    Eigen::MatrixXd mat = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs(dim);
    auto lin = [this](std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) -> Eigen::Index {
      const auto nn = static_cast<std::ptrdiff_t>(n);
      if (i < 0 || j < 0 || k < 0 || i >= nn || j >= nn || k >= nn) return -1;
      return (i * nn + j) * nn + k;
    };
    const auto nn = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t i = 0; i < nn; ++i)
      for (std::ptrdiff_t j = 0; j < nn; ++j)
        for (std::ptrdiff_t k = 0; k < nn; ++k) {
          const Eigen::Index row = lin(i, j, k);
          rhs(row) = f[at(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                          static_cast<std::size_t>(k))];
          for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj)
              for (int dk = -1; dk <= 1; ++dk) {
                const int dist = std::abs(di) + std::abs(dj) + std::abs(dk);
                const double c = dist == 0 ? c_centre : dist == 1 ? c_face : dist == 2 ? c_edge : 0.0;
                const Eigen::Index col = lin(i + di, j + dj, k + dk);
                if (c != 0.0 && col >= 0) mat(row, col) = c;
              }
        }
    const Eigen::VectorXd sol = mat.partialPivLu().solve(rhs);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) u[at(i, j, k)] = sol(static_cast<Eigen::Index>((i * n + j) * n + k));
  }
};

void restrict_residual(const MgGrid& fine, MgGrid& coarse) {
  static constexpr double w1d[3] = {0.25, 0.5, 0.25};
  for (std::size_t i = 0; i < coarse.n; ++i)
    for (std::size_t j = 0; j < coarse.n; ++j)
      for (std::size_t k = 0; k < coarse.n; ++k) {
        double acc = 0.0;
        for (std::size_t di = 0; di < 3; ++di)
          for (std::size_t dj = 0; dj < 3; ++dj)
            for (std::size_t dk = 0; dk < 3; ++dk)
              acc += w1d[di] * w1d[dj] * w1d[dk] * fine.r[fine.at(2 * i + di, 2 * j + dj, 2 * k + dk)];
        coarse.f[coarse.at(i, j, k)] = acc;
      }
  std::fill(coarse.u.begin(), coarse.u.end(), 0.0);
}

// fine.u += trilinear(coarse.u); padded zero boundary supplies the Dirichlet values.
void prolongate_add(const MgGrid& coarse, MgGrid& fine) {
  const std::size_t cs_i = coarse.stride_i, cs_j = coarse.stride_j;
  for (std::size_t i = 0; i < fine.n; ++i) {
    // padded coarse index of the lower neighbour: fine i -> coarse position (i+1)/2
    const std::size_t ci = (i + 1) / 2;
    const bool between_i = (i % 2 == 0);  // even fine indices sit between coarse points
    for (std::size_t j = 0; j < fine.n; ++j) {
      const std::size_t cj = (j + 1) / 2;
      const bool between_j = (j % 2 == 0);
      for (std::size_t k = 0; k < fine.n; ++k) {
        const std::size_t ck = (k + 1) / 2;
        const bool between_k = (k % 2 == 0);
        double acc = 0.0;
        for (std::size_t a = 0; a <= (between_i ? 1u : 0u); ++a)
          for (std::size_t b = 0; b <= (between_j ? 1u : 0u); ++b)
            for (std::size_t c = 0; c <= (between_k ? 1u : 0u); ++c) {
              const double w = (between_i ? 0.5 : 1.0) * (between_j ? 0.5 : 1.0) * (between_k ? 0.5 : 1.0);
              acc += w * coarse.u[(ci + a) * cs_i + (cj + b) * cs_j + (ck + c)];
            }
        fine.u[fine.at(i, j, k)] += acc;
      }
    }
  }
}

class VCycle {
 public:
  VCycle(std::size_t n, double lambda, StencilKind kind, const MgConfig& cfg)
      : kind_(kind), cfg_(cfg) {
    std::size_t m = n;
    while (true) {
      grids_.emplace_back(m, lambda, kind);
      if (m <= cfg.coarsest_n || m == 1) break;
      m = (m - 1) / 2;
    }
  }

  MgGrid& finest() { return grids_.front(); }

  void cycle(std::size_t level = 0) {
    MgGrid& g = grids_[level];
    if (level + 1 == grids_.size()) {
      g.direct_solve();
      return;
    }
    smooth(g, cfg_.pre_smooth);
    g.residual();
    restrict_residual(g, grids_[level + 1]);
    cycle(level + 1);
    prolongate_add(grids_[level + 1], g);
    smooth(g, cfg_.post_smooth);
  }

 private:
  void smooth(MgGrid& g, int sweeps) {
    for (int s = 0; s < sweeps; ++s) {
      if (kind_ == StencilKind::SecondOrder7pt)
        g.red_black_gauss_seidel();
      else if (cfg_.compact_smoother == CompactSmoother::MulticolourGaussSeidel)
        g.multicolour_gauss_seidel();
      else
        g.weighted_jacobi(cfg_.jacobi_weight);
    }
  }

  StencilKind kind_;
  MgConfig cfg_;
  std::vector<MgGrid> grids_;
};

void validate(double lambda, const Field& rhs, const MgConfig& cfg) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("solve_implicit: lambda must be finite and >= 0");
  }
  if (!(cfg.tol > 0.0)) throw InvalidArgument("solve_implicit: tol must be positive");
  if (!is_power_of_two_minus_one(cfg.coarsest_n) || cfg.coarsest_n > 7) {
    throw InvalidArgument("solve_implicit: coarsest_n must be 1, 3 or 7");
  }
  if (!is_power_of_two_minus_one(rhs.n())) {
    throw InvalidArgument("solve_implicit: grid size must be 2^k - 1");
  }
  if (!rhs.all_finite()) throw InvalidArgument("solve_implicit: non-finite right-hand side");
}

}  // namespace

Field apply_implicit_operator(const Field& u, double lambda, StencilKind kind) {
  if (kind == StencilKind::SecondOrder7pt) {
    Field out = laplacian_7pt(u);
    out *= -lambda;
    out += u;
    return out;
  }
  Field out = mehrstellen_lhs(u);
  out *= -lambda;
  out += mehrstellen_weight(u);
  return out;
}

MgResult solve_implicit(double lambda, const Field& rhs, StencilKind kind, const MgConfig& cfg,
                        std::optional<std::reference_wrapper<const Field>> guess) {
  validate(lambda, rhs, cfg);
  const std::size_t n = rhs.n();
  const Field f = kind == StencilKind::SecondOrder7pt ? rhs : mehrstellen_weight(rhs);
  const double f_norm = f.max_abs();
  if (f_norm == 0.0) return MgResult{Field(n), 0, 0.0, true};

  VCycle vc(n, lambda, kind, cfg);
  MgGrid& g = vc.finest();
  const Field& start = guess ? guess->get() : rhs;
  if (start.n() != n) throw InvalidArgument("solve_implicit: initial guess size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        g.f[g.at(i, j, k)] = f(i, j, k);
        g.u[g.at(i, j, k)] = start(i, j, k);
      }

  double res = g.residual() / f_norm;
  int cycles = 0;
  int growth = 0;
  while (res > cfg.tol && cycles < cfg.max_cycles) {
    vc.cycle();
    ++cycles;
    const double next = g.residual() / f_norm;
    growth = next > res ? growth + 1 : 0;
    res = next;
    if (growth >= 3 || !std::isfinite(res)) {
      throw SolverDiverged("multigrid diverged after " + std::to_string(cycles) +
                               " cycles (relative residual " + std::to_string(res) + ")",
                           cycles, res);
    }
  }

  MgResult out{Field(n), cycles, res, res <= cfg.tol};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) out.solution(i, j, k) = g.u[g.at(i, j, k)];
  return out;
}

}  // namespace stheat
