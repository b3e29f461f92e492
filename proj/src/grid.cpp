#include "stheat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "stheat/errors.hpp"

namespace stheat {

Field::Field(std::size_t n, double value) : n_(n), values_(n * n * n, value) {
  if (n == 0) throw InvalidArgument("Field: n must be >= 1");
}

Field& Field::operator+=(const Field& other) {
  if (other.n_ != n_) throw InvalidArgument("Field: size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  if (other.n_ != n_) throw InvalidArgument("Field: size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

Field& Field::axpy(double a, const Field& x) {
  if (x.n_ != n_) throw InvalidArgument("Field: size mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
  return *this;
}

void Field::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Field& a, const Field& b) {
  if (a.n() != b.n()) throw InvalidArgument("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool is_power_of_two_minus_one(std::size_t n) { return n >= 1 && ((n + 1) & n) == 0; }

Field sine_mode(std::size_t n, int a, int b, int c) {
  using std::numbers::pi;
  return sample(n, [=](double x, double y, double z) {
    return std::sin(a * pi * x) * std::sin(b * pi * y) * std::sin(c * pi * z);
  });
}

namespace {

double cos_mode(std::size_t n, int a) {
  return std::cos(a * std::numbers::pi / static_cast<double>(n + 1));
}

// Value at (i+di, j+dj, k+dk), zero outside the interior.
inline double at(const Field& u, std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) {
  const auto n = static_cast<std::ptrdiff_t>(u.n());
  if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return 0.0;
  return u(static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<std::size_t>(k));
}

// Sum over the six face neighbours and, optionally, the twelve edge neighbours.
template <bool Edges>
void neighbour_sums(const Field& u, Field& faces, Field* edges) {
  const auto n = static_cast<std::ptrdiff_t>(u.n());
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = 0; j < n; ++j)
      for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto ii = static_cast<std::size_t>(i);
        const auto jj = static_cast<std::size_t>(j);
        const auto kk = static_cast<std::size_t>(k);
        faces(ii, jj, kk) = at(u, i - 1, j, k) + at(u, i + 1, j, k) + at(u, i, j - 1, k) +
                            at(u, i, j + 1, k) + at(u, i, j, k - 1) + at(u, i, j, k + 1);
        if constexpr (Edges) {
          (*edges)(ii, jj, kk) =
              at(u, i - 1, j - 1, k) + at(u, i - 1, j + 1, k) + at(u, i + 1, j - 1, k) +
              at(u, i + 1, j + 1, k) + at(u, i - 1, j, k - 1) + at(u, i - 1, j, k + 1) +
              at(u, i + 1, j, k - 1) + at(u, i + 1, j, k + 1) + at(u, i, j - 1, k - 1) +
              at(u, i, j - 1, k + 1) + at(u, i, j + 1, k - 1) + at(u, i, j + 1, k + 1);
        }
      }
}

// Cached DST-I plans per grid size. Planning is not thread-safe in FFTW;
// executing an existing plan on fresh arrays is.
class DstPlans {
 public:
  static DstPlans& instance() {
    static DstPlans plans;
    return plans;
  }

  fftw_plan get(std::size_t n) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    const int ni = static_cast<int>(n);
    double* buf = fftw_alloc_real(n * n * n);
    fftw_plan p = fftw_plan_r2r_3d(ni, ni, ni, buf, buf, FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00,
                                   FFTW_ESTIMATE);
    fftw_free(buf);
    plans_.emplace(n, p);
    return p;
  }

  ~DstPlans() {
    for (auto& [n, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

struct FftwBuffer {
  explicit FftwBuffer(std::size_t len) : data(fftw_alloc_real(len)) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* data;
};

}  // namespace

double eigenvalue_7pt(std::size_t n, int a, int b, int c) {
  const double h = 1.0 / static_cast<double>(n + 1);
  return -(6.0 - 2.0 * (cos_mode(n, a) + cos_mode(n, b) + cos_mode(n, c))) / (h * h);
}

double eigenvalue_compact(std::size_t n, int a, int b, int c) {
  const double h = 1.0 / static_cast<double>(n + 1);
  const double ca = cos_mode(n, a), cb = cos_mode(n, b), cc = cos_mode(n, c);
  const double lhs =
      (-24.0 + 4.0 * (ca + cb + cc) + 4.0 * (ca * cb + ca * cc + cb * cc)) / (6.0 * h * h);
  const double weight = 0.5 + (ca + cb + cc) / 6.0;
  return lhs / weight;
}

Field laplacian_7pt(const Field& u) {
  Field faces(u.n());
  neighbour_sums<false>(u, faces, nullptr);
  const double inv_h2 = 1.0 / (u.h() * u.h());
  for (std::size_t p = 0; p < u.size(); ++p) faces[p] = (faces[p] - 6.0 * u[p]) * inv_h2;
  return faces;
}

Field mehrstellen_lhs(const Field& u) {
  Field faces(u.n());
  Field edges(u.n());
  neighbour_sums<true>(u, faces, &edges);
  const double scale = 1.0 / (6.0 * u.h() * u.h());
  for (std::size_t p = 0; p < u.size(); ++p)
    faces[p] = (-24.0 * u[p] + 2.0 * faces[p] + edges[p]) * scale;
  return faces;
}

Field mehrstellen_weight(const Field& u) {
  Field faces(u.n());
  neighbour_sums<false>(u, faces, nullptr);
  for (std::size_t p = 0; p < u.size(); ++p) faces[p] = 0.5 * u[p] + faces[p] / 12.0;
  return faces;
}

Field solve_mehrstellen_weight(const Field& r) {
  // B is diagonal in the discrete sine basis: forward DST-I, divide, backward DST-I.
  const std::size_t n = r.n();
  const std::size_t len = r.size();
  fftw_plan plan = DstPlans::instance().get(n);
  FftwBuffer in(len), out(len);
  std::copy(r.values().begin(), r.values().end(), in.data);
  fftw_execute_r2r(plan, in.data, out.data);

  std::vector<double> cosines(n);
  for (std::size_t a = 0; a < n; ++a) cosines[a] = cos_mode(n, static_cast<int>(a + 1));
  const double norm = std::pow(2.0 * static_cast<double>(n + 1), 3);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double b = 0.5 + (cosines[i] + cosines[j] + cosines[k]) / 6.0;
        out.data[(i * n + j) * n + k] /= b * norm;
      }
  fftw_execute_r2r(plan, out.data, in.data);
  Field w(n);
  std::copy(in.data, in.data + len, w.values().begin());
  return w;
}

Field apply_laplacian(const Field& u, StencilKind kind) {
  switch (kind) {
    case StencilKind::SecondOrder7pt:
      return laplacian_7pt(u);
    case StencilKind::FourthOrderCompact:
      return solve_mehrstellen_weight(mehrstellen_lhs(u));
  }
  throw InvalidArgument("apply_laplacian: unknown stencil kind");
}

Field restrict_injection(const Field& fine) {
  if (fine.n() < 3 || fine.n() % 2 == 0) {
    throw InvalidArgument("restrict_injection: fine grid must have 2n+1 points, n >= 1");
  }
  const std::size_t nc = (fine.n() - 1) / 2;
  Field coarse(nc);
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      for (std::size_t k = 0; k < nc; ++k) coarse(i, j, k) = fine(2 * i + 1, 2 * j + 1, 2 * k + 1);
  return coarse;
}

Field restrict_full_weighting(const Field& fine) {
  if (fine.n() < 3 || fine.n() % 2 == 0) {
    throw InvalidArgument("restrict_full_weighting: fine grid must have 2n+1 points, n >= 1");
  }
  const std::size_t nc = (fine.n() - 1) / 2;
  Field coarse(nc);
  static constexpr double w1d[3] = {0.25, 0.5, 0.25};
  for (std::size_t i = 0; i < nc; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      for (std::size_t k = 0; k < nc; ++k) {
        double acc = 0.0;
        for (int di = 0; di < 3; ++di)
          for (int dj = 0; dj < 3; ++dj)
            for (int dk = 0; dk < 3; ++dk)
              acc += w1d[di] * w1d[dj] * w1d[dk] *
                     fine(2 * i + static_cast<std::size_t>(di), 2 * j + static_cast<std::size_t>(dj),
                          2 * k + static_cast<std::size_t>(dk));
        coarse(i, j, k) = acc;
      }
  return coarse;
}

Field interpolate_trilinear(const Field& coarse) {
  const std::size_t nc = coarse.n();
  const std::size_t nf = 2 * nc + 1;
  Field fine(nf);
  // Fine index f maps to coarse position (f - 1) / 2; odd offsets sit between two
  // coarse points, where the out-of-range neighbour is the zero boundary.
  auto stencil = [](std::size_t f, std::ptrdiff_t lo[2], double w[2]) -> int {
    if (f % 2 == 1) {
      lo[0] = static_cast<std::ptrdiff_t>((f - 1) / 2);
      w[0] = 1.0;
      return 1;
    }
    lo[0] = static_cast<std::ptrdiff_t>(f / 2) - 1;
    lo[1] = static_cast<std::ptrdiff_t>(f / 2);
    w[0] = 0.5;
    w[1] = 0.5;
    return 2;
  };
  for (std::size_t i = 0; i < nf; ++i) {
    std::ptrdiff_t ci[2];
    double wi[2];
    const int ni = stencil(i, ci, wi);
    for (std::size_t j = 0; j < nf; ++j) {
      std::ptrdiff_t cj[2];
      double wj[2];
      const int nj = stencil(j, cj, wj);
      for (std::size_t k = 0; k < nf; ++k) {
        std::ptrdiff_t ck[2];
        double wk[2];
        const int nk = stencil(k, ck, wk);
        double acc = 0.0;
        for (int a = 0; a < ni; ++a)
          for (int b = 0; b < nj; ++b)
            for (int c = 0; c < nk; ++c) acc += wi[a] * wj[b] * wk[c] * at(coarse, ci[a], cj[b], ck[c]);
        fine(i, j, k) = acc;
      }
    }
  }
  return fine;
}

}  // namespace stheat
