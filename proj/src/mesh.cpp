#include "stab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stab {

const char* err_code_name(ErrCode c) {
  switch (c) {
    case ErrCode::invalid_argument: return "invalid_argument";
    case ErrCode::mesh_resolution: return "mesh_resolution";
    case ErrCode::pivot_degeneracy: return "pivot_degeneracy";
    case ErrCode::divergence: return "divergence";
    case ErrCode::magnitude_floor: return "magnitude_floor";
    case ErrCode::unresolved_layer: return "unresolved_layer";
    case ErrCode::regime_strain: return "regime_strain";
    case ErrCode::assumption: return "assumption";
    case ErrCode::io: return "io";
  }
  return "unknown";
}

void fornberg_weights(const double* x, int m, double x0, int M, double* out) {
  // out[k*m + j]: weight of f(x[j]) in d^k f(x0), k = 0..M
  std::fill(out, out + static_cast<size_t>(M + 1) * m, 0.0);
  auto C = [&](int j, int k) -> double& { return out[static_cast<size_t>(k) * m + j]; };
  double c1 = 1.0, c4 = x[0] - x0;
  C(0, 0) = 1.0;
  for (int i = 1; i < m; ++i) {
    int mn = std::min(i, M);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          C(i, k) = c1 * (k * C(i - 1, k - 1) - c5 * C(i - 1, k)) / c2;
        C(i, 0) = -c1 * c5 * C(i - 1, 0) / c2;
      }
      for (int k = mn; k >= 1; --k) C(j, k) = (c4 * C(j, k) - k * C(j, k - 1)) / c3;
      C(j, 0) = c4 * C(j, 0) / c3;
    }
    c1 = c2;
  }
}

namespace {

// Gauss-Legendre nodes/weights on [-1,1] via Newton on P_g.
void gauss_legendre(int g, std::vector<double>& x, std::vector<double>& w) {
  x.resize(g);
  w.resize(g);
  for (int i = 0; i < g; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (g + 0.5));
    for (int it = 0; it < 60; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= g; ++k) {
        double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = g * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    double p0 = 1.0, p1 = t;
    for (int k = 2; k <= g; ++k) {
      double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = g * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

// Lagrange basis values at x over window nodes (barycentric, node-safe).
void lagrange_values(const double* xn, int m, double x, double* out) {
  for (int j = 0; j < m; ++j)
    if (x == xn[j]) {
      std::fill(out, out + m, 0.0);
      out[j] = 1.0;
      return;
    }
  double denom = 0.0;
  for (int j = 0; j < m; ++j) {
    double bw = 1.0;
    for (int i = 0; i < m; ++i)
      if (i != j) bw /= (xn[j] - xn[i]);
    out[j] = bw / (x - xn[j]);
    denom += out[j];
  }
  for (int j = 0; j < m; ++j) out[j] /= denom;
}

template <class T>
std::vector<T> derivative_impl(const Mesh& msh, std::span<const T> f, int k) {
  if (k < 1 || k > 4) throw StabError(ErrCode::invalid_argument, "derivative order must be 1..4");
  if (static_cast<int>(f.size()) != msh.n())
    throw StabError(ErrCode::invalid_argument, "field size mismatch");
  const auto& tab = msh.dtab[k - 1];
  std::vector<T> out(f.size());
  for (int i = 0; i < msh.n(); ++i) {
    T acc{};
    const double* w = &tab.w[static_cast<size_t>(i) * tab.m];
    int s = tab.start[i];
    for (int j = 0; j < tab.m; ++j) acc += w[j] * f[s + j];
    out[i] = acc;
  }
  return out;
}

template <class T>
T integrate_impl(const Mesh& msh, std::span<const T> f) {
  if (static_cast<int>(f.size()) != msh.n())
    throw StabError(ErrCode::invalid_argument, "field size mismatch");
  T acc{};
  for (int i = 0; i < msh.n(); ++i) acc += msh.weights[i] * f[i];
  return acc;
}

template <class T>
std::vector<T> cumint_impl(const Mesh& msh, std::span<const T> f) {
  if (static_cast<int>(f.size()) != msh.n())
    throw StabError(ErrCode::invalid_argument, "field size mismatch");
  int mq = msh.order + 2;
  std::vector<T> out(f.size());
  out[0] = T{};
  for (int c = 0; c + 1 < msh.n(); ++c) {
    T acc{};
    int s = msh.cell_start[c];
    const double* w = &msh.cell_w[static_cast<size_t>(c) * mq];
    for (int j = 0; j < mq; ++j) acc += w[j] * f[s + j];
    out[c + 1] = out[c] + acc;
  }
  return out;
}

template <class T>
T integrate_between_impl(const Mesh& msh, std::span<const T> f, double a, double b) {
  if (a > b) throw StabError(ErrCode::invalid_argument, "integrate_between: a > b");
  int mq = msh.order + 2;
  int g = (msh.order + 3) / 2;
  std::vector<double> gx, gw;
  gauss_legendre(g, gx, gw);
  std::vector<double> lv(mq);
  int ca = msh.cell_of(a), cb = msh.cell_of(b);
  T acc{};
  for (int c = ca; c <= cb; ++c) {
    double lo = std::max(a, msh.nodes[c]);
    double hi = std::min(b, msh.nodes[c + 1]);
    if (hi <= lo) continue;
    int s = msh.cell_start[c];
    if (lo == msh.nodes[c] && hi == msh.nodes[c + 1]) {
      const double* w = &msh.cell_w[static_cast<size_t>(c) * mq];
      for (int j = 0; j < mq; ++j) acc += w[j] * f[s + j];
      continue;
    }
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (int q = 0; q < g; ++q) {
      lagrange_values(&msh.nodes[s], mq, mid + half * gx[q], lv.data());
      T fx{};
      for (int j = 0; j < mq; ++j) fx += lv[j] * f[s + j];
      acc += half * gw[q] * fx;
    }
  }
  return acc;
}

template <class T>
T interpolate_impl(const Mesh& msh, std::span<const T> f, double x) {
  int mq = msh.order + 2;
  int c = msh.cell_of(x);
  int s = msh.cell_start[c];
  std::vector<double> lv(mq);
  lagrange_values(&msh.nodes[s], mq, x, lv.data());
  T acc{};
  for (int j = 0; j < mq; ++j) acc += lv[j] * f[s + j];
  return acc;
}

}  // namespace

std::vector<cplx> Mesh::derivative(std::span<const cplx> f, int k) const {
  return derivative_impl(*this, f, k);
}
std::vector<double> Mesh::derivative(std::span<const double> f, int k) const {
  return derivative_impl(*this, f, k);
}
double Mesh::integrate(std::span<const double> f) const { return integrate_impl(*this, f); }
cplx Mesh::integrate(std::span<const cplx> f) const { return integrate_impl(*this, f); }
std::vector<double> Mesh::cumint(std::span<const double> f) const { return cumint_impl(*this, f); }
std::vector<cplx> Mesh::cumint(std::span<const cplx> f) const { return cumint_impl(*this, f); }
double Mesh::integrate_between(std::span<const double> f, double a, double b) const {
  return integrate_between_impl(*this, f, a, b);
}
cplx Mesh::integrate_between(std::span<const cplx> f, double a, double b) const {
  return integrate_between_impl(*this, f, a, b);
}
double Mesh::interpolate(std::span<const double> f, double x) const {
  return interpolate_impl(*this, f, x);
}
cplx Mesh::interpolate(std::span<const cplx> f, double x) const {
  return interpolate_impl(*this, f, x);
}

Mesh::Stencil Mesh::stencil(int i, int k) const {
  const auto& tab = dtab[k - 1];
  return {tab.start[i], tab.m, &tab.w[static_cast<size_t>(i) * tab.m]};
}

std::pair<int, std::vector<double>> Mesh::point_stencil(double x, int k, int side) const {
  int m = order + std::max(1, k);
  m = std::min(m, n());
  int s;
  if (side < 0)
    s = 0;
  else if (side > 0)
    s = n() - m;
  else
    s = std::clamp(cell_of(x) - (m - 1) / 2, 0, n() - m);
  std::vector<double> all(static_cast<size_t>(k + 1) * m);
  fornberg_weights(&nodes[s], m, x, k, all.data());
  return {s, std::vector<double>(all.begin() + static_cast<size_t>(k) * m,
                                 all.begin() + static_cast<size_t>(k + 1) * m)};
}

int Mesh::cell_of(double x) const {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  int c = static_cast<int>(it - nodes.begin()) - 1;
  return std::clamp(c, 0, n() - 2);
}

int Mesh::largest_node_leq(double x) const {
  auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  return std::max(0, static_cast<int>(it - nodes.begin()) - 1);
}

void Mesh::finalize() {
  int N = n();
  if (order < 2 || order % 2 != 0 || order > 8)
    throw StabError(ErrCode::invalid_argument, "stencil order must be even, 2..8");
  if (N < order + 4) throw StabError(ErrCode::invalid_argument, "too few nodes for stencil order");
  for (int i = 0; i + 1 < N; ++i)
    if (!(nodes[i] < nodes[i + 1]))
      throw StabError(ErrCode::invalid_argument, "mesh nodes must be strictly increasing");
  Ymax = nodes.back();

  for (int k = 1; k <= 4; ++k) {
    auto& tab = dtab[k - 1];
    tab.m = order + k;
    tab.start.resize(N);
    tab.w.assign(static_cast<size_t>(N) * tab.m, 0.0);
    std::vector<double> all(static_cast<size_t>(k + 1) * tab.m);
    for (int i = 0; i < N; ++i) {
      int s = std::clamp(i - (tab.m - 1) / 2, 0, N - tab.m);
      tab.start[i] = s;
      fornberg_weights(&nodes[s], tab.m, nodes[i], k, all.data());
      std::copy(all.begin() + static_cast<size_t>(k) * tab.m,
                all.begin() + static_cast<size_t>(k + 1) * tab.m,
                tab.w.begin() + static_cast<size_t>(i) * tab.m);
    }
  }

  int mq = order + 2;
  int g = (order + 3) / 2;
  std::vector<double> gx, gw;
  gauss_legendre(g, gx, gw);
  cell_start.resize(N - 1);
  cell_w.assign(static_cast<size_t>(N - 1) * mq, 0.0);
  weights.assign(N, 0.0);
  std::vector<double> lv(mq);
  for (int c = 0; c + 1 < N; ++c) {
    int s = std::clamp(c - (mq - 2) / 2, 0, N - mq);
    cell_start[c] = s;
    double mid = 0.5 * (nodes[c] + nodes[c + 1]);
    double half = 0.5 * (nodes[c + 1] - nodes[c]);
    double* w = &cell_w[static_cast<size_t>(c) * mq];
    for (int q = 0; q < g; ++q) {
      lagrange_values(&nodes[s], mq, mid + half * gx[q], lv.data());
      for (int j = 0; j < mq; ++j) w[j] += half * gw[q] * lv[j];
    }
    for (int j = 0; j < mq; ++j) weights[s + j] += w[j];
  }

  // quadrature must integrate monomials up to degree order+1 exactly
  for (int p = 0; p <= order + 1; ++p) {
    std::vector<double> mono(N);
    for (int i = 0; i < N; ++i) mono[i] = std::pow(nodes[i], p);
    double exact = (std::pow(Ymax, p + 1) - std::pow(nodes[0], p + 1)) / (p + 1);
    double got = integrate(std::span<const double>(mono));
    if (std::abs(got - exact) > 1e-9 * std::max(1.0, std::abs(exact)))
      throw StabError(ErrCode::invalid_argument, "quadrature exactness verification failed");
  }
}

Mesh Mesh::from_nodes(std::vector<double> nodes_, int order_, double bl_scale_) {
  Mesh m;
  m.nodes = std::move(nodes_);
  m.order = order_;
  m.bl_scale = bl_scale_;
  m.stretch = 0.0;
  m.finalize();
  return m;
}

Mesh build_mesh(double Y_max, int n_nodes, double bl_scale, int min_bl_points, int order) {
  if (!(bl_scale > 0.0) || bl_scale > 1.0)
    throw StabError(ErrCode::invalid_argument, "bl_scale must lie in (0, 1]");
  // feasibility of the cluster request comes first: stretch is capped, and the
  // cluster needs min_bl_points nodes strictly inside the mesh. The target
  // grows with n so mesh refinement also refines the wall layer.
  const double a_cap = 40.0;
  int P = std::max(min_bl_points, 3 * n_nodes / 128);
  auto node_at = [&](double a, int i) {
    double t = static_cast<double>(i) / (n_nodes - 1);
    return Y_max * std::expm1(a * t) / std::expm1(a);
  };
  if (n_nodes <= P || (n_nodes >= 2 && node_at(a_cap, P - 1) > bl_scale))
    throw StabError(ErrCode::mesh_resolution,
                    "cannot satisfy min_bl_points: grading capped before " +
                        std::to_string(P) + " nodes fit inside bl_scale");
  if (Y_max < 20.0) throw StabError(ErrCode::invalid_argument, "Y_max must be >= 20");
  if (n_nodes < 64) throw StabError(ErrCode::invalid_argument, "n_nodes must be >= 64");

  double a = 0.0;
  double t_star = static_cast<double>(P - 1) / (n_nodes - 1);
  if (Y_max * t_star > bl_scale) {
    double lo = 1e-6, hi = a_cap;  // node_at(a, P-1) decreasing in a
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      (node_at(mid, P - 1) > bl_scale ? lo : hi) = mid;
    }
    a = hi;
  }
  Mesh m;
  m.order = order;
  m.bl_scale = bl_scale;
  m.stretch = a;
  m.nodes.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i)
    m.nodes[i] = a == 0.0 ? Y_max * static_cast<double>(i) / (n_nodes - 1) : node_at(a, i);
  m.nodes[0] = 0.0;
  m.nodes[n_nodes - 1] = Y_max;
  m.finalize();
  return m;
}

// ----------------------------------------------------------------------------

std::vector<cplx> BandedMatrix::multiply(std::span<const cplx> x) const {
  std::vector<cplx> y(n, cplx{0.0, 0.0});
  for (int j = 0; j < n; ++j) {
    int ilo = std::max(0, j - ku), ihi = std::min(n - 1, j + kl);
    for (int i = ilo; i <= ihi; ++i)
      y[i] += ab[static_cast<size_t>(j) * ldab() + (kl + ku + i - j)] * x[j];
  }
  return y;
}

BandedLU BandedLU::factor(BandedMatrix a, double rel_pivot_tol) {
  const int n = a.n, kl = a.kl, ku = a.ku, ld = a.ldab();
  double max_abs = 0.0;
  for (const auto& v : a.ab) max_abs = std::max(max_abs, std::abs(v));
  if (max_abs == 0.0) throw StabError(ErrCode::pivot_degeneracy, "zero matrix", 0.0);

  BandedLU lu;
  lu.ipiv.resize(n);
  lu.min_pivot = std::numeric_limits<double>::infinity();
  auto at = [&](int i, int j) -> cplx& { return a.ab[static_cast<size_t>(j) * ld + (kl + ku + i - j)]; };
  for (int j = 0; j < n; ++j) {
    int ihi = std::min(n - 1, j + kl);
    int p = j;
    double best = std::abs(at(j, j));
    for (int i = j + 1; i <= ihi; ++i)
      if (double v = std::abs(at(i, j)); v > best) {
        best = v;
        p = i;
      }
    lu.min_pivot = std::min(lu.min_pivot, best);
    if (best <= rel_pivot_tol * max_abs)
      throw StabError(ErrCode::pivot_degeneracy,
                      "matrix singular to tolerance (pivot " + std::to_string(best) + ")", best);
    lu.ipiv[j] = p;
    int jhi = std::min(n - 1, j + kl + ku);
    if (p != j)
      for (int jj = j; jj <= jhi; ++jj) std::swap(at(j, jj), at(p, jj));
    cplx piv = at(j, j);
    for (int i = j + 1; i <= ihi; ++i) {
      cplx l = at(i, j) / piv;
      at(i, j) = l;
      if (l != cplx{0.0, 0.0})
        for (int jj = j + 1; jj <= jhi; ++jj) at(i, jj) -= l * at(j, jj);
    }
  }
  lu.m = std::move(a);
  return lu;
}

void BandedLU::solve(std::span<cplx> b) const {
  const int n = m.n, kl = m.kl, ku = m.ku, ld = m.ldab();
  auto at = [&](int i, int j) -> const cplx& {
    return m.ab[static_cast<size_t>(j) * ld + (kl + ku + i - j)];
  };
  for (int j = 0; j < n; ++j) {
    if (ipiv[j] != j) std::swap(b[j], b[ipiv[j]]);
    int ihi = std::min(n - 1, j + kl);
    for (int i = j + 1; i <= ihi; ++i) b[i] -= at(i, j) * b[j];
  }
  for (int j = n - 1; j >= 0; --j) {
    b[j] /= at(j, j);
    int ilo = std::max(0, j - kl - ku);
    for (int i = ilo; i < j; ++i) b[i] -= at(i, j) * b[j];
  }
}

// ----------------------------------------------------------------------------

BvpSystem::BvpSystem(const Mesh& mesh, int nbc_lo, int nbc_hi)
    : mesh_(&mesh), nbc_lo_(nbc_lo), nbc_hi_(nbc_hi) {
  if (nbc_lo < 1 || nbc_lo > 2 || nbc_hi < 1 || nbc_hi > 2)
    throw StabError(ErrCode::invalid_argument, "1 or 2 boundary rows per side");
  band_.init(mesh.n(), mesh.order + 1, mesh.order + 1);
  rhs_.assign(mesh.n(), cplx{0.0, 0.0});
}

void BvpSystem::add_term(std::span<const cplx> coeff, int k) {
  if (static_cast<int>(coeff.size()) != mesh_->n())
    throw StabError(ErrCode::invalid_argument, "coefficient size mismatch");
  for (int i = first_interior(); i <= last_interior(); ++i) {
    if (coeff[i] == cplx{0.0, 0.0}) continue;
    if (k == 0) {
      band_.at(i, i) += coeff[i];
      continue;
    }
    auto st = mesh_->stencil(i, k);
    for (int j = 0; j < st.m; ++j) band_.at(i, st.start + j) += coeff[i] * st.w[j];
  }
}

void BvpSystem::add_term(cplx c, int k) {
  std::vector<cplx> coeff(mesh_->n(), c);
  add_term(std::span<const cplx>(coeff), k);
}

void BvpSystem::add_term(std::span<const double> coeff, cplx scale, int k) {
  std::vector<cplx> c(coeff.size());
  for (size_t i = 0; i < coeff.size(); ++i) c[i] = scale * coeff[i];
  add_term(std::span<const cplx>(c), k);
}

void BvpSystem::set_boundary(int row, std::initializer_list<std::pair<int, cplx>> terms,
                             cplx value) {
  int N = mesh_->n();
  bool lo = row < nbc_lo_;
  bool hi = row >= N - nbc_hi_;
  if (!lo && !hi) throw StabError(ErrCode::invalid_argument, "not a boundary row");
  double x0 = lo ? mesh_->nodes.front() : mesh_->nodes.back();
  int kmax = 0;
  for (const auto& [k, c] : terms) kmax = std::max(kmax, k);
  int m = std::min(mesh_->order + std::max(1, kmax), N);
  int s = lo ? 0 : N - m;
  std::vector<double> all(static_cast<size_t>(kmax + 1) * m);
  fornberg_weights(&mesh_->nodes[s], m, x0, kmax, all.data());
  std::vector<cplx> rowv(m, cplx{0.0, 0.0});
  for (const auto& [k, c] : terms)
    for (int j = 0; j < m; ++j) rowv[j] += c * all[static_cast<size_t>(k) * m + j];
  // clear previous content of this row, then write
  for (int j = std::max(0, row - band_.kl); j <= std::min(N - 1, row + band_.ku); ++j)
    band_.at(row, j) = cplx{0.0, 0.0};
  for (int j = 0; j < m; ++j) {
    int col = s + j;
    if (rowv[j] == cplx{0.0, 0.0}) continue;
    if (col - row > band_.ku || row - col > band_.kl)
      throw StabError(ErrCode::invalid_argument,
                      "boundary stencil exceeds bandwidth; move high-order condition inward");
    band_.at(row, col) += rowv[j];
  }
  rhs_[row] = value;
}

void BvpSystem::set_rhs(std::span<const cplx> f) {
  if (static_cast<int>(f.size()) != mesh_->n())
    throw StabError(ErrCode::invalid_argument, "rhs size mismatch");
  for (int i = first_interior(); i <= last_interior(); ++i) rhs_[i] = f[i];
}

std::vector<cplx> solve_bvp(const BvpSystem& sys, BvpReport* report) {
  auto lu = BandedLU::factor(sys.matrix());
  std::vector<cplx> x = sys.rhs_vector();
  lu.solve(std::span<cplx>(x));
  if (report) {
    auto ax = sys.matrix().multiply(std::span<const cplx>(x));
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < ax.size(); ++i) {
      num += std::norm(ax[i] - sys.rhs_vector()[i]);
      den += std::norm(sys.rhs_vector()[i]);
    }
    report->rel_residual = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
    report->min_pivot = lu.min_pivot;
  }
  return x;
}

double norm_l2(const Mesh& mesh, std::span<const cplx> f) {
  std::vector<double> sq(f.size());
  for (size_t i = 0; i < f.size(); ++i) sq[i] = std::norm(f[i]);
  return std::sqrt(std::max(0.0, mesh.integrate(sq)));
}

double norm_sup(std::span<const cplx> f) {
  double s = 0.0;
  for (const cplx& v : f) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace stab
