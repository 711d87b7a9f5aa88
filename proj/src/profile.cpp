#include "stab/profile.hpp"

#include <algorithm>
#include <cmath>

namespace stab {

std::vector<double> ShearProfile::sample(const Mesh& m, int deriv) const {
  std::vector<double> out(m.n());
  const auto& f = deriv == 0 ? u : deriv == 1 ? du : ddu;
  for (int i = 0; i < m.n(); ++i) out[i] = f(m.nodes[i]);
  return out;
}

namespace {

// natural cubic spline through (x_i, y_i); evaluates value/derivatives
struct Spline {
  std::vector<double> x, y, m2;  // m2: second derivatives at knots

  void build() {
    int n = static_cast<int>(x.size());
    m2.assign(n, 0.0);
    if (n < 3) return;
    std::vector<double> a(n, 0.0), b(n, 1.0), c(n, 0.0), d(n, 0.0);
    for (int i = 1; i + 1 < n; ++i) {
      double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
      a[i] = h0 / 6.0;
      b[i] = (h0 + h1) / 3.0;
      c[i] = h1 / 6.0;
      d[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    for (int i = 1; i < n; ++i) {  // Thomas
      double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m2[n - 1] = d[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) m2[i] = (d[i] - c[i] * m2[i + 1]) / b[i];
  }

  double eval(double t, int deriv) const {
    int n = static_cast<int>(x.size());
    if (t >= x[n - 1]) return deriv == 0 ? y[n - 1] : 0.0;  // constant extension
    if (t < x[0]) t = x[0];
    int i = static_cast<int>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) - 1;
    i = std::clamp(i, 0, n - 2);
    double h = x[i + 1] - x[i], s = (t - x[i]) / h, s1 = 1.0 - s;
    switch (deriv) {
      case 0:
        return s1 * y[i] + s * y[i + 1] +
               h * h / 6.0 * ((s1 * s1 * s1 - s1) * m2[i] + (s * s * s - s) * m2[i + 1]);
      case 1:
        return (y[i + 1] - y[i]) / h +
               h / 6.0 * ((1.0 - 3.0 * s1 * s1) * m2[i] + (3.0 * s * s - 1.0) * m2[i + 1]);
      default:
        return s1 * m2[i] + s * m2[i + 1];
    }
  }
};

}  // namespace

ShearProfile make_profile(const std::string& kind, double U_E,
                          const std::vector<std::array<double, 2>>& table) {
  ShearProfile p;
  p.kind = kind;
  if (kind == "exp") {
    p.u = [U_E](double y) { return U_E * (1.0 - std::exp(-y)); };
    p.du = [U_E](double y) { return U_E * std::exp(-y); };
    p.ddu = [U_E](double y) { return -U_E * std::exp(-y); };
    p.u_inf = U_E;
  } else if (kind == "tanh") {
    p.u = [U_E](double y) { return U_E * std::tanh(y); };
    p.du = [U_E](double y) {
      double c = std::cosh(y);
      return U_E / (c * c);
    };
    p.ddu = [U_E](double y) {
      double c = std::cosh(y);
      return -2.0 * U_E * std::tanh(y) / (c * c);
    };
    p.u_inf = U_E;
  } else if (kind == "table") {
    if (table.size() < 8)
      throw StabError(ErrCode::invalid_argument, "table profile needs at least 8 samples");
    auto sp = std::make_shared<Spline>();
    for (const auto& r : table) {
      sp->x.push_back(r[0]);
      sp->y.push_back(r[1]);
    }
    for (size_t i = 0; i + 1 < sp->x.size(); ++i)
      if (!(sp->x[i] < sp->x[i + 1]))
        throw StabError(ErrCode::invalid_argument, "table Y column must increase strictly");
    sp->build();
    p.u = [sp](double y) { return sp->eval(y, 0); };
    p.du = [sp](double y) { return sp->eval(y, 1); };
    p.ddu = [sp](double y) { return sp->eval(y, 2); };
    p.u_inf = sp->y.back();
  } else {
    throw StabError(ErrCode::invalid_argument, "unknown profile kind: " + kind);
  }
  p.du0 = p.du(0.0);
  p.ddu0 = p.ddu(0.0);

  // validate admissibility on an internal mesh
  auto vm = build_mesh(40.0, 1024, 1.0);
  double scale = std::max(1.0, std::abs(p.u_inf));
  if (std::abs(p.u(0.0)) > 1e-8 * scale)
    throw StabError(ErrCode::assumption, "assume.1 violated: U_s(0) != 0");
  for (int i = 1; i < vm.n(); ++i)
    if (!(p.u(vm.nodes[i]) > 0.0))
      throw StabError(ErrCode::assumption, "assume.1 violated: U_s not positive at Y=" +
                                               std::to_string(vm.nodes[i]));
  if (std::abs(p.u(vm.Ymax) - p.u_inf) > 1e-5 * scale)
    throw StabError(ErrCode::assumption, "assume.1 violated: U_s does not approach U_E");
  if (!(p.du0 > 0.0))
    throw StabError(ErrCode::assumption, "assume.2 violated: U_s'(0) <= 0");

  // monotonicity radius: largest grid value with du > 0 on [0, 4*y0], cap 1
  double yviol = vm.Ymax;
  for (int i = 0; i < vm.n(); ++i)
    if (!(p.du(vm.nodes[i]) > 0.0)) {
      yviol = vm.nodes[i];
      break;
    }
  if (yviol / 4.0 < 1.0) {
    int i0 = vm.largest_node_leq(yviol / 4.0);
    p.y0 = vm.nodes[i0];
    if (!(p.y0 > 0.0))
      throw StabError(ErrCode::assumption, "assume.2 violated: no monotonicity radius");
  } else {
    p.y0 = 1.0;
  }

  double dn = 0.0, dlast = 0.0, dmid = 0.0;
  for (int i = 0; i < vm.n(); ++i) {
    double Y = vm.nodes[i];
    double v = std::pow(1.0 + Y, 3) * (std::abs(p.du(Y)) + std::abs(p.ddu(Y)));
    dn = std::max(dn, v);
    if (i == vm.n() - 1) dlast = v;
    if (Y <= vm.Ymax / 2) dmid = v;
  }
  if (dlast > std::max(dmid, 1e-12 * dn) * 1.000001)
    throw StabError(ErrCode::assumption,
                    "assume.3 violated: (1+Y)^3 derivative weight grows at the mesh end");
  p.decay_norm = dn;
  return p;
}

// ----------------------------------------------------------------------------

Field::Field(std::shared_ptr<const Mesh> mesh, std::vector<cplx> values)
    : mesh_(std::move(mesh)), v_(std::move(values)) {
  if (mesh_ && static_cast<int>(v_.size()) != mesh_->n())
    throw StabError(ErrCode::invalid_argument, "field size mismatch");
}

double Field::l2() const {
  double c = l2c_.load(std::memory_order_relaxed);
  if (c >= 0.0) return c;
  double acc = 0.0;
  for (int i = 0; i < n(); ++i) acc += mesh_->weights[i] * std::norm(v_[i]);
  acc = std::sqrt(acc);
  l2c_.store(acc, std::memory_order_relaxed);
  return acc;
}

double Field::sup() const {
  double c = supc_.load(std::memory_order_relaxed);
  if (c >= 0.0) return c;
  double acc = 0.0;
  for (const auto& z : v_) acc = std::max(acc, std::abs(z));
  supc_.store(acc, std::memory_order_relaxed);
  return acc;
}

// ----------------------------------------------------------------------------

namespace {

// closed-form correction for the integral beyond Ymax from an exponential fit
cplx tail_correction(const Mesh& m, std::span<const cplx> f) {
  int n = m.n();
  int j1 = n - 1;
  int j0 = m.largest_node_leq(m.Ymax - std::min(1.0, 0.05 * m.Ymax));
  if (j0 >= j1) j0 = j1 - 1;
  double a1 = std::abs(f[j1]), a0 = std::abs(f[j0]);
  if (!(a1 > 1e-300) || !(a0 > a1)) return {0.0, 0.0};
  double beta = std::log(a0 / a1) / (m.nodes[j1] - m.nodes[j0]);
  if (!(beta > 1e-6) || !std::isfinite(beta)) return {0.0, 0.0};
  return f[j1] / beta;
}

// extrapolated value at node 0 from the interior (for quantities whose node-0
// sample is a removable 0/0)
template <class T>
T extrapolate0(const Mesh& m, const std::vector<T>& g) {
  int mq = m.order + 2;
  std::vector<double> lv(mq);
  std::vector<double> xn(m.nodes.begin() + 1, m.nodes.begin() + 1 + mq);
  // barycentric Lagrange through nodes 1..mq evaluated at 0
  double denom = 0.0;
  for (int j = 0; j < mq; ++j) {
    double bw = 1.0;
    for (int i = 0; i < mq; ++i)
      if (i != j) bw /= (xn[j] - xn[i]);
    lv[j] = bw / (0.0 - xn[j]);
    denom += lv[j];
  }
  T acc{};
  for (int j = 0; j < mq; ++j) acc += (lv[j] / denom) * g[1 + j];
  return acc;
}

}  // namespace

std::vector<cplx> op_sigma(const Mesh& m, std::span<const cplx> f) {
  auto cum = m.cumint(f);
  cplx tail = tail_correction(m, f);
  cplx total = cum.back();
  std::vector<cplx> out(f.size());
  for (size_t i = 0; i < f.size(); ++i) out[i] = total - cum[i] + tail;
  return out;
}

std::vector<cplx> op_L(const Mesh& m, const ShearProfile& p, std::span<const cplx> f,
                       AccuracyReport* rep, double tol) {
  const int N = m.n();
  auto us = p.sample(m, 0);
  auto du = p.sample(m, 1);
  auto ddu = p.sample(m, 2);
  const double y0 = p.y0;
  const int isplit = m.largest_node_leq(y0);
  if (isplit < m.order + 2)
    throw StabError(ErrCode::unresolved_layer,
                    "mesh does not resolve the monotonicity radius; reduce bl_scale");

  // direct integrand away from the wall
  std::vector<cplx> g2(N);
  for (int i = 1; i < N; ++i) g2[i] = f[i] / (us[i] * us[i]);
  g2[0] = extrapolate0(m, g2);
  auto cum2 = m.cumint(std::span<const cplx>(g2));
  cplx tail2 = tail_correction(m, std::span<const cplx>(g2));
  cplx split_off = m.integrate_between(std::span<const cplx>(g2), m.nodes[isplit], y0);
  // D = int_{y0}^inf f/U_s^2
  cplx D = (cum2.back() - cum2[isplit]) - split_off + tail2;

  // integration-by-parts integrand below y0
  auto fp = m.derivative(f, 1);
  std::vector<cplx> gsub(N);
  cplx cf = (fp[0] * p.du0 - f[0] * p.ddu0) / (p.du0 * p.du0 * p.du0);
  for (int i = 1; i < N; ++i)
    gsub[i] = (fp[i] * du[i] - f[i] * ddu[i]) / (du[i] * du[i] * us[i]) - cf / m.nodes[i];
  gsub[0] = extrapolate0(m, gsub);
  auto cums = m.cumint(std::span<const cplx>(gsub));
  cplx j_off = m.integrate_between(std::span<const cplx>(gsub), m.nodes[isplit], y0);

  const double us_y0 = p.u(y0), du_y0 = p.du(y0);
  const cplx f_y0 = m.interpolate(f, y0);

  std::vector<cplx> out(N);
  out[0] = f[0] / p.du0;
  for (int i = 1; i < N; ++i) {
    if (m.nodes[i] < y0) {
      cplx J = (cums[isplit] - cums[i]) + j_off;
      out[i] = f[i] / du[i] - us[i] * f_y0 / (us_y0 * du_y0) +
               us[i] * (J + cf * std::log(y0 / m.nodes[i])) + us[i] * D;
    } else {
      cplx tailA = (cum2.back() - cum2[i]) + tail2;
      out[i] = us[i] * tailA;
    }
  }

  if (rep) {
    // cross-check the two quadrature routes at the probe point y0/2
    double yp = 0.5 * y0;
    cplx via_ibp = m.interpolate(std::span<const cplx>(out), yp);
    cplx direct = p.u(yp) * (m.integrate_between(std::span<const cplx>(g2), yp, m.Ymax) + tail2);
    double denom = std::max({std::abs(via_ibp), std::abs(direct), 1e-300});
    rep->split_mismatch = std::abs(via_ibp - direct) / denom;
    rep->degraded = rep->split_mismatch > tol;
  }
  return out;
}

std::vector<cplx> op_K(const Mesh& m, const ShearProfile& p, std::span<const cplx> f,
                       AccuracyReport* rep, double tol) {
  auto s = op_sigma(m, f);
  return op_L(m, p, std::span<const cplx>(s), rep, tol);
}

std::vector<double> compute_Gs(const Mesh& m, const ShearProfile& p, AccuracyReport* rep,
                               double tol) {
  const int N = m.n();
  auto us = p.sample(m, 0);
  auto du = p.sample(m, 1);
  auto ddu = p.sample(m, 2);
  const double y0 = p.y0;
  const int isplit = m.largest_node_leq(y0);
  if (isplit < m.order + 2)
    throw StabError(ErrCode::unresolved_layer,
                    "mesh does not resolve the monotonicity radius; reduce bl_scale");

  std::vector<double> g2(N);
  for (int i = 1; i < N; ++i) g2[i] = 1.0 / (us[i] * us[i]);
  g2[0] = extrapolate0(m, g2);
  auto cum2 = m.cumint(std::span<const double>(g2));
  double split_off = m.integrate_between(std::span<const double>(g2), m.nodes[isplit], y0);

  std::vector<double> gsub(N);
  double ct = p.ddu0 / (p.du0 * p.du0 * p.du0);
  for (int i = 1; i < N; ++i)
    gsub[i] = ddu[i] / (du[i] * du[i] * us[i]) - ct / m.nodes[i];
  gsub[0] = extrapolate0(m, gsub);
  auto cums = m.cumint(std::span<const double>(gsub));
  double j_off = m.integrate_between(std::span<const double>(gsub), m.nodes[isplit], y0);

  const double us_y0 = p.u(y0), du_y0 = p.du(y0);
  std::vector<double> out(N);
  out[0] = 1.0 / p.du0;
  for (int i = 1; i < N; ++i) {
    if (m.nodes[i] < y0) {
      double J = (cums[isplit] - cums[i]) + j_off;
      out[i] = 1.0 / du[i] - us[i] / (us_y0 * du_y0) -
               us[i] * (J + ct * std::log(y0 / m.nodes[i]));
    } else {
      out[i] = -us[i] * ((cum2[i] - cum2[isplit]) - split_off);
    }
  }

  if (rep) {
    double yp = 0.5 * y0;
    double via_ibp = m.interpolate(std::span<const double>(out), yp);
    double direct = p.u(yp) * m.integrate_between(std::span<const double>(g2), yp, y0);
    double denom = std::max({std::abs(via_ibp), std::abs(direct), 1e-300});
    rep->split_mismatch = std::abs(via_ibp - direct) / denom;
    rep->degraded = rep->split_mismatch > tol;
  }
  return out;
}

std::vector<cplx> div_by_us(const Mesh& m, const ShearProfile& p, std::span<const cplx> f) {
  auto us = p.sample(m, 0);
  std::vector<cplx> out(f.size());
  auto st = m.point_stencil(0.0, 1, -1);
  cplx d0{0.0, 0.0};
  for (size_t j = 0; j < st.second.size(); ++j) d0 += st.second[j] * f[st.first + j];
  out[0] = d0 / p.du0;
  for (int i = 1; i < m.n(); ++i) out[i] = f[i] / us[i];
  return out;
}

Field op_sigma(const Field& f) {
  return Field(f.mesh_ptr(), op_sigma(f.mesh(), f.span()));
}
Field op_L(const Field& f, const ShearProfile& p) {
  return Field(f.mesh_ptr(), op_L(f.mesh(), p, f.span()));
}
Field op_K(const Field& f, const ShearProfile& p) {
  return Field(f.mesh_ptr(), op_K(f.mesh(), p, f.span()));
}

}  // namespace stab
