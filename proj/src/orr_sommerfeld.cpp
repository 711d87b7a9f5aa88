#include "stab/orr_sommerfeld.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "stab/airy.hpp"
#include "stab/errors.hpp"
#include "stab/rayleigh.hpp"

namespace stab {
namespace {

constexpr cplx kI{0.0, 1.0};

std::vector<cplx> to_cplx(std::span<const double> v) {
  return std::vector<cplx>(v.begin(), v.end());
}

double h1_norm(const Mesh& mesh, std::span<const cplx> phi, double alpha) {
  auto d1 = mesh.derivative(phi, 1);
  return norm_l2(mesh, d1) + alpha * norm_l2(mesh, phi);
}

std::vector<cplx> add(std::span<const cplx> a, std::span<const cplx> b) {
  std::vector<cplx> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

void add_to(std::vector<cplx>& a, std::span<const cplx> b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

// source -i e (U_s''/U_s) phi for the Airy stage; phi(0) != 0 makes the
// division 1/Y-singular at the wall, where node 0 is a boundary row of the
// Airy solve, so the pointwise quotient on i >= 1 is the whole story.
std::vector<cplx> curvature_quotient(std::span<const cplx> phi,
                                     const ShearProfile& profile,
                                     const Mesh& mesh) {
  auto uspp = profile.sample(mesh, 2);
  std::vector<cplx> w(phi.size());
  for (size_t i = 0; i < phi.size(); ++i) w[i] = uspp[i] * phi[i];
  return div_by_us(mesh, profile, w);
}

// 2 d_Y(U_s' psi) built as the derivative of the product (exact wall zero).
std::vector<cplx> neumann_source(std::span<const cplx> psi,
                                 const ShearProfile& profile, const Mesh& mesh) {
  auto du = profile.sample(mesh, 1);
  std::vector<cplx> q(psi.size());
  for (size_t i = 0; i < psi.size(); ++i) q[i] = 2.0 * du[i] * psi[i];
  return q;  // solve_airy_neumann differentiates internally
}

// One defect-correction solve against the discrete operator. The staged mode
// construction leaves a wall-row defect (the corrector has a Y log Y component
// when U''(0) != 0) that the resolvent turns into an O(1e-2) bulk offset; the
// correction removes it while keeping phi(0) and dphi(0) fixed, so the mode's
// wall data and asymptotics are untouched.
void polish_mode(std::vector<cplx>& phi, const OsParams& p,
                 const ShearProfile& profile, const Mesh& mesh) {
  auto defect = apply_os(phi, p, profile, mesh);
  auto d = direct_os_oracle(defect, p, profile, mesh, OsBc::clamped);
  for (size_t i = 0; i < phi.size(); ++i) phi[i] -= d[i];
}

}  // namespace

double OsParams::layer() const { return std::cbrt(epsilon); }
double OsParams::product() const { return layer() * alpha; }

void OsParams::require_valid() const {
  if (!(epsilon > 0.0) || !(alpha > 0.0))
    throw StabError(ErrCode::invalid_argument,
                    "OsParams requires epsilon > 0 and alpha > 0");
}

void OsParams::require_construction() const {
  require_valid();
  if (epsilon > eps0 || product() > delta0)
    throw StabError(ErrCode::regime_strain,
                    "outside the construction regime: need epsilon <= eps0 and "
                    "epsilon^{1/3} alpha <= delta0",
                    product());
}

void OsParams::require_modes() const {
  require_valid();
  if (epsilon > eps1 || product() > delta1)
    throw StabError(ErrCode::regime_strain,
                    "outside the mode regime: need epsilon <= eps1 and "
                    "epsilon^{1/3} alpha <= delta1",
                    product());
}

std::vector<cplx> apply_os(std::span<const cplx> phi, const OsParams& p,
                           const ShearProfile& profile, const Mesh& mesh) {
  auto us = profile.sample(mesh, 0);
  auto uspp = profile.sample(mesh, 2);
  auto d2 = mesh.derivative(phi, 2);
  auto d4 = mesh.derivative(phi, 4);
  double a2 = p.alpha * p.alpha;
  std::vector<cplx> out(phi.size());
  for (size_t i = 0; i < phi.size(); ++i) {
    cplx h = d2[i] - a2 * phi[i];
    out[i] = us[i] * h - uspp[i] * phi[i] +
             kI * p.epsilon * (d4[i] - 2.0 * a2 * d2[i] + a2 * a2 * phi[i]);
  }
  return out;
}

std::vector<cplx> apply_os0(std::span<const cplx> phi, const OsParams& p,
                            const ShearProfile& profile, const Mesh& mesh) {
  auto us = profile.sample(mesh, 0);
  auto du = profile.sample(mesh, 1);
  auto d1 = mesh.derivative(phi, 1);
  auto d2 = mesh.derivative(phi, 2);
  auto d4 = mesh.derivative(phi, 4);
  double a2 = p.alpha * p.alpha;
  std::vector<cplx> out(phi.size());
  for (size_t i = 0; i < phi.size(); ++i)
    out[i] = us[i] * d2[i] + du[i] * d1[i] - a2 * us[i] * phi[i] +
             kI * p.epsilon * (d4[i] - 2.0 * a2 * d2[i] + a2 * a2 * phi[i]);
  return out;
}

double os_residual(std::span<const cplx> phi, std::span<const cplx> f,
                   const OsParams& p, const ShearProfile& profile,
                   const Mesh& mesh) {
  // componentwise backward error: max_i |(A phi - f)_i| / (|A||phi| + |f|)_i
  // over equation rows; the raw residual is meaningless here because the
  // fourth-derivative rows amplify by ~1/h^4 near the wall
  auto us = profile.sample(mesh, 0);
  auto uspp = profile.sample(mesh, 2);
  double a2 = p.alpha * p.alpha;
  int n = mesh.n();
  std::vector<double> num(n, 0.0), den(n, 0.0);
  double den_max = 0.0;
  for (int i = 2; i <= n - 3; ++i) {
    cplx c2 = cplx{us[i], 0.0} - 2.0 * kI * p.epsilon * a2;
    cplx c0 = cplx{-a2 * us[i] - uspp[i], p.epsilon * a2 * a2};
    cplx row = c0 * phi[i];
    double mag = std::abs(c0) * std::abs(phi[i]);
    auto s2 = mesh.stencil(i, 2);
    for (int j = 0; j < s2.m; ++j) {
      row += c2 * s2.w[j] * phi[s2.start + j];
      mag += std::abs(c2) * std::abs(s2.w[j]) * std::abs(phi[s2.start + j]);
    }
    auto s4 = mesh.stencil(i, 4);
    for (int j = 0; j < s4.m; ++j) {
      row += kI * p.epsilon * s4.w[j] * phi[s4.start + j];
      mag += p.epsilon * std::abs(s4.w[j]) * std::abs(phi[s4.start + j]);
    }
    cplx fi = f.empty() ? cplx{} : f[i];
    num[i] = std::abs(row - fi);
    den[i] = mag + std::abs(fi);
    den_max = std::max(den_max, den[i]);
  }
  // Rows whose mass has decayed below 1e-6 of the largest row measure far-field
  // roundoff against a vanishing denominator; flooring them keeps the metric
  // meaningful where the solution lives.
  double worst = 0.0;
  double floor = 1e-6 * den_max;
  for (int i = 2; i <= n - 3; ++i)
    if (den[i] > 0.0) worst = std::max(worst, num[i] / std::max(den[i], floor));
  return worst;
}

std::vector<cplx> direct_os_oracle(std::span<const cplx> f, const OsParams& p,
                                   const ShearProfile& profile, const Mesh& mesh,
                                   OsBc bc, BvpReport* report) {
  p.require_valid();
  double a = p.alpha, a2 = a * a;
  auto us = profile.sample(mesh, 0);
  auto uspp = profile.sample(mesh, 2);
  int n = mesh.n();

  BvpSystem sys(mesh, 2, 2);
  sys.add_term(kI * p.epsilon, 4);
  auto c2 = to_cplx(us);
  for (auto& v : c2) v -= 2.0 * kI * p.epsilon * a2;
  sys.add_term(c2, 2);
  std::vector<cplx> c0(n);
  for (int i = 0; i < n; ++i)
    c0[i] = -a2 * us[i] - uspp[i] + kI * p.epsilon * a2 * a2;
  sys.add_term(c0, 0);

  sys.set_boundary(0, {{0, cplx{1.0, 0.0}}}, cplx{0.0, 0.0});
  if (bc == OsBc::clamped) {
    sys.set_boundary(1, {{1, cplx{1.0, 0.0}}}, cplx{0.0, 0.0});
  } else {
    sys.set_boundary(1, {{3, cplx{1.0, 0.0}}, {1, cplx{-a2, 0.0}}},
                     cplx{0.0, 0.0});
  }
  // top closure: (d_Y + a) and d_Y(d_Y + a) kill both growing families
  sys.set_boundary(n - 2, {{2, cplx{1.0, 0.0}}, {1, cplx{a, 0.0}}},
                   cplx{0.0, 0.0});
  sys.set_boundary(n - 1, {{1, cplx{1.0, 0.0}}, {0, cplx{a, 0.0}}},
                   cplx{0.0, 0.0});
  sys.set_rhs(f);
  return solve_bvp(sys, report);
}

Os0Solution solve_os0(std::span<const cplx> f1, std::span<const cplx> f2,
                      const OsParams& p, const ShearProfile& profile,
                      const Mesh& mesh) {
  p.require_valid();
  double a = p.alpha, a2 = a * a;
  auto us = profile.sample(mesh, 0);
  auto du = profile.sample(mesh, 1);
  int n = mesh.n();

  std::vector<cplx> df1 = f1.empty() ? std::vector<cplx>(n, cplx{})
                                     : mesh.derivative(f1, 1);
  std::vector<cplx> rhs(n);
  for (int i = 0; i < n; ++i) {
    cplx v2 = f2.empty() ? cplx{} : f2[i];
    rhs[i] = -v2 - (kI / a) * df1[i];
  }

  BvpSystem sys(mesh, 2, 2);
  sys.add_term(kI * p.epsilon, 4);
  auto c2 = to_cplx(us);
  for (auto& v : c2) v -= 2.0 * kI * p.epsilon * a2;
  sys.add_term(c2, 2);
  sys.add_term(to_cplx(du), 1);
  std::vector<cplx> c0(n);
  for (int i = 0; i < n; ++i) c0[i] = -a2 * us[i] + kI * p.epsilon * a2 * a2;
  sys.add_term(c0, 0);

  sys.set_boundary(0, {{0, cplx{1.0, 0.0}}}, cplx{0.0, 0.0});
  sys.set_boundary(1, {{1, cplx{1.0, 0.0}}}, cplx{0.0, 0.0});
  sys.set_boundary(n - 2, {{2, cplx{1.0, 0.0}}, {1, cplx{a, 0.0}}},
                   cplx{0.0, 0.0});
  sys.set_boundary(n - 1, {{1, cplx{1.0, 0.0}}, {0, cplx{a, 0.0}}},
                   cplx{0.0, 0.0});
  sys.set_rhs(rhs);

  Os0Solution out;
  BvpReport rep;
  out.phi = solve_bvp(sys, &rep);
  out.rel_residual = rep.rel_residual;

  auto d1 = mesh.derivative(out.phi, 1);
  auto d2 = mesh.derivative(out.phi, 2);
  std::vector<double> e1(n), e2(n);
  std::vector<cplx> pair(n);
  for (int i = 0; i < n; ++i) {
    e1[i] = us[i] * (std::norm(d1[i]) + a2 * std::norm(out.phi[i]));
    cplx h = d2[i] - a2 * out.phi[i];
    e2[i] = std::norm(h);
    cplx v2 = f2.empty() ? cplx{} : f2[i];
    pair[i] = (v2 + (kI / a) * df1[i]) * std::conj(out.phi[i]);
  }
  cplx ip = mesh.integrate(std::span<const cplx>(pair));
  out.energy_lhs_re = mesh.integrate(std::span<const double>(e1));
  out.energy_rhs_re = ip.real();
  out.energy_lhs_im = p.epsilon * mesh.integrate(std::span<const double>(e2));
  out.energy_rhs_im = -ip.imag();
  return out;
}

MosSolution solve_modified_os(std::span<const cplx> f, const OsParams& p,
                              const ShearProfile& profile, const Mesh& mesh,
                              int max_iter) {
  p.require_valid();
  int n = mesh.n();
  MosSolution out;
  out.phi.assign(n, cplx{});
  if (norm_sup(f) == 0.0) {
    out.trace.converged = true;
    return out;
  }

  auto us = profile.sample(mesh, 0);
  double a = p.alpha;

  // seeds: phi_1 (Rayleigh), psi_1 = psi_0 + psi_11 (Airy), tpsi_1 (Neumann)
  auto ray1 = solve_rayleigh(f, a, profile, mesh);
  std::vector<cplx> phi_k = std::move(ray1.phi);

  auto w0 = div_by_us(mesh, profile, f);
  for (auto& v : w0) v *= -kI;
  auto psi0 = solve_airy_dirichlet(w0, p.epsilon, a, SourceVariant::plain,
                                   profile, mesh);
  auto w1 = curvature_quotient(phi_k, profile, mesh);
  for (auto& v : w1) v *= -kI;
  auto psi11 = solve_airy_dirichlet(w1, p.epsilon, a, SourceVariant::plain,
                                    profile, mesh);
  std::vector<cplx> psi_k = add(psi0.psi, psi11.psi);

  auto tpsi = solve_airy_neumann(neumann_source(psi_k, profile, mesh),
                                 p.epsilon, a, profile, mesh);

  out.phi = add(phi_k, psi_k);
  double dphi_prev = h1_norm(mesh, phi_k, 0.0);

  std::vector<cplx> us_psi(n);
  for (int i = 0; i < n; ++i) us_psi[i] = us[i] * psi_k[i];
  out.trace.steps.push_back({1, dphi_prev, a * norm_l2(mesh, phi_k),
                             norm_l2(mesh, psi_k), norm_l2(mesh, us_psi), 0.0,
                             tpsi.int_us_psi});

  int slow_streak = 0;
  for (int k = 2; k <= max_iter; ++k) {
    // (i) Rayleigh step, source U_s tpsi_{k-1}: near-zero average, so the
    // average-splitting route applies when alpha <= 1
    if (a <= 1.0) {
      phi_k = solve_rayleigh_decomposed(tpsi.psi, a, profile, mesh).phi;
    } else {
      std::vector<cplx> src(n);
      for (int i = 0; i < n; ++i) src[i] = us[i] * tpsi.psi[i];
      phi_k = solve_rayleigh(src, a, profile, mesh).phi;
    }
    // (ii) Airy step
    auto wk = curvature_quotient(phi_k, profile, mesh);
    for (auto& v : wk) v *= -kI;
    psi_k = solve_airy_dirichlet(wk, p.epsilon, a, SourceVariant::plain,
                                 profile, mesh)
                .psi;
    // (iii) Neumann Airy step
    tpsi = solve_airy_neumann(neumann_source(psi_k, profile, mesh), p.epsilon,
                              a, profile, mesh);

    auto delta = add(phi_k, psi_k);
    add_to(out.phi, delta);

    double dphi = h1_norm(mesh, phi_k, 0.0);
    double ratio = dphi_prev > 0.0 ? dphi / dphi_prev : 0.0;
    dphi_prev = dphi;
    for (int i = 0; i < n; ++i) us_psi[i] = us[i] * psi_k[i];
    out.trace.steps.push_back({k, dphi, a * norm_l2(mesh, phi_k),
                               norm_l2(mesh, psi_k), norm_l2(mesh, us_psi),
                               ratio, tpsi.int_us_psi});

    double base = h1_norm(mesh, out.phi, a);
    out.trace.final_increment =
        base > 0.0 ? h1_norm(mesh, delta, a) / base : 0.0;
    if (out.trace.final_increment < p.increment_tol) {
      out.trace.converged = true;
      break;
    }

    slow_streak = ratio > 0.9 ? slow_streak + 1 : 0;
    if (slow_streak >= 3)
      throw StabError(ErrCode::divergence,
                      "slip iteration stopped contracting at step " +
                          std::to_string(k),
                      ratio);
  }
  out.residual = os_residual(out.phi, f, p, profile, mesh);
  return out;
}

OsMode build_slow_mode(const OsParams& p, const ShearProfile& profile,
                             const Mesh& mesh) {
  p.require_modes();
  OsMode out;
  auto sr = build_slow_rayleigh(p.alpha, profile, mesh);
  out.approx = std::move(sr.phi);
  out.coefficient = sr.small_alpha ? sr.c_E : cplx{0.0, 0.0};

  auto w = curvature_quotient(out.approx, profile, mesh);
  for (auto& v : w) v *= -kI;
  out.corr1 = solve_airy_dirichlet(w, p.epsilon, p.alpha, SourceVariant::plain,
                                   profile, mesh)
                  .psi;

  auto du = profile.sample(mesh, 1);
  std::vector<cplx> q(out.corr1.size());
  for (size_t i = 0; i < q.size(); ++i) q[i] = 2.0 * du[i] * out.corr1[i];
  auto g = mesh.derivative(q, 1);
  auto mos = solve_modified_os(g, p, profile, mesh);
  out.corr2 = std::move(mos.phi);
  out.trace = std::move(mos.trace);

  out.phi = add(out.approx, add(out.corr1, out.corr2));
  polish_mode(out.phi, p, profile, mesh);
  out.wall_value = out.phi[0];
  out.wall_derivative = mesh.derivative(out.phi, 1)[0];
  out.os_residual = os_residual(out.phi, {}, p, profile, mesh);
  return out;
}

OsMode build_fast_mode(const OsParams& p, const ShearProfile& profile,
                             const Mesh& mesh) {
  p.require_modes();
  double a = p.alpha;
  int n = mesh.n();
  auto fp = build_fast_profile(p.epsilon, profile, mesh);

  // nested tail integrals with the e^{+-a .} kernels folded per cell:
  // J(Y) = int_Y^inf e^{a(Y''-Y)} psi0, I(Y) = int_Y^inf e^{-a(Y'-Y)} J.
  // Growth factors only ever multiply the superexponentially decaying tail,
  // so the recurrences stay in range.
  int m = mesh.order + 2;
  auto fold = [&](std::span<const cplx> g, double sign) {
    std::vector<cplx> tail(n, cplx{});
    for (int i = n - 2; i >= 0; --i) {
      const double* wrow = &mesh.cell_w[static_cast<size_t>(i) * m];
      int s = mesh.cell_start[i];
      cplx cell{};
      for (int j = 0; j < m; ++j)
        cell += wrow[j] *
                std::exp(sign * a * (mesh.nodes[s + j] - mesh.nodes[i])) *
                g[s + j];
      double h = mesh.nodes[i + 1] - mesh.nodes[i];
      tail[i] = cell + std::exp(sign * a * h) * tail[i + 1];
    }
    return tail;
  };
  auto J = fold(fp.psi0, +1.0);
  auto I = fold(J, -1.0);

  double scale = std::pow(p.epsilon, -2.0 / 3.0);
  cplx D = scale * I[0];
  const double gamma_third = 2.6789385347077476;
  double ref = std::pow(profile.du0, 2.0 / 3.0) * std::cbrt(3.0) * gamma_third;
  cplx C = std::abs(D) >= 1.0 / (10.0 * ref) ? 1.0 / D : cplx{1.0, 0.0};
  if (std::abs(C) < 0.1 || std::abs(C) > 1.0 + 10.0 * ref)
    throw StabError(ErrCode::magnitude_floor,
                    "fast-mode normalization constant out of range",
                    std::abs(C));

  OsMode out;
  out.coefficient = C;
  out.approx.resize(n);
  for (int i = 0; i < n; ++i) out.approx[i] = C * scale * I[i];

  // residual of the approximate mode, in closed form (no fourth-derivative
  // stencils on the layer): W = -OS[approx]
  auto us = profile.sample(mesh, 0);
  auto uspp = profile.sample(mesh, 2);
  std::vector<cplx> W(n);
  for (int i = 0; i < n; ++i)
    W[i] = -C * scale * (us[i] - profile.du0 * mesh.nodes[i]) * fp.psi0[i] +
           kI * C * std::cbrt(p.epsilon) * a * a * fp.psi0[i] +
           uspp[i] * out.approx[i];

  auto f1 = op_sigma(mesh, W);
  for (auto& v : f1) v *= -kI * a;
  auto os0 = solve_os0(f1, {}, p, profile, mesh);
  out.corr1 = std::move(os0.phi);

  auto du = profile.sample(mesh, 1);
  std::vector<cplx> q(out.corr1.size());
  for (size_t i = 0; i < q.size(); ++i) q[i] = du[i] * out.corr1[i];
  auto g = mesh.derivative(q, 1);
  auto mos = solve_modified_os(g, p, profile, mesh);
  out.corr2 = std::move(mos.phi);
  out.trace = std::move(mos.trace);

  out.phi = add(out.approx, add(out.corr1, out.corr2));
  polish_mode(out.phi, p, profile, mesh);  // keeps phi(0), dphi(0) fixed
  out.wall_value = out.phi[0];
  // d_Y approx(0) = a approx(0) - C e^{-2/3} J(0) exactly; corrections by
  // stencil
  auto dcorr = mesh.derivative(add(out.corr1, out.corr2), 1);
  out.wall_derivative = a * out.approx[0] - C * scale * J[0] + dcorr[0];
  out.os_residual = os_residual(out.phi, {}, p, profile, mesh);
  return out;
}

Assembled assemble_clamped(std::span<const cplx> phi_slip,
                           const ModePair& modes, const OsParams& p,
                           const Mesh& mesh) {
  p.require_valid();
  const auto& s = modes.slow;
  const auto& f = modes.fast;
  cplx det = s.wall_value * f.wall_derivative - f.wall_value * s.wall_derivative;
  double floor = p.alpha <= 1.0
                     ? p.c_det * (1.0 / p.alpha + 1.0 / p.layer())
                     : p.c_det / p.layer();
  if (std::abs(det) < floor)
    throw StabError(ErrCode::magnitude_floor,
                    "mode determinant below the regime floor", std::abs(det));

  cplx dslip = mesh.derivative(phi_slip, 1)[0];
  Assembled out;
  out.detM = det;
  out.a = dslip / det * f.wall_value;
  out.b = -dslip / det * s.wall_value;
  out.phi.resize(phi_slip.size());
  for (size_t i = 0; i < out.phi.size(); ++i)
    out.phi[i] = phi_slip[i] + out.a * s.phi[i] + out.b * f.phi[i];
  return out;
}

OsSolution solve_os(std::span<const cplx> f, const OsParams& p,
                    const ShearProfile& profile, const Mesh& mesh) {
  p.require_construction();
  auto slip = solve_modified_os(f, p, profile, mesh);
  ModePair modes{build_slow_mode(p, profile, mesh),
                 build_fast_mode(p, profile, mesh), cplx{}};
  modes.detM = modes.slow.wall_value * modes.fast.wall_derivative -
               modes.fast.wall_value * modes.slow.wall_derivative;
  auto asm_ = assemble_clamped(slip.phi, modes, p, mesh);

  OsSolution out;
  out.phi = std::move(asm_.phi);
  out.a = asm_.a;
  out.b = asm_.b;
  out.detM = asm_.detM;
  out.trace = std::move(slip.trace);
  out.residual = os_residual(out.phi, f, p, profile, mesh);
  out.source_average = mesh.integrate(f);

  auto d1 = mesh.derivative(out.phi, 1);
  auto d2 = mesh.derivative(out.phi, 2);
  double a2 = p.alpha * p.alpha;
  std::vector<cplx> h(out.phi.size());
  std::vector<cplx> w1(f.size()), w2(f.size());
  for (size_t i = 0; i < out.phi.size(); ++i) {
    h[i] = d2[i] - a2 * out.phi[i];
    double y1 = 1.0 + mesh.nodes[i];
    w1[i] = y1 * f[i];
    w2[i] = y1 * y1 * f[i];
  }
  out.norm_dphi = norm_l2(mesh, d1);
  out.norm_alpha_phi = p.alpha * norm_l2(mesh, out.phi);
  out.norm_h_alpha_phi = norm_l2(mesh, h);
  out.norm_dphi_sup = norm_sup(d1);
  out.weight1 = norm_l2(mesh, w1);
  out.weight2 = norm_l2(mesh, w2);
  return out;
}

}  // namespace stab
