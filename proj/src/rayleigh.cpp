#include "stab/rayleigh.hpp"

#include <cmath>

namespace stab {
namespace {

// T phi = rhs with phi(0) = 0 and (d_Y + a) phi(Ymax) = robin_value.
std::vector<cplx> t_solve(std::span<const cplx> rhs, double alpha,
                          const ShearProfile& profile, const Mesh& mesh,
                          cplx robin_value = {}) {
  const std::vector<double> us = profile.sample(mesh, 0);
  const std::vector<double> uspp = profile.sample(mesh, 2);
  const int n = mesh.n();
  std::vector<double> ratio(n, 0.0);  // -U_s''/U_s; wall row is a BC row
  for (int i = 1; i < n; ++i) ratio[i] = -uspp[i] / us[i];

  BvpSystem sys(mesh, 1, 1);
  sys.add_term(cplx{1.0, 0.0}, 2);
  sys.add_term(cplx{-alpha * alpha, 0.0}, 0);
  sys.add_term(ratio, cplx{1.0, 0.0}, 0);
  sys.set_boundary(0, {{0, cplx{1.0, 0.0}}}, cplx{0.0, 0.0});
  sys.set_boundary(n - 1, {{1, cplx{1.0, 0.0}}, {0, cplx{alpha, 0.0}}},
                   robin_value);
  sys.set_rhs(rhs);
  return solve_bvp(sys);
}

// ||Ray[phi] - f||_{L2} over equation rows (the two BC rows excluded),
// relative to ||f|| (or to `scale` when given, for homogeneous f).
double ray_residual(std::span<const cplx> phi, std::span<const cplx> f,
                    double alpha, const ShearProfile& profile, const Mesh& mesh,
                    double scale = 0.0) {
  const std::vector<double> us = profile.sample(mesh, 0);
  const std::vector<double> uspp = profile.sample(mesh, 2);
  const std::vector<cplx> d2 = mesh.derivative(phi, 2);
  const int n = mesh.n();
  std::vector<cplx> r(n, cplx{0.0, 0.0});
  for (int i = 1; i < n - 1; ++i)
    r[i] = us[i] * (d2[i] - alpha * alpha * phi[i]) - uspp[i] * phi[i] - f[i];
  if (scale == 0.0) scale = norm_l2(mesh, f);
  if (scale == 0.0) return 0.0;
  return norm_l2(mesh, r) / scale;
}

std::vector<cplx> to_cplx(std::span<const double> v) {
  return std::vector<cplx>(v.begin(), v.end());
}

}  // namespace

RayleighSolution solve_rayleigh(std::span<const cplx> f, double alpha,
                                const ShearProfile& profile, const Mesh& mesh) {
  if (!(alpha > 0.0))
    throw StabError(ErrCode::invalid_argument, "alpha must be positive", alpha);
  const int n = mesh.n();
  RayleighSolution out;
  out.average_part = mesh.integrate(f);

  const double sup_f = norm_sup(f);
  out.strong_source = std::abs(f[0]) <= 1e-8 * std::max(sup_f, 1e-300);
  std::vector<cplx> h;
  if (out.strong_source) {
    h = div_by_us(mesh, profile, f);
  } else {
    // f(0) != 0: f/U_s is only weakly integrable; the wall value feeds no
    // equation row (it is the Dirichlet row), so any finite placeholder works.
    const std::vector<double> us = profile.sample(mesh, 0);
    h.resize(n);
    for (int i = 1; i < n; ++i) h[i] = f[i] / us[i];
  }
  out.phi = t_solve(h, alpha, profile, mesh);
  out.residual = ray_residual(out.phi, f, alpha, profile, mesh);
  return out;
}

std::vector<double> build_rho(const ShearProfile& profile, const Mesh& mesh) {
  if (mesh.Ymax < 3.0)
    throw StabError(ErrCode::invalid_argument,
                    "mesh too short for the bump support (1,2)", mesh.Ymax);
  const int n = mesh.n();
  const std::vector<double> us = profile.sample(mesh, 0);
  std::vector<double> rho(n, 0.0), us_rho(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * mesh.nodes[i] - 3.0;
    if (std::abs(t) < 1.0) rho[i] = std::exp(-1.0 / (1.0 - t * t));
    us_rho[i] = us[i] * rho[i];
  }
  const double mass = mesh.integrate(us_rho);
  for (double& v : rho) v /= mass;
  return rho;
}

RayleighSolution solve_rayleigh_decomposed(std::span<const cplx> h, double alpha,
                                           const ShearProfile& profile,
                                           const Mesh& mesh) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw StabError(ErrCode::invalid_argument,
                    "decomposed route requires alpha in (0,1]", alpha);
  const int n = mesh.n();
  const std::vector<double> us = profile.sample(mesh, 0);
  const std::vector<double> du = profile.sample(mesh, 1);
  const std::vector<double> rho = build_rho(profile, mesh);

  std::vector<cplx> us_h(n);
  for (int i = 0; i < n; ++i) us_h[i] = us[i] * h[i];
  const cplx cc = mesh.integrate(us_h);

  RayleighSolution out;
  out.decomposed = true;
  out.h2_coeff = cc;
  out.average_part = cc;

  // average-free part: phi11 = K[U_s h1] solves T0 phi = h1 with phi11(0) = 0
  // because int U_s h1 = 0; phi12 restores the -a^2 term.
  std::vector<cplx> us_h1(n);
  for (int i = 0; i < n; ++i) us_h1[i] = us_h[i] - cc * (us[i] * rho[i]);
  AccuracyReport rep1;
  out.phi11 = op_K(mesh, profile, us_h1, &rep1);
  std::vector<cplx> src(n);
  for (int i = 0; i < n; ++i) src[i] = alpha * alpha * out.phi11[i];
  out.phi12 = t_solve(src, alpha, profile, mesh);

  // bump part through G_s: phi21 = cc (K[U_s rho] - G_s e^{-aY}) satisfies
  // T phi21 = cc rho + g1, so phi22 solves T phi22 = -g1. Both phi21 and the
  // combination decay like e^{-aY}; phi22 alone carries a resonant Y e^{-aY}
  // tail with known coefficient, closed by an inhomogeneous Robin row.
  AccuracyReport rep2, rep3;
  const std::vector<double> gs = compute_Gs(mesh, profile, &rep2);
  std::vector<cplx> us_rho(n);
  for (int i = 0; i < n; ++i) us_rho[i] = us[i] * rho[i];
  const std::vector<cplx> k_rho = op_K(mesh, profile, us_rho, &rep3);

  out.phi21.resize(n);
  std::vector<cplx> g1(n, cplx{0.0, 0.0});
  std::vector<double> dgs(n, 0.0);  // Wronskian: U_s G_s' - U_s' G_s = -1
  for (int i = 1; i < n; ++i) dgs[i] = (du[i] * gs[i] - 1.0) / us[i];
  for (int i = 0; i < n; ++i) {
    const double e = std::exp(-alpha * mesh.nodes[i]);
    out.phi21[i] = cc * (k_rho[i] - gs[i] * e);
    g1[i] = cc * (2.0 * alpha * dgs[i] * e - alpha * alpha * k_rho[i]);
  }
  std::vector<cplx> neg_g1(n);
  for (int i = 0; i < n; ++i) neg_g1[i] = -g1[i];
  const cplx robin = cc * dgs[n - 1] * std::exp(-alpha * mesh.Ymax);
  out.phi22 = t_solve(neg_g1, alpha, profile, mesh, robin);

  out.phi.resize(n);
  for (int i = 0; i < n; ++i)
    out.phi[i] = out.phi11[i] + out.phi12[i] + out.phi21[i] + out.phi22[i];

  std::vector<cplx> f(n);
  for (int i = 0; i < n; ++i) f[i] = us_h[i];
  out.residual = ray_residual(out.phi, f, alpha, profile, mesh);
  out.quadrature_degraded = rep1.degraded || rep2.degraded || rep3.degraded;
  return out;
}

SlowRayleighMode build_slow_rayleigh(double alpha, const ShearProfile& profile,
                                     const Mesh& mesh) {
  if (!(alpha > 0.0))
    throw StabError(ErrCode::invalid_argument, "alpha must be positive", alpha);
  const int n = mesh.n();
  const std::vector<double> us = profile.sample(mesh, 0);
  const std::vector<double> uspp = profile.sample(mesh, 2);
  std::vector<double> e(n);
  for (int i = 0; i < n; ++i) e[i] = std::exp(-alpha * mesh.nodes[i]);

  SlowRayleighMode out;
  if (alpha < 1.0) {
    const std::vector<double> du = profile.sample(mesh, 1);
    std::vector<cplx> w(n);
    for (int i = 0; i < n; ++i) w[i] = us[i] * du[i] * e[i];
    const std::vector<cplx> q = op_K(mesh, profile, w);

    out.part0.resize(n);
    out.part1.resize(n);
    for (int i = 0; i < n; ++i) {
      out.part0[i] = us[i] * e[i];
      out.part1[i] = 2.0 * alpha * q[i];
    }
    const cplx phi1_0 = out.part1[0];
    const double floor =
        0.1 * alpha * profile.u_inf * profile.u_inf / profile.du0;
    if (std::abs(phi1_0) < floor)
      throw StabError(ErrCode::magnitude_floor,
                      "slow Rayleigh seed part1(0) below magnitude floor",
                      std::abs(phi1_0));
    out.c_E = alpha / phi1_0;

    // corrector source 2 a^3 U_s q is resonant at the top (q ~ C e^{-aY}/a);
    // the matching particular tail fixes (d_Y + a) part2(Ymax).
    std::vector<cplx> src(n);
    for (int i = 0; i < n; ++i) src[i] = 2.0 * alpha * alpha * alpha * q[i];
    out.part2 =
        t_solve(src, alpha, profile, mesh, -alpha * alpha * q[n - 1]);

    out.phi.resize(n);
    const cplx s = out.c_E / alpha;
    for (int i = 0; i < n; ++i)
      out.phi[i] = s * (out.part0[i] + out.part1[i] + out.part2[i]);

    std::vector<double> cancelled(n);
    for (int i = 0; i < n; ++i) cancelled[i] = 2.0 * alpha * us[i] * du[i] * e[i];
    const double scale =
        std::abs(s) * norm_l2(mesh, to_cplx(cancelled));
    const std::vector<cplx> zero(n, cplx{0.0, 0.0});
    out.residual = ray_residual(out.phi, zero, alpha, profile, mesh, scale);
  } else {
    out.small_alpha = false;
    std::vector<cplx> h(n, cplx{0.0, 0.0});
    for (int i = 1; i < n; ++i) h[i] = uspp[i] * e[i] / us[i];
    out.part0 = to_cplx(e);
    out.part1 = t_solve(h, alpha, profile, mesh);
    out.phi.resize(n);
    for (int i = 0; i < n; ++i) out.phi[i] = out.part0[i] + out.part1[i];

    std::vector<cplx> f(n);
    for (int i = 0; i < n; ++i) f[i] = uspp[i] * e[i];
    const std::vector<cplx> zero(n, cplx{0.0, 0.0});
    out.residual = ray_residual(out.phi, zero, alpha, profile, mesh,
                                norm_l2(mesh, f));
  }
  return out;
}

}  // namespace stab
