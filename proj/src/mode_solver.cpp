#include "stab/mode_solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

namespace stab {
namespace {

constexpr cplx kI{0.0, 1.0};

std::vector<cplx> conj_of(std::span<const cplx> f) {
  std::vector<cplx> out(f.begin(), f.end());
  for (auto& v : out) v = std::conj(v);
  return out;
}

double vec_l2(const Mesh& mesh, std::span<const cplx> a, std::span<const cplx> b) {
  return std::hypot(norm_l2(mesh, a), norm_l2(mesh, b));
}

void require_sizes(std::span<const cplx> f1, std::span<const cplx> f2,
                   const Mesh& mesh, const char* who) {
  if (static_cast<int>(f1.size()) != mesh.n() ||
      static_cast<int>(f2.size()) != mesh.n())
    throw StabError(ErrCode::invalid_argument, who, static_cast<double>(f1.size()));
}

// OsParams for the layer-variable solve. The mode bands run the OS machinery
// up to epsilon^{1/3} alpha = (delta_star (1 + margin))^{2/3} ~ 0.46 at the
// os/high handoff and epsilon = 1/|n~| up to ~0.15 at the bottom of the low
// band, so the guards sit at the band edges rather than at the tighter
// single-solve defaults.
OsParams layer_params(double tn, double nu) {
  OsParams p;
  p.epsilon = 1.0 / tn;
  p.alpha = tn * std::sqrt(nu);
  p.eps0 = p.eps1 = 0.15;
  p.delta0 = p.delta1 = 0.6;
  return p;
}

struct EnergyInputs {
  std::span<const double> U;   // U_s^nu(y)
  std::span<const double> dU;  // d_y U_s^nu
};

// Norms, estimate constants, divergence, and the two energy identities,
// shared by every route. All integrals use the physical mesh weights.
void finish(ModeSolution& sol, const Mesh& mesh, double tn, double nu,
            std::span<const cplx> f1, std::span<const cplx> f2,
            const EnergyInputs& en, Regime regime) {
  int n = mesh.n();
  auto du1 = mesh.derivative(sol.u1, 1);
  auto du2 = mesh.derivative(sol.u2, 1);

  sol.norm_l2 = vec_l2(mesh, sol.u1, sol.u2);
  sol.norm_dy_l2 = vec_l2(mesh, du1, du2);
  sol.f_norm = vec_l2(mesh, f1, f2);
  for (int i = 0; i < n; ++i) {
    sol.norm_sup = std::max(sol.norm_sup,
                            std::hypot(std::abs(sol.u1[i]), std::abs(sol.u2[i])));
    sol.divergence_max =
        std::max(sol.divergence_max, std::abs(kI * tn * sol.u1[i] + du2[i]));
  }

  std::vector<double> e_grad(n), e_u(n), e_uu(n);
  std::vector<cplx> fu(n), shear(n), phigrad(n);
  for (int i = 0; i < n; ++i) {
    e_grad[i] = std::norm(du1[i]) + std::norm(du2[i]);
    e_u[i] = std::norm(sol.u1[i]) + std::norm(sol.u2[i]);
    e_uu[i] = en.U[i] * e_u[i];
    fu[i] = f1[i] * std::conj(sol.u1[i]) + f2[i] * std::conj(sol.u2[i]);
    shear[i] = en.dU[i] * sol.u2[i] * std::conj(sol.u1[i]);
    // d_y phi = u1 by construction on every route
    phigrad[i] = en.dU[i] * sol.phi[i] * std::conj(sol.u1[i]);
  }
  cplx ip_fu = mesh.integrate(std::span<const cplx>(fu));
  cplx ip_shear = mesh.integrate(std::span<const cplx>(shear));
  cplx ip_phigrad = mesh.integrate(std::span<const cplx>(phigrad));
  double tn2 = tn * tn;
  sol.energy_re_lhs = nu * (mesh.integrate(std::span<const double>(e_grad)) +
                            tn2 * mesh.integrate(std::span<const double>(e_u)));
  sol.energy_re_rhs = -ip_shear.real() + ip_fu.real();
  sol.energy_im_lhs =
      tn * (mesh.integrate(std::span<const double>(e_uu)) - ip_phigrad.real());
  sol.energy_im_rhs = ip_fu.imag();

  sol.estimates.regime = regime;
  if (sol.f_norm > 0.0) {
    double dfam = (sol.norm_dy_l2 + tn * sol.norm_l2) / sol.f_norm;
    switch (regime) {
      case Regime::low:
        sol.estimates.l2_constant = sol.norm_l2 * std::sqrt(tn) / sol.f_norm;
        sol.estimates.deriv_constant = dfam * std::cbrt(tn) * std::sqrt(nu);
        sol.estimates.sup_constant =
            sol.norm_sup * std::sqrt(tn) * std::pow(nu, 0.25) / sol.f_norm;
        break;
      case Regime::mid:
        sol.estimates.l2_constant =
            sol.norm_l2 * std::pow(tn, 11.0 / 6.0) * std::sqrt(nu) / sol.f_norm;
        sol.estimates.deriv_constant = dfam * std::cbrt(tn) * std::sqrt(nu);
        sol.estimates.sup_constant =
            sol.norm_sup * std::sqrt(tn) * std::pow(nu, 0.25) / sol.f_norm;
        break;
      case Regime::os:
        sol.estimates.l2_constant =
            sol.norm_l2 * std::pow(tn, 2.0 / 3.0) / sol.f_norm;
        sol.estimates.deriv_constant = dfam * std::cbrt(tn) * std::sqrt(nu);
        break;
      case Regime::high:
        sol.estimates.l2_constant = sol.norm_l2 * tn2 * nu / sol.f_norm;
        sol.estimates.deriv_constant = dfam * tn * nu;
        break;
      case Regime::zero:
        break;
    }
  }
}

ModeSolution solve_mode_os_pos(std::span<const cplx> f1, std::span<const cplx> f2,
                               double tn, double nu, Regime regime,
                               const ShearProfile& profile, const Mesh& y_mesh) {
  int n = y_mesh.n();
  double rnu = std::sqrt(nu);

  // exact node map y = sqrt(nu) Y: rescaling never interpolates
  std::vector<double> Ynodes(y_mesh.nodes);
  for (auto& y : Ynodes) y /= rnu;
  Mesh Ymesh = Mesh::from_nodes(std::move(Ynodes), y_mesh.order,
                                std::min(1.0, y_mesh.bl_scale / rnu));

  OsParams p = layer_params(tn, nu);
  std::vector<cplx> f1Y(n), f2Y(n);
  for (int i = 0; i < n; ++i) {
    f1Y[i] = rnu * f1[i];
    f2Y[i] = rnu * f2[i];
  }

  auto us = profile.sample(Ymesh, 0);
  auto dus = profile.sample(Ymesh, 1);

  Os0Solution base = solve_os0(f1Y, f2Y, p, profile, Ymesh);

  std::vector<cplx> updphi0(n);
  for (int i = 0; i < n; ++i) updphi0[i] = dus[i] * base.phi[i];
  auto src = Ymesh.derivative(updphi0, 1);
  OsSolution corr = solve_os(src, p, profile, Ymesh);

  std::vector<cplx> phi(n);
  for (int i = 0; i < n; ++i) phi[i] = base.phi[i] + corr.phi[i];

  auto d1 = Ymesh.derivative(phi, 1);
  auto d2 = Ymesh.derivative(phi, 2);
  auto d3 = Ymesh.derivative(phi, 3);

  ModeSolution sol;
  sol.u1 = d1;
  sol.u2.resize(n);
  sol.phi.resize(n);
  double a = p.alpha, a2 = a * a;
  for (int i = 0; i < n; ++i) {
    sol.u2[i] = -kI * a * phi[i];
    sol.phi[i] = rnu * phi[i];  // physical streamfunction
  }

  // vertical momentum row integrated down from infinity (p -> 0 gauge):
  // integration smooths the layer-scale solve error instead of
  // differentiating it; the horizontal row is then the independent defect
  cplx itn = kI * tn;
  std::vector<cplx> dpress(n);
  for (int i = 0; i < n; ++i) {
    cplx visc2 = -kI * a * (d2[i] - a2 * phi[i]);  // nu (d_y^2 - n~^2) u2
    dpress[i] = f2[i] - itn * us[i] * sol.u2[i] + visc2;
  }
  // d_y p = dpress: p = -int_y^inf dpress, tail-fitted beyond y_max so the
  // slow e^{-alpha Y} pressure tail does not shift the gauge
  for (auto& v : dpress) v *= rnu;
  auto sig = op_sigma(Ymesh, dpress);
  sol.p.resize(n);
  for (int i = 0; i < n; ++i) sol.p[i] = -sig[i];

  std::vector<cplx> r1(n);
  for (int i = 0; i < n; ++i) {
    cplx visc1 = d3[i] - a2 * d1[i];  // nu (d_y^2 - n~^2) u1
    r1[i] = itn * us[i] * sol.u1[i] + dus[i] / rnu * sol.u2[i] - visc1 +
            itn * sol.p[i] - f1[i];
  }
  double fn = vec_l2(y_mesh, f1, f2);
  sol.momentum_residual = fn > 0.0 ? norm_l2(y_mesh, r1) / fn : 0.0;

  std::vector<double> dUy(n);
  for (int i = 0; i < n; ++i) dUy[i] = dus[i] / rnu;
  finish(sol, y_mesh, tn, nu, f1, f2, {us, dUy}, regime);
  return sol;
}

ModeSolution solve_mode_direct_pos(std::span<const cplx> f1,
                                   std::span<const cplx> f2, double tn, double nu,
                                   Regime regime, const ShearProfile& profile,
                                   const Mesh& y_mesh) {
  int n = y_mesh.n();
  double rnu = std::sqrt(nu);

  // physical-variable profile U_s^nu(y) = U_s(y / sqrt(nu))
  ShearProfile pnu;
  pnu.u = [U = profile.u, rnu](double y) { return U(y / rnu); };
  pnu.du = [dU = profile.du, rnu](double y) { return dU(y / rnu) / rnu; };
  pnu.ddu = [ddU = profile.ddu, rnu, nu](double y) { return ddU(y / rnu) / nu; };
  pnu.u_inf = profile.u_inf;
  pnu.du0 = profile.du0 / rnu;
  pnu.ddu0 = profile.ddu0 / nu;
  pnu.y0 = profile.y0 * rnu;
  pnu.decay_norm = profile.decay_norm / nu;
  pnu.kind = profile.kind;

  OsParams p;
  p.epsilon = nu / tn;
  p.alpha = tn;

  std::vector<cplx> rhs(n);
  auto df1 = y_mesh.derivative(f1, 1);
  for (int i = 0; i < n; ++i) rhs[i] = -f2[i] - kI / tn * df1[i];

  BvpReport rep;
  auto phi = direct_os_oracle(rhs, p, pnu, y_mesh, OsBc::clamped, &rep);

  auto d1 = y_mesh.derivative(phi, 1);
  auto d2 = y_mesh.derivative(phi, 2);
  auto d3 = y_mesh.derivative(phi, 3);

  ModeSolution sol;
  sol.phi = phi;
  sol.u1 = d1;
  sol.u2.resize(n);
  cplx itn = kI * tn;
  for (int i = 0; i < n; ++i) sol.u2[i] = -itn * phi[i];

  auto U = pnu.sample(y_mesh, 0);
  auto dU = pnu.sample(y_mesh, 1);

  // vertical momentum row integrated down from infinity (p -> 0 gauge);
  // the horizontal row is then the independent defect
  double tn2 = tn * tn;
  std::vector<cplx> dpress(n);
  for (int i = 0; i < n; ++i) {
    cplx visc2 = -itn * (d2[i] - tn2 * phi[i]);
    dpress[i] = f2[i] - itn * U[i] * sol.u2[i] + nu * visc2;
  }
  auto sig = op_sigma(y_mesh, dpress);
  sol.p.resize(n);
  for (int i = 0; i < n; ++i) sol.p[i] = -sig[i];

  std::vector<cplx> r1(n);
  for (int i = 0; i < n; ++i) {
    cplx visc1 = d3[i] - tn2 * d1[i];
    r1[i] = itn * U[i] * sol.u1[i] + dU[i] * sol.u2[i] - nu * visc1 +
            itn * sol.p[i] - f1[i];
  }
  double fn = vec_l2(y_mesh, f1, f2);
  sol.momentum_residual = fn > 0.0 ? norm_l2(y_mesh, r1) / fn : 0.0;

  finish(sol, y_mesh, tn, nu, f1, f2, {U, dU}, regime);
  return sol;
}

// Conjugation symmetry: u_{-n~}[f] = conj(u_{n~}[conj f]).
template <typename Solver>
ModeSolution dispatch_sign(double tn, Solver&& solve, std::span<const cplx> f1,
                           std::span<const cplx> f2) {
  if (tn > 0.0) return solve(f1, f2, tn);
  auto c1 = conj_of(f1);
  auto c2 = conj_of(f2);
  ModeSolution sol = solve(c1, c2, -tn);
  for (auto* v : {&sol.u1, &sol.u2, &sol.phi, &sol.p})
    for (auto& x : *v) x = std::conj(x);
  return sol;
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::zero: return "zero";
    case Regime::low: return "low";
    case Regime::mid: return "mid";
    case Regime::os: return "os";
    case Regime::high: return "high";
  }
  return "?";
}

double ModeParams::alpha() const { return std::abs(tilde_n()) * std::sqrt(nu); }

double ModeParams::epsilon() const { return 1.0 / std::abs(tilde_n()); }

Regime ModeParams::regime() const {
  require_valid();
  if (n == 0) return Regime::zero;
  double a = std::abs(tilde_n());
  if (a <= std::pow(nu, -3.0 / 8.0)) return Regime::low;
  if (a <= std::pow(nu, -3.0 / 7.0)) return Regime::mid;
  if (a <= delta_star * std::pow(nu, -0.75)) return Regime::os;
  return Regime::high;
}

void ModeParams::require_valid() const {
  if (!(nu > 0.0) || !(kappa > 0.0) || !std::isfinite(nu) || !std::isfinite(kappa))
    throw StabError(ErrCode::invalid_argument,
                    "ModeParams requires nu > 0 and kappa > 0", nu);
}

Mesh build_mode_mesh(const ModeParams& params, double Ymax_layer, int n_nodes,
                     int min_bl_points) {
  params.require_valid();
  double rnu = std::sqrt(params.nu);
  double bl = params.n == 0 ? 0.9 : 0.9 * std::cbrt(params.epsilon());
  bl = std::min(bl, 0.9);
  Mesh layer = build_mesh(Ymax_layer, n_nodes, bl, min_bl_points);
  std::vector<double> ynodes(layer.nodes);
  for (auto& y : ynodes) y *= rnu;
  return Mesh::from_nodes(std::move(ynodes), layer.order, bl * rnu);
}

ModeSolution solve_zero_mode(std::span<const cplx> f01, std::span<const cplx> f02,
                             std::span<const cplx> F01, double nu, const Mesh& mesh) {
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw StabError(ErrCode::invalid_argument, "solve_zero_mode: nu > 0", nu);
  require_sizes(f01, f02, mesh, "solve_zero_mode: f0 size");
  require_sizes(F01, F01, mesh, "solve_zero_mode: F01 size");
  int n = mesh.n();

  ModeSolution sol;
  sol.u2.assign(n, cplx{});
  sol.p.resize(n);

  auto cumF = mesh.cumint(F01);
  sol.u1.resize(n);
  for (int i = 0; i < n; ++i) sol.u1[i] = cumF[i] / nu;
  sol.phi = mesh.cumint(std::span<const cplx>(sol.u1));

  auto sigf2 = op_sigma(mesh, f02);
  for (int i = 0; i < n; ++i) sol.p[i] = -sigf2[i];

  // d_y u1 = F01 / nu in closed form; the residual row uses the stencil
  // second derivative so it measures the quadrature honestly
  std::vector<cplx> du1(n);
  for (int i = 0; i < n; ++i) du1[i] = F01[i] / nu;
  auto d2u1 = mesh.derivative(sol.u1, 2);
  auto dp = mesh.derivative(sol.p, 1);
  std::vector<cplx> r1(n), r2(n);
  for (int i = 0; i < n; ++i) {
    r1[i] = nu * d2u1[i] - f01[i];
    r2[i] = dp[i] - f02[i];
  }
  sol.f_norm = vec_l2(mesh, f01, f02);
  sol.momentum_residual =
      sol.f_norm > 0.0 ? vec_l2(mesh, r1, r2) / sol.f_norm : 0.0;

  sol.norm_l2 = norm_l2(mesh, sol.u1);
  sol.norm_dy_l2 = norm_l2(mesh, std::span<const cplx>(du1));
  sol.norm_sup = norm_sup(sol.u1);

  std::vector<double> absF(n);
  for (int i = 0; i < n; ++i) absF[i] = std::abs(F01[i]);
  double F_l1 = mesh.integrate(std::span<const double>(absF));
  double F_l2 = norm_l2(mesh, F01);
  sol.estimates.regime = Regime::zero;
  if (F_l1 > 0.0) sol.estimates.sup_constant = sol.norm_sup * nu / F_l1;
  if (F_l2 > 0.0) sol.estimates.deriv_constant = sol.norm_dy_l2 * nu / F_l2;
  return sol;
}

ModeSolution solve_mode_os(std::span<const cplx> f1, std::span<const cplx> f2,
                           const ModeParams& params, const ShearProfile& profile,
                           const Mesh& y_mesh) {
  Regime regime = params.regime();
  if (params.n == 0)
    throw StabError(ErrCode::invalid_argument, "solve_mode_os: n != 0", 0.0);
  require_sizes(f1, f2, y_mesh, "solve_mode_os: f size");
  return dispatch_sign(
      params.tilde_n(),
      [&](std::span<const cplx> a, std::span<const cplx> b, double tn) {
        return solve_mode_os_pos(a, b, tn, params.nu, regime, profile, y_mesh);
      },
      f1, f2);
}

ModeSolution solve_mode_direct(std::span<const cplx> f1, std::span<const cplx> f2,
                               const ModeParams& params, const ShearProfile& profile,
                               const Mesh& y_mesh) {
  Regime regime = params.regime();
  if (params.n == 0)
    throw StabError(ErrCode::invalid_argument, "solve_mode_direct: n != 0", 0.0);
  require_sizes(f1, f2, y_mesh, "solve_mode_direct: f size");
  return dispatch_sign(
      params.tilde_n(),
      [&](std::span<const cplx> a, std::span<const cplx> b, double tn) {
        return solve_mode_direct_pos(a, b, tn, params.nu, regime, profile, y_mesh);
      },
      f1, f2);
}

ModeSolution solve_mode(std::span<const cplx> f1, std::span<const cplx> f2,
                        const ModeParams& params, const ShearProfile& profile,
                        const Mesh& y_mesh, std::span<const cplx> F01) {
  switch (params.regime()) {
    case Regime::zero:
      return solve_zero_mode(f1, f2, F01, params.nu, y_mesh);
    case Regime::low:
    case Regime::mid:
    case Regime::os:
      return solve_mode_os(f1, f2, params, profile, y_mesh);
    case Regime::high:
      return solve_mode_direct(f1, f2, params, profile, y_mesh);
  }
  throw StabError(ErrCode::invalid_argument, "solve_mode: bad regime", 0.0);
}

}  // namespace stab
