#include "stab/airy.hpp"

#include <cmath>
#include <numbers>

#include "stab/airy_fun.hpp"

namespace stab {
namespace {

void require_zero_at_wall(std::span<const cplx> f, const char* what) {
  double sup = 0.0;
  for (const cplx& v : f) sup = std::max(sup, std::abs(v));
  if (std::abs(f[0]) > 1e-8 * std::max(sup, 1e-300))
    throw StabError(ErrCode::invalid_argument, what, std::abs(f[0]));
}

AirySolution solve(std::span<const cplx> rhs, double epsilon, double alpha,
                   bool neumann, const ShearProfile& profile,
                   const Mesh& mesh) {
  const std::vector<double> us = profile.sample(mesh, 0);
  BvpSystem sys(mesh, 1, 1);
  sys.add_term(us, cplx{1.0, 0.0}, 0);
  sys.add_term(cplx{0.0, epsilon}, 2);
  sys.add_term(cplx{0.0, -epsilon * alpha * alpha}, 0);
  if (neumann)
    sys.set_boundary(0, {{1, cplx{1.0, 0.0}}}, cplx{0.0, 0.0});
  else
    sys.set_boundary(0, {{0, cplx{1.0, 0.0}}}, cplx{0.0, 0.0});
  sys.set_boundary(mesh.n() - 1, {{0, cplx{1.0, 0.0}}}, cplx{0.0, 0.0});
  sys.set_rhs(rhs);
  BvpReport rep;
  AirySolution out;
  out.psi = solve_bvp(sys, &rep);
  out.residual = rep.rel_residual;
  out.neumann = neumann;
  return out;
}

}  // namespace

std::vector<cplx> div_by_Y(const Mesh& mesh, std::span<const cplx> f) {
  require_zero_at_wall(f, "div_by_Y requires f(0) = 0");
  std::vector<cplx> out(mesh.n());
  const auto st = mesh.point_stencil(0.0, 1, -1);
  for (size_t j = 0; j < st.second.size(); ++j)
    out[0] += st.second[j] * f[st.first + j];
  for (int i = 1; i < mesh.n(); ++i) out[i] = f[i] / mesh.nodes[i];
  return out;
}

AirySolution solve_airy_dirichlet(std::span<const cplx> f, double epsilon,
                                  double alpha, SourceVariant variant,
                                  const ShearProfile& profile,
                                  const Mesh& mesh) {
  if (!(epsilon > 0.0))
    throw StabError(ErrCode::invalid_argument, "epsilon must be positive",
                    epsilon);
  if (alpha < 0.0)
    throw StabError(ErrCode::invalid_argument, "alpha must be nonnegative",
                    alpha);
  std::vector<cplx> rhs;
  switch (variant) {
    case SourceVariant::plain:
      rhs.assign(f.begin(), f.end());
      break;
    case SourceVariant::dY:
      require_zero_at_wall(f, "dY variant requires f(0) = 0");
      rhs = mesh.derivative(f, 1);
      break;
    case SourceVariant::overY:
      rhs = div_by_Y(mesh, f);
      break;
  }
  for (cplx& v : rhs) v *= epsilon;
  AirySolution out = solve(rhs, epsilon, alpha, false, profile, mesh);
  out.variant = variant;
  return out;
}

AirySolution solve_airy_neumann(std::span<const cplx> f, double epsilon,
                                double alpha, const ShearProfile& profile,
                                const Mesh& mesh) {
  if (!(epsilon > 0.0))
    throw StabError(ErrCode::invalid_argument, "epsilon must be positive",
                    epsilon);
  require_zero_at_wall(f, "Neumann solve requires f(0) = 0");
  const std::vector<cplx> rhs = mesh.derivative(f, 1);
  AirySolution out = solve(rhs, epsilon, alpha, true, profile, mesh);

  const std::vector<double> us = profile.sample(mesh, 0);
  std::vector<cplx> us_psi(mesh.n()), yf(mesh.n()), ff(f.begin(), f.end());
  for (int i = 0; i < mesh.n(); ++i) {
    us_psi[i] = us[i] * out.psi[i];
    yf[i] = mesh.nodes[i] * f[i];
  }
  out.int_us_psi = mesh.integrate(us_psi);
  out.int_psi = mesh.integrate(out.psi);
  out.sigma_us_psi = op_sigma(mesh, us_psi);
  out.bound_rhs = alpha * alpha *
                  (std::pow(epsilon, 1.0 / 6.0) * norm_l2(mesh, yf) +
                   std::sqrt(epsilon) * norm_l2(mesh, ff));
  return out;
}

FastProfile build_fast_profile(double epsilon, const ShearProfile& profile,
                               const Mesh& mesh) {
  if (!(epsilon > 0.0))
    throw StabError(ErrCode::invalid_argument, "epsilon must be positive",
                    epsilon);
  const double layer = std::cbrt(epsilon);
  if (mesh.bl_scale > layer * (1.0 + 1e-9))
    throw StabError(ErrCode::unresolved_layer,
                    "fast layer unresolved: mesh bl_scale exceeds epsilon^{1/3}",
                    mesh.bl_scale);
  FastProfile fp;
  fp.lambda_cuberoot = std::cbrt(profile.du0 / epsilon) *
                       std::polar(1.0, std::numbers::pi / 6.0);
  fp.psi0.resize(mesh.n());
  for (int i = 0; i < mesh.n(); ++i)
    fp.psi0[i] = airy_ai(fp.lambda_cuberoot * mesh.nodes[i]);

  // residual of i eps psi0'' + Y U_s'(0) psi0 = 0, relative to the layer
  // scale of each term
  const std::vector<cplx> d2 = mesh.derivative(fp.psi0, 2);
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < mesh.n(); ++i) {
    const cplx a = cplx{0.0, epsilon} * d2[i];
    const cplx b = mesh.nodes[i] * profile.du0 * fp.psi0[i];
    worst = std::max(worst, std::abs(a + b));
    scale = std::max({scale, std::abs(a), std::abs(b)});
  }
  fp.residual = worst / std::max(scale, 1e-300);
  return fp;
}

}  // namespace stab
