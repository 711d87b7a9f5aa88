#pragma once
#include <span>
#include <vector>

#include "stab/mesh.hpp"
#include "stab/profile.hpp"

namespace stab {

enum class SourceVariant { plain, dY, overY };

// Solution of Airy[psi] = U_s psi + i eps (d_Y^2 - alpha^2) psi = rhs.
struct AirySolution {
  std::vector<cplx> psi;
  double residual = 0.0;  // relative linear-system residual
  SourceVariant variant = SourceVariant::plain;
  bool neumann = false;  // boundary kind at Y = 0
  // Neumann diagnostics (empty / zero for Dirichlet solves)
  cplx int_us_psi{};             // integral of U_s psi
  cplx int_psi{};                // integral of psi
  std::vector<cplx> sigma_us_psi;  // tail integral of U_s psi
  double bound_rhs = 0.0;  // alpha^2 (eps^{1/6} ||Yf|| + eps^{1/2} ||f||)
};

// psi0 = Ai(lambda^{1/3} Y), the explicit wall-layer profile.
struct FastProfile {
  cplx lambda_cuberoot{};   // (U_s'(0)/eps)^{1/3} e^{i pi/6}
  std::vector<cplx> psi0;
  double residual = 0.0;    // sup| i eps psi0'' + Y U_s'(0) psi0 | / scale
};

// Solves Airy[psi] = eps * V(f), V = id | d_Y | 1/Y per variant, with
// psi(0) = 0 and decay closure (homogeneous Dirichlet) at Y_max.
AirySolution solve_airy_dirichlet(std::span<const cplx> f, double epsilon,
                                  double alpha, SourceVariant variant,
                                  const ShearProfile& profile,
                                  const Mesh& mesh);

// Solves Airy[psi] = d_Y f with d_Y psi(0) = 0; requires f(0) = 0.
AirySolution solve_airy_neumann(std::span<const cplx> f, double epsilon,
                                double alpha, const ShearProfile& profile,
                                const Mesh& mesh);

FastProfile build_fast_profile(double epsilon, const ShearProfile& profile,
                               const Mesh& mesh);

// singular-safe f/Y for f(0) = 0; node 0 takes the limit f'(0)
std::vector<cplx> div_by_Y(const Mesh& mesh, std::span<const cplx> f);

}  // namespace stab
