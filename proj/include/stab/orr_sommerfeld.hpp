#pragma once
#include <span>
#include <vector>

#include "stab/mesh.hpp"
#include "stab/profile.hpp"

namespace stab {

// Parameters of OS[phi] = U_s(d_Y^2-a^2)phi - U_s''phi + i e (d_Y^2-a^2)^2 phi.
// The splitting construction is validated on e^{1/3} a <= delta0; the slow /
// fast modes additionally need e <= eps1 and e^{1/3} a <= delta1.
struct OsParams {
  double epsilon = 0.0;
  double alpha = 0.0;

  double delta0 = 0.3;
  double delta1 = 0.3;
  double eps0 = 0.05;
  double eps1 = 0.05;
  double c_det = 0.1;          // detM floor coefficient
  double increment_tol = 1e-10;  // relative H1 stop for the slip iteration

  double layer() const;    // e^{1/3}, the wall-layer width
  double product() const;  // e^{1/3} a, the regime-control quantity

  void require_valid() const;         // e > 0, a > 0
  void require_construction() const;  // + e <= eps0, product <= delta0
  void require_modes() const;         // + e <= eps1, product <= delta1
};

// One step of the Rayleigh--Airy iteration. ratio = ||d_Y phi_k|| /
// ||d_Y phi_{k-1}|| (k >= 2), the observed contraction into this step.
struct IterationStep {
  int k = 0;
  double dphi = 0.0;       // ||d_Y phi_k||
  double alpha_phi = 0.0;  // a ||phi_k||
  double psi = 0.0;        // ||psi_k||
  double us_psi = 0.0;     // ||U_s psi_k||
  double ratio = 0.0;      // 0 on the seed step
  cplx source_average{};   // int U_s tpsi_k, the next Rayleigh source average
};

struct IterationTrace {
  std::vector<IterationStep> steps;
  bool converged = false;
  double final_increment = 0.0;  // relative H1 size of the last partial term
};

// Slip solution: OS[Phi] = f, Phi(0) = 0, (d_Y^3 - a^2 d_Y)Phi(0) = 0.
struct MosSolution {
  std::vector<cplx> phi;
  IterationTrace trace;
  double residual = 0.0;  // componentwise backward error of OS[Phi] = f
};

// Symmetrized solve OS0[phi] = -f2 - (i/a) d_Y f1, phi(0) = d_Y phi(0) = 0,
// where OS0 = d_Y(U_s d_Y .) - a^2 U_s + i e (d_Y^2-a^2)^2. The two energy
// identities below hold exactly for the continuum operator; the recorded
// defects measure the discrete solve.
struct Os0Solution {
  std::vector<cplx> phi;
  double rel_residual = 0.0;  // linear-system residual
  // identity 1: ||sqrt(U_s) d_Y phi||^2 + a^2 ||sqrt(U_s) phi||^2
  //           = Re <f2 + (i/a) d_Y f1, phi>
  double energy_lhs_re = 0.0, energy_rhs_re = 0.0;
  // identity 2: e ||(d_Y^2-a^2) phi||^2 = -Im <f2 + (i/a) d_Y f1, phi>
  double energy_lhs_im = 0.0, energy_rhs_im = 0.0;
};

// Homogeneous decaying mode with phi(0) = 1: approx + first + second
// correction stages, wall data, and the stage coefficient (c_E for the slow
// mode, the layer normalization constant for the fast mode).
struct OsMode {
  std::vector<cplx> phi;
  std::vector<cplx> approx, corr1, corr2;
  cplx wall_value{};
  cplx wall_derivative{};
  cplx coefficient{};
  double os_residual = 0.0;  // componentwise backward error of OS[phi] = 0
  IterationTrace trace;      // of the slip-correction stage
};

struct ModePair {
  OsMode slow, fast;
  cplx detM{};  // (phi_slow d_Y phi_fast - phi_fast d_Y phi_slow)(0)
};

struct OsSolution {
  std::vector<cplx> phi;
  cplx a{}, b{}, detM{};
  IterationTrace trace;       // slip stage
  double residual = 0.0;      // componentwise backward error of OS[phi] = f
  cplx source_average{};      // int f dY
  // measured estimate-family data: solution norms vs source weights
  double norm_dphi = 0.0, norm_alpha_phi = 0.0, norm_h_alpha_phi = 0.0;
  double norm_dphi_sup = 0.0;
  double weight1 = 0.0;  // ||(1+Y) f||
  double weight2 = 0.0;  // ||(1+Y)^2 f||
};

enum class OsBc { clamped, slip };

// Discrete operator applications (stencil derivatives on nodal samples).
std::vector<cplx> apply_os(std::span<const cplx> phi, const OsParams& p,
                           const ShearProfile& profile, const Mesh& mesh);
std::vector<cplx> apply_os0(std::span<const cplx> phi, const OsParams& p,
                            const ShearProfile& profile, const Mesh& mesh);

// Componentwise backward error of the discrete OS[phi] = f over equation
// rows: max_i |(A phi - f)_i| / (|A||phi| + |f|)_i. Row-relative, so the
// 1/h^4 wall-row amplification of the raw residual cancels out. f may be
// empty (homogeneous).
double os_residual(std::span<const cplx> phi, std::span<const cplx> f,
                   const OsParams& p, const ShearProfile& profile,
                   const Mesh& mesh);

// Monolithic banded solve of OS[phi] = f with the requested wall rows
// (clamped: phi = d_Y phi = 0; slip: phi = (d_Y^3 - a^2 d_Y)phi = 0) and
// decay closure at the top. Ground truth for the split constructions.
std::vector<cplx> direct_os_oracle(std::span<const cplx> f, const OsParams& p,
                                   const ShearProfile& profile, const Mesh& mesh,
                                   OsBc bc, BvpReport* report = nullptr);

Os0Solution solve_os0(std::span<const cplx> f1, std::span<const cplx> f2,
                      const OsParams& p, const ShearProfile& profile,
                      const Mesh& mesh);

// Rayleigh--Airy iteration for the slip problem. Seeds phi_1 (Rayleigh),
// psi_1 (Airy, source -i e (f + U_s'' phi_1)/U_s), tpsi_1 (Neumann Airy),
// then alternates Rayleigh / Airy / Neumann-Airy steps until the H1
// increment of the partial sum drops below p.increment_tol.
MosSolution solve_modified_os(std::span<const cplx> f, const OsParams& p,
                              const ShearProfile& profile, const Mesh& mesh,
                              int max_iter = 40);

OsMode build_slow_mode(const OsParams& p, const ShearProfile& profile,
                             const Mesh& mesh);
OsMode build_fast_mode(const OsParams& p, const ShearProfile& profile,
                             const Mesh& mesh);

// phi = phi_slip + a phi_slow + b phi_fast with phi(0) = d_Y phi(0) = 0:
// (a,b) = (d_Y phi_slip(0)/detM) (phi_fast(0), -phi_slow(0)). Refuses when
// |detM| falls below c_det (1/a + 1/e^{1/3}) (a <= 1) or c_det/e^{1/3}.
struct Assembled {
  std::vector<cplx> phi;
  cplx a{}, b{}, detM{};
};
Assembled assemble_clamped(std::span<const cplx> phi_slip, const ModePair& modes,
                           const OsParams& p, const Mesh& mesh);

OsSolution solve_os(std::span<const cplx> f, const OsParams& p,
                    const ShearProfile& profile, const Mesh& mesh);

}  // namespace stab
