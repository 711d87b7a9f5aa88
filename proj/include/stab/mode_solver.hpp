#pragma once
#include <span>
#include <vector>

#include "stab/mesh.hpp"
#include "stab/orr_sommerfeld.hpp"
#include "stab/profile.hpp"

namespace stab {

// Frequency band of a mode, split by |n/kappa| against powers of nu. Each
// band gets its own solver route and resolvent-estimate family.
enum class Regime { zero, low, mid, os, high };
const char* regime_name(Regime r);

struct ModeParams {
  double nu = 0.0;    // viscosity
  double kappa = 0.0; // spectral spacing: mode n has wavenumber n~ = n/kappa
  int n = 0;          // mode index

  double delta_star = 0.3;  // os/high dispatch boundary coefficient

  double tilde_n() const { return static_cast<double>(n) / kappa; }
  double alpha() const;    // |n~| sqrt(nu), the rescaled wavenumber
  double epsilon() const;  // 1/|n~|, the rescaled viscosity
  Regime regime() const;

  void require_valid() const;  // nu > 0, kappa > 0, all finite
};

// Measured constants of the per-regime resolvent bounds: each is
// norm * predicted_rate / ||f||, so a sweep over n~ at fixed nu should keep
// them level. sup_constant is recorded in the low/mid band only.
struct EstimateRecord {
  Regime regime = Regime::zero;
  double l2_constant = 0.0;     // ||u|| against n~^{-1/2} | n~^{-11/6} nu^{-1/2} | n~^{-2/3} | n~^{-2} nu^{-1}
  double deriv_constant = 0.0;  // ||d_y u|| + |n~| ||u|| against n~^{-1/3} nu^{-1/2} | n~^{-1} nu^{-1}
  double sup_constant = 0.0;    // ||u||_inf against n~^{-1/2} nu^{-1/4}
};

// Velocity / pressure / streamfunction of one Fourier mode on the physical
// y-mesh, with the divergence, momentum-residual, and energy diagnostics.
struct ModeSolution {
  std::vector<cplx> u1, u2;  // velocity components, u(0) = 0
  std::vector<cplx> phi;     // streamfunction: u1 = d_y phi, u2 = -i n~ phi
  std::vector<cplx> p;       // pressure, gauge p -> 0 at infinity

  double norm_l2 = 0.0;      // sqrt(||u1||^2 + ||u2||^2)
  double norm_sup = 0.0;     // max_y |(u1, u2)|
  double norm_dy_l2 = 0.0;   // sqrt(||d_y u1||^2 + ||d_y u2||^2)
  double f_norm = 0.0;       // ||f|| of the source, same vector L2

  double momentum_residual = 0.0;  // relative L2 defect of both momentum rows
  double divergence_max = 0.0;     // max_i |i n~ u1 + d_y u2|

  // real-part identity: nu(||d_y u||^2 + n~^2 ||u||^2) + Re<u2 dU, u1> = Re<f, u>
  double energy_re_lhs = 0.0, energy_re_rhs = 0.0;
  // imaginary-part identity: n~(<U u, u> - Re<dU phi, d_y phi>) = Im<f, u>
  double energy_im_lhs = 0.0, energy_im_rhs = 0.0;

  EstimateRecord estimates;
};

// Physical y-mesh for mode (nu, n~): boundary-layer variable mesh on
// [0, Ymax_layer] scaled by sqrt(nu), graded into the epsilon^{1/3} sublayer.
Mesh build_mode_mesh(const ModeParams& params, double Ymax_layer = 40.0,
                     int n_nodes = 1537, int min_bl_points = 24);

// n = 0: u2 = 0 and the closed forms u1(y) = (1/nu) int_0^y F01,
// p(y) = -int_y^inf f02, where f01 = d_y F01 with F01 -> 0 at infinity.
ModeSolution solve_zero_mode(std::span<const cplx> f01, std::span<const cplx> f02,
                             std::span<const cplx> F01, double nu, const Mesh& mesh);

// Orr--Sommerfeld route (low/mid/os bands): rescales to the layer variable
// Y = y/sqrt(nu), solves the symmetrized problem for phi0 and the full OS
// problem for phi1 with the zero-average source d_Y(U' phi0), maps back, and
// integrates the vertical momentum row down from infinity for the pressure
// (the horizontal row is then the independent residual).
ModeSolution solve_mode_os(std::span<const cplx> f1, std::span<const cplx> f2,
                           const ModeParams& params, const ShearProfile& profile,
                           const Mesh& y_mesh);

// Monolithic fourth-order streamfunction solve in the physical variable
// (any n~ != 0; the dispatch uses it for the high band and tests use it as
// the cross-route oracle). Pressure integrated down from infinity against
// the vertical momentum row; the horizontal row is the residual.
ModeSolution solve_mode_direct(std::span<const cplx> f1, std::span<const cplx> f2,
                               const ModeParams& params, const ShearProfile& profile,
                               const Mesh& y_mesh);

// Regime dispatch: zero -> closed forms (F01 required), low/mid/os -> the OS
// route, high -> the direct solve. Negative n is solved by conjugation
// symmetry. For n = 0 pass F01 with f1 = d_y F01.
ModeSolution solve_mode(std::span<const cplx> f1, std::span<const cplx> f2,
                        const ModeParams& params, const ShearProfile& profile,
                        const Mesh& y_mesh, std::span<const cplx> F01 = {});

}  // namespace stab
