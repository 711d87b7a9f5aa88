#pragma once
#include <span>
#include <vector>

#include "stab/mesh.hpp"
#include "stab/profile.hpp"

namespace stab {

// Solution of Ray[phi] = U_s (d_Y^2 - a^2) phi - U_s'' phi = f on [0, Ymax],
// phi(0) = 0, decay closure phi' + a phi = 0 at the top. Solved in the
// divided form T phi = (d_Y^2 - a^2 - U_s''/U_s) phi = f/U_s.
struct RayleighSolution {
  std::vector<cplx> phi;
  double residual = 0.0;      // ||Ray[phi] - f|| / ||f|| over equation rows
  cplx average_part{};        // int_0^inf f dY, the a <= 1 obstruction
  bool strong_source = true;  // f(0) = 0, so f/U_s is bounded at the wall
  bool quadrature_degraded = false;

  // split route only: phi = phi11 + phi12 + phi21 + phi22, where the pair
  // (phi21, phi22) carries h2 = h2_coeff * rho and the rest carries the
  // weighted-average-free remainder h1.
  bool decomposed = false;
  cplx h2_coeff{};  // int U_s h dY
  std::vector<cplx> phi11, phi12, phi21, phi22;
};

// Normalized slow mode: phi(0) = 1, Ray[phi] ~ 0, decaying.
struct SlowRayleighMode {
  std::vector<cplx> phi;
  // a <= 1: part0 = U_s e^{-aY}, part1 = 2a K[U_s U_s' e^{-aY}], part2 the
  //         solved corrector; phi = (c_E/a)(part0 + part1 + part2).
  // a >  1: part0 = e^{-aY}, part1 the solved remainder, part2 empty.
  std::vector<cplx> part0, part1, part2;
  cplx c_E{};  // a / part1(0), small-alpha branch only
  bool small_alpha = true;
  double residual = 0.0;  // ||Ray[phi]|| relative to the cancelled-term scale
};

RayleighSolution solve_rayleigh(std::span<const cplx> f, double alpha,
                                const ShearProfile& profile, const Mesh& mesh);

// Average-splitting route for a in (0,1]: takes the divided source h = f/U_s,
// writes h = h1 + (int U_s h) rho with the bump rho carrying the unit weighted
// average, and assembles the parts through K and G_s instead of one solve.
RayleighSolution solve_rayleigh_decomposed(std::span<const cplx> h, double alpha,
                                           const ShearProfile& profile,
                                           const Mesh& mesh);

SlowRayleighMode build_slow_rayleigh(double alpha, const ShearProfile& profile,
                                     const Mesh& mesh);

// Smooth bump supported on (1,2), scaled so int U_s rho dY = 1.
std::vector<double> build_rho(const ShearProfile& profile, const Mesh& mesh);

}  // namespace stab
