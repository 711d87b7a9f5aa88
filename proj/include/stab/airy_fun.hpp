#pragma once
#include <complex>

#include "stab/errors.hpp"

namespace stab {

using cplx = std::complex<double>;

struct AiPair {
  cplx ai, dai;
};

// Complex Airy function of the first kind and its derivative.
// Maclaurin series for |z| <= 6; asymptotic expansion beyond, with the
// connection rotation for |arg z| >= 2pi/3. Valid for |arg z| <= pi - 0.01
// (throws StabError{invalid_argument} outside). Absolute accuracy at the
// switch radius is verified once per process to 1e-10.
AiPair airy_ai_pair(cplx z);
cplx airy_ai(cplx z);
cplx airy_ai_prime(cplx z);

// max |series - asymptotic| mismatch over a probe ring at the switch radius
double airy_switch_mismatch();

}  // namespace stab
