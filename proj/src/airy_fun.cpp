#include "stab/airy_fun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stab {
namespace {

constexpr double kSwitchRadius = 6.0;
constexpr double kArgGuard = std::numbers::pi - 0.01;
// Ai(0) = 3^{-2/3}/Gamma(2/3), Ai'(0) = -3^{-1/3}/Gamma(1/3)
constexpr double kAi0 = 0.35502805388781723926;
constexpr double kdAi0 = -0.25881940379280679840;

// Ai = c1*f - c2*g with f = sum a_k z^{3k}, g = sum b_k z^{3k+1};
// derivative sums are term-wise. Requires z != 0.
AiPair maclaurin(cplx z) {
  const cplx z3 = z * z * z;
  cplx f{1.0, 0.0}, g = z;          // running sums
  cplx fp{0.0, 0.0}, gp{1.0, 0.0};  // derivative sums
  cplx tf{1.0, 0.0}, tg = z;        // current terms
  for (int k = 0; k < 120; ++k) {
    tf *= z3 / double((3 * k + 2) * (3 * k + 3));
    tg *= z3 / double((3 * k + 3) * (3 * k + 4));
    f += tf;
    g += tg;
    fp += tf * (3.0 * (k + 1)) / z;
    gp += tg * (3.0 * (k + 1) + 1.0) / z;
    if (std::abs(tf) + std::abs(tg) < 1e-20 * (std::abs(f) + std::abs(g)))
      break;
  }
  return {kAi0 * f + kdAi0 * g, kAi0 * fp + kdAi0 * gp};
}

// Poincare expansion with smallest-term truncation; relative accuracy is
// bounded below by e^{-2|zeta|}, so callers keep |arg z| < 2pi/3 where the
// e^{+zeta} solution is absent.
AiPair asymptotic(cplx z) {
  const cplx zeta = (2.0 / 3.0) * std::pow(z, 1.5);
  if (zeta.real() > 700.0) return {{0.0, 0.0}, {0.0, 0.0}};  // underflow
  if (zeta.real() < -700.0)
    throw StabError(ErrCode::invalid_argument, "airy_ai: magnitude overflow",
                    std::abs(z));
  const cplx inv = 1.0 / zeta;
  cplx su{1.0, 0.0}, sv{1.0, 0.0};
  double u = 1.0;
  cplx pw{1.0, 0.0};
  double last = 1.0;
  for (int k = 0; k < 60; ++k) {
    const double u1 = u * double((6 * k + 1) * (6 * k + 3) * (6 * k + 5)) /
                      (216.0 * (k + 1) * (2 * k + 1));
    const double v1 = u1 * double(6 * k + 7) / double(-6 * k - 5);
    pw *= -inv;
    const double mag = u1 * std::abs(pw);
    if (mag > last) break;  // divergence onset
    su += u1 * pw;
    sv += v1 * pw;
    u = u1;
    last = mag;
    if (mag < 1e-18) break;
  }
  const cplx pre = std::exp(-zeta) / (2.0 * std::sqrt(std::numbers::pi));
  const cplx z14 = std::pow(z, 0.25);
  return {pre / z14 * su, -pre * z14 * sv};
}

// Ai(z) = -w Ai(wz) - w' Ai(w'z) with w = e^{2pi i/3}, w' = conj(w); for
// |arg z| >= 2pi/3 both rotated arguments satisfy |arg| <= pi/3 + guard.
AiPair rotated(cplx z) {
  const cplx w = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  const cplx wb = std::conj(w);
  const AiPair p = asymptotic(z * w);
  const AiPair m = asymptotic(z * wb);
  return {-w * p.ai - wb * m.ai, -w * w * p.dai - wb * wb * m.dai};
}

AiPair eval(cplx z) {
  if (std::abs(z) <= kSwitchRadius) return maclaurin(z);
  if (std::abs(std::arg(z)) >= 2.0 * std::numbers::pi / 3.0) return rotated(z);
  return asymptotic(z);
}

// Absolute series/asymptotic agreement on the switch ring, probed over the
// sector where Ai is O(1) or decaying (the solvers only evaluate near
// arg z = pi/6); in growth sectors only relative accuracy is meaningful.
double switch_mismatch_impl() {
  double worst = 0.0;
  for (int j = 0; j <= 10; ++j) {
    const double th = 1.0 * (j / 10.0);
    const cplx z = std::polar(kSwitchRadius, th);
    const AiPair s = maclaurin(z);
    const AiPair a = asymptotic(z);
    worst = std::max(worst, std::abs(s.ai - a.ai));
    worst = std::max(worst, std::abs(s.dai - a.dai));
  }
  return worst;
}

void selfcheck_once() {
  static const bool ok = [] {
    if (switch_mismatch_impl() > 1e-10)
      throw std::logic_error("airy_ai: series/asymptotic mismatch at switch");
    return true;
  }();
  (void)ok;
}

AiPair entry(cplx z) {
  selfcheck_once();
  if (z == cplx{0.0, 0.0}) return {{kAi0, 0.0}, {kdAi0, 0.0}};
  if (std::abs(std::arg(z)) > kArgGuard)
    throw StabError(ErrCode::invalid_argument,
                    "airy_ai: |arg z| exceeds pi - 0.01", std::arg(z));
  if (z.imag() < 0.0) {  // conjugate symmetry
    const AiPair p = entry(std::conj(z));
    return {std::conj(p.ai), std::conj(p.dai)};
  }
  return eval(z);
}

}  // namespace

AiPair airy_ai_pair(cplx z) { return entry(z); }
cplx airy_ai(cplx z) { return entry(z).ai; }
cplx airy_ai_prime(cplx z) { return entry(z).dai; }
double airy_switch_mismatch() { return switch_mismatch_impl(); }

}  // namespace stab
