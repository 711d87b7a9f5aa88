#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "stab/airy.hpp"
#include "stab/airy_fun.hpp"

using namespace stab;

namespace {
const ShearProfile& prof() {
  static auto p = make_profile("exp", 1.0);
  return p;
}

Mesh mesh_for(double eps, int n = 1024) {
  return build_mesh(40.0, n, std::cbrt(eps));
}

std::vector<cplx> csample(const Mesh& m, auto&& f) {
  std::vector<cplx> v(m.n());
  for (int i = 0; i < m.n(); ++i) v[i] = f(m.nodes[i]);
  return v;
}

cplx inner(const Mesh& m, std::span<const cplx> a, std::span<const cplx> b) {
  std::vector<cplx> p(a.size());
  for (size_t i = 0; i < a.size(); ++i) p[i] = a[i] * std::conj(b[i]);
  return m.integrate(p);
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

TEST_CASE("zero source gives zero") {
  const Mesh m = mesh_for(1e-3);
  const std::vector<cplx> z(m.n(), cplx{0.0, 0.0});
  for (auto variant :
       {SourceVariant::plain, SourceVariant::dY, SourceVariant::overY}) {
    const auto s = solve_airy_dirichlet(z, 1e-3, 0.5, variant, prof(), m);
    CHECK(norm_sup(s.psi) == 0.0);
  }
  const auto sn = solve_airy_neumann(z, 1e-3, 0.5, prof(), m);
  CHECK(norm_sup(sn.psi) == 0.0);
}

TEST_CASE("manufactured solution recovery") {
  const double eps = 1e-3, alpha = 0.7;
  const Mesh m = mesh_for(eps);
  const auto psi_m = csample(m, [](double Y) {
    return cplx{Y * std::exp(-Y) * (1.0 - std::exp(-Y)), 0.0};
  });
  const auto f = csample(m, [&](double Y) {
    const double e1 = std::exp(-Y), e2 = std::exp(-2.0 * Y);
    const double pm = Y * e1 - Y * e2;
    const double pm2 = (Y - 2.0) * e1 - (4.0 * Y - 4.0) * e2;
    const double us = 1.0 - e1;
    return (us * pm + cplx{0.0, eps} * (pm2 - alpha * alpha * pm)) / eps;
  });
  const auto s =
      solve_airy_dirichlet(f, eps, alpha, SourceVariant::plain, prof(), m);
  CHECK(s.residual <= 1e-10);
  double err = 0.0;
  for (int i = 0; i < m.n(); ++i)
    err = std::max(err, std::abs(s.psi[i] - psi_m[i]));
  CHECK(err <= 1e-7);
}

TEST_CASE("source variants agree on equivalent data") {
  const double eps = 1e-3, alpha = 0.4;
  const Mesh m = mesh_for(eps);
  const auto f = csample(m, [](double Y) { return cplx{Y * std::exp(-Y), 0.0}; });
  const auto fprime =
      csample(m, [](double Y) { return cplx{(1.0 - Y) * std::exp(-Y), 0.0}; });
  const auto fovery = csample(m, [](double Y) { return cplx{std::exp(-Y), 0.0}; });

  const auto s_dy = solve_airy_dirichlet(f, eps, alpha, SourceVariant::dY, prof(), m);
  const auto s_dy_ref =
      solve_airy_dirichlet(fprime, eps, alpha, SourceVariant::plain, prof(), m);
  const auto s_oy =
      solve_airy_dirichlet(f, eps, alpha, SourceVariant::overY, prof(), m);
  const auto s_oy_ref =
      solve_airy_dirichlet(fovery, eps, alpha, SourceVariant::plain, prof(), m);

  double d1 = 0.0, d2 = 0.0;
  for (int i = 0; i < m.n(); ++i) {
    d1 = std::max(d1, std::abs(s_dy.psi[i] - s_dy_ref.psi[i]));
    d2 = std::max(d2, std::abs(s_oy.psi[i] - s_oy_ref.psi[i]));
  }
  CHECK(d1 <= 1e-7);
  CHECK(d2 <= 1e-9);

  // precondition violations
  const auto bad = csample(m, [](double Y) { return cplx{std::exp(-Y), 0.0}; });
  for (auto variant : {SourceVariant::dY, SourceVariant::overY}) {
    try {
      solve_airy_dirichlet(bad, eps, alpha, variant, prof(), m);
      FAIL("expected precondition error");
    } catch (const StabError& e) {
      CHECK(e.code == ErrCode::invalid_argument);
    }
  }
}

TEST_CASE("plain sweep: wall-layer amplitude scales like eps^{2/3}") {
  std::vector<double> lx, ly;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const Mesh m = mesh_for(eps);
    const auto f = csample(m, [](double Y) { return cplx{std::exp(-Y), 0.0}; });
    const auto s =
        solve_airy_dirichlet(f, eps, 0.5, SourceVariant::plain, prof(), m);
    CHECK(s.residual <= 1e-8);
    lx.push_back(std::log(eps));
    ly.push_back(std::log(norm_sup(s.psi)));
  }
  CHECK(std::abs(fit_slope(lx, ly) - 2.0 / 3.0) <= 0.1);
}

TEST_CASE("energy identities") {
  const double eps = 1e-3, alpha = 0.8;
  const Mesh m = mesh_for(eps);
  const auto f = csample(m, [](double Y) {
    return cplx{1.0, 0.5} * (Y + 0.3) * std::exp(-Y);
  });
  const auto s =
      solve_airy_dirichlet(f, eps, alpha, SourceVariant::plain, prof(), m);
  const auto us = prof().sample(m, 0);

  std::vector<cplx> sqrt_us_psi(m.n());
  for (int i = 0; i < m.n(); ++i)
    sqrt_us_psi[i] = std::sqrt(us[i]) * s.psi[i];
  const double lhs1 = norm_l2(m, sqrt_us_psi);
  const cplx ip = inner(m, f, s.psi);
  CHECK(lhs1 * lhs1 ==
        doctest::Approx(eps * ip.real()).epsilon(1e-6));

  const auto dpsi = m.derivative(s.psi, 1);
  const double lhs2 = std::pow(norm_l2(m, dpsi), 2) +
                      alpha * alpha * std::pow(norm_l2(m, s.psi), 2);
  CHECK(lhs2 == doctest::Approx(-ip.imag()).epsilon(1e-6));
}

TEST_CASE("Neumann solve: identities and diagnostics") {
  const double eps = 1e-3, alpha = 0.6;
  const Mesh m = mesh_for(eps);
  const auto f = csample(m, [](double Y) {
    return cplx{1.0, 0.3} * Y * std::exp(-Y);
  });
  const auto s = solve_airy_neumann(f, eps, alpha, prof(), m);
  CHECK(s.residual <= 1e-8);
  CHECK(s.neumann);

  // Neumann condition at the wall
  const auto dpsi = m.derivative(s.psi, 1);
  CHECK(std::abs(dpsi[0]) <= 1e-8 * std::max(1.0, norm_sup(dpsi)));

  // sigma[U_s psi] = i eps d_Y psi + i eps alpha^2 sigma[psi] - f pointwise
  const auto sig_psi = op_sigma(m, std::span<const cplx>(s.psi));
  double worst = 0.0, scale = norm_sup(f);
  for (int i = 0; i < m.n(); ++i) {
    const cplx rhs = cplx{0.0, eps} * dpsi[i] +
                     cplx{0.0, eps * alpha * alpha} * sig_psi[i] - f[i];
    worst = std::max(worst, std::abs(s.sigma_us_psi[i] - rhs));
  }
  CHECK(worst <= 1e-6 * scale);

  // integral identity: int U_s psi = i eps alpha^2 int psi; defect carries
  // quadrature-of-collocation noise proportional to the solution scale
  const cplx rhs = cplx{0.0, eps * alpha * alpha} * s.int_psi;
  CHECK(std::abs(s.int_us_psi - rhs) <= 5e-8 * std::max(1.0, norm_sup(s.psi)));

  // recorded bound is meaningful
  CHECK(s.bound_rhs > 0.0);
  CHECK(std::abs(s.int_us_psi) <= 20.0 * s.bound_rhs);

  // precondition
  const auto bad = csample(m, [](double Y) { return cplx{std::exp(-Y), 0.0}; });
  CHECK_THROWS_AS(solve_airy_neumann(bad, eps, alpha, prof(), m), StabError);
}

TEST_CASE("Neumann sweep: layer source responds like eps^{-2/3}") {
  std::vector<double> lx, ly;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const Mesh m = mesh_for(eps);
    const double ell = std::cbrt(eps);
    const auto f = csample(m, [&](double Y) {
      const double t = Y / ell;
      return cplx{t * std::exp(-t * t), 0.0};
    });
    const auto s = solve_airy_neumann(f, eps, 0.5, prof(), m);
    lx.push_back(std::log(eps));
    ly.push_back(std::log(norm_sup(s.psi)));
  }
  CHECK(std::abs(fit_slope(lx, ly) - (-2.0 / 3.0)) <= 0.1);
}

TEST_CASE("fast wall-layer profile") {
  const double eps = 1e-4;
  const Mesh m = mesh_for(eps);
  const auto fp = build_fast_profile(eps, prof(), m);

  CHECK(std::abs(fp.psi0[0] - cplx{oracle::Ai0, 0.0}) <= 1e-14);
  CHECK(fp.residual <= 1e-4);

  const double ell = std::cbrt(eps);
  const cplx expected = std::pow(eps, 2.0 / 3.0) *
                        std::polar(1.0, -std::numbers::pi / 3.0) /
                        oracle::abs_C_inf;
  std::vector<cplx> ypsi(m.n());
  for (int i = 0; i < m.n(); ++i) ypsi[i] = m.nodes[i] * fp.psi0[i];
  CHECK(std::abs(m.integrate(ypsi) - expected) <= 1e-6 * std::abs(expected));

  CHECK(std::abs(m.interpolate(fp.psi0, 10.0 * ell)) < 1e-6);
  // super-exponential decay past 5 ell
  for (int i = 0; i < m.n(); ++i)
    if (m.nodes[i] > 5.0 * ell) CHECK(std::abs(fp.psi0[i]) < 6e-3);

  // unresolved layer rejected
  const Mesh coarse = build_mesh(40.0, 1024, 1.0);
  try {
    build_fast_profile(1e-6, prof(), coarse);
    FAIL("expected unresolved_layer");
  } catch (const StabError& e) {
    CHECK(e.code == ErrCode::unresolved_layer);
  }
}

TEST_CASE("alpha = 0 admitted") {
  const double eps = 1e-3;
  const Mesh m = mesh_for(eps);
  const auto f = csample(m, [](double Y) { return cplx{std::exp(-Y), 0.0}; });
  const auto s =
      solve_airy_dirichlet(f, eps, 0.0, SourceVariant::plain, prof(), m);
  CHECK(s.residual <= 1e-8);
  CHECK(norm_sup(s.psi) > 0.0);
}
