#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "stab/profile.hpp"

using namespace stab;

namespace {
std::shared_ptr<const Mesh> mesh2048() {
  static auto m = std::make_shared<const Mesh>(build_mesh(40.0, 2048, 0.05));
  return m;
}
std::vector<cplx> csample(const Mesh& m, auto&& f) {
  std::vector<cplx> v(m.n());
  for (int i = 0; i < m.n(); ++i) v[i] = f(m.nodes[i]);
  return v;
}
}  // namespace

TEST_CASE("make_profile built-in families") {
  auto e = make_profile("exp", 1.0);
  CHECK(e.du0 == doctest::Approx(1.0));
  CHECK(e.u_inf == doctest::Approx(1.0));
  CHECK(e.y0 == doctest::Approx(1.0));
  CHECK(e.ddu0 == doctest::Approx(-1.0));

  auto t = make_profile("tanh", 2.0);
  CHECK(t.du0 == doctest::Approx(2.0));
  CHECK(t.u(0.0) == 0.0);
  CHECK(t.decay_norm > 0.0);
}

TEST_CASE("make_profile rejects inadmissible tables by named assumption") {
  std::vector<std::array<double, 2>> tab;
  for (int i = 0; i <= 200; ++i) {
    double y = 40.0 * i / 200.0;
    tab.push_back({y, 0.1 + (1.0 - std::exp(-y))});
  }
  CHECK_THROWS_WITH_AS(make_profile("table", 1.0, tab), doctest::Contains("assume.1"),
                       StabError);

  // decreasing shear at the wall
  std::vector<std::array<double, 2>> tab2;
  for (int i = 0; i <= 200; ++i) {
    double y = 40.0 * i / 200.0;
    tab2.push_back({y, std::tanh(y) * (1.0 - 0.8 * std::exp(-y))});
  }
  // u(0)=0 but u'(0) < 0 would be assume.2; this table keeps du0>0 so it passes
  auto ok = make_profile("table", 1.0, tab2);
  CHECK(ok.du0 > 0.0);

  CHECK_THROWS_AS(make_profile("bogus", 1.0), StabError);
}

TEST_CASE("tabulated exp profile approximates the analytic one") {
  std::vector<std::array<double, 2>> tab;
  for (int i = 0; i <= 400; ++i) {
    double y = 40.0 * i / 400.0;
    tab.push_back({y, 1.0 - std::exp(-y)});
  }
  auto p = make_profile("table", 1.0, tab);
  CHECK(p.u(3.3) == doctest::Approx(1.0 - std::exp(-3.3)).epsilon(1e-6));
  CHECK(p.du(3.3) == doctest::Approx(std::exp(-3.3)).epsilon(1e-3));
  CHECK(p.u_inf == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("op_sigma closed forms and decay bound") {
  auto mp = mesh2048();
  const Mesh& m = *mp;

  auto f = csample(m, [](double y) { return std::exp(-y); });
  auto s = op_sigma(m, std::span<const cplx>(f));
  for (int i = 0; i < m.n(); i += 111)
    CHECK(std::abs(s[i] - std::exp(-m.nodes[i])) < 1e-9);

  std::vector<cplx> z(m.n(), cplx{0.0, 0.0});
  auto sz = op_sigma(m, std::span<const cplx>(z));
  for (const auto& v : sz) CHECK(std::abs(v) == 0.0);

  auto g = csample(m, [](double y) { return y * std::exp(-y * y); });
  auto sg = op_sigma(m, std::span<const cplx>(g));
  CHECK(std::abs(sg[0] - oracle::sigma_gauss_at_0) < 1e-10);
  CHECK(std::abs(m.interpolate(std::span<const cplx>(sg), 1.0) - oracle::sigma_gauss_at_1) <
        1e-10);
  CHECK(std::abs(m.interpolate(std::span<const cplx>(sg), 2.0) - oracle::sigma_gauss_at_2) <
        1e-10);
  // convention at the truncated end: the only contribution is the tiny fitted tail
  CHECK(std::abs(sg.back()) < 1e-30);

  // ||Y^k sigma[f]|| <= 2 ||Y^{k+1} f|| on a randomized decaying suite
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> U(0.4, 2.0), A(-1.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    double d = U(rng), a = A(rng), b = A(rng), c = A(rng);
    auto h = csample(m, [&](double y) { return (a + b * y + c * y * y) * std::exp(-d * y); });
    auto sh = op_sigma(m, std::span<const cplx>(h));
    for (int k = 0; k <= 2; ++k) {
      double lhs = 0.0, rhs = 0.0;
      for (int i = 0; i < m.n(); ++i) {
        double yk = std::pow(m.nodes[i], k);
        lhs += m.weights[i] * std::norm(yk * sh[i]);
        rhs += m.weights[i] * std::norm(yk * m.nodes[i] * h[i]);
      }
      CHECK(std::sqrt(lhs) <= 2.0 * std::sqrt(rhs));
    }
  }
}

TEST_CASE("op_L singular quadrature against closed forms") {
  auto mp = mesh2048();
  const Mesh& m = *mp;
  auto p = make_profile("exp", 1.0);

  std::vector<cplx> z(m.n(), cplx{0.0, 0.0});
  auto lz = op_L(m, p, std::span<const cplx>(z));
  for (const auto& v : lz) CHECK(std::abs(v) == 0.0);

  // integrand collapses: L[U_s^2 e^{-Y}] = U_s sigma[e^{-Y}] = U_s e^{-Y}
  auto f1 = csample(m, [&](double y) {
    double us = p.u(y);
    return us * us * std::exp(-y);
  });
  auto l1 = op_L(m, p, std::span<const cplx>(f1));
  for (int i = 0; i < m.n(); i += 97)
    CHECK(std::abs(l1[i] - p.u(m.nodes[i]) * std::exp(-m.nodes[i])) < 1e-8);

  AccuracyReport rep;
  auto f2 = csample(m, [&](double y) { return p.u(y) * p.du(y) * std::exp(-y); });
  auto l2 = op_L(m, p, std::span<const cplx>(f2), &rep);
  CHECK(!rep.degraded);
  CHECK(rep.split_mismatch < 1e-7);
  CHECK(std::abs(m.interpolate(std::span<const cplx>(l2), 0.5) - oracle::L_exp_at_half) <
        1e-9);
  CHECK(std::abs(m.interpolate(std::span<const cplx>(l2), 2.0) - oracle::L_exp_at_two) <
        1e-9);
  CHECK(std::abs(l2[0]) == 0.0);  // f(0)/du0
  double emax = 0.0;
  for (int i = 1; i < m.n(); ++i) {
    double y = m.nodes[i], w = 1.0 - std::exp(-y);
    emax = std::max(emax, std::abs(l2[i] - w * (-std::exp(-y) - std::log(w))));
  }
  CHECK(emax < 1e-8);

  // weighted bound ||Y^k L[f]|| <= C ||Y^k (1+Y) f||, k = 0..2
  for (int k = 0; k <= 2; ++k) {
    double lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < m.n(); ++i) {
      double yk = std::pow(m.nodes[i], k);
      lhs += m.weights[i] * std::norm(yk * l2[i]);
      rhs += m.weights[i] * std::norm(yk * (1.0 + m.nodes[i]) * f2[i]);
    }
    CHECK(std::sqrt(lhs) <= 4.0 * std::sqrt(rhs));
  }
}

TEST_CASE("op_K composition and frozen values") {
  auto mp = mesh2048();
  const Mesh& m = *mp;
  auto p = make_profile("exp", 1.0);

  std::mt19937 rng(5150);
  std::uniform_real_distribution<double> U(0.5, 1.5);
  auto f = csample(m, [&](double y) { return std::exp(-U(rng) * 0.0 - 0.7 * y) * (1.0 + y); });
  auto k1 = op_K(m, p, std::span<const cplx>(f));
  auto s = op_sigma(m, std::span<const cplx>(f));
  auto k2 = op_L(m, p, std::span<const cplx>(s));
  for (int i = 0; i < m.n(); ++i) CHECK(std::abs(k1[i] - k2[i]) == 0.0);

  auto g = csample(m, [&](double y) { return p.u(y) * p.du(y) * std::exp(-0.1 * y); });
  auto kg = op_K(m, p, std::span<const cplx>(g));
  CHECK(std::abs(kg[0] - oracle::K_exp_at_0) < 1e-8);
  CHECK(std::abs(m.interpolate(std::span<const cplx>(kg), 0.5) - oracle::K_exp_at_half) <
        1e-8);
  CHECK(std::abs(m.interpolate(std::span<const cplx>(kg), 2.0) - oracle::K_exp_at_two) <
        1e-8);
  CHECK(std::abs(m.interpolate(std::span<const cplx>(kg), 10.0) - oracle::K_exp_at_ten) <
        1e-8);

  // |K[g]| <= C (1+Y) e^{-0.1 Y}: fitted constant is the wall value and stable
  double cfit = 0.0;
  for (int i = 0; i < m.n(); ++i)
    cfit = std::max(cfit, std::abs(kg[i]) / ((1.0 + m.nodes[i]) * std::exp(-0.1 * m.nodes[i])));
  CHECK(cfit > 0.4);
  CHECK(cfit < 0.5);
}

TEST_CASE("compute_Gs wall value, zero at y0, ODE residual") {
  auto mp = mesh2048();
  const Mesh& m = *mp;

  auto pe = make_profile("exp", 1.0);
  AccuracyReport rep;
  auto gs = compute_Gs(m, pe, &rep);
  CHECK(!rep.degraded);
  CHECK(gs[0] == doctest::Approx(1.0));  // 1/du0
  CHECK(std::abs(m.interpolate(std::span<const double>(gs), pe.y0)) < 1e-9);

  auto pt = make_profile("tanh", 2.0);
  auto gt = compute_Gs(m, pt);
  CHECK(gt[0] == doctest::Approx(0.5));

  // closed form on the exp profile: with x = e^{-Y}, F = log(x/(1-x)) + 1/(1-x),
  // G_s(Y) = (1-x) (F(x) - F(e^{-1}))
  auto gs_exact = [&](double Y) {
    auto F = [](double x) { return std::log(x / (1.0 - x)) + 1.0 / (1.0 - x); };
    double x = std::exp(-Y);
    return (1.0 - x) * (F(x) - F(std::exp(-pe.y0)));
  };
  for (double Y : {0.01, 0.2, 1.0, 2.5, 17.0})
    CHECK(m.interpolate(std::span<const double>(gs), Y) ==
          doctest::Approx(gs_exact(Y)).epsilon(1e-8));

  // U_s^2 (G_s/U_s)' = -1 (equivalent first-order form of the defining ODE),
  // checked from the mesh's cluster scale outward: below bl_scale the check
  // itself differentiates a 1/Y-type ratio the stencils cannot resolve
  std::vector<double> ratio(m.n());
  auto us = pe.sample(m, 0);
  for (int i = 1; i < m.n(); ++i) ratio[i] = gs[i] / us[i];
  ratio[0] = 2.0 * ratio[1] - ratio[2];  // never used below
  auto dr = m.derivative(std::span<const double>(ratio), 1);
  double rmax = 0.0;
  for (int i = m.order + 4; i < m.n() - 2; ++i)
    if (m.nodes[i] >= m.bl_scale)
      rmax = std::max(rmax, std::abs(us[i] * us[i] * dr[i] + 1.0));
  CHECK(rmax < 1e-6);

  // growth bounds
  double g_over_1py = 0.0;
  for (int i = 0; i < m.n(); ++i)
    g_over_1py = std::max(g_over_1py, std::abs(gs[i]) / (1.0 + m.nodes[i]));
  CHECK(g_over_1py < 2.0);
  double dlog = 0.0;
  auto dgs = m.derivative(std::span<const double>(gs), 1);
  for (int i = 1; i < m.n() && m.nodes[i] <= 0.5; ++i)
    dlog = std::max(dlog, std::abs(dgs[i] / std::log(m.nodes[i])));
  CHECK(dlog < 5.0);
}

TEST_CASE("div_by_us removes the wall zero exactly") {
  auto mp = mesh2048();
  const Mesh& m = *mp;
  auto p = make_profile("exp", 1.0);
  auto f = csample(m, [&](double y) { return p.u(y) * std::exp(-y); });
  auto q = div_by_us(m, p, std::span<const cplx>(f));
  for (int i = 0; i < m.n(); i += 131)
    CHECK(std::abs(q[i] - std::exp(-m.nodes[i])) < 1e-9);
  CHECK(std::abs(q[0] - 1.0) < 1e-9);
}

TEST_CASE("interpolation inequality constant is bounded and refinement-stable") {
  auto run = [](int n) {
    auto m = build_mesh(40.0, n, 0.05);
    auto p = make_profile("exp", 1.0);
    auto us = p.sample(m, 0);
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> U(-1.0, 1.0), D(0.3, 1.5);
    double worst = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
      double a = U(rng), b = U(rng), d = D(rng);
      std::vector<cplx> g(m.n());
      for (int i = 0; i < m.n(); ++i) {
        double y = m.nodes[i];
        g[i] = y * (a + b * std::sin(y)) * std::exp(-d * y);
      }
      auto dg = m.derivative(std::span<const cplx>(g), 1);
      double n2 = 0.0, nw = 0.0, nd = 0.0;
      for (int i = 0; i < m.n(); ++i) {
        n2 += m.weights[i] * std::norm(g[i]);
        nw += m.weights[i] * us[i] * std::norm(g[i]);
        nd += m.weights[i] * std::norm(dg[i]);
      }
      double denom = std::pow(nw, 2.0 / 3.0) * std::pow(nd, 1.0 / 3.0) + nw;
      worst = std::max(worst, n2 / denom);
    }
    return worst;
  };
  double c1 = run(1024), c2 = run(2048);
  CHECK(c1 < 3.0);
  CHECK(std::abs(c1 - c2) / c2 < 0.05);
}

TEST_CASE("Field caches norms") {
  auto mp = mesh2048();
  auto v = csample(*mp, [](double y) { return std::exp(-y); });
  Field f(mp, v);
  double l2 = f.l2();
  CHECK(l2 == doctest::Approx(std::sqrt(0.5 * (1.0 - std::exp(-80.0)))).epsilon(1e-8));
  CHECK(f.l2() == l2);
  CHECK(f.sup() == doctest::Approx(1.0));
}
