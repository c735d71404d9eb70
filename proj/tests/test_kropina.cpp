#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "mkropina/kropina.hpp"
#include "support.hpp"

using namespace mkropina;
using mkropina::testing::Sampler;

namespace {

const std::vector<std::string> kCoords{"u", "v", "x", "y"};

KundtForm kundt(const std::string& H, const std::string& Wx = "0", const std::string& Wy = "0",
                const std::string& hxx = "1", const std::string& hxy = "0", const std::string& hyy = "1") {
  return KundtForm::make(kCoords, H, {Wx, Wy}, {{hxx, hxy}, {hxy, hyy}});
}

PointList points(Sampler& s, int count, double lo = -1.0, double hi = 1.0) {
  PointList out;
  for (int i = 0; i < count; ++i) out.push_back(s.point(4, lo, hi));
  return out;
}

double dv_fd(const Expr& H, const std::vector<double>& p) {
  return mkropina::testing::fd_first([&](const std::vector<double>& q) { return H.evaluate(std::span<const double>(q)); },
                                     p, 1);
}

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

std::vector<double> direction_in_domain(const FinslerFunction& F, std::span<const double> x, Sampler& s) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    auto y = s.point(F.dim());
    if (F.in_domain(x, y)) return y;
  }
  throw std::runtime_error("no direction in the domain");
}

}  // namespace

TEST_CASE("construction rejects low dimension, null m = 1 and v-dependent W or h") {
  using namespace mkropina::testing;
  CHECK_THROWS_AS(MKropinaSpace(vsi_example(), du4(), 1.0), ConfigError);
  CHECK_NOTHROW(MKropinaSpace(vsi_example(), du4(), 0.5));
  CHECK_NOTHROW(MKropinaSpace(flat_lightcone4(), OneFormField::make(kCoords, {"1", "1", "0", "0"}), 1.0));
  auto plane = ExprMetric::make({"x", "y"}, {{"1", "0"}, {"0", "1"}});
  CHECK_THROWS_AS(MKropinaSpace(plane, OneFormField::make({"x", "y"}, {"1", "0"}), 0.5), ConfigError);
  CHECK_THROWS_AS(kundt("u*v", "v"), ConfigError);
  CHECK_THROWS_AS(kundt("u*v", "0", "0", "1", "v*x"), ConfigError);
  CHECK_NOTHROW(kundt("v^3*x + u", "u*x", "sin(u)", "1 + x^2"));
}

TEST_CASE("validity of the one-form") {
  using namespace mkropina::testing;
  Sampler s(11);
  const auto pts = points(s, 30);
  const auto k = kundt("sin(u)*v^2 + x", "u*y", "x", "2 + cos(u)", "0.1*x", "1");
  auto v1 = validate(MKropinaSpace(k.metric(), k.one_form(), 0.5), pts);
  CHECK(v1.closed);
  CHECK(v1.null);

  auto v2 = validate(MKropinaSpace(vsi_example(), OneFormField::make(kCoords, {"x^3", "0", "0", "0"}), 0.5), pts);
  CHECK_FALSE(v2.closed);

  // The (u, v) block [[uv, -1], [-1, 0]] inverts to a^vv = -uv.
  auto v3 = validate(MKropinaSpace(vsi_example(), OneFormField::make(kCoords, {"0", "1", "0", "0"}), 0.5), pts);
  CHECK(v3.closed);
  CHECK_FALSE(v3.null);
  double expect = 0.0;
  for (const auto& p : pts) expect = std::max(expect, std::abs(p[0] * p[1]));
  CHECK(v3.null_residual == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(validate(MKropinaSpace(vsi_example(), du4(), 0.5), points(s, 19)), ConfigError);
}

TEST_CASE("closed Berwald condition on Kundt forms gives c = -d_v H / (2 (1 - m))") {
  Sampler s(12);
  const auto k = kundt("sin(u)*v^2 + x*y*v + u^2", "u*y", "x^2", "2 + cos(u)", "0.1*x", "1 + y^2");
  for (double m : {0.5, -0.3, 2.0}) {
    MKropinaSpace sp(k.metric(), k.one_form(), m);
    for (const auto& p : points(s, 50)) {
      const auto r = berwald_condition_closed(sp, p);
      CHECK(r.holds);
      CHECK(std::abs(r.c + dv_fd(k.H(), p) / (2.0 * (1.0 - m))) <= 1e-9);
    }
  }
  MKropinaSpace parallel(mkropina::testing::flat_lightcone4(), mkropina::testing::du4(), 0.5);
  const auto r = berwald_condition_closed(parallel, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CHECK(r.holds);
  CHECK(r.c == 0.0);

  MKropinaSpace bad(mkropina::testing::kundt4("u*v", "v*x^3"), mkropina::testing::du4(), 0.5);
  const auto rb = berwald_condition_closed(bad, std::vector<double>{0.3, 0.2, 1.1, 0.4});
  CHECK_FALSE(rb.holds);
  CHECK(rb.residual > 1e-3);

  MKropinaSpace one(mkropina::testing::flat_lightcone4(), OneFormField::make(kCoords, {"1", "1", "0", "0"}), 1.0);
  CHECK_THROWS_AS(berwald_condition_closed(one, std::vector<double>{0.1, 0.2, 0.3, 0.4}), PreconditionError);
}

TEST_CASE("general Berwald certificate") {
  using namespace mkropina::testing;
  Sampler s(13);
  MKropinaSpace parallel(flat_lightcone4(), du4(), 0.5);
  const auto cp = berwald_condition_general(parallel, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CHECK(cp.kind == BerwaldKind::Parallel);
  for (double f : cp.f) CHECK(f == 0.0);

  const auto k = kundt("u*v^2 + x*v", "y", "0", "1 + u^2");
  MKropinaSpace sp(k.metric(), k.one_form(), 0.5);
  for (const auto& p : points(s, 20)) {
    const auto cert = berwald_condition_general(sp, p);
    REQUIRE(cert.kind == BerwaldKind::ClosedNullWithC);
    CHECK(cert.residual <= 1e-9);
    const double c = berwald_condition_closed(sp, p).c;
    CHECK(std::abs(*cert.c - c) <= 1e-12 * (1.0 + std::abs(c)));
    CHECK(std::abs(cert.f[0] - c) <= 1e-8 * (1.0 + std::abs(c)));
    for (int i = 1; i < 4; ++i) CHECK(std::abs(cert.f[static_cast<std::size_t>(i)]) <= 1e-8 * (1.0 + std::abs(c)));
  }

  MKropinaSpace bad(kundt4("u*v", "v"), du4(), 0.5);
  const auto cb = berwald_condition_general(bad, std::vector<double>{0.3, 0.2, 0.5, 0.4});
  CHECK(cb.kind == BerwaldKind::NotBerwald);
  CHECK(cb.residual > 1e-3);
  CHECK_THROWS_AS(affine_connection(bad, std::vector<double>{0.3, 0.2, 0.5, 0.4}), PreconditionError);

  // Parallel but not null.
  MKropinaSpace timelike(flat_lightcone4(), OneFormField::make(kCoords, {"1", "1", "0", "0"}), 0.5);
  CHECK(berwald_condition_general(timelike, std::vector<double>{0.0, 0.0, 0.0, 0.0}).kind == BerwaldKind::Parallel);
}

TEST_CASE("affine connection of the VSI example") {
  const auto k = kundt("u*v");
  const double m = 0.5;
  const std::vector<double> p{0.7, 1.3, 0.2, -0.4};
  const auto G = affine_connection(k, m, p);
  CHECK(G(0, 0, 0) == doctest::Approx(1.05).epsilon(1e-14));
  CHECK(G(1, 0, 1) == doctest::Approx(-0.35).epsilon(1e-14));
  CHECK(G(1, 1, 0) == doctest::Approx(-0.35).epsilon(1e-14));
  CHECK(G(2, 0, 2) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(G(3, 0, 3) == doctest::Approx(0.35).epsilon(1e-14));
  CHECK(G(1, 0, 0) == doctest::Approx(-0.013).epsilon(1e-12));
  CHECK(G(1, 2, 2) == doctest::Approx(0.35).epsilon(1e-14));

  MKropinaSpace sp(k.metric(), k.one_form(), m);
  CHECK(max_abs_difference(affine_connection(sp, p), G) <= 1e-12);

  // phi = 0: the affine connection is Levi-Civita.
  const auto k0 = kundt("u^2*x + y", "u*x");
  const std::vector<double> q{0.3, -0.2, 0.5, 0.1};
  CHECK(max_abs_difference(affine_connection(k0, m, q), christoffel(*k0.metric(), q)) == 0.0);
}

TEST_CASE("affine connection is symmetric, matches Berwald detection and has the Delta-Gamma trace") {
  Sampler s(14);
  const auto k = kundt("x*v^2 + sin(u)*v + y", "u*x", "y", "1 + x^2", "0.2*u", "2");
  for (double m : {0.5, -0.5, 3.0}) {
    MKropinaSpace sp(k.metric(), k.one_form(), m);
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = s.point(4, -0.8, 0.8);
      const auto G = affine_connection(k, m, p);
      CHECK(max_abs_difference(affine_connection(sp, p), G) <= 1e-9 * (1.0 + max_abs(G)));
      const auto lc = christoffel(*k.metric(), p);
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) CHECK(G(a, i, j) == G(a, j, i));
      // Delta Gamma^k_kj = (m n / (2 (1 - m))) d_v H delta^u_j.
      const double dvH = dv_fd(k.H(), p);
      for (int j = 0; j < 4; ++j) {
        double trace = 0.0;
        for (int a = 0; a < 4; ++a) trace += G(a, a, j) - lc(a, a, j);
        const double expect = j == 0 ? m * 4.0 / (2.0 * (1.0 - m)) * dvH : 0.0;
        CHECK(std::abs(trace - expect) <= 1e-8 * (1.0 + std::abs(expect)));
      }
      const auto bd = berwald_detect(*sp.finsler(), p);
      CHECK(bd.is_berwald);
      double dev = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int i = 0; i < 4; ++i)
          for (int j = 0; j < 4; ++j) dev = std::max(dev, std::abs(bd.gamma(a, i, j) - G(a, i, j)));
      CHECK(dev <= kCrossModuleTol * (1.0 + max_abs(G)));
    }
  }
  CHECK_THROWS_AS(affine_connection(k, 1.0, std::vector<double>{0, 0, 0, 0}), PreconditionError);
}

TEST_CASE("Ricci skew part: closed form vs curvature contraction") {
  const double m = 0.5;
  const auto k = kundt("v*x");
  const auto c = affine_curvature_ricci(k, m, std::vector<double>{0.4, 0.3, 0.7, -0.2});
  CHECK(c.skew(0, 2) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(c.skew(2, 0) == doctest::Approx(1.0).epsilon(1e-10));

  Sampler s(15);
  for (const auto& H : {"v*x", "v^2", "u*v", "sin(u)*v^3 + x*y*v^2 + u*v*y", "x^2 + u"}) {
    const auto kk = kundt(H, "u*y", "x", "1 + 0.5*x^2", "0.1*y", "1");
    for (double mm : {0.5, -0.7, 2.5}) {
      for (int trial = 0; trial < 5; ++trial) {
        const auto p = s.point(4, -0.8, 0.8);
        const auto brute = affine_curvature_ricci(kk, mm, p);
        const auto closed = ricci_skew_closed_form(kk, mm, p);
        CHECK(max_abs_difference(brute.skew, closed) <= 1e-8 * (1.0 + max_abs(closed)));
        MKropinaSpace sp(kk.metric(), kk.one_form(), mm);
        CHECK(max_abs_difference(affine_curvature_ricci(sp, p).skew, closed) <= 1e-8 * (1.0 + max_abs(closed)));
      }
    }
  }
  // Linear in v: symmetric Ricci.
  const auto lin = kundt("sin(u)*v + x*y", "u", "x");
  CHECK(affine_curvature_ricci(lin, m, std::vector<double>{0.2, 0.5, -0.3, 0.9}).skew_max <= 1e-9);
}

TEST_CASE("Levi-Civita part of the affine Ricci tensor matches the Finsler curvature") {
  // For a Berwald space the Finsler R_ij is the symmetrized affine Ricci tensor.
  const auto k = kundt("v^2*x + u*y", "u", "0", "1 + x^2");
  MKropinaSpace sp(k.metric(), k.one_form(), 0.5);
  const std::vector<double> p{0.3, 0.2, 0.4, -0.1};
  const auto ac = affine_curvature_ricci(k, 0.5, p);
  Sampler s(16);
  const auto y = direction_in_domain(*sp.finsler(), p, s);
  const auto fc = finsler_curvature(*sp.finsler(), p, y);
  double dev = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      dev = std::max(dev, std::abs(fc.ricci_tensor(i, j) - 0.5 * (ac.ricci(i, j) + ac.ricci(j, i))));
  CHECK(dev <= 1e-7 * (1.0 + max_abs(ac.ricci)));
}

TEST_CASE("metrizability verdicts") {
  Sampler s(17);
  const auto grid = points(s, 40);
  const double m = 0.5;

  const auto r1 = metrizability_verdict(kundt("u*v"), m, grid);
  CHECK(r1.verdict == Verdict::Metrizable);
  REQUIRE(r1.phi_samples.size() == grid.size());
  for (const auto& sample : r1.phi_samples) CHECK(sample.phi == doctest::Approx(sample.u).epsilon(1e-14));
  CHECK(r1.ricci_skew_max <= 1e-9);

  const auto r2 = metrizability_verdict(kundt("v*x"), m, grid);
  CHECK(r2.verdict == Verdict::NotMetrizable);
  CHECK(r2.s2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r2.s1 == 0.0);

  const auto r3 = metrizability_verdict(kundt("v^2"), m, grid);
  CHECK(r3.verdict == Verdict::NotMetrizable);
  CHECK(r3.s1 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r3.ricci_skew_max > 1e-3);
  CHECK(r3.skew_closed_form_deviation <= 1e-8);

  CHECK_THROWS_AS(metrizability_verdict(kundt("u*v"), m, {}), ConfigError);
  CHECK(std::string(to_string(Verdict::NotBerwald)) == "not-berwald");
}

TEST_CASE("metrizing conformal factor") {
  const double m = 0.5;
  const auto vsi = kundt("u*v");
  const ConformalFactor f(vsi, m, 0.0, {});
  for (double u : {-1.0, -0.3, 0.0, 0.4, 1.0, 2.0}) {
    CHECK(rel(f.factor(u), std::exp(m * u * u / (2.0 * (1.0 - m)))) <= 1e-12);
  }
  const ConformalFactor one(kundt("v + x"), 0.5, 0.0, {});
  CHECK(one.factor(2.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-12));
  const ConformalFactor zero(kundt("x*y + u^3"), 0.5, 0.0, {});
  CHECK(zero.factor(0.8) == 1.0);
  // Short intervals.
  const ConformalFactor affine(kundt("(0.75 + 0.3*u)*v"), 0.5, 0.0, {});
  for (double u : {7.7e-5, -1e-9, 1e-3}) {
    CHECK(rel(affine.psi(u), 0.75 * u + 0.15 * u * u) <= 1e-12);
  }

  // Taylor coefficients against finite differences of psi.
  const ConformalFactor g(kundt("sin(u)*v"), -0.4, 0.1, {});
  const auto series = g.psi_series(0.6, 3);
  const auto psi = [&](const std::vector<double>& q) { return g.psi(q[0]); };
  CHECK(series[0] == g.psi(0.6));
  CHECK(std::abs(series[1] - mkropina::testing::fd_first(psi, {0.6}, 0)) <= 1e-8);
  CHECK(std::abs(2.0 * series[2] - mkropina::testing::fd_second(psi, {0.6}, 0, 0)) <= 1e-6);
  CHECK(6.0 * series[3] == doctest::Approx(-0.4 / 1.4 * -std::sin(0.6)).epsilon(1e-12));
}

TEST_CASE("metrization reproduces the affine connection") {
  Sampler s(18);
  const double m = 0.5;
  const auto vsi = kundt("u*v");
  const auto grid = points(s, 20);
  const auto report = metrizability_verdict(vsi, m, grid);
  const auto metric = metrize(vsi, m, report, 0.0);
  const auto check = verify_metrization(*metric, vsi, m, points(s, 100));
  CHECK(check.pass);
  CHECK(check.deviation <= 1e-8);

  // Same metric signature.
  const std::vector<double> p{0.3, 0.4, 0.1, 0.2};
  CHECK(signature_counts(metric_at(*metric, p)) == signature_counts(metric_at(*vsi.metric(), p)));

  const auto wrong = metrize_candidate(vsi, m, 0.0, {}, 2.0);
  CHECK(verify_metrization(*wrong, vsi, m, points(s, 20)).deviation > 1e-3);

  const auto flatish = kundt("x*y + u^2", "u", "0", "1 + x^2");
  const auto r0 = metrizability_verdict(flatish, m, grid);
  const auto same = metrize(flatish, m, r0, 0.0);
  CHECK(verify_metrization(*same, flatish, m, grid).deviation == 0.0);

  const auto general = kundt("sin(u)*v + x^2*y", "u*x", "y^2", "2 + sin(u)", "0.1*x", "1 + y^2");
  for (double mm : {-0.5, 0.3, 2.0}) {
    const auto rg = metrizability_verdict(general, mm, grid);
    REQUIRE(rg.verdict == Verdict::Metrizable);
    const auto mg = metrize(general, mm, rg, 0.2, {0.0, 0.0, 0.0, 0.0});
    CHECK(verify_metrization(*mg, general, mm, points(s, 20)).pass);
  }

  const auto bad = kundt("v^2");
  const auto rb = metrizability_verdict(bad, m, grid);
  CHECK_THROWS_AS(metrize(bad, m, rb, 0.0), PreconditionError);
}

TEST_CASE("closed-form sprays agree with the generic pipeline") {
  using namespace mkropina::testing;
  Sampler s(19);
  struct Case {
    MetricFieldPtr a;
    OneFormField b;
  };
  const auto curved = ExprMetric::make(kCoords, {{"0.3*x*u", "-1", "0.1*y", "0"},
                                                 {"-1", "0.2", "0", "0"},
                                                 {"0.1*y", "0", "1 + 0.1*u^2", "0"},
                                                 {"0", "0", "0", "1"}});
  const std::vector<Case> cases{
      {vsi_example(), du4()},
      {kundt4("sin(u)*v^2 + x*y", "u*x", "y", "1 + x^2", "0.2", "2"), du4()},
      {curved, OneFormField::make(kCoords, {"exp(x)", "0", "0", "0"})},
      {curved, OneFormField::make(kCoords, {"1 + u^2", "x", "0", "0.3"})},
      {curved, OneFormField::make(kCoords, {"exp(x + 0.3*y)", "u", "0", "0"})},
  };
  int generic_checked = 0;
  int decomposed_checked = 0;
  for (const auto& c : cases) {
    for (double m : {0.5, -0.3, 2.0}) {
      MKropinaSpace sp(c.a, c.b, m);
      for (int trial = 0; trial < 8; ++trial) {
        const auto x = s.point(4, -0.6, 0.6);
        std::vector<double> y;
        try {
          y = direction_in_domain(*sp.finsler(), x, s);
        } catch (const std::runtime_error&) {
          continue;
        }
        const auto nc = nonlinear_connection(*sp.finsler(), x, y);
        double scale = 0.0;
        for (double g : nc.spray) scale = std::max(scale, std::abs(g));
        const auto dec = spray_decomposed(sp, x, y);
        for (int k = 0; k < 4; ++k)
          CHECK(std::abs(dec[static_cast<std::size_t>(k)] - nc.spray[static_cast<std::size_t>(k)]) <=
                1e-7 * scale);
        ++decomposed_checked;
        try {
          const auto gen = spray_generic(sp, x, y);
          for (int k = 0; k < 4; ++k)
            CHECK(std::abs(gen[static_cast<std::size_t>(k)] - nc.spray[static_cast<std::size_t>(k)]) <=
                  1e-7 * scale);
          ++generic_checked;
        } catch (const PreconditionError&) {
          // A not of the form b wedge f (rank > 2 or not divisible by b).
        }
      }
    }
  }
  CHECK(generic_checked >= 60);
  CHECK(decomposed_checked >= 100);
}

TEST_CASE("Berwald sprays are quadratic and equal Gamma y y") {
  Sampler s(20);
  const auto k = kundt("u*v");
  MKropinaSpace sp(k.metric(), k.one_form(), 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = s.point(4);
    const auto y = direction_in_domain(*sp.finsler(), x, s);
    const auto G = spray_generic(sp, x, y);
    const auto Gamma = spray_berwald(affine_connection(k, 0.5, x), y);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(G[static_cast<std::size_t>(i)] - Gamma[static_cast<std::size_t>(i)]) <= 1e-8);
    for (double lambda : {0.3, 2.0}) {
      std::vector<double> ly = y;
      for (auto& v : ly) v *= lambda;
      const auto Gl = spray_generic(sp, x, ly);
      for (int i = 0; i < 4; ++i)
        CHECK(std::abs(Gl[static_cast<std::size_t>(i)] - lambda * lambda * G[static_cast<std::size_t>(i)]) <=
              1e-9 * (1.0 + std::abs(G[static_cast<std::size_t>(i)])));
    }
  }
  // Flat metric with a parallel one-form: zero spray.
  MKropinaSpace flat(mkropina::testing::flat_lightcone4(), mkropina::testing::du4(), 0.5);
  const auto G0 = spray_generic(flat, std::vector<double>{0.1, 0.2, 0.3, 0.4}, std::vector<double>{1.0, -1.0, 0.2, 0.1});
  for (double g : G0) CHECK(g == 0.0);
  CHECK_THROWS_AS(spray_generic(flat, std::vector<double>{0.1, 0.2, 0.3, 0.4}, std::vector<double>{0.0, 1.0, 0.0, 0.0}),
                  DomainError);
}

TEST_CASE("m = 1 with a non-null one-form") {
  using namespace mkropina::testing;
  const auto flat = flat_lightcone4();
  MKropinaSpace parallel(flat, OneFormField::make(kCoords, {"1", "1", "0", "0"}), 1.0);
  const auto r = check_m1_nonnull(parallel, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CHECK(r.berwald_possible);
  CHECK(r.q == 0.0);

  // b = d(x^2/2 + v) + du has nabla b = dx dx: symmetric, not a multiple of a.
  MKropinaSpace diag(flat, OneFormField::make(kCoords, {"1", "1", "x", "0"}), 1.0);
  const auto rd = check_m1_nonnull(diag, std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CHECK_FALSE(rd.berwald_possible);
  CHECK(rd.residual > 0.1);

  // b = u du + v dv + x dx + y dy on the flat metric: nabla b = a, conformal.
  MKropinaSpace conf(flat, OneFormField::make(kCoords, {"-v", "-u", "x", "y"}), 1.0);
  const auto rc = check_m1_nonnull(conf, std::vector<double>{0.1, 0.7, 0.3, 0.4});
  CHECK(rc.berwald_possible);
  CHECK(rc.q == doctest::Approx(1.0).epsilon(1e-14));

  MKropinaSpace half(vsi_example(), du4(), 0.5);
  CHECK_THROWS_AS(check_m1_nonnull(half, std::vector<double>{0.1, 0.2, 0.3, 0.4}), PreconditionError);
  MKropinaSpace somewhere_null(flat, OneFormField::make(kCoords, {"1", "x", "0", "0"}), 1.0);
  CHECK_THROWS_AS(check_m1_nonnull(somewhere_null, std::vector<double>{0.5, 0.5, 0.0, 0.4}), PreconditionError);
}
