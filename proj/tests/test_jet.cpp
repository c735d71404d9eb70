#include <cmath>
#include <functional>
#include <string>

#include "doctest.h"
#include "mkropina/jet.hpp"
#include "support.hpp"

using namespace mkropina;
using mkropina::testing::fd_first;
using mkropina::testing::fd_second;
using mkropina::testing::Sampler;

TEST_CASE("seeded variable squared carries Taylor coefficients") {
  const Jet x = seed_variable(0, 2.0, {2, 2});
  const Jet sq = x * x;
  CHECK(sq.value() == 4.0);
  CHECK(partial(sq, {0}) == 4.0);
  CHECK(partial(sq, {0, 0}) == 2.0);
  // Raw storage is the Taylor coefficient, half the second derivative.
  const auto idx = sq.space()->index_of(std::vector<int>{0, 0});
  CHECK(sq.coefficients()[idx] == 1.0);
}

TEST_CASE("exp of a seeded zero") {
  const Jet e = exp(seed_variable(1, 0.0, {2, 1}));
  CHECK(e.value() == 1.0);
  CHECK(partial(e, {1}) == 1.0);
  CHECK(partial(e, {0}) == 0.0);
}

TEST_CASE("product of two seeds has unit mixed partial") {
  const JetConfig cfg{2, 2};
  const Jet u = seed_variable(0, 0.7, cfg);
  const Jet v = seed_variable(1, 1.3, cfg);
  const Jet uv = u * v;
  // Product rule: d_u d_v (uv) = 1, d_u (uv) = v, d_v (uv) = u.
  CHECK(uv.value() == doctest::Approx(0.91).epsilon(1e-15));
  CHECK(partial(uv, {0, 1}) == 1.0);
  CHECK(partial(uv, {0}) == doctest::Approx(1.3));
  CHECK(partial(uv, {1}) == doctest::Approx(0.7));
  CHECK(partial(uv, {0, 0}) == 0.0);
}

TEST_CASE("extract_partial returns true derivatives") {
  const Jet x = seed_variable(0, 1.0, {2, 3});
  CHECK(extract_partial(x * x * x, std::vector<int>{0, 0, 0}) == doctest::Approx(6.0));
  const Jet s = sin(seed_variable(0, 0.0, {2, 1}));
  CHECK(extract_partial(s, std::vector<int>{0}) == doctest::Approx(1.0));

  const JetConfig cfg{2, 2};
  const Jet f = exp(seed_variable(0, 1.0, cfg) * seed_variable(1, 1.0, cfg));
  const double oracle = fd_second([](const std::vector<double>& p) { return std::exp(p[0] * p[1]); }, {1.0, 1.0}, 0, 1);
  CHECK(std::abs(partial(f, {0, 1}) - oracle) < 1e-6);
  CHECK(partial(f, {0, 1}) == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-14));
}

TEST_CASE("order overflow is an error, never a silent zero") {
  const Jet x = seed_variable(0, 1.0, {2, 2});
  const Jet c = x * x * x;
  CHECK_THROWS_AS(partial(c, {0, 0, 0}), OrderExceededError);
  CHECK_THROWS_AS(derivative(derivative(derivative(c, 0), 0), 0), OrderExceededError);
}

TEST_CASE("configuration errors") {
  CHECK_THROWS_AS(seed_variable(2, 1.0, {2, 1}), ConfigError);
  CHECK_THROWS_AS(seed_variable(0, 1.0, {1, 1}), ConfigError);
  CHECK_THROWS_AS(seed_variable(0, 1.0, {2, 5}), ConfigError);
  CHECK_THROWS_AS(seed_variable(0, 1.0, {2, 0}), ConfigError);
}

TEST_CASE("division by a zero-valued jet is rejected") {
  const Jet x = seed_variable(0, 0.0, {2, 2});
  CHECK_THROWS_AS(1.0 / x, DomainError);
  CHECK_THROWS_AS(x / x, DomainError);
  CHECK_THROWS_AS(log(x), DomainError);
  CHECK_THROWS_AS(sqrt(x), DomainError);
  CHECK_THROWS_AS(pow(x - 1.0, 0.5), DomainError);
}

namespace {

Jet random_jet(Sampler& s, const JetConfig& cfg) {
  const auto space = JetSpace::get(cfg);
  std::vector<double> c(space->size(cfg.order));
  for (auto& v : c) v = s.uniform(-2.0, 2.0);
  return Jet(space, cfg.order, c);
}

double max_rel_diff(const Jet& a, const Jet& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.coefficients().size(); ++i) {
    const double x = a.coefficients()[i];
    const double y = b.coefficients()[i];
    r = std::max(r, std::abs(x - y) / std::max(1.0, std::max(std::abs(x), std::abs(y))));
  }
  return r;
}

}  // namespace

TEST_CASE("ring axioms hold to rounding") {
  Sampler s(7);
  const JetConfig cfg{4, 4};
  for (int trial = 0; trial < 50; ++trial) {
    const Jet a = random_jet(s, cfg);
    const Jet b = random_jet(s, cfg);
    const Jet c = random_jet(s, cfg);
    CHECK(max_rel_diff((a + b) + c, a + (b + c)) <= 1e-13);
    CHECK(max_rel_diff((a * b) * c, a * (b * c)) <= 1e-13);
    CHECK(max_rel_diff(a * (b + c), a * b + a * c) <= 1e-13);
    CHECK(max_rel_diff(a * b, b * a) <= 1e-13);
  }
}

TEST_CASE("elementary functions match finite differences") {
  struct Case {
    const char* name;
    std::function<Jet(const Jet&, const Jet&)> jet;
    std::function<double(double, double)> real;
    double lo;
    double hi;
  };
  const std::vector<Case> cases = {
      {"exp", [](const Jet& x, const Jet& y) { return exp(x * y); }, [](double x, double y) { return std::exp(x * y); }, -1, 1},
      {"log", [](const Jet& x, const Jet& y) { return log(x * x + y); }, [](double x, double y) { return std::log(x * x + y); }, 0.5, 2},
      {"sin", [](const Jet& x, const Jet& y) { return sin(x - y); }, [](double x, double y) { return std::sin(x - y); }, -2, 2},
      {"cos", [](const Jet& x, const Jet& y) { return cos(x * y); }, [](double x, double y) { return std::cos(x * y); }, -2, 2},
      {"sqrt", [](const Jet& x, const Jet& y) { return sqrt(x + y); }, [](double x, double y) { return std::sqrt(x + y); }, 0.5, 2},
      {"tanh", [](const Jet& x, const Jet& y) { return tanh(x * y); }, [](double x, double y) { return std::tanh(x * y); }, -1, 1},
      {"pow", [](const Jet& x, const Jet& y) { return pow(x, 2.5) * y; }, [](double x, double y) { return std::pow(x, 2.5) * y; }, 0.5, 2},
      {"powjet", [](const Jet& x, const Jet& y) { return pow(x, y); }, [](double x, double y) { return std::pow(x, y); }, 0.5, 2},
      {"div", [](const Jet& x, const Jet& y) { return x / (y * y + 0.5); }, [](double x, double y) { return x / (y * y + 0.5); }, -2, 2},
  };
  Sampler s(11);
  const JetConfig cfg{2, 2};
  for (const auto& c : cases) {
    for (int trial = 0; trial < 20; ++trial) {
      const std::vector<double> p = {s.uniform(c.lo, c.hi), s.uniform(c.lo, c.hi)};
      const Jet f = c.jet(seed_variable(0, p[0], cfg), seed_variable(1, p[1], cfg));
      mkropina::testing::ScalarFn real = [&](const std::vector<double>& q) { return c.real(q[0], q[1]); };
      INFO(std::string(c.name));
      CHECK(f.value() == doctest::Approx(c.real(p[0], p[1])).epsilon(1e-14));
      for (int i = 0; i < 2; ++i) {
        CHECK(mkropina::testing::close(partial(f, {i}), fd_first(real, p, i), 1e-6, 1e-6));
        for (int j = 0; j < 2; ++j) {
          CHECK(mkropina::testing::close(partial(f, {i, j}), fd_second(real, p, i, j), 1e-6, 1e-6));
        }
      }
    }
  }
}

TEST_CASE("integer powers of negative values") {
  const Jet x = seed_variable(0, -1.5, {2, 3});
  const Jet c = pow(x, 3.0);
  CHECK(c.value() == doctest::Approx(-3.375));
  CHECK(partial(c, {0}) == doctest::Approx(3 * 2.25));
  CHECK(partial(c, {0, 0}) == doctest::Approx(6 * -1.5));
  CHECK(partial(c, {0, 0, 0}) == doctest::Approx(6.0));
  const Jet z = pow(seed_variable(0, 0.0, {2, 4}), 2.0);
  CHECK(partial(z, {0, 0}) == 2.0);
  CHECK(partial(z, {0, 0, 0}) == 0.0);
}

TEST_CASE("order-4 derivatives are exact for a polynomial") {
  const JetConfig cfg{3, 4};
  const Jet x = seed_variable(0, 0.3, cfg);
  const Jet y = seed_variable(1, -0.4, cfg);
  const Jet z = seed_variable(2, 1.1, cfg);
  const Jet f = x * x * y * z + 2.0 * x * y * y * y;
  // d_x^2 d_y d_z (x^2 y z) = 2, d_x d_y^3 (2 x y^3) = 12.
  CHECK(partial(f, {0, 0, 1, 2}) == doctest::Approx(2.0));
  CHECK(partial(f, {0, 1, 1, 1}) == doctest::Approx(12.0));
  CHECK(partial(f, {2, 2}) == 0.0);
}

TEST_CASE("nested jets reach derivatives beyond a single jet's order") {
  // f = exp(x y): d_x^4 d_y^2 f computed as inner order 4 in x, outer order 2 in y.
  const auto inner = JetSpace::get({2, 4});
  const auto outer = JetSpace::get({2, 2});
  const double x0 = 0.4;
  const double y0 = 0.9;
  const NestedJet x(Jet::variable(inner, 0, x0));
  const NestedJet y = NestedJet::variable(outer, 1, Jet(y0));
  const NestedJet f = exp(x * y);
  // Closed form for d_x^4 d_y^2 exp(xy) evaluated symbolically.
  const double e = std::exp(x0 * y0);
  const double expected = e * (12.0 * y0 * y0 + 8.0 * x0 * y0 * y0 * y0 + x0 * x0 * y0 * y0 * y0 * y0);
  const Jet outer_dyy = partial(f, {1, 1});
  CHECK(partial(outer_dyy, {0, 0, 0, 0}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(partial(outer_dyy, {0, 0, 0, 0, 0}), OrderExceededError);
}
