#pragma once

// Test-only oracles: finite differences and random sampling helpers. Nothing
// here is used by the library.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace mkropina::testing {

using ScalarFn = std::function<double(const std::vector<double>&)>;

// Central difference, step h.
inline double fd_first(const ScalarFn& f, std::vector<double> x, int i, double h = 1e-5) {
  const double x0 = x[static_cast<std::size_t>(i)];
  x[static_cast<std::size_t>(i)] = x0 + h;
  const double fp = f(x);
  x[static_cast<std::size_t>(i)] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

// Second (mixed) derivative by nested central differences with Richardson
// extrapolation; second differences at h = 1e-5 are dominated by rounding.
inline double fd_second(const ScalarFn& f, const std::vector<double>& x, int i, int j, double h = 1e-3) {
  auto nested = [&](double step) {
    ScalarFn df = [&](const std::vector<double>& y) { return fd_first(f, y, j, step); };
    return fd_first(df, x, i, step);
  };
  const double coarse = nested(h);
  const double fine = nested(h / 2.0);
  return (4.0 * fine - coarse) / 3.0;
}

inline bool close(double a, double b, double abs_tol, double rel_tol) {
  const double diff = std::abs(a - b);
  return diff <= abs_tol || diff <= rel_tol * std::max(std::abs(a), std::abs(b));
}

class Sampler {
 public:
  explicit Sampler(unsigned seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::vector<double> point(int n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p) v = uniform(lo, hi);
    return p;
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace mkropina::testing
