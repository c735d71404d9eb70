#include "mkropina/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace mkropina {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Dormand-Prince 5(4) tableau.
constexpr double kA[7][6] = {
    {},
    {1.0 / 5.0},
    {3.0 / 40.0, 9.0 / 40.0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
    {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0},
};
constexpr double kB5[7] = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0};
constexpr double kB4[7] = {5179.0 / 57600.0,    0.0,           7571.0 / 16695.0, 393.0 / 640.0,
                           -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0};

using State = std::vector<double>;  // (x, y)

class Rhs {
 public:
  Rhs(const SprayFn& spray, const DomainFn& domain, int n) : spray_(spray), domain_(domain), n_(n) {}

  // False when (x, y) leaves the evaluation domain.
  bool operator()(const State& z, State& dz) const {
    const std::span<const double> x(z.data(), idx(n_));
    const std::span<const double> y(z.data() + n_, idx(n_));
    for (double v : z)
      if (!std::isfinite(v)) return false;
    if (domain_ && !domain_(x, y)) return false;
    std::vector<double> G;
    try {
      G = spray_(x, y);
    } catch (const DomainError&) {
      return false;
    } catch (const DegenerateError&) {
      return false;
    }
    dz.assign(z.size(), 0.0);
    for (int i = 0; i < n_; ++i) {
      dz[idx(i)] = z[idx(n_ + i)];
      if (!std::isfinite(G[idx(i)])) return false;
      dz[idx(n_ + i)] = -G[idx(i)];
    }
    return true;
  }

 private:
  const SprayFn& spray_;
  const DomainFn& domain_;
  int n_;
};

struct StepResult {
  bool ok = false;
  State z5;
  State k7;
  double error = 0.0;
};

StepResult dp_step(const Rhs& f, const State& z, const State& k1, double h, const IntegratorConfig& cfg) {
  StepResult r;
  std::vector<State> k(7);
  k[0] = k1;
  State tmp(z.size());
  for (int s = 1; s < 7; ++s) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      double acc = 0.0;
      for (int j = 0; j < s; ++j) acc += kA[s][j] * k[idx(j)][i];
      tmp[i] = z[i] + h * acc;
    }
    if (!f(tmp, k[idx(s)])) return r;
  }
  r.ok = true;
  r.z5 = tmp;  // the seventh stage point is the 5th-order solution
  r.k7 = k[6];
  for (std::size_t i = 0; i < z.size(); ++i) {
    double e = 0.0;
    for (int j = 0; j < 7; ++j) e += (kB5[j] - kB4[j]) * k[idx(j)][i];
    const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(z[i]), std::abs(r.z5[i]));
    r.error = std::max(r.error, std::abs(h * e) / scale);
  }
  return r;
}

GeodesicState to_geodesic(double t, const State& z, int n) {
  GeodesicState s;
  s.t = t;
  s.x.assign(z.begin(), z.begin() + n);
  s.y.assign(z.begin() + n, z.end());
  return s;
}

}  // namespace

void IntegratorConfig::validate() const {
  auto in_range = [](double v) { return v >= 1e-13 && v <= 1e-3; };
  if (!in_range(rel_tol)) throw ConfigError("rel_tol must lie in [1e-13, 1e-3]");
  if (!in_range(abs_tol)) throw ConfigError("abs_tol must lie in [1e-13, 1e-3]");
  if (max_steps <= 0) throw ConfigError("max_steps must be positive");
  if (control == StepControl::Fixed && !(fixed_step > 0.0 && std::isfinite(fixed_step))) {
    throw ConfigError("fixed-step integration needs a positive step");
  }
}

Trajectory integrate(const SprayFn& spray, const GeodesicState& init, double t_end, const IntegratorConfig& cfg,
                     const DomainFn& domain) {
  cfg.validate();
  const int n = static_cast<int>(init.x.size());
  if (n == 0 || init.y.size() != init.x.size()) throw ConfigError("initial x and y must have the same nonzero length");
  if (!(t_end > init.t) || !std::isfinite(t_end)) throw ConfigError("t_end must exceed the initial parameter");
  if (std::all_of(init.y.begin(), init.y.end(), [](double v) { return v == 0.0; })) {
    throw PreconditionError("initial velocity must be nonzero");
  }
  const Rhs f(spray, domain, n);
  State z = init.x;
  z.insert(z.end(), init.y.begin(), init.y.end());
  State k1;
  if (!f(z, k1)) throw PreconditionError("initial state lies outside the spray's domain");

  Trajectory out{init};
  double t = init.t;
  const double span = t_end - init.t;
  int steps = 0;

  if (cfg.control == StepControl::Fixed) {
    const auto count = static_cast<long>(std::ceil(span / cfg.fixed_step - 1e-9));
    if (count > cfg.max_steps) throw StepLimitError("fixed step needs more than max_steps steps", out.back());
    const double h = span / static_cast<double>(count);
    for (long s = 0; s < count; ++s) {
      const auto r = dp_step(f, z, k1, h, cfg);
      if (!r.ok) throw DomainExitError("trajectory left the spray's domain", out.back());
      z = r.z5;
      k1 = r.k7;
      t = s + 1 == count ? t_end : init.t + static_cast<double>(s + 1) * h;
      out.push_back(to_geodesic(t, z, n));
    }
    return out;
  }

  double h = span * 1e-2;
  const double h_min = 1e-14 * std::max(1.0, std::abs(t_end));
  while (t < t_end) {
    if (++steps > cfg.max_steps) throw StepLimitError("step limit reached before t_end", out.back());
    const bool last = h >= t_end - t;
    if (last) h = t_end - t;
    const auto r = dp_step(f, z, k1, h, cfg);
    if (!r.ok) {
      h *= 0.25;
      if (h < h_min) throw DomainExitError("trajectory left the spray's domain", out.back());
      continue;
    }
    if (r.error <= 1.0) {
      t = last ? t_end : t + h;
      z = r.z5;
      k1 = r.k7;
      out.push_back(to_geodesic(t, z, n));
    }
    const double factor = r.error == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(r.error, -0.2), 0.2, 5.0);
    h *= factor;
    if (h < h_min) throw NumericalError("step size underflow");
  }
  return out;
}

SprayFn finsler_spray(FinslerPtr F) {
  return [F](std::span<const double> x, std::span<const double> y) { return spray(*F, x, y); };
}

DomainFn finsler_domain(FinslerPtr F) {
  return [F](std::span<const double> x, std::span<const double> y) { return F->in_domain(x, y); };
}

SprayFn metric_spray(MetricFieldPtr a) {
  return [a](std::span<const double> x, std::span<const double> y) { return spray_berwald(christoffel(*a, x), y); };
}

SprayFn connection_spray(std::function<Tensor3<double>(std::span<const double>)> gamma) {
  return [gamma = std::move(gamma)](std::span<const double> x, std::span<const double> y) {
    return spray_berwald(gamma(x), y);
  };
}

namespace {

NullComparison compare(const std::function<Tensor3<double>(std::span<const double>)>& gamma, const MetricField& alpha,
                       const MetricField& comparison, const GeodesicState& init, double t_end,
                       const IntegratorConfig& cfg) {
  const int n = alpha.dim();
  if (static_cast<int>(init.x.size()) != n || static_cast<int>(init.y.size()) != n) {
    throw ConfigError("initial state has the wrong dimension");
  }
  if (comparison.dim() != n) throw ConfigError("comparison metric has the wrong dimension");
  const auto norm2 = [](std::span<const double> v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return s;
  };
  const auto quad = [n](const Matrix<double>& a, std::span<const double> v) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += a(i, j) * v[idx(i)] * v[idx(j)];
    return s;
  };
  const double y2 = norm2(init.y);
  if (!(std::abs(quad(metric_at(alpha, init.x), init.y)) <= 1e-10 * y2)) {
    throw PreconditionError("initial velocity is not null for the defining metric");
  }
  NullComparison out;
  out.trajectory = integrate(connection_spray(gamma), init, t_end, cfg);
  for (const auto& s : out.trajectory) {
    const double v2 = norm2(s.y);
    const auto acc = spray_berwald(gamma(s.x), s.y);
    const auto cmp = spray_berwald(christoffel(comparison, s.x), s.y);
    std::vector<double> r(idx(n));
    double ry = 0.0;
    for (int k = 0; k < n; ++k) {
      r[idx(k)] = cmp[idx(k)] - acc[idx(k)];
      ry += r[idx(k)] * s.y[idx(k)];
    }
    double perp = 0.0;
    for (int k = 0; k < n; ++k) {
      const double c = r[idx(k)] - ry / v2 * s.y[idx(k)];
      perp += c * c;
    }
    out.max_orthogonal = std::max(out.max_orthogonal, std::sqrt(perp) / v2);
    out.max_null_drift = std::max(out.max_null_drift, std::abs(quad(metric_at(alpha, s.x), s.y)) / v2);
  }
  return out;
}

}  // namespace

NullComparison compare_null_geodesics(const KundtForm& kundt, double m, const MetricField& comparison,
                                      const GeodesicState& init, double t_end, const IntegratorConfig& cfg) {
  const auto gamma = [&kundt, m](std::span<const double> x) { return affine_connection(kundt, m, x); };
  return compare(gamma, *kundt.metric(), comparison, init, t_end, cfg);
}

NullComparison compare_null_geodesics(const MKropinaSpace& space, const MetricField& comparison,
                                      const GeodesicState& init, double t_end, const IntegratorConfig& cfg) {
  const auto gamma = [&space](std::span<const double> x) { return affine_connection(space, x); };
  return compare(gamma, space.metric(), comparison, init, t_end, cfg);
}

void write_csv(std::ostream& out, const Trajectory& trajectory) {
  if (trajectory.empty()) return;
  const std::size_t n = trajectory.front().x.size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",y" << i;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (const auto& s : trajectory) {
    put(s.t);
    for (double v : s.x) {
      out << ',';
      put(v);
    }
    for (double v : s.y) {
      out << ',';
      put(v);
    }
    out << '\n';
  }
}

}  // namespace mkropina
