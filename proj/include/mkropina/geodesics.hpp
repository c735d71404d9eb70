#pragma once

// Spray curves x'' = -G(x, x') by an embedded Dormand-Prince 5(4) pair, with
// adaptive or fixed steps, plus the null-geodesic comparison between an
// affine (Berwald) spray and a pseudo-Riemannian one.

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mkropina/errors.hpp"
#include "mkropina/finsler.hpp"
#include "mkropina/geometry.hpp"
#include "mkropina/kropina.hpp"

namespace mkropina {

struct GeodesicState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> y;
};

using Trajectory = std::vector<GeodesicState>;

using SprayFn = std::function<std::vector<double>(std::span<const double> x, std::span<const double> y)>;
// Optional evaluation domain of the spray; an empty function accepts everything.
using DomainFn = std::function<bool(std::span<const double> x, std::span<const double> y)>;

enum class StepControl { Adaptive, Fixed };

struct IntegratorConfig {
  StepControl control = StepControl::Adaptive;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_steps = 100000;
  double fixed_step = 0.0;  // used when control == Fixed

  void validate() const;
};

// Carries the last accepted state.
class DomainExitError : public DomainError {
 public:
  DomainExitError(const std::string& what, GeodesicState last) : DomainError(what), last_(std::move(last)) {}
  const GeodesicState& last_state() const noexcept { return last_; }

 private:
  GeodesicState last_;
};

class StepLimitError : public NumericalError {
 public:
  StepLimitError(const std::string& what, GeodesicState last) : NumericalError(what), last_(std::move(last)) {}
  const GeodesicState& last_state() const noexcept { return last_; }

 private:
  GeodesicState last_;
};

Trajectory integrate(const SprayFn& spray, const GeodesicState& init, double t_end, const IntegratorConfig& cfg,
                     const DomainFn& domain = {});

SprayFn finsler_spray(FinslerPtr F);
DomainFn finsler_domain(FinslerPtr F);
SprayFn metric_spray(MetricFieldPtr a);
// Gamma(x) y y for a fixed connection field.
SprayFn connection_spray(std::function<Tensor3<double>(std::span<const double>)> gamma);

struct NullComparison {
  Trajectory trajectory;
  double max_orthogonal = 0.0;  // max |r_perp| / |x'|^2
  double max_null_drift = 0.0;  // max |a(x', x')| / |x'|^2
};

// Integrates the affine spray of a Berwald m-Kropina space from a null
// initial velocity and measures r = x'' + Gamma_c(x) x' x' against the
// comparison metric c. Only the component of r orthogonal to x' (Euclidean)
// is reported: parallel components only reparameterize the curve.
NullComparison compare_null_geodesics(const KundtForm& kundt, double m, const MetricField& comparison,
                                      const GeodesicState& init, double t_end, const IntegratorConfig& cfg);
NullComparison compare_null_geodesics(const MKropinaSpace& space, const MetricField& comparison,
                                      const GeodesicState& init, double t_end, const IntegratorConfig& cfg);

// Header t,x1..xn,y1..yn; 17 significant digits.
void write_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace mkropina
