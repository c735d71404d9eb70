#pragma once

// m-Kropina closed forms: validity of the one-form, Berwald conditions, the
// affine connection and its curvature, Kundt normal form, metrizability and
// the metrizing conformal metric, and the closed-form geodesic sprays.
//
// Covariant derivative convention: D(i, j) = nabla_i b_j, split as
// D = A + S with A antisymmetric and S symmetric.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mkropina/expr.hpp"
#include "mkropina/finsler.hpp"
#include "mkropina/geometry.hpp"
#include "mkropina/linalg.hpp"

namespace mkropina {

using PointList = std::vector<std::vector<double>>;

inline constexpr double kStructuralTol = 1e-9;
inline constexpr double kValidityTol = 1e-10;
inline constexpr double kCrossModuleTol = 1e-8;

class MKropinaSpace {
 public:
  // Rejects n <= 2, and m = 1 when b^2 vanishes at every probe point (the
  // fundamental tensor is then identically degenerate). With no probes a
  // seeded set of points in [-1, 1]^n is used.
  MKropinaSpace(MetricFieldPtr a, OneFormField b, double m, const PointList& probes = {});

  int dim() const { return a_->dim(); }
  double m() const { return m_; }
  const MetricField& metric() const { return *a_; }
  const MetricFieldPtr& metric_ptr() const { return a_; }
  const OneFormField& one_form() const { return b_; }
  std::shared_ptr<const MKropinaFinsler> finsler() const { return finsler_; }

 private:
  MetricFieldPtr a_;
  OneFormField b_;
  double m_;
  std::shared_ptr<const MKropinaFinsler> finsler_;
};

// Coordinates (u, v, x^3..x^n) with
//   a = -2 du dv + H du^2 + W_a du dx^a + h_ab dx^a dx^b,   b = du.
// W and h must not depend on v.
class KundtForm {
 public:
  KundtForm(std::vector<std::string> coordinates, Expr H, std::vector<Expr> W, std::vector<std::vector<Expr>> h);
  static KundtForm make(std::vector<std::string> coordinates, const std::string& H, const std::vector<std::string>& W,
                        const std::vector<std::vector<std::string>>& h);

  int dim() const { return static_cast<int>(coordinates_.size()); }
  const std::vector<std::string>& coordinates() const { return coordinates_; }
  const Expr& H() const { return H_; }
  const MetricFieldPtr& metric() const { return metric_; }
  OneFormField one_form() const;

 private:
  std::vector<std::string> coordinates_;
  Expr H_;
  MetricFieldPtr metric_;
};

// The Kundt-shaped metric without the v-independence check on W and h.
MetricFieldPtr kundt_metric(const std::vector<std::string>& coordinates, const Expr& H, const std::vector<Expr>& W,
                            const std::vector<std::vector<Expr>>& h);

struct Validity {
  bool closed = false;
  bool null = false;
  double closed_residual = 0.0;  // max |d_i b_j - d_j b_i|
  double null_residual = 0.0;    // max |a^ij b_i b_j|
};

Validity validate(const MKropinaSpace& space, const PointList& points);

struct ClosedBerwald {
  bool holds = false;
  double c = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
};

// nabla_j b_i = c [m b^2 a_ij + (1 - m) b_i b_j], solved for c by least squares.
ClosedBerwald berwald_condition_closed(const MKropinaSpace& space, std::span<const double> p);

enum class BerwaldKind { Parallel, ClosedNullWithC, GeneralWithF, NotBerwald };
const char* to_string(BerwaldKind k);

struct BerwaldCertificate {
  BerwaldKind kind = BerwaldKind::NotBerwald;
  std::vector<double> f;  // f_i at the point
  std::optional<double> c;
  double residual = 0.0;
  double tolerance = 0.0;
  bool positive() const { return kind != BerwaldKind::NotBerwald; }
};

// nabla_j b_i = m (f_k b^k) a_ij + b_i f_j - m f_i b_j, solved for f_i.
BerwaldCertificate berwald_condition_general(const MKropinaSpace& space, std::span<const double> p);

// Affine connection of a Berwald space, as jets carrying `order` (0 or 1)
// derivatives. Throws PreconditionError when the point is not Berwald.
Tensor3<Jet> affine_connection_jet(const MKropinaSpace& space, std::span<const double> p, int order);
Tensor3<double> affine_connection(const MKropinaSpace& space, std::span<const double> p);
// Closed form for the Kundt form: Levi-Civita plus
//   m/(2(1-m)) d_v H (a_ij delta^k_v + delta^k_j delta^u_i + delta^k_i delta^u_j).
Tensor3<Jet> affine_connection_jet(const KundtForm& kundt, double m, std::span<const double> p, int order);
Tensor3<double> affine_connection(const KundtForm& kundt, double m, std::span<const double> p);

struct AffineCurvature {
  Tensor4<double> riemann;
  Matrix<double> ricci;
  Matrix<double> skew;  // (R_ij - R_ji) / 2
  double skew_max = 0.0;
};

AffineCurvature affine_curvature_ricci(const MKropinaSpace& space, std::span<const double> p);
AffineCurvature affine_curvature_ricci(const KundtForm& kundt, double m, std::span<const double> p);
// -(m n / (4 (1 - m))) (delta^u_i d_j d_v H - delta^u_j d_i d_v H).
Matrix<double> ricci_skew_closed_form(const KundtForm& kundt, double m, std::span<const double> p);

enum class Verdict { Metrizable, NotMetrizable, NotBerwald, Undetermined };
const char* to_string(Verdict v);

struct PhiSample {
  double u;
  double phi;
};

struct MetrizabilityReport {
  Verdict verdict = Verdict::NotBerwald;
  double s1 = 0.0;  // max |d_v^2 H|
  double s2 = 0.0;  // max_a |d_v d_a H|
  double tolerance = 0.0;
  double max_dvH = 0.0;
  double ricci_skew_max = 0.0;     // brute force over the grid
  double skew_closed_form_deviation = 0.0;   // closed form vs brute force
  std::vector<PhiSample> phi_samples;
};

MetrizabilityReport metrizability_verdict(const KundtForm& kundt, double m, const PointList& grid);

// psi(u) = scale * (m / (1 - m)) * int_{u0}^u phi, phi(u) = d_v H(u, v_ref, x_ref).
class ConformalFactor {
 public:
  ConformalFactor(const KundtForm& kundt, double m, double u0, std::vector<double> reference, double scale = 1.0);

  double psi(double u) const;
  double factor(double u) const { return std::exp(psi(u)); }
  // Taylor coefficients psi^(k)(u) / k! for k = 0..order.
  std::vector<double> psi_series(double u, int order) const;
  double u0() const { return u0_; }

 private:
  double phi(double u) const;

  Expr H_;
  std::vector<std::string> coordinates_;
  double k_;
  double u0_;
  std::vector<double> reference_;
};

// a~ = e^psi(u) a.
class ConformalMetric final : public MetricField {
 public:
  ConformalMetric(MetricFieldPtr base, ConformalFactor factor);

  Matrix<double> evaluate(std::span<const double> x) const override;
  Matrix<Jet> evaluate(std::span<const Jet> x) const override;
  Matrix<NestedJet> evaluate(std::span<const NestedJet> x) const override;
  const ConformalFactor& factor() const { return factor_; }

 private:
  MetricFieldPtr base_;
  ConformalFactor factor_;
};

std::shared_ptr<const ConformalMetric> metrize(const KundtForm& kundt, double m, const MetrizabilityReport& report,
                                               double u0, std::vector<double> reference = {});
// Same construction without the verdict check, with psi scaled by `scale`.
std::shared_ptr<const ConformalMetric> metrize_candidate(const KundtForm& kundt, double m, double u0,
                                                         std::vector<double> reference, double scale);

struct MetrizationCheck {
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

MetrizationCheck verify_metrization(const MetricField& metric, const KundtForm& kundt, double m,
                                    const PointList& points);

// Closed-form sprays. All return G^k with geodesics x'' = -G(x, x').
std::vector<double> spray_berwald(const Tensor3<double>& gamma, std::span<const double> y);
// Full expression in terms of S and the one-form f with A_ij = (1+m)(b_j f_i - b_i f_j).
std::vector<double> spray_generic(const MKropinaSpace& space, std::span<const double> x, std::span<const double> y);
// The same spray written directly in terms of A and S.
std::vector<double> spray_decomposed(const MKropinaSpace& space, std::span<const double> x,
                                     std::span<const double> y);

struct M1Check {
  bool berwald_possible = false;
  double q = 0.0;
  double residual = 0.0;
};

// m = 1 with b^2 != 0: S_ij must be a multiple of a_ij.
M1Check check_m1_nonnull(const MKropinaSpace& space, std::span<const double> p);

// det g / det a = (1+m)^(n-1) (alpha^2)^(n m) beta^(-2(1 + n m)) ((1-m) beta^2 + m b^2 alpha^2).
double det_g_ratio(double m, int n, double alpha2, double beta, double b2);

}  // namespace mkropina
