#pragma once

// Generic Finsler pipeline. Everything is derived from jets of F^2 in the 2n
// variables (x^1..x^n, y^1..y^n); variable n+i of a jet is y^i.
//
//   g_ij   = 1/2 dy_i dy_j F^2
//   E^i    = 1/4 g^ik (y^l dx_l dy_k F^2 - dx_k F^2)       (G^i = 2 E^i)
//   N^i_j  = dy_j E^i
//   R^i_jk = dx_j N^i_k - N^l_j dy_l N^i_k - (j <-> k)
//   Ric    = R^i_ij y^j,   R_ij = 1/2 dy_i dy_j Ric
//
// Geodesics solve x'' = -G(x, x').

#include <memory>
#include <span>
#include <vector>

#include "mkropina/geometry.hpp"
#include "mkropina/jet.hpp"
#include "mkropina/linalg.hpp"

namespace mkropina {

class FinslerFunction {
 public:
  virtual ~FinslerFunction() = default;

  virtual int dim() const = 0;
  // Membership in the conic domain where F is smooth and evaluated.
  virtual bool in_domain(std::span<const double> x, std::span<const double> y) const = 0;

  // F^2 in the respective scalar ring. Throws DomainError outside the domain.
  virtual double f2(std::span<const double> x, std::span<const double> y) const = 0;
  virtual Jet f2(std::span<const Jet> x, std::span<const Jet> y) const = 0;
  virtual NestedJet f2(std::span<const NestedJet> x, std::span<const NestedJet> y) const = 0;

  double value(std::span<const double> x, std::span<const double> y) const;
};

using FinslerPtr = std::shared_ptr<const FinslerFunction>;

// F = alpha^(1+m) beta^(-m), i.e. F^2 = (alpha^2)^(1+m) beta^(-2m), on the
// domain alpha^2 > 0 and beta > 0.
class MKropinaFinsler final : public FinslerFunction {
 public:
  MKropinaFinsler(MetricFieldPtr a, OneFormField b, double m);

  int dim() const override { return a_->dim(); }
  bool in_domain(std::span<const double> x, std::span<const double> y) const override;
  double f2(std::span<const double> x, std::span<const double> y) const override { return eval(x, y); }
  Jet f2(std::span<const Jet> x, std::span<const Jet> y) const override { return eval(x, y); }
  NestedJet f2(std::span<const NestedJet> x, std::span<const NestedJet> y) const override { return eval(x, y); }

  const MetricField& metric() const { return *a_; }
  const MetricFieldPtr& metric_ptr() const { return a_; }
  const OneFormField& one_form() const { return b_; }
  double m() const { return m_; }

  // alpha^2 = a_ij y^i y^j and beta = b_i y^i.
  template <class S>
  std::pair<S, S> alpha2_beta(std::span<const S> x, std::span<const S> y) const {
    const int n = dim();
    const Matrix<S> a = a_->evaluate(x);
    const std::vector<S> b = b_.evaluate(x);
    S alpha2(0.0);
    S beta(0.0);
    for (int i = 0; i < n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      beta += b[si] * y[si];
      S row = a(i, i) * y[si];
      for (int j = i + 1; j < n; ++j) row += 2.0 * (a(i, j) * y[static_cast<std::size_t>(j)]);
      alpha2 += row * y[si];
    }
    return {alpha2, beta};
  }

 private:
  template <class S>
  S eval(std::span<const S> x, std::span<const S> y) const {
    auto [alpha2, beta] = alpha2_beta(x, y);
    if (!(primal(alpha2) > 0.0) || !(primal(beta) > 0.0)) {
      throw DomainError("direction outside the domain alpha^2 > 0, beta > 0");
    }
    using std::pow;
    return pow(alpha2, 1.0 + m_) * pow(beta, -2.0 * m_);
  }

  MetricFieldPtr a_;
  OneFormField b_;
  double m_;
};

// F^2 = sign * a(y, y) on the cone where that is positive. sign = +1 with a
// Euclidean metric gives the Euclidean norm.
class PseudoRiemannFinsler final : public FinslerFunction {
 public:
  explicit PseudoRiemannFinsler(MetricFieldPtr a, int sign = 1);

  int dim() const override { return a_->dim(); }
  bool in_domain(std::span<const double> x, std::span<const double> y) const override;
  double f2(std::span<const double> x, std::span<const double> y) const override { return eval(x, y); }
  Jet f2(std::span<const Jet> x, std::span<const Jet> y) const override { return eval(x, y); }
  NestedJet f2(std::span<const NestedJet> x, std::span<const NestedJet> y) const override { return eval(x, y); }

  const MetricField& metric() const { return *a_; }

 private:
  template <class S>
  S eval(std::span<const S> x, std::span<const S> y) const {
    const int n = dim();
    const Matrix<S> a = a_->evaluate(x);
    S q(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q += a(i, j) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
    q *= static_cast<double>(sign_);
    if (!(primal(q) > 0.0)) throw DomainError("direction outside the domain sign * a(y, y) > 0");
    return q;
  }

  MetricFieldPtr a_;
  int sign_;
};

struct FundamentalTensor {
  Matrix<double> g;
  Matrix<double> inverse;
  double determinant = 0.0;
};

struct NonlinearConnection {
  double f2 = 0.0;
  Matrix<double> N;             // N^i_j
  Tensor3<double> dN;           // dN(i, j, k) = dy_k N^i_j
  std::vector<double> spray;    // G^i = N^i_j y^j
  std::vector<double> delta_f2;  // (dx_k - N^l_k dy_l) F^2
  // max(|F^2|, |dx F^2|, |N dy F^2|): the scale against which delta_f2 is small.
  double delta_scale = 0.0;
};

struct BerwaldDetection {
  bool is_berwald = false;
  double residual = 0.0;
  double tolerance = 0.0;
  Tensor3<double> gamma;  // mean of dy_k N^i_j over the directions, (i, j, k)
  std::vector<std::vector<double>> directions;
};

struct FinslerCurvature {
  Tensor3<double> R;            // R(i, j, k) = R^i_jk
  double ric = 0.0;             // from the order-4 path
  double ric_nested = 0.0;      // the same scalar from the nested path
  Matrix<double> ricci_tensor;  // R_ij
};

// Relative degeneracy gate for g: |det g| must exceed this times the product
// of the row norms.
inline constexpr double kDegenerateRelative = 1e-12;
// Same measure, used to keep sampled directions away from the cone boundary.
inline constexpr double kDirectionConditioning = 1e-3;

FundamentalTensor fundamental_tensor(const FinslerFunction& F, std::span<const double> x, std::span<const double> y);
NonlinearConnection nonlinear_connection(const FinslerFunction& F, std::span<const double> x,
                                         std::span<const double> y);
// G^i(x, y) only; cheaper than nonlinear_connection.
std::vector<double> spray(const FinslerFunction& F, std::span<const double> x, std::span<const double> y);

// n+3 seeded pseudorandom directions inside the domain, away from its boundary.
std::vector<std::vector<double>> sample_directions(const FinslerFunction& F, std::span<const double> x, int count,
                                                   unsigned seed = 1);
BerwaldDetection berwald_detect(const FinslerFunction& F, std::span<const double> x,
                                const std::vector<std::vector<double>>& directions, double tol = 1e-8);
BerwaldDetection berwald_detect(const FinslerFunction& F, std::span<const double> x, double tol = 1e-8);

FinslerCurvature finsler_curvature(const FinslerFunction& F, std::span<const double> x, std::span<const double> y);

}  // namespace mkropina
