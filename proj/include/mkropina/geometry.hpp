#pragma once

// (Pseudo-)Riemannian tensor core. Every quantity is computed pointwise from
// jets of the metric components; there is no discretization anywhere.
//
// Index conventions:
//   Gamma(k, i, j)        = Gamma^k_ij
//   covariant derivative  D(i, j) = nabla_i b_j = d_i b_j - Gamma^k_ij b_k
//   riemann(l, i, j, k)   = R_l^i_jk = d_j Gamma^i_kl - d_k Gamma^i_jl
//                                      + Gamma^i_mj Gamma^m_kl - Gamma^i_mk Gamma^m_jl
//   ricci(l, k)           = R_l^i_ik

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mkropina/expr.hpp"
#include "mkropina/jet.hpp"
#include "mkropina/linalg.hpp"

namespace mkropina {

class MetricField {
 public:
  virtual ~MetricField() = default;

  int dim() const noexcept { return static_cast<int>(coordinates_.size()); }
  const std::vector<std::string>& coordinates() const noexcept { return coordinates_; }
  // Declared signature signs (+1 / -1); metadata only, may be empty.
  const std::vector<int>& declared_signature() const noexcept { return signature_; }

  virtual Matrix<double> evaluate(std::span<const double> x) const = 0;
  virtual Matrix<Jet> evaluate(std::span<const Jet> x) const = 0;
  virtual Matrix<NestedJet> evaluate(std::span<const NestedJet> x) const = 0;

 protected:
  MetricField(std::vector<std::string> coordinates, std::vector<int> signature);

 private:
  std::vector<std::string> coordinates_;
  std::vector<int> signature_;
};

using MetricFieldPtr = std::shared_ptr<const MetricField>;

// Metric whose components are coordinate expressions. Only the upper
// triangle is stored, so a_ij and a_ji are literally the same tree.
class ExprMetric final : public MetricField {
 public:
  ExprMetric(std::vector<std::string> coordinates, const std::vector<std::vector<Expr>>& components,
             std::vector<int> signature = {});

  static MetricFieldPtr make(std::vector<std::string> coordinates, const std::vector<std::vector<std::string>>& components,
                             std::vector<int> signature = {});

  const Expr& component(int i, int j) const;

  Matrix<double> evaluate(std::span<const double> x) const override { return eval(x); }
  Matrix<Jet> evaluate(std::span<const Jet> x) const override { return eval(x); }
  Matrix<NestedJet> evaluate(std::span<const NestedJet> x) const override { return eval(x); }

 private:
  template <class S>
  Matrix<S> eval(std::span<const S> x) const {
    const int n = dim();
    Matrix<S> m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        m(i, j) = component(i, j).evaluate(x);
        if (j != i) m(j, i) = m(i, j);
      }
    return m;
  }

  std::vector<Expr> upper_;
};

class OneFormField {
 public:
  OneFormField(std::vector<std::string> coordinates, const std::vector<Expr>& components);
  static OneFormField make(std::vector<std::string> coordinates, const std::vector<std::string>& components);

  int dim() const noexcept { return static_cast<int>(components_.size()); }
  const std::vector<std::string>& coordinates() const noexcept { return coordinates_; }
  const Expr& component(int i) const { return components_[static_cast<std::size_t>(i)]; }

  template <class S>
  std::vector<S> evaluate(std::span<const S> x) const {
    std::vector<S> out;
    out.reserve(components_.size());
    for (const auto& c : components_) out.push_back(c.evaluate(x));
    return out;
  }

 private:
  std::vector<std::string> coordinates_;
  std::vector<Expr> components_;
};

// x -> x~(x), given by one expression per target coordinate.
class CoordinateMap {
 public:
  CoordinateMap(std::vector<std::string> source, std::vector<std::string> target, const std::vector<std::string>& maps);

  int dim() const noexcept { return static_cast<int>(maps_.size()); }
  const std::vector<std::string>& target_coordinates() const noexcept { return target_; }
  std::vector<double> apply(std::span<const double> x) const;
  // J^i_j = d x~^i / d x^j. Throws DegenerateError when |det J| <= 1e-10.
  Matrix<double> jacobian(std::span<const double> x) const;

 private:
  std::vector<std::string> source_;
  std::vector<std::string> target_;
  std::vector<Expr> maps_;
};

// Jets x_i = p_i + dx_i over n variables.
std::vector<Jet> seed_point(std::span<const double> p, int order);
void require_finite(std::span<const double> p);

Matrix<double> metric_at(const MetricField& g, std::span<const double> p);
// Metric components as jets of the given order in the n coordinates.
Matrix<Jet> metric_jet(const MetricField& g, std::span<const double> p, int order);
Matrix<double> inverse_metric(const Matrix<double>& a);

// Levi-Civita symbols from a metric given as jets; the result has one order
// less than the input.
template <class S>
Tensor3<S> christoffel_from_metric(const Matrix<S>& a) {
  const int n = a.rows();
  std::vector<Matrix<S>> da(static_cast<std::size_t>(n), Matrix<S>(n, n));
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        da[static_cast<std::size_t>(l)](i, j) = derivative(a(i, j), l);
        da[static_cast<std::size_t>(l)](j, i) = da[static_cast<std::size_t>(l)](i, j);
      }
  const Matrix<S> ainv = inverse(a);
  Tensor3<S> gamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::vector<S> first_kind(static_cast<std::size_t>(n));
      for (int l = 0; l < n; ++l) {
        first_kind[static_cast<std::size_t>(l)] = (da[static_cast<std::size_t>(i)](j, l) +
                                                   da[static_cast<std::size_t>(j)](i, l) -
                                                   da[static_cast<std::size_t>(l)](i, j)) *
                                                  0.5;
      }
      for (int k = 0; k < n; ++k) {
        S acc(0.0);
        for (int l = 0; l < n; ++l) acc += ainv(k, l) * first_kind[static_cast<std::size_t>(l)];
        gamma(k, i, j) = acc;
        gamma(k, j, i) = acc;
      }
    }
  return gamma;
}

Tensor3<double> christoffel(const MetricField& g, std::span<const double> p);
// Christoffel symbols as jets carrying `order` derivatives (order <= 3).
Tensor3<Jet> christoffel_jet(const MetricField& g, std::span<const double> p, int order);

Matrix<double> covariant_derivative_oneform(const MetricField& g, const OneFormField& b, std::span<const double> p);

struct Curvature {
  Tensor4<double> riemann;
  Matrix<double> ricci;
};

// Curvature of an arbitrary torsion-free connection given as jets of order >= 1.
Curvature curvature_from_connection(const Tensor3<Jet>& gamma);
Curvature riemann_and_ricci(const MetricField& g, std::span<const double> p);

// Metric in target coordinates at the image of p: a~ = J^{-T} a J^{-1}.
Matrix<double> transform_metric(const MetricField& g, const CoordinateMap& map, std::span<const double> p);

// (number of negative, number of positive) eigenvalues.
std::pair<int, int> signature_counts(const Matrix<double>& a);

}  // namespace mkropina
