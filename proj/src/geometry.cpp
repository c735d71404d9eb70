#include "mkropina/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace mkropina {

MetricField::MetricField(std::vector<std::string> coordinates, std::vector<int> signature)
    : coordinates_(std::move(coordinates)), signature_(std::move(signature)) {
  if (!signature_.empty() && signature_.size() != coordinates_.size()) {
    throw ConfigError("declared signature length does not match the dimension");
  }
}

ExprMetric::ExprMetric(std::vector<std::string> coordinates, const std::vector<std::vector<Expr>>& components,
                       std::vector<int> signature)
    : MetricField(std::move(coordinates), std::move(signature)) {
  const auto n = static_cast<std::size_t>(dim());
  if (components.size() != n) throw ConfigError("metric needs " + std::to_string(n) + " rows");
  for (const auto& row : components) {
    if (row.size() != n) throw ConfigError("metric rows must have " + std::to_string(n) + " entries");
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (!(components[i][j] == components[j][i])) {
        throw ConfigError("metric component (" + std::to_string(i) + "," + std::to_string(j) +
                          ") differs from its transpose");
      }
      upper_.push_back(components[i][j].bind(this->coordinates()));
    }
}

MetricFieldPtr ExprMetric::make(std::vector<std::string> coordinates,
                                const std::vector<std::vector<std::string>>& components, std::vector<int> signature) {
  std::vector<std::vector<Expr>> parsed;
  for (const auto& row : components) {
    auto& out = parsed.emplace_back();
    for (const auto& s : row) out.push_back(Expr::parse(s));
  }
  return std::make_shared<ExprMetric>(std::move(coordinates), parsed, std::move(signature));
}

const Expr& ExprMetric::component(int i, int j) const {
  if (i > j) std::swap(i, j);
  const int n = dim();
  // Row-major upper triangle.
  const int idx = i * n - i * (i - 1) / 2 + (j - i);
  return upper_[static_cast<std::size_t>(idx)];
}

OneFormField::OneFormField(std::vector<std::string> coordinates, const std::vector<Expr>& components)
    : coordinates_(std::move(coordinates)) {
  if (components.size() != coordinates_.size()) {
    throw ConfigError("one-form needs " + std::to_string(coordinates_.size()) + " components");
  }
  bool all_zero = true;
  for (const auto& c : components) {
    components_.push_back(c.bind(coordinates_));
    all_zero = all_zero && c.is_zero();
  }
  if (all_zero) throw ConfigError("one-form is identically zero");
}

OneFormField OneFormField::make(std::vector<std::string> coordinates, const std::vector<std::string>& components) {
  std::vector<Expr> parsed;
  for (const auto& s : components) parsed.push_back(Expr::parse(s));
  return OneFormField(std::move(coordinates), parsed);
}

CoordinateMap::CoordinateMap(std::vector<std::string> source, std::vector<std::string> target,
                             const std::vector<std::string>& maps)
    : source_(std::move(source)), target_(std::move(target)) {
  if (maps.size() != source_.size() || target_.size() != source_.size()) {
    throw ConfigError("coordinate map dimension mismatch");
  }
  for (const auto& m : maps) maps_.push_back(Expr::parse(m).bind(source_));
}

std::vector<double> CoordinateMap::apply(std::span<const double> x) const {
  std::vector<double> out;
  for (const auto& m : maps_) out.push_back(m.evaluate(x));
  return out;
}

Matrix<double> CoordinateMap::jacobian(std::span<const double> x) const {
  const auto jets = seed_point(x, 1);
  const int n = dim();
  Matrix<double> J(n, n);
  for (int i = 0; i < n; ++i) {
    const Jet image = maps_[static_cast<std::size_t>(i)].evaluate(std::span<const Jet>(jets));
    for (int j = 0; j < n; ++j) J(i, j) = partial(image, {j});
  }
  const double det = determinant(J);
  if (!(std::abs(det) > 1e-10)) throw DegenerateError("coordinate map has a singular Jacobian", det);
  return J;
}

void require_finite(std::span<const double> p) {
  for (double v : p) {
    if (!std::isfinite(v)) throw DomainError("point has a non-finite coordinate");
  }
}

std::vector<Jet> seed_point(std::span<const double> p, int order) {
  require_finite(p);
  const auto space = JetSpace::get({std::max<int>(2, static_cast<int>(p.size())), order});
  std::vector<Jet> out;
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back(Jet::variable(space, static_cast<int>(i), p[i]));
  return out;
}

Matrix<double> metric_at(const MetricField& g, std::span<const double> p) {
  require_finite(p);
  Matrix<double> a = g.evaluate(p);
  const double det = determinant(a);
  if (!(std::abs(det) > kDegenerateDeterminant)) throw DegenerateError("metric is degenerate at the point", det);
  return a;
}

Matrix<Jet> metric_jet(const MetricField& g, std::span<const double> p, int order) {
  const auto x = seed_point(p, order);
  return g.evaluate(std::span<const Jet>(x));
}

Matrix<double> inverse_metric(const Matrix<double>& a) { return inverse(a); }

Tensor3<double> christoffel(const MetricField& g, std::span<const double> p) {
  const auto gamma = christoffel_jet(g, p, 0);
  const int n = g.dim();
  Tensor3<double> out(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(k, i, j) = gamma(k, i, j).value();
  return out;
}

Tensor3<Jet> christoffel_jet(const MetricField& g, std::span<const double> p, int order) {
  return christoffel_from_metric(metric_jet(g, p, order + 1));
}

Matrix<double> covariant_derivative_oneform(const MetricField& g, const OneFormField& b, std::span<const double> p) {
  const int n = g.dim();
  if (b.dim() != n) throw ConfigError("one-form and metric dimensions differ");
  const auto gamma = christoffel(g, p);
  const auto x = seed_point(p, 1);
  const auto bj = b.evaluate(std::span<const Jet>(x));
  Matrix<double> D(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = partial(bj[static_cast<std::size_t>(j)], {i});
      for (int k = 0; k < n; ++k) v -= gamma(k, i, j) * bj[static_cast<std::size_t>(k)].value();
      D(i, j) = v;
    }
  return D;
}

Curvature curvature_from_connection(const Tensor3<Jet>& gamma) {
  const int n = gamma.dim();
  Tensor3<double> g0(n);
  std::vector<Tensor3<double>> dg(static_cast<std::size_t>(n), Tensor3<double>(n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        g0(k, i, j) = gamma(k, i, j).value();
        for (int l = 0; l < n; ++l) dg[static_cast<std::size_t>(l)](k, i, j) = partial(gamma(k, i, j), {l});
      }
  Curvature c{Tensor4<double>(n), Matrix<double>(n, n)};
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          double v = dg[static_cast<std::size_t>(j)](i, k, l) - dg[static_cast<std::size_t>(k)](i, j, l);
          for (int m = 0; m < n; ++m) v += g0(i, m, j) * g0(m, k, l) - g0(i, m, k) * g0(m, j, l);
          c.riemann(l, i, j, k) = v;
        }
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k) {
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += c.riemann(l, i, i, k);
      c.ricci(l, k) = v;
    }
  return c;
}

Curvature riemann_and_ricci(const MetricField& g, std::span<const double> p) {
  return curvature_from_connection(christoffel_jet(g, p, 1));
}

Matrix<double> transform_metric(const MetricField& g, const CoordinateMap& map, std::span<const double> p) {
  const Matrix<double> a = metric_at(g, p);
  const Matrix<double> Jinv = inverse(map.jacobian(p), 0.0);
  Matrix<double> out = Jinv.transposed() * a * Jinv;
  if (signature_counts(out) != signature_counts(a)) {
    throw NumericalError("coordinate transformation changed the metric signature");
  }
  return out;
}

std::pair<int, int> signature_counts(const Matrix<double>& a) {
  const int n = a.rows();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = 0.5 * (a(i, j) + a(j, i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  int neg = 0;
  int pos = 0;
  for (int i = 0; i < n; ++i) {
    if (solver.eigenvalues()(i) < 0) {
      ++neg;
    } else if (solver.eigenvalues()(i) > 0) {
      ++pos;
    }
  }
  return {neg, pos};
}

}  // namespace mkropina
