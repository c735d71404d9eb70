#include "mkropina/finsler.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mkropina {

double FinslerFunction::value(std::span<const double> x, std::span<const double> y) const {
  return std::sqrt(f2(x, y));
}

MKropinaFinsler::MKropinaFinsler(MetricFieldPtr a, OneFormField b, double m) : a_(std::move(a)), b_(std::move(b)), m_(m) {
  if (!a_) throw ConfigError("m-Kropina function needs a metric");
  if (b_.dim() != a_->dim()) throw ConfigError("one-form and metric dimensions differ");
  if (!std::isfinite(m_)) throw ConfigError("exponent m must be finite");
}

bool MKropinaFinsler::in_domain(std::span<const double> x, std::span<const double> y) const {
  const auto [alpha2, beta] = alpha2_beta(x, y);
  return alpha2 > 0.0 && beta > 0.0;
}

PseudoRiemannFinsler::PseudoRiemannFinsler(MetricFieldPtr a, int sign) : a_(std::move(a)), sign_(sign) {
  if (!a_) throw ConfigError("pseudo-Riemannian function needs a metric");
  if (sign_ != 1 && sign_ != -1) throw ConfigError("sign must be +1 or -1");
}

bool PseudoRiemannFinsler::in_domain(std::span<const double> x, std::span<const double> y) const {
  const Matrix<double> a = a_->evaluate(x);
  double q = 0.0;
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) q += a(i, j) * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
  return sign_ * q > 0.0;
}

namespace {

Jet dx(const Jet& j, int var) { return derivative(j, var); }
NestedJet dx(const NestedJet& j, int var) { return inner_derivative(j, var); }

double scalar(const Jet& j) { return j.value(); }
double scalar(const NestedJet& j) { return primal(j); }

struct Seeds {
  std::vector<Jet> x;
  std::vector<Jet> y;
};

Seeds seed_xy(std::span<const double> x, std::span<const double> y, int order) {
  const int n = static_cast<int>(x.size());
  const auto space = JetSpace::get({2 * n, order});
  Seeds s;
  for (int i = 0; i < n; ++i) {
    s.x.push_back(Jet::variable(space, i, x[static_cast<std::size_t>(i)]));
    s.y.push_back(Jet::variable(space, n + i, y[static_cast<std::size_t>(i)]));
  }
  return s;
}

void check_input(const FinslerFunction& F, std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<std::size_t>(F.dim());
  if (x.size() != n || y.size() != n) throw ConfigError("point and direction must have " + std::to_string(n) + " entries");
  require_finite(x);
  require_finite(y);
  if (!F.in_domain(x, y)) throw DomainError("(x, y) is outside the domain of F");
}

void check_nondegenerate(const Matrix<double>& g) {
  const int n = g.rows();
  double scale = 1.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row = std::max(row, std::abs(g(i, j)));
    scale *= row;
  }
  const double det = determinant(g);
  if (!(std::abs(det) > kDegenerateRelative * std::max(scale, 1e-300)) || !(std::abs(det) > 0.0)) {
    throw DegenerateError("fundamental tensor is degenerate (det g = " + std::to_string(det) + ")", det);
  }
}

// Stages of the pipeline available for a given jet order K of F^2:
//   K >= 2: g, E;   K >= 3: N, delta F^2;   K >= 4: dy N, curvature.
template <class S>
struct Pipeline {
  int n = 0;
  S f2;
  std::vector<S> f2_x;
  std::vector<S> f2_y;
  Matrix<S> g;
  std::vector<S> E;
  Matrix<S> N;
  Tensor3<S> dN;
  Tensor3<S> R;
  S ric;
  std::vector<S> delta_f2;
};

template <class S>
Pipeline<S> run_pipeline(const S& f2, std::span<const S> y, int n, int order) {
  Pipeline<S> p;
  p.n = n;
  p.f2 = f2;
  for (int k = 0; k < n; ++k) {
    p.f2_x.push_back(dx(f2, k));
    p.f2_y.push_back(dx(f2, n + k));
  }
  p.g = Matrix<S>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      p.g(i, j) = dx(p.f2_y[static_cast<std::size_t>(i)], n + j) * 0.5;
      p.g(j, i) = p.g(i, j);
    }
  check_nondegenerate(primal_matrix(p.g));
  const Matrix<S> ginv = inverse(p.g, 0.0);
  std::vector<S> v(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    S acc = -p.f2_x[static_cast<std::size_t>(k)];
    for (int l = 0; l < n; ++l) acc += y[static_cast<std::size_t>(l)] * dx(p.f2_y[static_cast<std::size_t>(k)], l);
    v[static_cast<std::size_t>(k)] = acc;
  }
  for (int i = 0; i < n; ++i) {
    S acc(0.0);
    for (int k = 0; k < n; ++k) acc += ginv(i, k) * v[static_cast<std::size_t>(k)];
    p.E.push_back(acc * 0.25);
  }
  if (order < 3) return p;

  p.N = Matrix<S>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.N(i, j) = dx(p.E[static_cast<std::size_t>(i)], n + j);
  for (int k = 0; k < n; ++k) {
    S acc = p.f2_x[static_cast<std::size_t>(k)];
    for (int l = 0; l < n; ++l) acc -= p.N(l, k) * p.f2_y[static_cast<std::size_t>(l)];
    p.delta_f2.push_back(acc);
  }
  if (order < 4) return p;

  p.dN = Tensor3<S>(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) p.dN(i, j, k) = dx(p.N(i, j), n + k);
  // delta_j N^i_k = dx_j N^i_k - N^l_j dN(i, k, l).
  std::vector<Matrix<S>> deltaN(static_cast<std::size_t>(n), Matrix<S>(n, n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        S acc = dx(p.N(i, k), j);
        for (int l = 0; l < n; ++l) acc -= p.N(l, j) * p.dN(i, k, l);
        deltaN[static_cast<std::size_t>(j)](i, k) = acc;
      }
  p.R = Tensor3<S>(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        p.R(i, j, k) = deltaN[static_cast<std::size_t>(j)](i, k) - deltaN[static_cast<std::size_t>(k)](i, j);
      }
  p.ric = S(0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.ric += p.R(i, i, j) * y[static_cast<std::size_t>(j)];
  return p;
}

Pipeline<Jet> jet_pipeline(const FinslerFunction& F, std::span<const double> x, std::span<const double> y, int order) {
  check_input(F, x, y);
  const auto s = seed_xy(x, y, order);
  const Jet f2 = F.f2(std::span<const Jet>(s.x), std::span<const Jet>(s.y));
  return run_pipeline<Jet>(f2, std::span<const Jet>(s.y), F.dim(), order);
}

}  // namespace

FundamentalTensor fundamental_tensor(const FinslerFunction& F, std::span<const double> x, std::span<const double> y) {
  check_input(F, x, y);
  const int n = F.dim();
  const auto s = seed_xy(x, y, 2);
  const Jet f2 = F.f2(std::span<const Jet>(s.x), std::span<const Jet>(s.y));
  FundamentalTensor out;
  out.g = Matrix<double>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.g(i, j) = 0.5 * partial(f2, {n + i, n + j});
  check_nondegenerate(out.g);
  out.determinant = determinant(out.g);
  out.inverse = inverse(out.g, 0.0);
  return out;
}

std::vector<double> spray(const FinslerFunction& F, std::span<const double> x, std::span<const double> y) {
  const auto p = jet_pipeline(F, x, y, 2);
  std::vector<double> G;
  for (const auto& e : p.E) G.push_back(2.0 * scalar(e));
  return G;
}

NonlinearConnection nonlinear_connection(const FinslerFunction& F, std::span<const double> x,
                                         std::span<const double> y) {
  const auto p = jet_pipeline(F, x, y, 4);
  const int n = F.dim();
  NonlinearConnection out;
  out.f2 = p.f2.value();
  out.N = primal_matrix(p.N);
  out.dN = Tensor3<double>(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out.dN(i, j, k) = scalar(p.dN(i, j, k));
  double scale = std::abs(out.f2);
  for (int i = 0; i < n; ++i) {
    double G = 0.0;
    for (int j = 0; j < n; ++j) G += out.N(i, j) * y[static_cast<std::size_t>(j)];
    out.spray.push_back(G);
    out.delta_f2.push_back(scalar(p.delta_f2[static_cast<std::size_t>(i)]));
    scale = std::max(scale, std::abs(scalar(p.f2_x[static_cast<std::size_t>(i)])));
    double ndy = 0.0;
    for (int l = 0; l < n; ++l) ndy += out.N(l, i) * scalar(p.f2_y[static_cast<std::size_t>(l)]);
    scale = std::max(scale, std::abs(ndy));
  }
  out.delta_scale = scale;
  return out;
}

namespace {

// Directions close to the boundary of the cone give ill-conditioned g and
// amplify rounding in dy N.
bool well_conditioned(const FinslerFunction& F, std::span<const double> x, std::span<const double> y) {
  try {
    const auto ft = fundamental_tensor(F, x, y);
    double rows = 1.0;
    for (int i = 0; i < ft.g.rows(); ++i) {
      double r = 0.0;
      for (int j = 0; j < ft.g.cols(); ++j) r = std::max(r, std::abs(ft.g(i, j)));
      rows *= r;
    }
    return std::abs(ft.determinant) > kDirectionConditioning * rows;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

std::vector<std::vector<double>> sample_directions(const FinslerFunction& F, std::span<const double> x, int count,
                                                   unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = F.dim();
  std::vector<std::vector<double>> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (++attempts > 100000) throw DomainError("could not find directions inside the domain at this point");
    std::vector<double> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = normal(rng);
    if (!F.in_domain(x, y)) continue;
    if (!well_conditioned(F, x, y)) continue;
    bool parallel = false;
    for (const auto& o : out) {
      double dot = 0.0;
      double ny = 0.0;
      double no = 0.0;
      for (int i = 0; i < n; ++i) {
        dot += y[static_cast<std::size_t>(i)] * o[static_cast<std::size_t>(i)];
        ny += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        no += o[static_cast<std::size_t>(i)] * o[static_cast<std::size_t>(i)];
      }
      if (std::abs(dot) > (1.0 - 1e-6) * std::sqrt(ny * no)) parallel = true;
    }
    if (!parallel) out.push_back(std::move(y));
  }
  return out;
}

BerwaldDetection berwald_detect(const FinslerFunction& F, std::span<const double> x,
                                const std::vector<std::vector<double>>& directions, double tol) {
  const int n = F.dim();
  if (static_cast<int>(directions.size()) < n + 2) {
    throw ConfigError("Berwald detection needs at least n + 2 directions");
  }
  std::vector<Tensor3<double>> gammas;
  for (const auto& y : directions) gammas.push_back(nonlinear_connection(F, x, y).dN);
  BerwaldDetection out;
  out.directions = directions;
  out.gamma = Tensor3<double>(n);
  double magnitude = 0.0;
  for (const auto& g : gammas) magnitude = std::max(magnitude, max_abs(g));
  for (std::size_t a = 0; a < gammas.size(); ++a) {
    for (std::size_t b = a + 1; b < gammas.size(); ++b) {
      out.residual = std::max(out.residual, max_abs_difference(gammas[a], gammas[b]));
    }
  }
  out.tolerance = tol * (1.0 + magnitude);
  out.is_berwald = out.residual <= out.tolerance;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (const auto& g : gammas) s += g(i, j, k);
        out.gamma(i, j, k) = s / static_cast<double>(gammas.size());
      }
  return out;
}

BerwaldDetection berwald_detect(const FinslerFunction& F, std::span<const double> x, double tol) {
  return berwald_detect(F, x, sample_directions(F, x, F.dim() + 3), tol);
}

FinslerCurvature finsler_curvature(const FinslerFunction& F, std::span<const double> x, std::span<const double> y) {
  const int n = F.dim();
  const auto p = jet_pipeline(F, x, y, 4);
  FinslerCurvature out;
  out.R = Tensor3<double>(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out.R(i, j, k) = scalar(p.R(i, j, k));
  out.ric = scalar(p.ric);

  // Nested path: inner jets of order 4 in (x, y), outer jets of order 2 in a
  // further shift of y. The outer Hessian of Ric is R_ij.
  const auto inner = JetSpace::get({2 * n, 4});
  const auto outer = JetSpace::get({n, 2});
  std::vector<NestedJet> xs;
  std::vector<NestedJet> ys;
  for (int i = 0; i < n; ++i) {
    xs.emplace_back(Jet::variable(inner, i, x[static_cast<std::size_t>(i)]));
    ys.push_back(NestedJet::variable(outer, i, Jet::variable(inner, n + i, y[static_cast<std::size_t>(i)])));
  }
  const NestedJet f2 = F.f2(std::span<const NestedJet>(xs), std::span<const NestedJet>(ys));
  const auto q = run_pipeline<NestedJet>(f2, std::span<const NestedJet>(ys), n, 4);
  out.ric_nested = scalar(q.ric);
  out.ricci_tensor = Matrix<double>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.ricci_tensor(i, j) = 0.5 * primal(partial(q.ric, {i, j}));
  return out;
}

}  // namespace mkropina
