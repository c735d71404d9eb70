#include "mkropina/kropina.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <random>

namespace mkropina {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

PointList default_probes(int n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  PointList out(20, std::vector<double>(idx(n)));
  for (auto& p : out)
    for (auto& v : p) v = dist(rng);
  return out;
}

// Pointwise data in double precision.
struct Local {
  int n = 0;
  Matrix<double> a;
  Matrix<double> ainv;
  std::vector<double> b;
  std::vector<double> b_up;
  double b2 = 0.0;
  Matrix<double> D;  // nabla_i b_j
  Matrix<double> A;
  Matrix<double> S;
};

Local local_data(const MKropinaSpace& space, std::span<const double> p) {
  Local l;
  l.n = space.dim();
  if (static_cast<int>(p.size()) != l.n) throw ConfigError("point has the wrong dimension");
  l.a = metric_at(space.metric(), p);
  l.ainv = inverse(l.a);
  l.b = space.one_form().evaluate(p);
  l.b_up.assign(idx(l.n), 0.0);
  for (int i = 0; i < l.n; ++i)
    for (int k = 0; k < l.n; ++k) l.b_up[idx(i)] += l.ainv(i, k) * l.b[idx(k)];
  for (int i = 0; i < l.n; ++i) l.b2 += l.b[idx(i)] * l.b_up[idx(i)];
  l.D = covariant_derivative_oneform(space.metric(), space.one_form(), p);
  l.A = Matrix<double>(l.n, l.n);
  l.S = Matrix<double>(l.n, l.n);
  for (int i = 0; i < l.n; ++i)
    for (int j = 0; j < l.n; ++j) {
      l.A(i, j) = 0.5 * (l.D(i, j) - l.D(j, i));
      l.S(i, j) = 0.5 * (l.D(i, j) + l.D(j, i));
    }
  return l;
}

// Coefficients of the linear map f -> m (f.b^) a_ij + b_j f_i - m b_i f_j,
// row (i, j), column k.
template <class S>
std::vector<std::vector<S>> general_system(const Matrix<S>& a, const std::vector<S>& b, const std::vector<S>& b_up,
                                           double m) {
  const int n = a.rows();
  std::vector<std::vector<S>> L(idx(n * n), std::vector<S>(idx(n), S(0.0)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      auto& row = L[idx(i * n + j)];
      for (int k = 0; k < n; ++k) row[idx(k)] = a(i, j) * b_up[idx(k)] * m;
      row[idx(i)] += b[idx(j)];
      row[idx(j)] -= b[idx(i)] * m;
    }
  return L;
}

struct LeastSquares {
  std::vector<double> x;
  double residual = 0.0;
};

LeastSquares solve_least_squares(const std::vector<std::vector<double>>& L, const std::vector<double>& rhs) {
  const auto rows = static_cast<Eigen::Index>(L.size());
  const auto cols = static_cast<Eigen::Index>(L.empty() ? 0 : L[0].size());
  Eigen::MatrixXd M(rows, cols);
  Eigen::VectorXd r(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    r(i) = rhs[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = L[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const Eigen::VectorXd x = M.completeOrthogonalDecomposition().solve(r);
  LeastSquares out;
  out.x.assign(x.data(), x.data() + x.size());
  out.residual = (M * x - r).cwiseAbs().maxCoeff();
  return out;
}

std::vector<double> flatten(const Matrix<double>& m) {
  std::vector<double> out;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

double closed_residual_at(const MKropinaSpace& space, std::span<const double> p) {
  const auto x = seed_point(p, 1);
  const auto b = space.one_form().evaluate(std::span<const Jet>(x));
  double r = 0.0;
  const int n = space.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) r = std::max(r, std::abs(partial(b[idx(j)], {i}) - partial(b[idx(i)], {j})));
  return r;
}

// Jet data for the affine connection: everything carries `order` derivatives
// except a, b which carry one more.
struct JetLocal {
  int n = 0;
  Matrix<Jet> a;
  Matrix<Jet> ainv;
  Tensor3<Jet> levi_civita;
  std::vector<Jet> b;
  std::vector<Jet> b_up;
  Matrix<Jet> D;
};

JetLocal jet_local(const MKropinaSpace& space, std::span<const double> p, int order) {
  JetLocal l;
  l.n = space.dim();
  const auto x = seed_point(p, order + 1);
  l.a = space.metric().evaluate(std::span<const Jet>(x));
  l.ainv = inverse(l.a);
  l.levi_civita = christoffel_from_metric(l.a);
  l.b = space.one_form().evaluate(std::span<const Jet>(x));
  l.b_up.assign(idx(l.n), Jet(0.0));
  for (int i = 0; i < l.n; ++i)
    for (int k = 0; k < l.n; ++k) l.b_up[idx(i)] += l.ainv(i, k) * l.b[idx(k)];
  l.D = Matrix<Jet>(l.n, l.n);
  for (int i = 0; i < l.n; ++i)
    for (int j = 0; j < l.n; ++j) {
      Jet v = derivative(l.b[idx(j)], i);
      for (int k = 0; k < l.n; ++k) v -= l.levi_civita(k, i, j) * l.b[idx(k)];
      l.D(i, j) = v;
    }
  return l;
}

// Gamma^l_ij = LC + m (a_ij f^l - delta^l_j f_i - delta^l_i f_j).
Tensor3<Jet> connection_from_f(const JetLocal& l, const std::vector<Jet>& f, double m) {
  const int n = l.n;
  std::vector<Jet> f_up(idx(n), Jet(0.0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) f_up[idx(i)] += l.ainv(i, k) * f[idx(k)];
  Tensor3<Jet> G = l.levi_civita;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet d = l.a(i, j) * f_up[idx(k)];
        if (k == j) d -= f[idx(i)];
        if (k == i) d -= f[idx(j)];
        G(k, i, j) += d * m;
      }
  return G;
}

AffineCurvature curvature_summary(const Tensor3<Jet>& gamma) {
  const Curvature c = curvature_from_connection(gamma);
  const int n = gamma.dim();
  AffineCurvature out{c.riemann, c.ricci, Matrix<double>(n, n), 0.0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.skew(i, j) = 0.5 * (c.ricci(i, j) - c.ricci(j, i));
      out.skew_max = std::max(out.skew_max, std::abs(out.skew(i, j)));
    }
  return out;
}

void require_not_one(double m) {
  if (m == 1.0) throw PreconditionError("m = 1: the closed-form condition divides by 1 - m");
}

Tensor3<double> values(const Tensor3<Jet>& t) {
  const int n = t.dim();
  Tensor3<double> out(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(k, i, j) = t(k, i, j).value();
  return out;
}

double quadratic(const Matrix<double>& M, std::span<const double> y) {
  double s = 0.0;
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j) s += M(i, j) * y[idx(i)] * y[idx(j)];
  return s;
}

std::vector<double> levi_civita_spray(const MetricField& g, std::span<const double> x, std::span<const double> y) {
  return spray_berwald(christoffel(g, x), y);
}

}  // namespace

MKropinaSpace::MKropinaSpace(MetricFieldPtr a, OneFormField b, double m, const PointList& probes)
    : a_(std::move(a)), b_(std::move(b)), m_(m) {
  if (!a_) throw ConfigError("m-Kropina space needs a metric");
  if (a_->dim() <= 2) throw ConfigError("m-Kropina spaces need dimension n > 2");
  if (b_.dim() != a_->dim()) throw ConfigError("one-form and metric dimensions differ");
  if (!std::isfinite(m_)) throw ConfigError("exponent m must be finite");
  if (m_ == 1.0) {
    const PointList pts = probes.empty() ? default_probes(a_->dim()) : probes;
    bool all_null = true;
    int evaluated = 0;
    for (const auto& p : pts) {
      Matrix<double> ainv;
      try {
        ainv = inverse(metric_at(*a_, p));
      } catch (const Error&) {
        continue;
      }
      ++evaluated;
      const auto bv = b_.evaluate(std::span<const double>(p));
      double b2 = 0.0;
      for (int i = 0; i < a_->dim(); ++i)
        for (int j = 0; j < a_->dim(); ++j) b2 += ainv(i, j) * bv[idx(i)] * bv[idx(j)];
      if (std::abs(b2) > kValidityTol) all_null = false;
    }
    if (evaluated > 0 && all_null) {
      throw ConfigError("m = 1 with a null one-form does not define a Finsler space (det g vanishes identically)");
    }
  }
  finsler_ = std::make_shared<MKropinaFinsler>(a_, b_, m_);
}

MetricFieldPtr kundt_metric(const std::vector<std::string>& coordinates, const Expr& H, const std::vector<Expr>& W,
                            const std::vector<std::vector<Expr>>& h) {
  const int n = static_cast<int>(coordinates.size());
  if (n < 3) throw ConfigError("Kundt form needs at least three coordinates (u, v, x^3..)");
  const int k = n - 2;
  if (static_cast<int>(W.size()) != k) throw ConfigError("W needs " + std::to_string(k) + " components");
  if (static_cast<int>(h.size()) != k) throw ConfigError("h needs " + std::to_string(k) + " rows");
  for (const auto& row : h) {
    if (static_cast<int>(row.size()) != k) throw ConfigError("h rows need " + std::to_string(k) + " entries");
  }
  std::vector<std::vector<Expr>> comp(idx(n), std::vector<Expr>(idx(n), Expr::constant(0.0)));
  comp[0][0] = H;
  comp[0][1] = comp[1][0] = Expr::constant(-1.0);
  for (int a = 0; a < k; ++a) {
    const Expr half = Expr::binary(BinaryOp::Mul, Expr::constant(0.5), W[idx(a)]);
    comp[0][idx(a + 2)] = comp[idx(a + 2)][0] = half;
    for (int c = 0; c < k; ++c) {
      if (!(h[idx(a)][idx(c)] == h[idx(c)][idx(a)])) throw ConfigError("h must be symmetric");
      comp[idx(a + 2)][idx(c + 2)] = h[idx(a)][idx(c)];
    }
  }
  return std::make_shared<ExprMetric>(coordinates, comp);
}

KundtForm::KundtForm(std::vector<std::string> coordinates, Expr H, std::vector<Expr> W,
                     std::vector<std::vector<Expr>> h)
    : coordinates_(std::move(coordinates)), H_(std::move(H)) {
  if (coordinates_.size() < 3) throw ConfigError("Kundt form needs at least three coordinates (u, v, x^3..)");
  const std::string& v = coordinates_[1];
  for (std::size_t a = 0; a < W.size(); ++a) {
    if (W[a].uses(v)) throw ConfigError("W[" + std::to_string(a) + "] depends on " + v + "; W must not depend on v");
  }
  for (std::size_t a = 0; a < h.size(); ++a)
    for (std::size_t c = 0; c < h[a].size(); ++c) {
      if (h[a][c].uses(v)) {
        throw ConfigError("h[" + std::to_string(a) + "][" + std::to_string(c) + "] depends on " + v +
                          "; h must not depend on v");
      }
    }
  metric_ = kundt_metric(coordinates_, H_, W, h);
  H_ = H_.bind(coordinates_);
}

KundtForm KundtForm::make(std::vector<std::string> coordinates, const std::string& H, const std::vector<std::string>& W,
                          const std::vector<std::vector<std::string>>& h) {
  std::vector<Expr> w;
  for (const auto& s : W) w.push_back(Expr::parse(s));
  std::vector<std::vector<Expr>> hh;
  for (const auto& row : h) {
    auto& r = hh.emplace_back();
    for (const auto& s : row) r.push_back(Expr::parse(s));
  }
  return KundtForm(std::move(coordinates), Expr::parse(H), std::move(w), std::move(hh));
}

OneFormField KundtForm::one_form() const {
  std::vector<Expr> c(coordinates_.size(), Expr::constant(0.0));
  c[0] = Expr::constant(1.0);
  return OneFormField(coordinates_, c);
}

Validity validate(const MKropinaSpace& space, const PointList& points) {
  if (points.size() < 20) throw ConfigError("validity checks need at least 20 sample points");
  Validity v;
  for (const auto& p : points) {
    const auto l = local_data(space, p);
    v.closed_residual = std::max(v.closed_residual, closed_residual_at(space, p));
    v.null_residual = std::max(v.null_residual, std::abs(l.b2));
  }
  v.closed = v.closed_residual <= kValidityTol;
  v.null = v.null_residual <= kValidityTol;
  return v;
}

ClosedBerwald berwald_condition_closed(const MKropinaSpace& space, std::span<const double> p) {
  require_not_one(space.m());
  const auto l = local_data(space, p);
  const double m = space.m();
  const int n = l.n;
  double num = 0.0;
  double den = 0.0;
  double scale = 0.0;
  Matrix<double> T(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      T(i, j) = m * l.b2 * l.a(i, j) + (1.0 - m) * l.b[idx(i)] * l.b[idx(j)];
      num += l.D(j, i) * T(i, j);
      den += T(i, j) * T(i, j);
      scale = std::max(scale, std::abs(l.D(i, j)));
    }
  ClosedBerwald out;
  out.c = den > 0.0 ? num / den : 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.residual = std::max(out.residual, std::abs(l.D(j, i) - out.c * T(i, j)));
  out.tolerance = kStructuralTol * (1.0 + scale);
  out.holds = out.residual <= out.tolerance;
  return out;
}

const char* to_string(BerwaldKind k) {
  switch (k) {
    case BerwaldKind::Parallel: return "parallel";
    case BerwaldKind::ClosedNullWithC: return "closed-null-with-c";
    case BerwaldKind::GeneralWithF: return "general-with-f";
    case BerwaldKind::NotBerwald: return "not-berwald";
  }
  return "?";
}

BerwaldCertificate berwald_condition_general(const MKropinaSpace& space, std::span<const double> p) {
  const auto l = local_data(space, p);
  const double m = space.m();
  const auto L = general_system(l.a, l.b, l.b_up, m);
  const auto ls = solve_least_squares(L, flatten(l.D));
  BerwaldCertificate cert;
  cert.f = ls.x;
  cert.residual = ls.residual;
  const double scale = max_abs(l.D);
  cert.tolerance = kStructuralTol * (1.0 + scale);
  if (scale <= cert.tolerance) {
    cert.kind = BerwaldKind::Parallel;
    cert.f.assign(idx(l.n), 0.0);
    cert.c = 0.0;
    cert.residual = scale;
    return cert;
  }
  if (cert.residual > cert.tolerance) {
    cert.kind = BerwaldKind::NotBerwald;
    return cert;
  }
  cert.kind = BerwaldKind::GeneralWithF;
  const bool closed = closed_residual_at(space, p) <= kValidityTol;
  const bool null = std::abs(l.b2) <= kValidityTol;
  if (closed && null && m != 1.0) {
    // f must be proportional to b; the factor is the c of the closed condition.
    const auto cc = berwald_condition_closed(space, p);
    double dev = 0.0;
    for (int i = 0; i < l.n; ++i) dev = std::max(dev, std::abs(cert.f[idx(i)] - cc.c * l.b[idx(i)]));
    if (cc.holds && dev <= kCrossModuleTol * (1.0 + std::abs(cc.c))) {
      cert.kind = BerwaldKind::ClosedNullWithC;
      cert.c = cc.c;
    }
  }
  return cert;
}

Tensor3<Jet> affine_connection_jet(const MKropinaSpace& space, std::span<const double> p, int order) {
  if (order < 0 || order > 2) throw ConfigError("affine connection jets support order 0..2");
  const double m = space.m();
  require_not_one(m);
  const auto cert = berwald_condition_general(space, p);
  if (!cert.positive()) {
    throw PreconditionError("not Berwald at this point (residual " + std::to_string(cert.residual) + ")");
  }
  const auto l = jet_local(space, p, order);
  const int n = l.n;
  std::vector<Jet> f(idx(n), Jet(0.0));
  if (cert.kind == BerwaldKind::ClosedNullWithC) {
    Jet num(0.0);
    Jet den(0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Jet T = (1.0 - m) * (l.b[idx(i)] * l.b[idx(j)]);
        num += l.D(j, i) * T;
        den += T * T;
      }
    const Jet c = num / den;
    for (int i = 0; i < n; ++i) f[idx(i)] = c * l.b[idx(i)];
  } else {
    // Normal equations L^T L f = L^T D in jet arithmetic.
    const auto L = general_system(l.a, l.b, l.b_up, m);
    Matrix<Jet> M(n, n);
    std::vector<Jet> r(idx(n), Jet(0.0));
    for (int k = 0; k < n; ++k) {
      for (int q = 0; q < n; ++q) {
        Jet s(0.0);
        for (const auto& row : L) s += row[idx(k)] * row[idx(q)];
        M(k, q) = s;
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r[idx(k)] += L[idx(i * n + j)][idx(k)] * l.D(i, j);
    }
    const double det = determinant(primal_matrix(M));
    double diag = 1.0;
    for (int k = 0; k < n; ++k) diag *= std::max(std::abs(M(k, k).value()), 1e-300);
    if (!(std::abs(det) > 1e-12 * diag)) {
      if (cert.kind == BerwaldKind::Parallel) return l.levi_civita;
      throw NumericalError("the Berwald one-form f is not uniquely determined at this point");
    }
    const Matrix<Jet> Minv = inverse(M, 0.0);
    for (int k = 0; k < n; ++k)
      for (int q = 0; q < n; ++q) f[idx(k)] += Minv(k, q) * r[idx(q)];
  }
  return connection_from_f(l, f, m);
}

Tensor3<double> affine_connection(const MKropinaSpace& space, std::span<const double> p) {
  return values(affine_connection_jet(space, p, 0));
}

Tensor3<Jet> affine_connection_jet(const KundtForm& kundt, double m, std::span<const double> p, int order) {
  require_not_one(m);
  if (order < 0 || order > 2) throw ConfigError("affine connection jets support order 0..2");
  const int n = kundt.dim();
  if (static_cast<int>(p.size()) != n) throw ConfigError("point has the wrong dimension");
  const auto x = seed_point(p, order + 1);
  const Matrix<Jet> a = kundt.metric()->evaluate(std::span<const Jet>(x));
  Tensor3<Jet> G = christoffel_from_metric(a);
  const Jet dvH = derivative(kundt.H().evaluate(std::span<const Jet>(x)), 1) * (m / (2.0 * (1.0 - m)));
  // u is coordinate 0, v is coordinate 1.
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet pattern = (k == 1) ? a(i, j) : Jet(0.0);
        if (k == j && i == 0) pattern += 1.0;
        if (k == i && j == 0) pattern += 1.0;
        G(k, i, j) += dvH * pattern;
      }
  return G;
}

Tensor3<double> affine_connection(const KundtForm& kundt, double m, std::span<const double> p) {
  return values(affine_connection_jet(kundt, m, p, 0));
}

AffineCurvature affine_curvature_ricci(const MKropinaSpace& space, std::span<const double> p) {
  return curvature_summary(affine_connection_jet(space, p, 1));
}

AffineCurvature affine_curvature_ricci(const KundtForm& kundt, double m, std::span<const double> p) {
  return curvature_summary(affine_connection_jet(kundt, m, p, 1));
}

Matrix<double> ricci_skew_closed_form(const KundtForm& kundt, double m, std::span<const double> p) {
  require_not_one(m);
  const int n = kundt.dim();
  const auto x = seed_point(p, 2);
  const Jet H = kundt.H().evaluate(std::span<const Jet>(x));
  const double k = -(m * n) / (4.0 * (1.0 - m));
  Matrix<double> out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      if (i == 0) v += partial(H, {j, 1});
      if (j == 0) v -= partial(H, {i, 1});
      out(i, j) = k * v;
    }
  return out;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Metrizable: return "metrizable";
    case Verdict::NotMetrizable: return "not-metrizable";
    case Verdict::NotBerwald: return "not-berwald";
    case Verdict::Undetermined: return "undetermined";
  }
  return "?";
}

MetrizabilityReport metrizability_verdict(const KundtForm& kundt, double m, const PointList& grid) {
  if (grid.empty()) throw ConfigError("metrizability verdict needs a non-empty sample grid");
  require_not_one(m);
  const int n = kundt.dim();
  MetrizabilityReport r;
  for (const auto& p : grid) {
    const auto x = seed_point(p, 2);
    const Jet H = kundt.H().evaluate(std::span<const Jet>(x));
    r.max_dvH = std::max(r.max_dvH, std::abs(partial(H, {1})));
    r.s1 = std::max(r.s1, std::abs(partial(H, {1, 1})));
    for (int a = 2; a < n; ++a) r.s2 = std::max(r.s2, std::abs(partial(H, {1, a})));
    const auto curv = affine_curvature_ricci(kundt, m, p);
    const auto closed = ricci_skew_closed_form(kundt, m, p);
    r.ricci_skew_max = std::max(r.ricci_skew_max, curv.skew_max);
    r.skew_closed_form_deviation = std::max(r.skew_closed_form_deviation, max_abs_difference(curv.skew, closed));
  }
  r.tolerance = kStructuralTol * (1.0 + r.max_dvH);
  r.verdict = std::max(r.s1, r.s2) <= r.tolerance ? Verdict::Metrizable : Verdict::NotMetrizable;
  if (r.verdict == Verdict::Metrizable) {
    for (const auto& p : grid) {
      const auto x = seed_point(p, 1);
      r.phi_samples.push_back({p[0], partial(kundt.H().evaluate(std::span<const Jet>(x)), {1})});
    }
    std::sort(r.phi_samples.begin(), r.phi_samples.end(),
              [](const PhiSample& a, const PhiSample& b) { return a.u < b.u; });
  }
  return r;
}

ConformalFactor::ConformalFactor(const KundtForm& kundt, double m, double u0, std::vector<double> reference,
                                 double scale)
    : H_(kundt.H()), coordinates_(kundt.coordinates()), k_(scale * m / (1.0 - m)), u0_(u0),
      reference_(std::move(reference)) {
  require_not_one(m);
  if (reference_.empty()) reference_.assign(coordinates_.size(), 0.0);
  if (reference_.size() != coordinates_.size()) throw ConfigError("reference point has the wrong dimension");
  if (!std::isfinite(u0_)) throw ConfigError("u0 must be finite");
}

double ConformalFactor::phi(double u) const {
  auto p = reference_;
  p[0] = u;
  const auto x = seed_point(p, 1);
  return partial(H_.evaluate(std::span<const Jet>(x)), {1});
}

double ConformalFactor::psi(double u) const {
  if (u == u0_) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const auto f = [this](double s) { return phi(s); };
  double error = 0.0;
  double l1 = 0.0;
  // A single panel first: each panel's error estimate has an absolute floor
  // near 1e-15, so on short intervals adaptive refinement only adds floors up.
  double integral = GK::integrate(f, u0_, u, 0, 1e-12, &error, &l1);
  if (!(error <= 1e-12 * std::max(1.0, l1))) integral = GK::integrate(f, u0_, u, 15, 1e-12, &error, &l1);
  if (!std::isfinite(integral) || error > 1e-12 * std::max(1.0, l1)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "quadrature of phi did not converge on [%.17g, %.17g] (value %.3e, error estimate %.3e)",
                  u0_, u, integral, error);
    throw NumericalError(buf);
  }
  return k_ * integral;
}

std::vector<double> ConformalFactor::psi_series(double u, int order) const {
  if (order < 0 || order > kMaxJetOrder) throw ConfigError("psi series order out of range");
  std::vector<double> d(idx(order + 1), 0.0);
  d[0] = psi(u);
  if (order == 0) return d;
  auto p = reference_;
  p[0] = u;
  const auto x = seed_point(p, order);
  const Jet dvH = derivative(H_.evaluate(std::span<const Jet>(x)), 1);
  // psi^(k) = k_ phi^(k-1), phi^(j) = d_u^j d_v H.
  double fact = 1.0;
  std::vector<int> us;
  for (int k = 1; k <= order; ++k) {
    fact *= k;
    d[idx(k)] = k_ * partial(dvH, std::span<const int>(us)) / fact;
    us.push_back(0);
  }
  return d;
}

ConformalMetric::ConformalMetric(MetricFieldPtr base, ConformalFactor factor)
    : MetricField(base->coordinates(), base->declared_signature()), base_(std::move(base)), factor_(std::move(factor)) {}

Matrix<double> ConformalMetric::evaluate(std::span<const double> x) const {
  Matrix<double> a = base_->evaluate(x);
  const double f = factor_.factor(x[0]);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) *= f;
  return a;
}

Matrix<Jet> ConformalMetric::evaluate(std::span<const Jet> x) const {
  Matrix<Jet> a = base_->evaluate(x);
  const Jet& u = x[0];
  Jet f;
  if (u.is_constant()) {
    f = Jet(factor_.factor(u.value()));
  } else {
    f = exp(compose(u, factor_.psi_series(u.value(), u.order())));
  }
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) a(i, j) = a(i, j) * f;
  return a;
}

Matrix<NestedJet> ConformalMetric::evaluate(std::span<const NestedJet>) const {
  throw ConfigError("conformal metrics are not evaluable on nested jets");
}

std::shared_ptr<const ConformalMetric> metrize_candidate(const KundtForm& kundt, double m, double u0,
                                                         std::vector<double> reference, double scale) {
  return std::make_shared<ConformalMetric>(kundt.metric(), ConformalFactor(kundt, m, u0, std::move(reference), scale));
}

std::shared_ptr<const ConformalMetric> metrize(const KundtForm& kundt, double m, const MetrizabilityReport& report,
                                               double u0, std::vector<double> reference) {
  if (report.verdict != Verdict::Metrizable) {
    throw PreconditionError(std::string("geometry is ") + to_string(report.verdict) +
                            " (affine Ricci skew " + std::to_string(report.ricci_skew_max) + ")");
  }
  return metrize_candidate(kundt, m, u0, std::move(reference), 1.0);
}

MetrizationCheck verify_metrization(const MetricField& metric, const KundtForm& kundt, double m,
                                    const PointList& points) {
  MetrizationCheck out;
  double magnitude = 0.0;
  for (const auto& p : points) {
    const auto target = affine_connection(kundt, m, p);
    magnitude = std::max(magnitude, max_abs(target));
    out.deviation = std::max(out.deviation, max_abs_difference(christoffel(metric, p), target));
  }
  out.tolerance = kCrossModuleTol * (1.0 + magnitude);
  out.pass = out.deviation <= out.tolerance;
  return out;
}

std::vector<double> spray_berwald(const Tensor3<double>& gamma, std::span<const double> y) {
  const int n = gamma.dim();
  std::vector<double> G(idx(n), 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) G[idx(k)] += gamma(k, i, j) * y[idx(i)] * y[idx(j)];
  return G;
}

namespace {

struct SprayTerms {
  Local l;
  double alpha2 = 0.0;
  double beta = 0.0;
  double denom = 0.0;  // (m - 1) beta^2 - m b^2 alpha^2
  double Syy = 0.0;
  std::vector<double> base;  // Levi-Civita part
};

SprayTerms spray_terms(const MKropinaSpace& space, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(y.size()) != space.dim()) throw ConfigError("direction has the wrong dimension");
  SprayTerms t;
  t.l = local_data(space, x);
  const double m = space.m();
  t.alpha2 = quadratic(t.l.a, y);
  for (int i = 0; i < t.l.n; ++i) t.beta += t.l.b[idx(i)] * y[idx(i)];
  t.denom = (m - 1.0) * t.beta * t.beta - m * t.l.b2 * t.alpha2;
  const double scale = t.beta * t.beta + std::abs(m * t.l.b2 * t.alpha2);
  if (t.beta == 0.0 || !(std::abs(t.denom) > 1e-14 * scale)) {
    throw DomainError("spray denominator vanishes at this (x, y)");
  }
  t.Syy = quadratic(t.l.S, y);
  t.base = levi_civita_spray(space.metric(), x, y);
  return t;
}

}  // namespace

std::vector<double> spray_generic(const MKropinaSpace& space, std::span<const double> x, std::span<const double> y) {
  const auto t = spray_terms(space, x, y);
  const auto& l = t.l;
  const int n = l.n;
  const double m = space.m();

  // A(i, j) = (1+m)(b_j f_i - b_i f_j), solved for f by minimum-norm least squares.
  std::vector<std::vector<double>> L(idx(n * n), std::vector<double>(idx(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      L[idx(i * n + j)][idx(i)] += (1.0 + m) * l.b[idx(j)];
      L[idx(i * n + j)][idx(j)] -= (1.0 + m) * l.b[idx(i)];
    }
  const auto ls = solve_least_squares(L, flatten(l.A));
  if (ls.residual > kStructuralTol * (1.0 + max_abs(l.A))) {
    throw PreconditionError("antisymmetric part of nabla b is not of the form b_j f_i - b_i f_j");
  }
  const auto& f = ls.x;
  std::vector<double> f_up(idx(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) f_up[idx(i)] += l.ainv(i, k) * f[idx(k)];

  double bf = 0.0;  // b^i f_i
  double yf = 0.0;  // y^i f_i
  for (int i = 0; i < n; ++i) {
    bf += l.b_up[idx(i)] * f[idx(i)];
    yf += y[idx(i)] * f[idx(i)];
  }
  const double a2 = t.alpha2;
  const double beta = t.beta;
  const double second = (2.0 * (m * a2 * bf - (m - 1.0) * beta * yf) - t.Syy) / (2.0 * t.denom);
  const double third = (2.0 * m * a2 * (l.b2 * yf - beta * bf) + beta * t.Syy) / t.denom;
  std::vector<double> G = t.base;
  for (int k = 0; k < n; ++k) {
    G[idx(k)] += 2.0 * (m * a2 * f_up[idx(k)] + m * a2 * l.b_up[idx(k)] * second + m * y[idx(k)] * third);
  }
  return G;
}

std::vector<double> spray_decomposed(const MKropinaSpace& space, std::span<const double> x,
                                     std::span<const double> y) {
  const double m = space.m();
  if (m == -1.0) throw PreconditionError("m = -1: the decomposed spray divides by m + 1");
  const auto t = spray_terms(space, x, y);
  const auto& l = t.l;
  const int n = l.n;
  const double a2 = t.alpha2;
  const double beta = t.beta;
  // y^i A^k_i with A^k_i = a^kl A_li, and b^i y^j A_ij.
  std::vector<double> yA(idx(n), 0.0);
  double bAy = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int q = 0; q < n; ++q) yA[idx(k)] += y[idx(i)] * l.ainv(k, q) * l.A(q, i);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) bAy += l.b_up[idx(i)] * y[idx(j)] * l.A(i, j);
  const double inner = beta * (m + 1.0) * t.Syy - 2.0 * m * a2 * bAy;
  std::vector<double> G = t.base;
  for (int k = 0; k < n; ++k) {
    G[idx(k)] += 2.0 * (yA[idx(k)] * a2 * m / (beta * (m + 1.0)) -
                        l.b_up[idx(k)] * a2 * m * inner / (2.0 * beta * (m + 1.0) * t.denom) +
                        y[idx(k)] * m * inner / ((m + 1.0) * t.denom));
  }
  return G;
}

M1Check check_m1_nonnull(const MKropinaSpace& space, std::span<const double> p) {
  if (space.m() != 1.0) throw PreconditionError("check applies to m = 1 only");
  const auto l = local_data(space, p);
  if (std::abs(l.b2) <= kValidityTol) {
    throw PreconditionError("b^2 = 0 with m = 1 does not define a Finsler space");
  }
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < l.n; ++i)
    for (int j = 0; j < l.n; ++j) {
      num += l.S(i, j) * l.a(i, j);
      den += l.a(i, j) * l.a(i, j);
    }
  M1Check out;
  out.q = num / den;
  for (int i = 0; i < l.n; ++i)
    for (int j = 0; j < l.n; ++j) out.residual = std::max(out.residual, std::abs(l.S(i, j) - out.q * l.a(i, j)));
  out.berwald_possible = out.residual <= kStructuralTol;
  return out;
}

double det_g_ratio(double m, int n, double alpha2, double beta, double b2) {
  return std::pow(1.0 + m, n - 1) * std::pow(alpha2, n * m) * std::pow(std::abs(beta), -2.0 * (1.0 + n * m)) *
         ((1.0 - m) * beta * beta + m * b2 * alpha2);
}

}  // namespace mkropina
