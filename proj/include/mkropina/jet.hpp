#pragma once

// Truncated multivariate Taylor arithmetic ("jets").
//
// A jet of order p over N variables stores the Taylor coefficients of a
// smooth function at an expansion point for every monomial of total degree
// <= p, in graded-lexicographic order. Because the layout is graded, the
// coefficients of the order-q truncation (q < p) are a prefix of the order-p
// coefficients; that is what lets jets of different orders mix freely (the
// result carries the smaller order).
//
// BasicJet<T> is generic in its coefficient ring so that a jet may itself
// carry jets as coefficients (NestedJet). The nested form is how quantities
// of total differential order above kMaxJetOrder are reached without ever
// raising the order of a single jet.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "mkropina/errors.hpp"

namespace mkropina {

inline constexpr int kMaxJetOrder = 4;

struct JetConfig {
  int num_vars = 2;
  int order = 1;

  // Throws ConfigError unless num_vars >= 2 and order is in [1, kMaxJetOrder].
  void validate() const;
};

// Immutable multiplication / differentiation tables for one (num_vars, order)
// pair. Shared between all jets of that shape.
class JetSpace {
 public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  static std::shared_ptr<const JetSpace> get(const JetConfig& config);

  int num_vars() const noexcept { return num_vars_; }
  int max_order() const noexcept { return max_order_; }

  // Number of monomials of total degree <= order.
  std::size_t size(int order) const { return degree_offsets_[static_cast<std::size_t>(order) + 1]; }

  int degree(std::size_t idx) const { return degrees_[idx]; }
  int exponent(std::size_t idx, int var) const {
    return exponents_[idx * static_cast<std::size_t>(num_vars_) + static_cast<std::size_t>(var)];
  }
  double factorial(std::size_t idx) const { return factorials_[idx]; }

  // Index of the monomial idx * x_var, or -1 when its degree exceeds max_order.
  std::int32_t raise(int var, std::size_t idx) const {
    return raise_[static_cast<std::size_t>(var) * size(max_order_) + idx];
  }

  // Index of the monomial given as a list of variable indices, e.g. {0, 0, 1}
  // for x0^2 x1. Throws OrderExceededError when the list is longer than
  // max_order and ConfigError for out-of-range variables.
  std::size_t index_of(std::span<const int> vars) const;

  // All (lhs, rhs, out) triples with deg(out) <= order, sorted by out.
  std::span<const Product> products(int order) const {
    return {products_.data(), product_offsets_[static_cast<std::size_t>(order) + 1]};
  }

 private:
  JetSpace(int num_vars, int order);

  int num_vars_;
  int max_order_;
  std::vector<std::size_t> degree_offsets_;
  std::vector<std::uint8_t> exponents_;
  std::vector<int> degrees_;
  std::vector<double> factorials_;
  std::vector<std::int32_t> raise_;
  std::vector<Product> products_;
  std::vector<std::size_t> product_offsets_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

template <class T>
class BasicJet;

inline double primal(double v) noexcept { return v; }
template <class T>
double primal(const BasicJet<T>& j) {
  return primal(j.value());
}

// True when the value carries no derivative information at all.
inline bool is_constant_valued(double) noexcept { return true; }
template <class T>
bool is_constant_valued(const BasicJet<T>& j);

inline constexpr int kConstantOrder = 1 << 20;

template <class T>
class BasicJet {
 public:
  using value_type = T;

  BasicJet() : coeffs_(1, T(0.0)) {}
  BasicJet(const T& value) : coeffs_(1, value) {}  // NOLINT: constants convert implicitly
  template <class D>
    requires(std::is_same_v<D, double> && !std::is_same_v<T, double>)
  BasicJet(D value) : coeffs_(1, T(value)) {}  // NOLINT

  BasicJet(JetSpacePtr space, int order, std::vector<T> coeffs)
      : space_(std::move(space)), order_(order), coeffs_(std::move(coeffs)) {}

  // x_var expanded around `value`. order < 0 means the space's max order.
  static BasicJet variable(const JetSpacePtr& space, int var, const T& value, int order = -1) {
    if (var < 0 || var >= space->num_vars()) {
      throw ConfigError("jet variable index " + std::to_string(var) + " out of range");
    }
    const int p = order < 0 ? space->max_order() : order;
    std::vector<T> c(space->size(p), T(0.0));
    c[0] = value;
    if (p >= 1) c[1 + static_cast<std::size_t>(var)] = T(1.0);
    return BasicJet(space, p, std::move(c));
  }

  bool is_constant() const noexcept { return space_ == nullptr; }
  int order() const noexcept { return space_ ? order_ : kConstantOrder; }
  const JetSpacePtr& space() const noexcept { return space_; }
  const T& value() const noexcept { return coeffs_[0]; }
  std::span<const T> coefficients() const noexcept { return coeffs_; }
  std::vector<T>& mutable_coefficients() noexcept { return coeffs_; }

  BasicJet truncated(int order) const {
    if (is_constant() || order >= order_) return *this;
    return BasicJet(space_, order, std::vector<T>(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(space_->size(order))));
  }

  // The jet with its value coefficient replaced by zero.
  BasicJet nilpotent_part() const {
    BasicJet r = *this;
    r.coeffs_[0] = T(0.0);
    return r;
  }

  BasicJet operator-() const {
    BasicJet r = *this;
    for (auto& c : r.coeffs_) c = -c;
    return r;
  }

  BasicJet& operator+=(const BasicJet& o) { return accumulate(o, 1.0); }
  BasicJet& operator-=(const BasicJet& o) { return accumulate(o, -1.0); }
  BasicJet& operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
  }
  BasicJet& operator/=(double s) {
    if (s == 0.0) throw DomainError("division by zero");
    for (auto& c : coeffs_) c /= s;
    return *this;
  }

  friend BasicJet operator+(BasicJet a, const BasicJet& b) { return a += b; }
  friend BasicJet operator-(BasicJet a, const BasicJet& b) { return a -= b; }
  friend BasicJet operator+(BasicJet a, double s) {
    a.coeffs_[0] += s;
    return a;
  }
  friend BasicJet operator+(double s, BasicJet a) { return std::move(a) + s; }
  friend BasicJet operator-(BasicJet a, double s) {
    a.coeffs_[0] -= s;
    return a;
  }
  friend BasicJet operator-(double s, const BasicJet& a) { return (-a) + s; }

  friend BasicJet operator*(BasicJet a, double s) { return a *= s; }
  friend BasicJet operator*(double s, BasicJet a) { return a *= s; }
  friend BasicJet operator*(const BasicJet& a, const BasicJet& b) { return multiply(a, b); }
  friend BasicJet operator/(const BasicJet& a, const BasicJet& b) { return divide(a, b); }
  friend BasicJet operator/(BasicJet a, double s) { return a /= s; }
  friend BasicJet operator/(double s, const BasicJet& b) { return divide(BasicJet(T(s)), b); }

 private:
  static const JetSpacePtr& wider_space(const BasicJet& a, const BasicJet& b) {
    if (a.space_->num_vars() != b.space_->num_vars()) {
      throw ConfigError("jets over different variable sets cannot be combined");
    }
    return a.space_->max_order() >= b.space_->max_order() ? a.space_ : b.space_;
  }

  BasicJet& accumulate(const BasicJet& o, double sign) {
    if (o.is_constant()) {
      if (sign > 0) {
        coeffs_[0] += o.coeffs_[0];
      } else {
        coeffs_[0] -= o.coeffs_[0];
      }
      return *this;
    }
    if (is_constant()) {
      T v = coeffs_[0];
      *this = sign > 0 ? o : -o;
      coeffs_[0] += v;
      return *this;
    }
    space_ = wider_space(*this, o);
    order_ = std::min(order_, o.order_);
    const std::size_t n = space_->size(order_);
    coeffs_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (sign > 0) {
        coeffs_[i] += o.coeffs_[i];
      } else {
        coeffs_[i] -= o.coeffs_[i];
      }
    }
    return *this;
  }

  static BasicJet multiply(const BasicJet& a, const BasicJet& b) {
    if (a.is_constant() && b.is_constant()) return BasicJet(a.coeffs_[0] * b.coeffs_[0]);
    if (a.is_constant() || b.is_constant()) {
      const BasicJet& s = a.is_constant() ? a : b;
      BasicJet r = a.is_constant() ? b : a;
      for (auto& c : r.coeffs_) c = c * s.coeffs_[0];
      return r;
    }
    const JetSpacePtr& space = wider_space(a, b);
    const int p = std::min(a.order_, b.order_);
    std::vector<T> r(space->size(p), T(0.0));
    for (const auto& prod : space->products(p)) {
      r[prod.out] += a.coeffs_[prod.lhs] * b.coeffs_[prod.rhs];
    }
    return BasicJet(space, p, std::move(r));
  }

  // Series division: q_c = (a_c - sum_{i+j=c, j!=0} q_i b_j) / b_0.
  static BasicJet divide(const BasicJet& a, const BasicJet& b) {
    if (primal(b.coeffs_[0]) == 0.0) throw DomainError("division by a jet with zero value");
    if (b.is_constant()) {
      if (a.is_constant()) return BasicJet(a.coeffs_[0] / b.coeffs_[0]);
      BasicJet r = a;
      for (auto& c : r.coeffs_) c = c / b.coeffs_[0];
      return r;
    }
    const JetSpacePtr& space = a.is_constant() ? b.space_ : wider_space(a, b);
    const int p = std::min(a.order(), b.order_);
    const std::size_t n = space->size(p);
    std::vector<T> q(n, T(0.0));
    const auto prods = space->products(p);
    std::size_t k = 0;
    for (std::size_t c = 0; c < n; ++c) {
      T acc = (a.is_constant() ? (c == 0 ? a.coeffs_[0] : T(0.0)) : a.coeffs_[c]);
      for (; k < prods.size() && prods[k].out == c; ++k) {
        if (prods[k].rhs != 0) acc -= q[prods[k].lhs] * b.coeffs_[prods[k].rhs];
      }
      q[c] = acc / b.coeffs_[0];
    }
    return BasicJet(space, p, std::move(q));
  }

  JetSpacePtr space_;
  int order_ = kConstantOrder;
  std::vector<T> coeffs_;
};

using Jet = BasicJet<double>;
using NestedJet = BasicJet<Jet>;

template <class T>
bool is_constant_valued(const BasicJet<T>& j) {
  const auto c = j.coefficients();
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (primal(c[i]) != 0.0 || !is_constant_valued(c[i])) return false;
  }
  return is_constant_valued(c[0]);
}

// f(x) = sum_k d[k] (x - x0)^k, with d[k] = f^(k)(x0)/k!. d must hold at
// least order+1 entries.
template <class T>
BasicJet<T> compose(const BasicJet<T>& x, const std::vector<T>& d) {
  if (x.is_constant()) return BasicJet<T>(d[0]);
  const int p = x.order();
  if (p == 0) return BasicJet<T>(x.space(), 0, {d[0]});
  const BasicJet<T> xt = x.nilpotent_part();
  BasicJet<T> r(d[static_cast<std::size_t>(p)]);
  for (int k = p - 1; k >= 0; --k) {
    r = r * xt;
    r.mutable_coefficients()[0] += d[static_cast<std::size_t>(k)];
  }
  return r;
}

namespace detail {

inline int series_length(int order) { return order == kConstantOrder ? 1 : order + 1; }

inline double binomial(double p, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (p - i) / (i + 1);
  return r;
}

}  // namespace detail

template <class T>
BasicJet<T> exp(const BasicJet<T>& x) {
  using std::exp;
  const int n = detail::series_length(x.order());
  const T e = exp(x.value());
  std::vector<T> d(static_cast<std::size_t>(n), e);
  double fact = 1.0;
  for (int k = 1; k < n; ++k) {
    fact *= k;
    d[static_cast<std::size_t>(k)] = e / fact;
  }
  return compose(x, d);
}

template <class T>
BasicJet<T> log(const BasicJet<T>& x) {
  using std::log;
  if (primal(x.value()) <= 0.0) throw DomainError("log of a non-positive value");
  const int n = detail::series_length(x.order());
  std::vector<T> d(static_cast<std::size_t>(n), T(0.0));
  d[0] = log(x.value());
  if (n > 1) {
    const T inv = T(1.0) / x.value();
    T pw = inv;
    for (int k = 1; k < n; ++k) {
      d[static_cast<std::size_t>(k)] = pw * ((k % 2 == 1 ? 1.0 : -1.0) / k);
      pw = pw * inv;
    }
  }
  return compose(x, d);
}

namespace detail {

template <class T>
BasicJet<T> sin_cos(const BasicJet<T>& x, bool cosine) {
  using std::cos;
  using std::sin;
  const int n = series_length(x.order());
  const T s = sin(x.value());
  const T c = cos(x.value());
  // Derivative cycle of sin: s, c, -s, -c; cos starts one step later.
  const T cycle[4] = {s, c, -s, -c};
  std::vector<T> d(static_cast<std::size_t>(n), T(0.0));
  double fact = 1.0;
  for (int k = 0; k < n; ++k) {
    if (k > 0) fact *= k;
    d[static_cast<std::size_t>(k)] = cycle[(k + (cosine ? 1 : 0)) % 4] / fact;
  }
  return compose(x, d);
}

}  // namespace detail

template <class T>
BasicJet<T> sin(const BasicJet<T>& x) {
  return detail::sin_cos(x, false);
}
template <class T>
BasicJet<T> cos(const BasicJet<T>& x) {
  return detail::sin_cos(x, true);
}

template <class T>
BasicJet<T> tanh(const BasicJet<T>& x) {
  using std::tanh;
  const int n = detail::series_length(x.order());
  const T t = tanh(x.value());
  // k-th derivative as a polynomial P_k(t); P_{k+1} = P_k'(t) (1 - t^2).
  std::vector<double> poly = {0.0, 1.0};
  std::vector<T> d(static_cast<std::size_t>(n), T(0.0));
  d[0] = t;
  double fact = 1.0;
  for (int k = 1; k < n; ++k) {
    fact *= k;
    std::vector<double> dp(poly.size() > 1 ? poly.size() - 1 : 1, 0.0);
    for (std::size_t i = 1; i < poly.size(); ++i) dp[i - 1] = poly[i] * static_cast<double>(i);
    std::vector<double> next(dp.size() + 2, 0.0);
    for (std::size_t i = 0; i < dp.size(); ++i) {
      next[i] += dp[i];
      next[i + 2] -= dp[i];
    }
    poly = std::move(next);
    T acc(poly.back());
    for (std::size_t i = poly.size() - 1; i-- > 0;) acc = acc * t + poly[i];
    d[static_cast<std::size_t>(k)] = acc / fact;
  }
  return compose(x, d);
}

template <class T>
BasicJet<T> pow(const BasicJet<T>& x, double p) {
  using std::pow;
  const int n = detail::series_length(x.order());
  if (p == 0.0) {
    BasicJet<T> one = x * 0.0;
    one.mutable_coefficients()[0] = T(1.0);
    return one;
  }
  const bool integral = std::floor(p) == p;
  const double x0 = primal(x.value());
  if (!integral && x0 < 0.0) throw DomainError("non-integer power of a negative value");
  if (x0 == 0.0 && (p < 0.0 || (!integral && n > 1))) {
    throw DomainError("power is singular at zero");
  }
  std::vector<T> d(static_cast<std::size_t>(n), T(0.0));
  for (int k = 0; k < n; ++k) {
    if (integral && p >= 0.0 && k > p) break;
    d[static_cast<std::size_t>(k)] = pow(x.value(), p - k) * detail::binomial(p, k);
  }
  return compose(x, d);
}

template <class T>
BasicJet<T> sqrt(const BasicJet<T>& x) {
  using std::pow;
  using std::sqrt;
  const int n = detail::series_length(x.order());
  const double x0 = primal(x.value());
  if (x0 < 0.0) throw DomainError("square root of a negative value");
  if (x0 == 0.0 && n > 1) throw DomainError("square root is singular at zero");
  std::vector<T> d(static_cast<std::size_t>(n), T(0.0));
  d[0] = sqrt(x.value());
  for (int k = 1; k < n; ++k) d[static_cast<std::size_t>(k)] = pow(x.value(), 0.5 - k) * detail::binomial(0.5, k);
  return compose(x, d);
}

template <class T>
BasicJet<T> pow(const BasicJet<T>& x, const BasicJet<T>& e) {
  if (is_constant_valued(e)) return pow(x, primal(e));
  return exp(e * log(x));
}

// d/dx_var. The result has one order less.
template <class T>
BasicJet<T> derivative(const BasicJet<T>& j, int var) {
  if (j.is_constant()) return BasicJet<T>(T(0.0));
  const auto& space = j.space();
  if (var < 0 || var >= space->num_vars()) throw ConfigError("derivative variable out of range");
  if (j.order() < 1) throw OrderExceededError("derivative of an order-0 jet");
  const int p = j.order() - 1;
  const std::size_t n = space->size(p);
  const auto c = j.coefficients();
  std::vector<T> r(n, T(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto up = static_cast<std::size_t>(space->raise(var, i));
    r[i] = c[up] * static_cast<double>(space->exponent(i, var) + 1);
  }
  return BasicJet<T>(space, p, std::move(r));
}

// Partial derivative (not Taylor coefficient) for a multi-index given as a
// list of variable indices.
template <class T>
T partial(const BasicJet<T>& j, std::span<const int> vars) {
  if (j.is_constant()) return vars.empty() ? j.value() : T(0.0);
  if (static_cast<int>(vars.size()) > j.order()) {
    throw OrderExceededError("requested derivative of order " + std::to_string(vars.size()) +
                             " from a jet of order " + std::to_string(j.order()));
  }
  const std::size_t idx = j.space()->index_of(vars);
  return j.coefficients()[idx] * j.space()->factorial(idx);
}

template <class T>
T partial(const BasicJet<T>& j, std::initializer_list<int> vars) {
  return partial(j, std::span<const int>(vars.begin(), vars.size()));
}

// Differentiates every coefficient of a nested jet with respect to an inner
// variable; the outer structure is untouched.
inline NestedJet inner_derivative(const NestedJet& j, int var) {
  std::vector<Jet> r;
  r.reserve(j.coefficients().size());
  for (const auto& c : j.coefficients()) r.push_back(derivative(c, var));
  if (j.is_constant()) return NestedJet(r[0]);
  return NestedJet(j.space(), j.order(), std::move(r));
}

Jet seed_variable(int index, double value, const JetConfig& config);
double extract_partial(const Jet& j, std::span<const int> vars);

}  // namespace mkropina
