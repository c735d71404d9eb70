#pragma once

// Metrics and one-forms shared by several test files.

#include <string>
#include <vector>

#include "mkropina/geometry.hpp"

namespace mkropina::testing {

// -2 du dv + H du^2 + W_a du dx^a + h_ab dx^a dx^b over (u, v, x, y).
inline MetricFieldPtr kundt4(const std::string& H, const std::string& Wx = "0", const std::string& Wy = "0",
                             const std::string& hxx = "1", const std::string& hxy = "0", const std::string& hyy = "1") {
  const std::string wx = "(" + Wx + ")/2";
  const std::string wy = "(" + Wy + ")/2";
  return ExprMetric::make({"u", "v", "x", "y"},
                          {{H, "-1", wx, wy}, {"-1", "0", "0", "0"}, {wx, "0", hxx, hxy}, {wy, "0", hxy, hyy}});
}

// The VSI example: H = u v, W = 0, h = identity.
inline MetricFieldPtr vsi_example() { return kundt4("u*v"); }

inline OneFormField du4() { return OneFormField::make({"u", "v", "x", "y"}, {"1", "0", "0", "0"}); }

inline MetricFieldPtr flat_lightcone4() { return kundt4("0"); }

inline MetricFieldPtr euclidean3() {
  return ExprMetric::make({"x", "y", "z"}, {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}});
}

inline MetricFieldPtr curved_lorentz4() {
  return ExprMetric::make({"t", "x", "y", "z"}, {{"-(1 + 0.2*x^2)", "0.1*y", "0", "0"},
                                                 {"0.1*y", "1 + 0.1*sin(t)", "0", "0.05*x*z"},
                                                 {"0", "0", "exp(0.2*x)", "0"},
                                                 {"0", "0.05*x*z", "0", "1 + y^2"}});
}

}  // namespace mkropina::testing
