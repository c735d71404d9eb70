#pragma once

// JSON geometry configuration for the command-line tool.
//
// {
//   "name": "vsi",
//   "mode": "kundt" | "general",
//   "coordinates": ["u", "v", "x", "y"],
//   "dimension": 4,                      (optional, checked)
//   "m": 0.5,
//   "kundt": {"H": "u*v", "W": ["0", "0"], "h": [["1", "0"], ["0", "1"]]},
//   "general": {"a": [[...], ...], "b": [...]},
//   "sampling": {"ranges": [[-1, 1], ...], "count": 50, "seed": 1},
//   "u0": 0
// }

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mkropina/kropina.hpp"

namespace mkropina::cli {

enum class Mode { Kundt, General };

struct SamplingConfig {
  std::vector<std::pair<double, double>> ranges;
  int count = 50;
  std::uint64_t seed = 1;
};

struct GeometryConfig {
  std::string name;
  Mode mode = Mode::Kundt;
  std::vector<std::string> coordinates;
  double m = 0.0;
  std::string H;
  std::vector<std::string> W;
  std::vector<std::vector<std::string>> h;
  std::vector<std::vector<std::string>> a;
  std::vector<std::string> b;
  SamplingConfig sampling;
  double u0 = 0.0;

  int dim() const { return static_cast<int>(coordinates.size()); }
  nlohmann::ordered_json echo() const;
};

// Throws ConfigError with the offending key in the message.
GeometryConfig parse_config(const nlohmann::json& doc);
GeometryConfig load_config(const std::string& path);

struct Geometry {
  GeometryConfig config;
  std::optional<KundtForm> kundt;  // set when the Kundt data is v-independent
  std::string kundt_note;          // why a Kundt config was analysed in general mode
  std::shared_ptr<const MKropinaSpace> space;
};

Geometry build_geometry(const GeometryConfig& config);

// Uniform samples in the configured ranges where the metric is finite and
// nondegenerate and the one-form evaluates.
PointList sample_points(const Geometry& geometry, std::uint64_t seed, int count);

}  // namespace mkropina::cli
