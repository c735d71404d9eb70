#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace mkropina::cli {

inline constexpr const char* kToolName = "mkropina";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kSchemaVersion = "1.0";

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitPrecondition = 2, kExitNumerical = 3 };

struct RunOptions {
  std::uint64_t seed = 0;  // 0: use the config's seed
  int grid_density = 0;    // 0: use the config's count
  bool timestamp = true;
};

// Full report with the top-level keys geometry, validity, berwald,
// ricci_skew, verdict, metrization, meta.
nlohmann::ordered_json analyze(const Geometry& geometry, const RunOptions& options);

// Human-readable summary of an analyze report.
void print_summary(std::ostream& out, const nlohmann::ordered_json& report);

// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mkropina::cli
