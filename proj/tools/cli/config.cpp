#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

namespace mkropina::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) { throw ConfigError(key + ": " + what); }

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) fail(path + key, "missing");
  return obj.at(key);
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "must be finite");
  return d;
}

std::vector<std::string> get_strings(const json& v, const std::string& path, std::size_t size) {
  if (!v.is_array()) fail(path, "expected an array of strings");
  if (v.size() != size) fail(path, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_string(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<std::string>> get_matrix(const json& v, const std::string& path, std::size_t size) {
  if (!v.is_array()) fail(path, "expected an array of rows");
  if (v.size() != size) fail(path, "expected " + std::to_string(size) + " rows, got " + std::to_string(v.size()));
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(get_strings(v[i], path + "[" + std::to_string(i) + "]", size));
  return out;
}

// Parses with the key path and a caret line in the error.
Expr parse_expr(const std::string& source, const std::string& path, const std::vector<std::string>& coordinates) {
  Expr e;
  try {
    e = Expr::parse(source);
  } catch (const ParseError& err) {
    const auto span = err.span();
    std::string caret(span.start, ' ');
    caret += std::string(std::max<std::size_t>(1, span.end - span.start), '^');
    throw ConfigError(path + ": " + err.message() + "\n    " + source + "\n    " + caret);
  }
  for (const auto& v : e.variables()) {
    if (std::find(coordinates.begin(), coordinates.end(), v) == coordinates.end()) {
      fail(path, "unknown variable '" + v + "' in \"" + source + "\"");
    }
  }
  return e;
}

std::vector<Expr> parse_all(const std::vector<std::string>& s, const std::string& path,
                            const std::vector<std::string>& coordinates) {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(parse_expr(s[i], path + "[" + std::to_string(i) + "]", coordinates));
  return out;
}

std::vector<std::vector<Expr>> parse_all(const std::vector<std::vector<std::string>>& s, const std::string& path,
                                         const std::vector<std::string>& coordinates) {
  std::vector<std::vector<Expr>> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(parse_all(s[i], path + "[" + std::to_string(i) + "]", coordinates));
  return out;
}

}  // namespace

nlohmann::ordered_json GeometryConfig::echo() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["mode"] = mode == Mode::Kundt ? "kundt" : "general";
  j["dimension"] = dim();
  j["coordinates"] = coordinates;
  j["m"] = m;
  if (mode == Mode::Kundt) {
    j["kundt"] = {{"H", H}, {"W", W}, {"h", h}};
  } else {
    j["general"] = {{"a", a}, {"b", b}};
  }
  nlohmann::ordered_json ranges = nlohmann::ordered_json::array();
  for (const auto& [lo, hi] : sampling.ranges) ranges.push_back({lo, hi});
  j["sampling"] = {{"ranges", ranges}, {"count", sampling.count}, {"seed", sampling.seed}};
  j["u0"] = u0;
  return j;
}

GeometryConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> known{"name",  "mode",    "coordinates", "dimension", "m",
                                           "kundt", "general", "sampling",    "u0"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) fail(key, "unknown key");
  }
  GeometryConfig c;
  c.name = doc.contains("name") ? get_string(doc["name"], "name") : "unnamed";
  const std::string mode = get_string(require(doc, "mode", ""), "mode");
  if (mode == "kundt") {
    c.mode = Mode::Kundt;
  } else if (mode == "general") {
    c.mode = Mode::General;
  } else {
    fail("mode", "expected \"kundt\" or \"general\", got \"" + mode + "\"");
  }

  const auto& coords = require(doc, "coordinates", "");
  if (!coords.is_array()) fail("coordinates", "expected an array of names");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const auto name = get_string(coords[i], "coordinates[" + std::to_string(i) + "]");
    const auto tokens = tokenize(name);
    if (tokens.size() != 2 || tokens[0].kind != TokenKind::Identifier) {
      fail("coordinates[" + std::to_string(i) + "]", "\"" + name + "\" is not an identifier");
    }
    if (std::find(c.coordinates.begin(), c.coordinates.end(), name) != c.coordinates.end()) {
      fail("coordinates", "duplicate name \"" + name + "\"");
    }
    c.coordinates.push_back(name);
  }
  const int n = c.dim();
  if (n < 3) fail("coordinates", "need at least 3 coordinates");
  if (doc.contains("dimension")) {
    const auto& d = doc["dimension"];
    if (!d.is_number_integer() || d.get<int>() != n) {
      fail("dimension", "does not match the " + std::to_string(n) + " coordinates");
    }
  }
  c.m = get_number(require(doc, "m", ""), "m");

  const auto un = static_cast<std::size_t>(n);
  if (c.mode == Mode::Kundt) {
    if (doc.contains("general")) fail("general", "not allowed in kundt mode");
    const auto& k = require(doc, "kundt", "");
    if (!k.is_object()) fail("kundt", "expected an object");
    c.H = get_string(require(k, "H", "kundt."), "kundt.H");
    c.W = k.contains("W") ? get_strings(k["W"], "kundt.W", un - 2) : std::vector<std::string>(un - 2, "0");
    if (k.contains("h")) {
      c.h = get_matrix(k["h"], "kundt.h", un - 2);
    } else {
      c.h.assign(un - 2, std::vector<std::string>(un - 2, "0"));
      for (std::size_t i = 0; i < un - 2; ++i) c.h[i][i] = "1";
    }
    for (const auto& [key, value] : k.items()) {
      if (key != "H" && key != "W" && key != "h") fail("kundt." + key, "unknown key");
    }
  } else {
    if (doc.contains("kundt")) fail("kundt", "not allowed in general mode");
    const auto& g = require(doc, "general", "");
    if (!g.is_object()) fail("general", "expected an object");
    c.a = get_matrix(require(g, "a", "general."), "general.a", un);
    c.b = get_strings(require(g, "b", "general."), "general.b", un);
    for (const auto& [key, value] : g.items()) {
      if (key != "a" && key != "b") fail("general." + key, "unknown key");
    }
  }

  c.sampling.ranges.assign(un, {-1.0, 1.0});
  if (doc.contains("sampling")) {
    const auto& s = doc["sampling"];
    if (!s.is_object()) fail("sampling", "expected an object");
    for (const auto& [key, value] : s.items()) {
      if (key != "ranges" && key != "count" && key != "seed") fail("sampling." + key, "unknown key");
    }
    if (s.contains("ranges")) {
      const auto& r = s["ranges"];
      if (!r.is_array() || r.size() != un) fail("sampling.ranges", "expected " + std::to_string(n) + " [lo, hi] pairs");
      for (std::size_t i = 0; i < un; ++i) {
        const std::string path = "sampling.ranges[" + std::to_string(i) + "]";
        if (!r[i].is_array() || r[i].size() != 2) fail(path, "expected [lo, hi]");
        const double lo = get_number(r[i][0], path);
        const double hi = get_number(r[i][1], path);
        if (!(lo <= hi)) fail(path, "lo must not exceed hi");
        c.sampling.ranges[i] = {lo, hi};
      }
    }
    if (s.contains("count")) {
      if (!s["count"].is_number_integer() || s["count"].get<long long>() < 20 || s["count"].get<long long>() > 100000) {
        fail("sampling.count", "expected an integer in [20, 100000]");
      }
      c.sampling.count = s["count"].get<int>();
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) fail("sampling.seed", "expected a non-negative integer");
      c.sampling.seed = s["seed"].get<std::uint64_t>();
    }
  }
  if (doc.contains("u0")) c.u0 = get_number(doc["u0"], "u0");
  if (c.mode == Mode::Kundt) {
    parse_expr(c.H, "kundt.H", c.coordinates);
    parse_all(c.W, "kundt.W", c.coordinates);
    for (std::size_t i = 0; i < c.h.size(); ++i) parse_all(c.h[i], "kundt.h[" + std::to_string(i) + "]", c.coordinates);
  } else {
    for (std::size_t i = 0; i < c.a.size(); ++i) parse_all(c.a[i], "general.a[" + std::to_string(i) + "]", c.coordinates);
    parse_all(c.b, "general.b", c.coordinates);
  }
  return c;
}

GeometryConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON (" + e.what() + ")");
  }
  return parse_config(doc);
}

Geometry build_geometry(const GeometryConfig& config) {
  Geometry g;
  g.config = config;
  const auto& coords = config.coordinates;
  MetricFieldPtr metric;
  std::optional<OneFormField> b;
  if (config.mode == Mode::Kundt) {
    const Expr H = parse_expr(config.H, "kundt.H", coords);
    const auto W = parse_all(config.W, "kundt.W", coords);
    const auto h = parse_all(config.h, "kundt.h", coords);
    const std::string& v = coords[1];
    bool v_free = true;
    for (const auto& w : W) v_free = v_free && !w.uses(v);
    for (const auto& row : h)
      for (const auto& e : row) v_free = v_free && !e.uses(v);
    std::vector<Expr> du(coords.size(), Expr::constant(0.0));
    du[0] = Expr::constant(1.0);
    b.emplace(coords, du);
    if (v_free) {
      g.kundt.emplace(coords, H, W, h);
      metric = g.kundt->metric();
    } else {
      g.kundt_note = "W or h depends on " + v + "; analysed as a general (a, b) pair";
      metric = kundt_metric(coords, H, W, h);
    }
  } else {
    metric = std::make_shared<ExprMetric>(coords, parse_all(config.a, "general.a", coords));
    b.emplace(coords, parse_all(config.b, "general.b", coords));
  }
  PointList probes;
  try {
    probes = sample_points(Geometry{config, std::nullopt, {}, nullptr}, config.sampling.seed, 20);
  } catch (const ConfigError&) {
  }
  g.space = std::make_shared<MKropinaSpace>(metric, *b, config.m, probes);
  return g;
}

PointList sample_points(const Geometry& geometry, std::uint64_t seed, int count) {
  const auto& c = geometry.config;
  std::mt19937_64 rng(seed);
  std::vector<std::uniform_real_distribution<double>> dists;
  for (const auto& [lo, hi] : c.sampling.ranges) dists.emplace_back(lo, hi);
  // Probing before the space exists: evaluate the raw expressions.
  MetricFieldPtr metric;
  std::optional<OneFormField> b;
  if (geometry.space) {
    metric = geometry.space->metric_ptr();
    b = geometry.space->one_form();
  } else if (c.mode == Mode::Kundt) {
    metric = kundt_metric(c.coordinates, parse_expr(c.H, "kundt.H", c.coordinates), parse_all(c.W, "kundt.W", c.coordinates),
                          parse_all(c.h, "kundt.h", c.coordinates));
  } else {
    metric = std::make_shared<ExprMetric>(c.coordinates, parse_all(c.a, "general.a", c.coordinates));
    b.emplace(c.coordinates, parse_all(c.b, "general.b", c.coordinates));
  }
  PointList out;
  const long max_attempts = 100L * count + 1000;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
    std::vector<double> p;
    for (auto& d : dists) p.push_back(d(rng));
    try {
      const auto a = metric_at(*metric, p);
      (void)inverse(a);
      if (b) {
        const auto values = b->evaluate(std::span<const double>(p));
        require_finite(values);
      }
    } catch (const Error&) {
      continue;
    }
    out.push_back(std::move(p));
  }
  if (static_cast<int>(out.size()) < count) {
    throw ConfigError("sampling: only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                      " points in the ranges have a finite, nondegenerate metric");
  }
  return out;
}

}  // namespace mkropina::cli
