#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mkropina/geodesics.hpp"

namespace mkropina::cli {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ojson meta(const RunOptions& options, std::uint64_t seed, int points) {
  ojson j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = seed;
  j["grid_density"] = points;
  if (options.timestamp) j["timestamp"] = timestamp_now();
  return j;
}

std::uint64_t effective_seed(const Geometry& g, const RunOptions& o) { return o.seed ? o.seed : g.config.sampling.seed; }
int effective_count(const Geometry& g, const RunOptions& o) {
  return o.grid_density ? o.grid_density : g.config.sampling.count;
}

// Runs one report section; numerical trouble is recorded in the section
// instead of aborting the analysis.
ojson guarded(const std::function<ojson()>& body) {
  try {
    return body();
  } catch (const NumericalError& e) {
    return ojson{{"status", "error"}, {"error", e.what()}};
  } catch (const DegenerateError& e) {
    return ojson{{"status", "error"}, {"error", e.what()}};
  } catch (const DomainError& e) {
    return ojson{{"status", "error"}, {"error", e.what()}};
  } catch (const PreconditionError& e) {
    return ojson{{"status", "error"}, {"error", e.what()}};
  }
}

struct BerwaldSummary {
  bool positive = false;
  bool evaluated = false;
};

ojson berwald_section(const Geometry& g, const PointList& pts, BerwaldSummary& summary) {
  const auto& space = *g.space;
  int counts[4] = {0, 0, 0, 0};
  double residual = 0.0;
  double tolerance = 0.0;
  ojson samples = ojson::array();
  for (const auto& p : pts) {
    const auto cert = berwald_condition_general(space, p);
    ++counts[static_cast<int>(cert.kind)];
    residual = std::max(residual, cert.residual);
    tolerance = std::max(tolerance, cert.tolerance);
    if (samples.size() < 5) {
      ojson s{{"point", p}, {"kind", to_string(cert.kind)}, {"f", cert.f}, {"residual", cert.residual}};
      if (cert.c) s["c"] = *cert.c;
      samples.push_back(s);
    }
  }
  BerwaldKind kind = BerwaldKind::Parallel;
  if (counts[static_cast<int>(BerwaldKind::NotBerwald)] > 0) {
    kind = BerwaldKind::NotBerwald;
  } else if (counts[static_cast<int>(BerwaldKind::GeneralWithF)] > 0) {
    kind = BerwaldKind::GeneralWithF;
  } else if (counts[static_cast<int>(BerwaldKind::ClosedNullWithC)] > 0) {
    kind = BerwaldKind::ClosedNullWithC;
  }
  summary.evaluated = true;
  summary.positive = kind != BerwaldKind::NotBerwald;
  ojson j;
  j["kind"] = to_string(kind);
  j["positive"] = summary.positive;
  j["residual"] = residual;
  j["tolerance"] = tolerance;
  j["counts"] = {{"parallel", counts[0]}, {"closed-null-with-c", counts[1]}, {"general-with-f", counts[2]},
                 {"not-berwald", counts[3]}};
  j["samples"] = samples;
  if (g.space->m() != 1.0) {
    j["closed_condition"] = guarded([&] {
      double r = 0.0;
      double tol = 0.0;
      bool holds = true;
      for (const auto& p : pts) {
        const auto c = berwald_condition_closed(space, p);
        r = std::max(r, c.residual);
        tol = std::max(tol, c.tolerance);
        holds = holds && c.holds;
      }
      return ojson{{"holds", holds}, {"residual", r}, {"tolerance", tol}};
    });
  }
  return j;
}

struct SkewSummary {
  bool evaluated = false;
  bool symmetric = false;
  double skew = 0.0;
};

ojson skew_section(const Geometry& g, const PointList& pts, SkewSummary& summary) {
  const double m = g.space->m();
  double skew = 0.0;
  double ricci = 0.0;
  double closed_form = 0.0;
  for (const auto& p : pts) {
    const auto c = g.kundt ? affine_curvature_ricci(*g.kundt, m, p) : affine_curvature_ricci(*g.space, p);
    skew = std::max(skew, c.skew_max);
    ricci = std::max(ricci, max_abs(c.ricci));
    if (g.kundt) closed_form = std::max(closed_form, max_abs_difference(c.skew, ricci_skew_closed_form(*g.kundt, m, p)));
  }
  const double tol = kStructuralTol * (1.0 + ricci);
  summary.evaluated = true;
  summary.skew = skew;
  summary.symmetric = skew <= tol;
  ojson j{{"status", "ok"}, {"max", skew}, {"tolerance", tol}, {"symmetric", summary.symmetric}, {"ricci_max", ricci}};
  if (g.kundt) {
    j["closed_form_deviation"] = closed_form;
    j["closed_form_tolerance"] = kCrossModuleTol * (1.0 + skew);
    j["closed_form_agrees"] = closed_form <= kCrossModuleTol * (1.0 + skew);
  }
  return j;
}

}  // namespace

ojson analyze(const Geometry& g, const RunOptions& options) {
  const auto seed = effective_seed(g, options);
  const int count = effective_count(g, options);
  const PointList pts = sample_points(g, seed, count);
  const double m = g.space->m();

  ojson report;
  report["geometry"] = g.config.echo();
  report["geometry"]["kundt_form"] = g.kundt.has_value();
  if (!g.kundt_note.empty()) report["geometry"]["note"] = g.kundt_note;

  Validity validity;
  report["validity"] = guarded([&] {
    validity = validate(*g.space, pts);
    return ojson{{"closed", validity.closed},
                 {"null", validity.null},
                 {"closed_residual", validity.closed_residual},
                 {"null_residual", validity.null_residual},
                 {"tolerance", kValidityTol}};
  });

  BerwaldSummary berwald;
  report["berwald"] = guarded([&] { return berwald_section(g, pts, berwald); });

  SkewSummary skew;
  if (berwald.positive) {
    report["ricci_skew"] = guarded([&] { return skew_section(g, pts, skew); });
  } else {
    report["ricci_skew"] = {{"status", "skipped"}, {"reason", "no affine connection without a Berwald certificate"}};
  }

  std::optional<MetrizabilityReport> metr;
  report["verdict"] = guarded([&] {
    ojson j;
    if (berwald.evaluated && !berwald.positive) {
      j["value"] = to_string(Verdict::NotBerwald);
      j["reason"] = "Berwald condition fails (residual " + fmt(report["berwald"]["residual"].get<double>()) + ")";
      return j;
    }
    if (g.kundt) {
      metr = metrizability_verdict(*g.kundt, m, pts);
      j["value"] = to_string(metr->verdict);
      j["s1"] = metr->s1;
      j["s2"] = metr->s2;
      j["tolerance"] = metr->tolerance;
      j["max_dv_H"] = metr->max_dvH;
      if (skew.evaluated) j["consistent_with_ricci_skew"] = (metr->verdict == Verdict::Metrizable) == skew.symmetric;
      if (metr->verdict == Verdict::Metrizable) {
        ojson phi = ojson::array();
        for (const auto& s : metr->phi_samples) phi.push_back({s.u, s.phi});
        j["phi_samples"] = phi;
        j["reason"] = "H is linear in v with a coefficient depending on u only";
      } else {
        j["reason"] = "d_v H depends on v or x (s1 = " + fmt(metr->s1) + ", s2 = " + fmt(metr->s2) + ")";
      }
      return j;
    }
    if (!skew.evaluated) {
      j["value"] = to_string(Verdict::Undetermined);
      j["reason"] = "affine Ricci tensor not available";
    } else if (!skew.symmetric) {
      j["value"] = to_string(Verdict::NotMetrizable);
      j["reason"] = "affine Ricci tensor is not symmetric (skew " + fmt(skew.skew) + ")";
    } else if (validity.closed && validity.null) {
      j["value"] = to_string(Verdict::Metrizable);
      j["reason"] = "closed null one-form with a symmetric affine Ricci tensor";
    } else {
      j["value"] = to_string(Verdict::Undetermined);
      j["reason"] = "symmetric affine Ricci tensor, but the one-form is not closed and null";
    }
    return j;
  });

  if (metr && metr->verdict == Verdict::Metrizable) {
    report["metrization"] = guarded([&] {
      const auto metric = metrize(*g.kundt, m, *metr, g.config.u0);
      const auto check = verify_metrization(*metric, *g.kundt, m, pts);
      return ojson{{"status", check.pass ? "verified" : "failed"},
                   {"u0", g.config.u0},
                   {"deviation", check.deviation},
                   {"tolerance", check.tolerance},
                   {"pass", check.pass}};
    });
  } else {
    report["metrization"] = {{"status", "skipped"},
                             {"reason", g.kundt ? "verdict is not metrizable" : "needs a Kundt-form configuration"}};
  }
  report["meta"] = meta(options, seed, static_cast<int>(pts.size()));
  return report;
}

void print_summary(std::ostream& out, const ojson& r) {
  auto row = [&](const std::string& key, const std::string& value) {
    out << key << std::string(key.size() < 14 ? 14 - key.size() : 1, ' ') << value << '\n';
  };
  auto yes = [](const ojson& v) { return v.is_boolean() && v.get<bool>() ? "yes" : "no"; };
  auto num = [](const ojson& v) { return v.is_number() ? fmt(v.get<double>()) : std::string("-"); };
  auto err = [](const ojson& s) { return s.contains("error") ? "error: " + s["error"].get<std::string>() : ""; };

  const auto& g = r["geometry"];
  row("geometry", g["name"].get<std::string>() + " (" + g["mode"].get<std::string>() + ", n = " +
                      std::to_string(g["dimension"].get<int>()) + ", m = " + fmt(g["m"].get<double>()) + ")");
  const auto& v = r["validity"];
  if (v.contains("closed")) {
    row("validity", std::string("closed ") + yes(v["closed"]) + " (" + num(v["closed_residual"]) + "), null " +
                        yes(v["null"]) + " (" + num(v["null_residual"]) + ")");
  } else {
    row("validity", err(v));
  }
  const auto& b = r["berwald"];
  if (b.contains("kind")) {
    row("berwald", b["kind"].get<std::string>() + ", residual " + num(b["residual"]) + " (tol " +
                       num(b["tolerance"]) + ")");
  } else {
    row("berwald", err(b));
  }
  const auto& s = r["ricci_skew"];
  if (s.contains("max")) {
    row("ricci skew", num(s["max"]) + " (tol " + num(s["tolerance"]) + ")");
  } else {
    row("ricci skew", s.contains("reason") ? s["status"].get<std::string>() : err(s));
  }
  const auto& vd = r["verdict"];
  row("verdict", vd.contains("value") ? vd["value"].get<std::string>() + ": " + vd["reason"].get<std::string>()
                                      : err(vd));
  const auto& mz = r["metrization"];
  if (mz.contains("deviation")) {
    row("metrization", mz["status"].get<std::string>() + ", deviation " + num(mz["deviation"]) + " (tol " +
                           num(mz["tolerance"]) + ")");
  } else {
    row("metrization", mz["status"].get<std::string>() + (mz.contains("reason") ? ": " + mz["reason"].get<std::string>()
                                                                                 : " " + err(mz)));
  }
}

namespace {

void write_json(const ojson& j, const std::string& path, std::ostream& out) {
  if (path == "-") {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError(path + ": cannot open output file");
  f << j.dump(2) << '\n';
}

std::vector<double> parse_vector(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    const auto first = token.find_first_not_of(" \t");
    const auto last = token.find_last_not_of(" \t");
    if (first == std::string::npos) throw ConfigError("--init: empty entry in " + what);
    token = token.substr(first, last - first + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size() || !std::isfinite(v)) throw ConfigError("--init: '" + token + "' is not a number");
    out.push_back(v);
  }
  return out;
}

GeodesicState parse_init(const std::string& text, int n) {
  const auto semi = text.find(';');
  if (semi == std::string::npos || text.find(';', semi + 1) != std::string::npos) {
    throw ConfigError("--init: expected \"x1,..,xn;y1,..,yn\"");
  }
  GeodesicState s;
  s.x = parse_vector(text.substr(0, semi), "x");
  s.y = parse_vector(text.substr(semi + 1), "y");
  if (static_cast<int>(s.x.size()) != n || static_cast<int>(s.y.size()) != n) {
    throw ConfigError("--init: expected " + std::to_string(n) + " values for x and for y, got " +
                      std::to_string(s.x.size()) + " and " + std::to_string(s.y.size()));
  }
  return s;
}

int cmd_analyze(const std::string& config, const std::string& out_path, const RunOptions& options, std::ostream& out) {
  const auto g = build_geometry(load_config(config));
  const auto report = analyze(g, options);
  if (out_path == "-") {
    write_json(report, out_path, out);
    return kExitOk;
  }
  print_summary(out, report);
  if (!out_path.empty()) write_json(report, out_path, out);
  return kExitOk;
}

int cmd_metrize(const std::string& config, double u0, bool u0_given, const std::string& out_path,
                const RunOptions& options, std::ostream& out) {
  const auto g = build_geometry(load_config(config));
  if (!g.kundt) {
    throw PreconditionError("metrize needs a Kundt-form configuration with v-independent W and h" +
                            (g.kundt_note.empty() ? std::string() : " (" + g.kundt_note + ")"));
  }
  const double m = g.space->m();
  if (m == 1.0) throw PreconditionError("m = 1: the metrizing factor divides by 1 - m");
  const auto seed = effective_seed(g, options);
  const PointList pts = sample_points(g, seed, effective_count(g, options));
  const auto report = metrizability_verdict(*g.kundt, m, pts);
  if (report.verdict != Verdict::Metrizable) {
    throw PreconditionError(std::string("verdict ") + to_string(report.verdict) + ": affine Ricci skew residual " +
                            fmt(report.ricci_skew_max) + ", s1 = " + fmt(report.s1) + ", s2 = " + fmt(report.s2) +
                            " (tol " + fmt(report.tolerance) + ")");
  }
  const double base = u0_given ? u0 : g.config.u0;
  std::vector<double> reference;
  for (const auto& [lo, hi] : g.config.sampling.ranges) reference.push_back(0.5 * (lo + hi));
  const auto metric = metrize(*g.kundt, m, report, base, reference);
  const auto check = verify_metrization(*metric, *g.kundt, m, pts);

  ojson j;
  j["geometry"] = g.config.echo();
  j["verdict"] = {{"value", to_string(report.verdict)},
                  {"s1", report.s1},
                  {"s2", report.s2},
                  {"tolerance", report.tolerance},
                  {"ricci_skew", report.ricci_skew_max}};
  j["metric"] = {{"form", "exp(psi(u)) * a"},
                 {"psi", "(m / (1 - m)) * integral from u0 to u of phi(s) ds, phi = d_v H"},
                 {"m", m},
                 {"u0", base},
                 {"reference", reference}};
  ojson samples = ojson::array();
  const auto [lo, hi] = g.config.sampling.ranges[0];
  const int count = lo == hi ? 1 : 21;
  for (int i = 0; i < count; ++i) {
    const double u = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    const double psi = metric->factor().psi(u);
    samples.push_back({{"u", u}, {"psi", psi}, {"factor", std::exp(psi)}});
  }
  j["conformal_factor"] = {{"samples", samples}};
  ojson phi = ojson::array();
  for (const auto& s : report.phi_samples) phi.push_back({s.u, s.phi});
  j["phi_samples"] = phi;
  j["verification"] = {{"deviation", check.deviation}, {"tolerance", check.tolerance}, {"pass", check.pass}};
  j["meta"] = meta(options, seed, static_cast<int>(pts.size()));

  if (out_path == "-") {
    write_json(j, out_path, out);
  } else {
    out << "verdict       metrizable\n";
    out << "metric        exp(psi(u)) * a, psi = (m/(1-m)) int_{" << fmt(base) << "}^u d_v H\n";
    for (const auto& s : samples) {
      out << "factor        u = " << fmt(s["u"].get<double>()) << "  " << fmt(s["factor"].get<double>()) << '\n';
    }
    out << "verification  deviation " << fmt(check.deviation) << " (tol " << fmt(check.tolerance) << ") "
        << (check.pass ? "PASS" : "FAIL") << '\n';
    if (!out_path.empty()) write_json(j, out_path, out);
  }
  return check.pass ? kExitOk : kExitNumerical;
}

int cmd_geodesic(const std::string& config, const std::string& init_text, double t_end, double tol,
                 bool compare_null, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto g = build_geometry(load_config(config));
  const auto init = parse_init(init_text, g.config.dim());
  IntegratorConfig cfg;
  cfg.rel_tol = tol;
  cfg.abs_tol = std::max(1e-13, tol * 1e-2);
  cfg.validate();

  std::ofstream file;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path);
    if (!file) throw ConfigError(out_path + ": cannot open output file");
  }
  std::ostream& csv = file.is_open() ? static_cast<std::ostream&>(file) : out;
  std::ostream& summary = file.is_open() ? out : err;

  if (compare_null) {
    const auto r = g.kundt ? compare_null_geodesics(*g.kundt, g.space->m(), *g.kundt->metric(), init, t_end, cfg)
                           : compare_null_geodesics(*g.space, g.space->metric(), init, t_end, cfg);
    write_csv(csv, r.trajectory);
    const bool pass = r.max_orthogonal <= 1e-6;
    summary << "steps         " << r.trajectory.size() - 1 << '\n';
    summary << "orthogonal    " << fmt(r.max_orthogonal) << " (tol 1e-06) " << (pass ? "PASS" : "FAIL") << '\n';
    summary << "null drift    " << fmt(r.max_null_drift) << '\n';
    return kExitOk;
  }
  const auto F = g.space->finsler();
  const auto traj = integrate(finsler_spray(F), init, t_end, cfg, finsler_domain(F));
  write_csv(csv, traj);
  const double f0 = F->value(traj.front().x, traj.front().y);
  double drift = 0.0;
  for (const auto& s : traj) drift = std::max(drift, std::abs(F->value(s.x, s.y) - f0) / f0);
  summary << "steps         " << traj.size() - 1 << '\n';
  summary << "F drift       " << fmt(drift) << " (relative)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"m-Kropina Berwald spaces: Berwald checks, metrizability, metrizing metrics and geodesics", kToolName};
  app.require_subcommand(1);
  RunOptions options;
  bool no_timestamp = false;
  app.add_option("--seed", options.seed, "Sampling seed (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--grid-density", options.grid_density, "Number of sample points (overrides the config)")
      ->check(CLI::Range(20, 100000));
  app.add_flag("--no-timestamp", no_timestamp, "Omit the timestamp from reports");
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

  std::string config;
  std::string out_path;
  auto* analyze_cmd = app.add_subcommand("analyze", "Validity, Berwald certificate, Ricci skew, verdict");
  analyze_cmd->add_option("config", config, "Geometry config (JSON)")->required();
  analyze_cmd->add_option("--out", out_path, "Write the JSON report here ('-' for stdout only)");
  analyze_cmd->fallthrough();

  double u0 = 0.0;
  auto* metrize_cmd = app.add_subcommand("metrize", "Build and verify the metrizing conformal metric");
  metrize_cmd->add_option("config", config, "Geometry config (JSON)")->required();
  auto* u0_opt = metrize_cmd->add_option("--u0", u0, "Lower limit of the phi integral");
  metrize_cmd->add_option("--out", out_path, "Write the JSON report here ('-' for stdout only)");
  metrize_cmd->fallthrough();

  std::string init;
  double t_end = 0.0;
  double tol = 1e-10;
  bool compare_null = false;
  auto* geodesic_cmd = app.add_subcommand("geodesic", "Integrate a geodesic and write the trajectory as CSV");
  geodesic_cmd->add_option("config", config, "Geometry config (JSON)")->required();
  geodesic_cmd->add_option("--init", init, "Initial state \"x1,..,xn;y1,..,yn\"")->required();
  geodesic_cmd->add_option("--tend", t_end, "Final parameter value")->required();
  geodesic_cmd->add_option("--tol", tol, "Relative tolerance in [1e-13, 1e-3]");
  geodesic_cmd->add_flag("--compare-null", compare_null, "Compare with the null geodesics of the defining metric");
  geodesic_cmd->add_option("--out", out_path, "Write the CSV here (default stdout)");
  geodesic_cmd->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolName << ' ' << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  options.timestamp = !no_timestamp;

  try {
    if (analyze_cmd->parsed()) return cmd_analyze(config, out_path, options, out);
    if (metrize_cmd->parsed()) return cmd_metrize(config, u0, u0_opt->count() > 0, out_path, options, out);
    return cmd_geodesic(config, init, t_end, tol, compare_null, out_path, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace mkropina::cli
