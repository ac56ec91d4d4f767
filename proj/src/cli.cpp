#include "blowup/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blowup/coefficients.hpp"
#include "blowup/errors.hpp"
#include "blowup/evolution.hpp"
#include "blowup/params.hpp"
#include "blowup/profiles.hpp"
#include "blowup/quasilinear.hpp"
#include "blowup/report.hpp"
#include "blowup/suite.hpp"

namespace fs = std::filesystem;

namespace blowup {
namespace {

struct Options {
  std::string variant = "bounded";
  double r0 = 100.0;
  std::string out = ".";
  std::vector<std::string> only;
  std::string mode = "radial";
  std::optional<double> t_start;
  std::optional<double> t_end;
  std::optional<double> dtau;
  int n_r = 4096;
  int n_x = 256;
  int n_y = 256;
  std::uint64_t seed = 20240611;
  double quad_tol = 1e-12;
  std::vector<std::string> inputs;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string q = "\"";
  for (const char c : cell) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw InvalidParams("cannot write " + path.string());
    cells(header);
  }

  void cells(const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) os_ << (i ? "," : "") << csv_quote(row[i]);
    os_ << "\r\n";
  }

  void numbers(const std::vector<double>& row) {
    std::vector<std::string> s;
    s.reserve(row.size());
    for (const double v : row) s.push_back(format_double(v));
    cells(s);
  }

 private:
  std::ofstream os_;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool is_quasilinear(const Options& o) { return o.variant == "quasilinear"; }

ConstructionParams params_of(const Options& o) {
  const Variant v = is_quasilinear(o) ? Variant::bounded : parse_variant(o.variant);
  return ConstructionParams::make(v, o.r0, o.quad_tol);
}

Json params_json(const Options& o, const ConstructionParams& p) {
  Json j = Json::object();
  j["variant"] = o.variant;
  j["r0"] = p.r0;
  j["epsilon"] = p.epsilon;
  j["quad_tol"] = p.quad_tol;
  return j;
}

Json make_manifest(const std::string& command, const Json& params, const Options& o) {
  Json m = Json::object();
  m["tool"] = "blowuplab";
  m["version"] = kVersion;
  m["command"] = command;
  m["params"] = params;
  m["seed"] = o.seed;
  m["out"] = o.out;
  m["timestamp"] = utc_timestamp();
  m["outputs"] = Json::array();
  return m;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw InvalidParams("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

fs::path prepare_out(const Options& o) {
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidParams("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

// Construction failures.
bool is_construction_error(const BlowupError& e) {
  return dynamic_cast<const QuadratureFailure*>(&e) || dynamic_cast<const InjectivityFailure*>(&e) ||
         dynamic_cast<const FactorizationFailure*>(&e) ||
         dynamic_cast<const RootNotBracketed*>(&e) || dynamic_cast<const OriginFrame*>(&e);
}

std::vector<double> export_radii(const RadialProfiles& p) {
  const double r0 = p.params().r0;
  std::vector<double> r;
  const int n = 1000;
  const double lo = std::log(1e-3), hi = std::log(100.0 * r0);
  for (int i = 0; i < n; ++i) r.push_back(std::exp(lo + (hi - lo) * i / (n - 1)));
  const double a = p.window().start, b = p.window().deficit_end();
  for (int i = 0; i < n; ++i) r.push_back(a + (b - a) * i / (n - 1));
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

void export_profiles(const RadialProfiles& p, const fs::path& dir, const std::string& suffix,
                     Json& outputs) {
  const std::vector<double> radii = export_radii(p);
  struct Series {
    const char* name;
    double (*eval)(const RadialProfiles&, double, int);
  };
  const Series series[] = {
      {"phi", [](const RadialProfiles& q, double r, int k) { return q.phi(r, k); }},
      {"f", [](const RadialProfiles& q, double r, int k) { return q.f(r, k); }},
      {"h", [](const RadialProfiles& q, double r, int k) { return q.h(r, k); }},
      {"deficit",
       [](const RadialProfiles& q, double r, int k) {
         const Jet<double, 1> e = q.deficit_jet(r);
         return k == 0 ? e.value() : e[1];
       }},
      {"eta", [](const RadialProfiles& q, double r, int k) { return q.eta(r, k); }},
  };
  for (const auto& s : series) {
    const std::string file = std::string(s.name) + suffix + ".csv";
    CsvWriter csv(dir / file, {"r", "value", "derivative"});
    for (const double r : radii) csv.numbers({r, s.eval(p, r, 0), s.eval(p, r, 1)});
    outputs.push_back(file);
  }
}

Json profile_summary(const RadialProfiles& p) {
  Json j = Json::object();
  j["window_start"] = p.window().start;
  j["window_width"] = p.window().width;
  j["deficit_end"] = p.window().deficit_end();
  j["f_tail"] = p.f_tail();
  j["eta_tail"] = p.eta_tail();
  return j;
}

int cmd_construct(const Options& o, std::ostream& out) {
  const ConstructionParams params = params_of(o);
  const fs::path dir = prepare_out(o);
  Json manifest = make_manifest("construct", params_json(o, params), o);
  Json& outputs = manifest["outputs"];
  Json summary = Json::object();

  const RadialProfiles p(params);
  summary["profiles"] = profile_summary(p);
  export_profiles(p, dir, "", outputs);
  if (is_quasilinear(o)) {
    const PairedProfiles pp = paired_profiles(params);
    export_profiles(pp.tilde, dir, "_tilde", outputs);
    summary["companion_profiles"] = profile_summary(pp.tilde);
    const GammaCurve g = gamma_build(pp);
    CsvWriter csv(dir / "gamma.csv", {"r", "x", "y"});
    for (std::size_t i = 0; i < g.r.size(); ++i) csv.numbers({g.r[i], g.x[i], g.y[i]});
    outputs.push_back("gamma.csv");
    summary["gamma"] = {{"samples", g.r.size()},
                        {"diagonal_gap", g.diagonal_gap},
                        {"min_nonadjacent_distance", g.min_nonadjacent_distance},
                        {"injective", g.injective}};
  }
  outputs.push_back("summary.json");
  Json doc = Json::object();
  doc["manifest"] = manifest;
  doc["summary"] = summary;
  write_json(dir / "summary.json", doc);
  out << "construct: wrote " << outputs.size() << " files to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const ConstructionParams params = params_of(o);
  std::vector<std::string> sections = o.only;
  if (sections.empty() && is_quasilinear(o)) sections = verify_section_names();
  const SuiteResult res = run_verify_suite(params, sections, o.seed);

  const fs::path dir = prepare_out(o);
  Json pj = params_json(o, params);
  pj["sections"] = Json::array();
  for (const auto& s : res.sections) pj["sections"].push_back(s.name);
  Json manifest = make_manifest("verify", pj, o);
  Json& outputs = manifest["outputs"];

  {
    CsvWriter csv(dir / "checks.csv", {"section", "check", "pass"});
    for (const auto& s : res.sections) {
      if (!s.data.contains("checks")) continue;
      for (const auto& [k, v] : s.data["checks"].items()) {
        csv.cells({s.name, k, v.get<bool>() ? "true" : "false"});
      }
    }
    outputs.push_back("checks.csv");
  }
  const bool has_ellipticity = std::any_of(res.sections.begin(), res.sections.end(),
                                           [](const auto& s) { return s.name == "ellipticity"; });
  if (has_ellipticity) {
    const RadialProfiles p(params);
    CsvWriter csv(dir / "ellipticity.csv", {"r", "lambda_1", "lambda_2", "lambda_3", "lambda_4"});
    for (const double r : default_scan_radii(p)) {
      const Eigen::Vector4d l = spectrum_closed(p, r);
      csv.numbers({r, l[0], l[1], l[2], l[3]});
    }
    outputs.push_back("ellipticity.csv");
  }
  for (const auto& s : res.sections) {
    if (s.name != "liouville_witness" || !s.data.contains("caccioppoli_phi1")) continue;
    CsvWriter csv(dir / "caccioppoli.csv",
                  {"R", "energy_B1", "cutoff_energy", "bound", "ratio", "holds"});
    for (const auto& row : s.data["caccioppoli_phi1"]["rows"]) {
      csv.cells({format_double(row["R"].get<double>()), format_double(row["energy_B1"].get<double>()),
                 format_double(row["cutoff_energy"].get<double>()),
                 format_double(row["bound"].get<double>()), format_double(row["ratio"].get<double>()),
                 row["holds"].get<bool>() ? "true" : "false"});
    }
    outputs.push_back("caccioppoli.csv");
  }
  outputs.push_back("verify.json");

  Json doc = Json::object();
  doc["manifest"] = manifest;
  doc["pass"] = res.pass;
  doc["sections"] = Json::object();
  for (const auto& s : res.sections) doc["sections"][s.name] = s.to_json();
  write_json(dir / "verify.json", doc);

  for (const auto& s : res.sections) {
    out << (s.pass ? "PASS " : "FAIL ") << s.name << "\n";
  }
  out << "verify: " << (res.pass ? "all sections pass" : "failures recorded") << " ("
      << (dir / "verify.json").string() << ")\n";
  return res.pass ? kExitOk : kExitVerificationFailed;
}

Json config_json(const SolverConfig& c) {
  Json j = Json::object();
  j["mode"] = c.mode == SolverMode::radial_1d ? "radial" : "cart2d";
  j["t_start"] = c.t_start;
  j["t_end"] = c.t_end;
  if (c.mode == SolverMode::radial_1d) {
    j["n_r"] = c.n_r;
  } else {
    j["n_x"] = c.n_x;
    j["n_y"] = c.n_y;
  }
  j["dtau"] = c.dtau;
  j["bdf_order"] = c.bdf_order;
  j["snapshots_per_decade"] = c.snapshots_per_decade;
  return j;
}

void write_series(const Trajectory& tr, const fs::path& path) {
  CsvWriter csv(path, {"t", "sup_B1", "lip_B1", "osc", "rel_error", "sup_interior"});
  for (const Snapshot& s : tr.series) {
    csv.cells({format_double(s.t), format_double(s.sup_B1), format_double(s.lip_B1),
               format_double(s.osc), format_double(s.rel_error), s.sup_interior ? "1" : "0"});
  }
}

void write_radial_profile(const SelfSimilarSolution& sol, const Trajectory& tr,
                          const fs::path& path) {
  const auto fam = sol.families();
  std::vector<std::string> header = {"r"};
  for (std::size_t k = 0; k < fam.size(); ++k) {
    header.push_back("psi_" + std::to_string(k));
    header.push_back("exact_" + std::to_string(k));
  }
  CsvWriter csv(path, header);
  const double s = std::sqrt(-tr.t_final);
  const double amp = std::pow(s, -tr.epsilon);
  for (std::size_t i = 0; i < tr.grid.r.size(); ++i) {
    const double r = tr.grid.r[i];
    std::vector<double> row = {r};
    for (std::size_t k = 0; k < fam.size(); ++k) {
      row.push_back(tr.psi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
      row.push_back(amp * fam[k]->phi(r / s));
    }
    csv.numbers(row);
  }
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const ConstructionParams params = params_of(o);
  SolverConfig cfg;
  const bool cart = o.mode == "cart2d";
  cfg.mode = cart ? SolverMode::cartesian_2d : SolverMode::radial_1d;
  cfg.t_start = o.t_start.value_or(-1.0);
  cfg.t_end = o.t_end.value_or(cart ? -0.1 : -0.01);
  cfg.dtau = o.dtau.value_or(cart ? 1e-2 : 2e-3);
  cfg.n_r = o.n_r;
  cfg.n_x = o.n_x;
  cfg.n_y = o.n_y;
  validate(cfg, params);
  if (cart && is_quasilinear(o)) throw InvalidParams("cart2d supports the linear source only");

  const SelfSimilarSolution sol(params,
                                is_quasilinear(o) ? ProfileSource::quasilinear : ProfileSource::linear);
  const fs::path dir = prepare_out(o);
  Json pj = params_json(o, params);
  pj["solver"] = config_json(cfg);
  Json manifest = make_manifest("simulate", pj, o);
  Json& outputs = manifest["outputs"];

  const Trajectory tr = cart ? solve_cartesian_2d(sol, cfg) : solve_radial(sol, cfg);
  write_series(tr, dir / "trajectory.csv");
  outputs.push_back("trajectory.csv");
  if (!cart) {
    write_radial_profile(sol, tr, dir / "profile.csv");
    outputs.push_back("profile.csv");
  }

  Json doc = Json::object();
  doc["solver"] = {{"steps", tr.steps},
                   {"snapshots", tr.series.size()},
                   {"t_final", tr.t_final},
                   {"max_rel_error", tr.max_rel_error}};
  try {
    doc["blowup"] = to_json(blowup_metrics(tr));
  } catch (const InsufficientSpan& e) {
    doc["blowup"] = {{"skipped", e.what()}};
  }
  bool pass = true;
  if (cart) {
    SolverConfig radial = cfg;
    radial.mode = SolverMode::radial_1d;
    radial.dtau = std::min(cfg.dtau, 2e-3);
    const ReportSection xv = cross_validate(sol, tr, cfg, radial);
    doc["cross_validation"] = xv.to_json();
    pass = xv.pass;
  }
  outputs.push_back("blowup.json");
  Json full = Json::object();
  full["manifest"] = manifest;
  for (const auto& [k, v] : doc.items()) full[k] = v;
  write_json(dir / "blowup.json", full);

  out << "simulate: " << tr.steps << " steps, max relative error "
      << format_double(tr.max_rel_error) << "\n";
  if (doc["blowup"].contains("lipschitz_exponent")) {
    out << "simulate: lipschitz exponent " << doc["blowup"]["lipschitz_exponent"].dump()
        << ", sup exponent " << doc["blowup"]["sup_exponent"].dump() << "\n";
  }
  if (cart) out << "simulate: cross-validation " << (pass ? "PASS" : "FAIL") << "\n";
  return pass ? kExitOk : kExitVerificationFailed;
}

// Rows of the human summary for one report document.
std::vector<std::vector<std::string>> summary_rows(const Json& doc) {
  const Json& m = doc["manifest"];
  const std::string command = m.value("command", "?");
  const Json& params = m["params"];
  const std::string variant = params.value("variant", "?");
  const std::string r0 = params.contains("r0") ? format_double(params["r0"].get<double>()) : "?";
  std::vector<std::vector<std::string>> rows;
  auto add = [&](const std::string& item, const std::string& value) {
    rows.push_back({command, variant, r0, item, value});
  };
  auto num = [](const Json& v) -> std::string {
    if (v.is_number()) return format_double(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    if (v.is_object() && v.contains("slope")) {
      return format_double(v["slope"].get<double>()) + " +- " +
             format_double(v["ci95_half_width"].get<double>());
    }
    return v.dump();
  };
  if (command == "verify" && doc.contains("sections")) {
    for (const auto& [name, sec] : doc["sections"].items()) {
      add(name, sec.value("pass", false) ? "PASS" : "FAIL");
    }
  } else if (command == "simulate") {
    if (params.contains("solver")) add("mode", params["solver"].value("mode", "?"));
    if (doc.contains("solver")) add("steps", num(doc["solver"]["steps"]));
    if (doc.contains("blowup")) {
      if (!doc["blowup"].contains("max_rel_error") && doc.contains("solver")) {
        add("max_rel_error", num(doc["solver"]["max_rel_error"]));
      }
      for (const auto& [k, v] : doc["blowup"].items()) add(k, num(v));
    }
    if (doc.contains("cross_validation")) {
      add("cross_validation", doc["cross_validation"].value("pass", false) ? "PASS" : "FAIL");
    }
  } else if (command == "construct" && doc.contains("summary")) {
    for (const auto& [k, v] : doc["summary"]["profiles"].items()) add(k, num(v));
    if (doc["summary"].contains("gamma")) {
      add("gamma_injective", doc["summary"]["gamma"].value("injective", false) ? "yes" : "no");
    }
  }
  if (rows.empty()) add("report", "present");
  return rows;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.inputs.empty()) {
    err << "report: no inputs\n";
    return kExitUsage;
  }
  std::vector<fs::path> files;
  for (const auto& in : o.inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
      }
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      err << "report: missing input " << in << "\n";
      return kExitUsage;
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<Json> docs;
  std::set<std::string> seen;
  for (const auto& f : files) {
    std::ifstream is(f);
    Json doc = Json::parse(is, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("manifest")) continue;
    Json key = doc["manifest"];
    key.erase("timestamp");
    if (!seen.insert(key.dump()).second) {
      err << "warning: duplicate manifest in " << f.string() << ", skipped\n";
      continue;
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) {
    err << "report: no reports found\n";
    return kExitUsage;
  }

  std::vector<std::vector<std::string>> rows = {{"command", "variant", "r0", "item", "value"}};
  for (const auto& d : docs) {
    for (auto& r : summary_rows(d)) rows.push_back(std::move(r));
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream table;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      table << std::left << std::setw(static_cast<int>(width[i]) + 2) << r[i];
    }
    table << r.back();
    table << "\n";
  }
  out << table.str();
  if (!o.out.empty() && o.out != ".") {
    const fs::path dir = prepare_out(o);
    std::ofstream os(dir / "summary.txt");
    os << table.str();
  }
  return kExitOk;
}

void add_params(CLI::App* cmd, Options& o) {
  cmd->add_option("--variant", o.variant, "bounded, unbounded or quasilinear")
      ->check(CLI::IsMember({"bounded", "unbounded", "quasilinear"}))
      ->capture_default_str();
  cmd->add_option("--r0", o.r0, "transition radius (>= 10)")->capture_default_str();
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  cmd->add_option("--quad-tol", o.quad_tol, "corrector quadrature tolerance")
      ->capture_default_str();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Finite-time blowup counterexamples for 2D parabolic systems", "blowuplab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CLI::App* construct = app.add_subcommand("construct", "export profiles and coefficients");
  add_params(construct, o);

  CLI::App* verify = app.add_subcommand("verify", "run the verification suite");
  add_params(verify, o);
  verify->add_option("--only", o.only, "comma separated section names")->delimiter(',');

  CLI::App* simulate = app.add_subcommand("simulate", "evolve the exact data and fit exponents");
  add_params(simulate, o);
  simulate->add_option("--mode", o.mode, "radial or cart2d")
      ->check(CLI::IsMember({"radial", "cart2d"}))
      ->capture_default_str();
  simulate->add_option("--t-start", o.t_start, "initial time (default -1)");
  simulate->add_option("--t-end", o.t_end, "final time (default -0.01 radial, -0.1 cart2d)");
  simulate->add_option("--dtau", o.dtau, "step in -log(-t) (default 2e-3 radial, 1e-2 cart2d)");
  simulate->add_option("--nr", o.n_r, "radial nodes")->capture_default_str();
  simulate->add_option("--nx", o.n_x, "nodes along x")->capture_default_str();
  simulate->add_option("--ny", o.n_y, "nodes along y")->capture_default_str();

  CLI::App* report = app.add_subcommand("report", "merge JSON reports into a summary table");
  report->add_option("inputs", o.inputs, "report files or directories");
  report->add_option("--out", o.out, "directory for summary.txt");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*construct) return cmd_construct(o, out);
    if (*verify) return cmd_verify(o, out);
    if (*simulate) return cmd_simulate(o, out);
    return cmd_report(o, out, err);
  } catch (const InvalidParams& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const TimeDomain& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BlowupError& e) {
    err << "error: " << e.what() << "\n";
    if (*simulate && !is_construction_error(e)) return kExitSolver;
    return kExitConstruction;
  }
}

}  // namespace blowup
