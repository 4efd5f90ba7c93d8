#include "cknlab/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cknlab/errors.hpp"
#include "cknlab/parallel.hpp"
#include "cknlab/serialize.hpp"
#include "cknlab/stability.hpp"
#include "cknlab/suite.hpp"

namespace cknlab {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

// Inline JSON, or a path to a JSON file.
json json_arg(const std::string& s, const std::string& what) {
  const auto first = s.find_first_not_of(" \t\n");
  if (first != std::string::npos && (s[first] == '{' || s[first] == '[' ))
    return parse_json(s, what);
  return parse_json(read_file(s), what);
}

json load_config(const std::string& path, const std::set<std::string>& allowed) {
  json cfg = parse_json(read_file(path), path);
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  if (!cfg.contains("schema") || !cfg.at("schema").is_string())
    throw ConfigError("config needs \"schema\": \"" + std::string(kSchema) + "\"");
  const std::string schema = cfg.at("schema").get<std::string>();
  if (schema != kSchema) throw ConfigError("unsupported schema '" + schema + "'");
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (it.key() != "schema" && !allowed.count(it.key()))
      throw ConfigError("unknown config key '" + it.key() + "'");
  return cfg;
}

int thread_count(const json& cfg) {
  if (std::getenv("CKNLAB_THREADS")) return default_threads();
  if (cfg.contains("threads")) {
    const double t = get_number(cfg, "threads");
    if (t < 1 || t != std::floor(t)) throw ConfigError("'threads' must be a positive integer");
    return static_cast<int>(t);
  }
  return default_threads();
}

// ---------------------------------------------------------------------------

int cmd_verify(const std::string& config, std::optional<double> tol_override,
               const std::string& out_path, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(config, {"command", "suite", "tolerance", "quad_tol", "threads"});
  RunSettings s;
  s.tol = cfg.contains("tolerance") ? get_number(cfg, "tolerance") : kDefaultTol;
  if (tol_override) s.tol = *tol_override;
  if (cfg.contains("quad_tol")) s.quad.rel_tol = get_number(cfg, "quad_tol");
  if (!(s.tol > 0.0) || !(s.quad.rel_tol > 0.0)) throw ConfigError("tolerances must be > 0");
  s.threads = thread_count(cfg);
  if (!cfg.contains("suite")) throw ConfigError("verify config needs 'suite'");
  json suite = cfg.at("suite");
  if (suite.is_string()) {
    if (suite.get<std::string>() != "default")
      throw ConfigError("'suite' must be an array or \"default\"");
    suite = default_suite();
  }
  const std::vector<IdentityReport> reps = run_suite(suite, s);

  int pass = 0, fail = 0, skip = 0;
  json arr = json::array();
  for (const auto& r : reps) {
    arr.push_back(to_json(r));
    switch (r.status) {
      case Status::Pass: ++pass; break;
      case Status::Fail: ++fail; break;
      case Status::SkippedIntegrability: ++skip; break;
    }
  }
  double worst = 0.0;
  for (const auto& r : reps)
    if (r.status != Status::SkippedIntegrability && std::isfinite(r.residual_rel))
      worst = std::max(worst, r.residual_rel);
  json report = {{"schema", kSchema},
                 {"command", "verify"},
                 {"tolerance", s.tol},
                 {"quad_tol", s.quad.rel_tol},
                 {"summary",
                  {{"total", reps.size()},
                   {"pass", pass},
                   {"fail", fail},
                   {"skipped", skip},
                   {"max_residual_rel", worst}}},
                 {"reports", arr}};
  write_output(out_path, dump(report) + "\n", out);

  for (const auto& r : reps) {
    if (r.status == Status::Pass) continue;
    err << r.identity_id << " [" << r.family << "] " << to_string(r.status);
    if (r.status == Status::Fail) err << " residual_rel=" << num(r.residual_rel);
    if (!r.message.empty()) err << ": " << r.message;
    err << '\n';
  }
  err << "verify: " << pass << " pass, " << fail << " fail, " << skip << " skipped\n";
  if (skip > 0) return 2;
  return fail > 0 ? 1 : 0;
}

int cmd_constants(int N, double p, double a, double b, const std::string& format,
                  std::ostream& out) {
  CknParams c{N, p, a, b};
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const Regime r = sharp_constant(c);
  if (format == "json") {
    json j = to_json(r);
    j["params"] = to_json(c);
    j["schema"] = kSchema;
    j["command"] = "constants";
    out << dump(j) << '\n';
    return 0;
  }
  if (r.tag == RegimeTag::Degenerate) {
    out << "regime DEGENERATE, constant " << num(r.sharp_constant)
        << " (not attained), extremizer none\n";
    return 0;
  }
  out << "regime " << to_string(r.tag) << ", constant " << num(r.sharp_constant)
      << ", extremizer " << to_string(r.extremizer);
  if (!r.attained) out << " (not attained)";
  out << '\n';
  return 0;
}

std::vector<double> number_list(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError("grid needs array '" + key + "'");
  std::vector<double> v;
  for (const auto& x : j.at(key)) {
    if (!x.is_number()) throw ConfigError("grid." + key + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

int cmd_stability(const std::string& config, const std::string& out_path, std::ostream& out,
                  std::ostream& err) {
  const json cfg = load_config(
      config, {"command", "params", "theorem", "exploratory", "grid", "refine", "threads",
               "quad_tol"});
  if (!cfg.contains("params")) throw ConfigError("stability config needs 'params'");
  const CknParams params = params_from_json(cfg.at("params"));
  const StabilityTheorem th = stability_theorem_from_string(cfg.value("theorem", std::string("T8")));
  ScanGrid grid = default_scan_grid();
  if (cfg.contains("grid")) {
    const json& g = cfg.at("grid");
    if (!g.is_object()) throw ConfigError("'grid' must be an object");
    for (auto it = g.begin(); it != g.end(); ++it)
      if (it.key() != "eps" && it.key() != "bumps" && it.key() != "lambda0")
        throw ConfigError("unknown key 'grid." + it.key() + "'");
    if (g.contains("eps")) grid.eps = number_list(g, "eps");
    if (g.contains("lambda0")) grid.lambda0 = number_list(g, "lambda0");
    if (g.contains("bumps")) {
      grid.bumps.clear();
      for (const auto& b : g.at("bumps")) {
        if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number())
          throw ConfigError("grid.bumps entries must be [lo, hi]");
        grid.bumps.emplace_back(b[0].get<double>(), b[1].get<double>());
      }
    }
  }
  if (cfg.value("refine", false)) grid = grid.refined();
  QuadOptions q;
  if (cfg.contains("quad_tol")) q.rel_tol = get_number(cfg, "quad_tol");
  const ScanResult res =
      stability_scan(params, th, grid, cfg.value("exploratory", false), q, thread_count(cfg));
  write_output(out_path, scan_csv(res), out);
  for (const auto& v : res.violations) err << "warning: " << v << '\n';
  out << "empirical_C=" << num(res.min_ratio) << '\n';
  return 0;
}

int cmd_bessel(const std::string& mode, const std::string& V_arg, const std::string& phi_arg,
               const std::string& W_arg, double n_eff, double p, double r0, double R,
               double slope, double phi0, int points, const std::string& out_path,
               std::ostream& out) {
  const WeightSpec V = weight_from_json(json_arg(V_arg, "--V"));
  if (!(r0 > 0.0) || !(R > r0)) throw ConfigError("need 0 < r0 < R");
  if (mode == "derive") {
    if (phi_arg.empty()) throw ConfigError("bessel derive needs --phi");
    const RadialProfile phi = profile_from_json(json_arg(phi_arg, "--phi"));
    const std::vector<double> grid = log_grid(r0, R, points);
    const WeightSpec W = derive_W(V, phi, p, n_eff, grid);
    std::vector<double> vals;
    vals.reserve(grid.size());
    for (double r : grid) vals.push_back(W(r));
    BesselPair pair{"derived", V, W, phi, p, n_eff, R};
    json j = {{"schema", kSchema},
              {"command", "bessel derive"},
              {"closed_form", !W.is_tabulated()},
              {"W", to_json(W)},
              {"W_tabulated", {{"weight", "tabulated"}, {"r", grid}, {"values", vals}}},
              {"ode_residual", ode_residual(pair, grid)}};
    write_output(out_path, dump(j) + "\n", out);
    return 0;
  }
  if (W_arg.empty()) throw ConfigError("bessel solve needs --W");
  const WeightSpec W = weight_from_json(json_arg(W_arg, "--W"));
  const PBesselSolution sol = solve_pbessel(V, W, p, n_eff, r0, R, slope, phi0);
  json j = {{"schema", kSchema},
            {"command", "bessel solve"},
            {"r", sol.r},
            {"phi", sol.phi},
            {"dphi", sol.dphi},
            {"positive", sol.positive},
            {"certified_lo", sol.certified_lo},
            {"certified_hi", sol.certified_hi},
            {"steps", sol.steps},
            {"halving_change", sol.halving_change}};
  write_output(out_path, dump(j) + "\n", out);
  return 0;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  return out;
}

int cmd_plotdata(const std::string& in_path, const std::string& kind,
                 const std::string& out_path, std::ostream& out) {
  const std::string text = read_file(in_path);
  std::ostringstream os;
  if (kind == "residuals") {
    const json rep = parse_json(text, in_path);
    if (!rep.contains("reports")) throw ConfigError("residuals needs a verify report");
    os << "index,identity_id,family,residual_rel,status\n";
    int i = 0;
    for (const auto& r : rep.at("reports")) {
      const auto& v = r.contains("residual_rel") ? r.at("residual_rel") : json();
      os << i++ << ',' << r.value("identity_id", "") << ',' << r.value("family", "") << ','
         << (v.is_number() ? num(v.get<double>()) : "nan") << ',' << r.value("status", "")
         << '\n';
    }
  } else if (kind == "ratio_landscape") {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("sample_id,", 0) != 0)
      throw ConfigError("ratio_landscape needs a stability CSV");
    const auto head = split(line);
    auto col = [&](const std::string& name) {
      for (std::size_t i = 0; i < head.size(); ++i)
        if (head[i] == name) return i;
      throw ConfigError("CSV lacks column '" + name + "'");
    };
    const std::size_t ie = col("eps"), il = col("lambda0"), ilo = col("bump_lo"),
                      ihi = col("bump_hi"), ir = col("ratio"), is_ = col("status");
    os << "eps,bump_lo,bump_hi,lambda0,ratio\n";
    while (std::getline(is, line)) {
      const auto f = split(line);
      if (f.size() < head.size() || f[is_].rfind("ok", 0) != 0) continue;
      os << f[ie] << ',' << f[ilo] << ',' << f[ihi] << ',' << f[il] << ',' << f[ir] << '\n';
    }
  } else if (kind == "profile") {
    const json j = parse_json(text, in_path);
    os << "r,phi\n";
    if (j.contains("r") && j.contains("phi") && j.at("phi").is_array()) {
      const auto& r = j.at("r");
      const auto& f = j.at("phi");
      for (std::size_t i = 0; i < r.size() && i < f.size(); ++i)
        os << num(r[i].get<double>()) << ',' << num(f[i].get<double>()) << '\n';
    } else {
      const RadialProfile f = profile_from_json(j);
      const Support s = f.support();
      const double lo = s.lo > 0.0 ? s.lo : 1e-3;
      const double hi = std::isfinite(s.hi) ? s.hi : 10.0;
      for (double r : log_grid(lo, hi, 256)) os << num(r) << ',' << num(f(r)) << '\n';
    }
  } else {
    throw ConfigError("unknown plotdata kind '" + kind + "'");
  }
  write_output(out_path, os.str(), out);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted Hardy / CKN identity verification lab", "cknlab"};
  app.require_subcommand(1);

  std::string config, out_path;
  std::optional<double> tol;
  auto* verify = app.add_subcommand("verify", "run an identity suite");
  verify->add_option("--config", config, "run configuration")->required();
  verify->add_option("--tol", tol, "residual tolerance override");
  verify->add_option("--out", out_path, "report path (stdout if omitted)");

  int N = 3;
  double p = 2, a = 0, b = 0;
  std::string format = "text";
  auto* constants = app.add_subcommand("constants", "sharp constant and regime");
  constants->add_option("--N", N)->required();
  constants->add_option("--p", p)->required();
  constants->add_option("--a", a)->required();
  constants->add_option("--b", b)->required();
  constants->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));

  auto* stability = app.add_subcommand("stability", "deficit/distance scan");
  stability->add_option("--config", config)->required();
  stability->add_option("--out", out_path)->required();

  std::string mode, V, phi, W;
  double n_eff = 3, r0 = 1e-2, R = 10, slope = 0, phi0 = 1;
  int points = 513;
  auto* bessel = app.add_subcommand("bessel", "derive W or solve for phi");
  bessel->add_option("mode", mode)->required()->check(CLI::IsMember({"derive", "solve"}));
  bessel->add_option("--V", V)->required();
  auto* phi_opt = bessel->add_option("--phi", phi);
  auto* W_opt = bessel->add_option("--W", W);
  phi_opt->excludes(W_opt);
  bessel->add_option("--Neff", n_eff)->required();
  bessel->add_option("--p", p)->required();
  bessel->add_option("--r0", r0)->required();
  bessel->add_option("--R", R)->required();
  bessel->add_option("--slope", slope, "phi'(r0) for solve");
  bessel->add_option("--phi0", phi0, "phi(r0) for solve");
  bessel->add_option("--points", points, "grid size for derive");
  bessel->add_option("--out", out_path);

  std::string in_path, kind;
  auto* plot = app.add_subcommand("plotdata", "plot-ready columns");
  plot->add_option("--in", in_path)->required();
  plot->add_option("--kind", kind)->required()->check(
      CLI::IsMember({"residuals", "ratio_landscape", "profile"}));
  plot->add_option("--out", out_path);

  auto* suite = app.add_subcommand("suite", "write the default verify config");
  suite->add_option("--out", out_path);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*verify) return cmd_verify(config, tol, out_path, out, err);
    if (*constants) return cmd_constants(N, p, a, b, format, out);
    if (*stability) return cmd_stability(config, out_path, out, err);
    if (*bessel)
      return cmd_bessel(mode, V, phi, W, n_eff, p, r0, R, slope, phi0, points, out_path, out);
    if (*plot) return cmd_plotdata(in_path, kind, out_path, out);
    if (*suite) {
      json j = {{"schema", kSchema}, {"command", "verify"}, {"suite", default_suite()}};
      write_output(out_path, dump(j) + "\n", out);
      return 0;
    }
  } catch (const RegimeError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const IntegrabilityError& e) {
    err << "integrability error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace cknlab
