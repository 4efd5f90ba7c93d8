#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cknlab/cli.hpp"
#include "cknlab/errors.hpp"
#include "cknlab/serialize.hpp"
#include "cknlab/suite.hpp"

using namespace cknlab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string golden(const std::string& name) {
  return std::string(CKNLAB_SOURCE_DIR) + "/tests/cli/" + name;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cknlab_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("constants text and json") {
  Run r = cli({"constants", "--N", "3", "--p", "2", "--a", "-1", "--b", "0"});
  CHECK(r.code == 0);
  CHECK(r.out == "regime R1, constant 1.5, extremizer plain_exp\n");
  r = cli({"constants", "--N", "5", "--p", "2", "--a", "1", "--b", "0"});
  CHECK(r.code == 0);
  CHECK(r.out.find("DEGENERATE") != std::string::npos);
  r = cli({"constants", "--N", "5", "--p", "3", "--a", "0", "--b", "0", "--format", "json"});
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("sharp_constant").get<double>() == 4.0 / 3.0);
  CHECK(j.at("regime") == "R1");
  CHECK(cli({"constants", "--N", "3", "--p", "0.5", "--a", "0", "--b", "0"}).code == 2);
  CHECK(cli({"constants", "--N", "3"}).code == 2);
}

TEST_CASE("verify exit codes on golden configs") {
  Run r = cli({"verify", "--config", golden("pass.json")});
  CHECK(r.code == 0);
  const json rep = json::parse(r.out);
  CHECK(rep.at("schema") == kSchema);
  CHECK(rep.at("summary").at("pass") == 6);

  r = cli({"verify", "--config", golden("fail_tol.json")});
  CHECK(r.code == 1);
  CHECK(json::parse(r.out).at("reports").at(0).contains("residual_rel"));

  r = cli({"verify", "--config", golden("pass.json"), "--tol", "1e-16"});
  CHECK(r.code == 1);

  r = cli({"verify", "--config", golden("degenerate.json")});
  CHECK(r.code == 2);
  CHECK(r.err.find("DEGENERATE") != std::string::npos);
}

TEST_CASE("config validation") {
  const fs::path p = scratch("bad.json");
  write(p, R"({"schema": "cknlab/2", "suite": []})");
  Run r = cli({"verify", "--config", p.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("schema") != std::string::npos);

  write(p, R"({"schema": "cknlab/1", "suite": [], "colour": 1})");
  CHECK(cli({"verify", "--config", p.string()}).code == 2);

  write(p, R"({"schema": "cknlab/1", "suite": [{"identity_id": "T1a", "beta": 1}]})");
  CHECK(cli({"verify", "--config", p.string()}).code == 2);

  write(p, R"({"schema": "cknlab/1", "suite": [{"identity_id": "T9"}]})");
  CHECK(cli({"verify", "--config", p.string()}).code == 2);

  write(p, "{ not json");
  CHECK(cli({"verify", "--config", p.string()}).code == 2);
  CHECK(cli({"verify", "--config", scratch("missing.json").string()}).code == 2);
}

TEST_CASE("integrability problems are skipped and exit 2") {
  const fs::path p = scratch("integ.json");
  write(p, R"({"schema": "cknlab/1", "suite": [
    {"identity_id": "PCKN1n", "params": {"N": 3, "p": 3, "a": 3, "b": 1},
     "family": {"family": "power_exp", "rate": -1}}]})");
  const Run r = cli({"verify", "--config", p.string()});
  CHECK(r.code == 2);
  CHECK(json::parse(r.out).at("reports").at(0).at("status") == "skipped-integrability");
}

TEST_CASE("single-threaded reports are byte identical and match parallel runs") {
  const fs::path one = scratch("one.json"), two = scratch("two.json"), par = scratch("par.json");
  const fs::path cfg = scratch("cfg.json");
  json c = json::parse(slurp(golden("pass.json")));
  c["threads"] = 1;
  write(cfg, c.dump());
  REQUIRE(cli({"verify", "--config", cfg.string(), "--out", one.string()}).code == 0);
  REQUIRE(cli({"verify", "--config", cfg.string(), "--out", two.string()}).code == 0);
  c["threads"] = 4;
  write(cfg, c.dump());
  REQUIRE(cli({"verify", "--config", cfg.string(), "--out", par.string()}).code == 0);
  CHECK(slurp(one) == slurp(two));
  CHECK(slurp(one) == slurp(par));
}

TEST_CASE("default suite covers every identity") {
  const json s = default_suite();
  std::set<std::string> seen;
  for (const auto& e : s) {
    validate_entry(e);
    seen.insert(e.at("identity_id").get<std::string>());
  }
  for (const auto& id : identity_ids()) CHECK(seen.count(id) == 1);
  const Run r = cli({"suite"});
  CHECK(r.code == 0);
  CHECK(json::parse(r.out).at("suite").size() == s.size());
}

TEST_CASE("run_entry dispatch") {
  RunSettings st;
  const json e = {{"identity_id", "T2b"},
                  {"params", {{"N", 4}, {"p", 2}, {"a", 0}, {"b", 0}}},
                  {"family", {{"family", "bump"}, {"lo", 1}, {"hi", 2}}}};
  const IdentityReport r = run_entry(e, st);
  CHECK(r.identity_id == "T2b");
  CHECK(r.status == Status::Pass);
  REQUIRE(r.params);
  CHECK(r.params->N == 4);
  json bad = e;
  bad["identity_id"] = "ICKN3";
  CHECK_THROWS_AS(run_entry(bad, st), RegimeError);
  json explicit_setup = {{"identity_id", "T1a"},
                         {"A", {{"weight", "power"}, {"gamma", -1}}},
                         {"X", {{"field", "powersum"}, {"terms", {{-1, 0.5}}}}},
                         {"N_eff", 3},
                         {"p", 2.5},
                         {"alpha", 2},
                         {"family", {{"family", "bump"}, {"lo", 1}, {"hi", 2}}}};
  CHECK(run_entry(explicit_setup, st).status == Status::Pass);
}

TEST_CASE("stability command") {
  const fs::path cfg = scratch("stab.json"), csv = scratch("stab.csv");
  write(cfg, R"({"schema": "cknlab/1", "params": {"N": 4, "p": 2, "a": -1, "b": 0},
    "theorem": "T8", "grid": {"eps": [0.1], "bumps": [[1, 2]], "lambda0": [1, 2]}, "threads": 1})");
  const Run r = cli({"stability", "--config", cfg.string(), "--out", csv.string()});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("empirical_C=", 0) == 0);
  const std::string text = slurp(csv);
  CHECK(text.rfind("sample_id,eps,bump_lo,bump_hi,lambda0,deficit,distance,c_star,lambda_star,ratio,status\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);

  const fs::path land = scratch("land.csv");
  CHECK(cli({"plotdata", "--in", csv.string(), "--kind", "ratio_landscape", "--out",
             land.string()}).code == 0);
  CHECK(slurp(land).rfind("eps,bump_lo,bump_hi,lambda0,ratio\n", 0) == 0);

  write(cfg, R"({"schema": "cknlab/1", "params": {"N": 4, "p": 2, "a": 0.5, "b": 0},
    "theorem": "T8", "grid": {"eps": [0.1], "bumps": [[1, 2]], "lambda0": [1]}})");
  CHECK(cli({"stability", "--config", cfg.string(), "--out", csv.string()}).code == 2);
}

TEST_CASE("bessel derive and solve") {
  const fs::path wj = scratch("w.json"), sj = scratch("s.json"), prof = scratch("p.csv");
  Run r = cli({"bessel", "derive", "--V", R"({"weight": "power", "gamma": 0})", "--phi",
               R"({"family": "power_exp", "kappa": -0.5})", "--Neff", "3", "--p", "2", "--r0",
               "0.1", "--R", "10", "--out", wj.string()});
  REQUIRE(r.code == 0);
  const json w = json::parse(slurp(wj));
  CHECK(w.at("closed_form") == true);
  CHECK(w.at("ode_residual").get<double>() < 1e-8);
  // W = 1/4 r^{-2}
  const auto& vals = w.at("W_tabulated").at("values");
  const auto& rs = w.at("W_tabulated").at("r");
  CHECK(vals.at(0).get<double>() == doctest::Approx(0.25 / std::pow(rs.at(0).get<double>(), 2)));

  r = cli({"bessel", "solve", "--V", R"({"weight": "power", "gamma": 0})", "--W",
           R"({"weight": "power", "gamma": -2, "coef": 0.25})", "--Neff", "3", "--p", "2",
           "--r0", "0.1", "--R", "10", "--slope", "-15.811388300841896", "--phi0",
           "3.1622776601683795", "--out", sj.string()});
  REQUIRE(r.code == 0);
  const json s = json::parse(slurp(sj));
  CHECK(s.at("positive") == true);
  CHECK(s.at("phi").back().get<double>() == doctest::Approx(1.0 / std::sqrt(10.0)).epsilon(1e-6));
  CHECK(cli({"plotdata", "--in", sj.string(), "--kind", "profile", "--out", prof.string()}).code == 0);
  CHECK(slurp(prof).rfind("r,phi\n", 0) == 0);

  CHECK(cli({"bessel", "derive", "--V", R"({"weight": "power", "gamma": 0})", "--phi",
             R"({"family": "bump", "lo": 1, "hi": 2})", "--Neff", "3", "--p", "2", "--r0", "0.5",
             "--R", "3"}).code == 2);
}

TEST_CASE("residuals plot data") {
  const fs::path rep = scratch("rep.json"), out = scratch("res.csv");
  REQUIRE(cli({"verify", "--config", golden("pass.json"), "--out", rep.string()}).code == 0);
  CHECK(cli({"plotdata", "--in", rep.string(), "--kind", "residuals", "--out", out.string()}).code == 0);
  const std::string t = slurp(out);
  CHECK(t.rfind("index,identity_id,family,residual_rel,status\n", 0) == 0);
  CHECK(std::count(t.begin(), t.end(), '\n') == 7);
}
