#include "cknlab/suite.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "cknlab/errors.hpp"
#include "cknlab/parallel.hpp"

namespace cknlab {

namespace {

const std::set<std::string> kEntryKeys = {"identity_id", "alpha", "params", "P",
                                          "N",           "family", "pair",  "nonradial",
                                          "A",           "X",      "N_eff", "p"};

bool starts_with(const std::string& s, const std::string& pre) {
  return s.rfind(pre, 0) == 0;
}

std::optional<CknParams> entry_params(const json& e) {
  if (!e.contains("params")) return std::nullopt;
  return params_from_json(e.at("params"));
}

RadialProfile entry_profile(const json& e, const std::optional<CknParams>& ctx) {
  if (!e.contains("family")) throw ConfigError("entry needs 'family'");
  return profile_from_json(e.at("family"), ctx);
}

// Catalog setup from params, or an explicit {A, X, N_eff, p}.
RadialSetup entry_setup(const json& e, const RadialProfile& f) {
  if (e.contains("A") || e.contains("X")) {
    if (!e.contains("A") || !e.contains("X"))
      throw ConfigError("explicit setups need both 'A' and 'X'");
    RadialSetup s;
    s.A = weight_from_json(e.at("A"));
    s.X = field_from_json(e.at("X"));
    s.f = f;
    s.p = get_number(e, "p", 2.0);
    s.n_eff = get_number(e, "N_eff");
    if (!(s.p > 1.0)) throw ConfigError("p must be > 1");
    return s;
  }
  const auto params = entry_params(e);
  if (!params) throw ConfigError("entry needs 'params' or an explicit A/X setup");
  return ckn_setup(*params, f);
}

IdentityReport pick(std::vector<IdentityReport> reps, const std::string& id) {
  for (auto& r : reps)
    if (r.identity_id == id) return r;
  throw ConfigError("identity '" + id + "' not produced by this entry");
}

IdentityReport run_theorem_entry(const json& e, const std::string& id,
                                 const QuadOptions& q) {
  const auto params = entry_params(e);
  const RadialProfile f = entry_profile(e, params);
  RadialSetup s = entry_setup(e, f);
  const double alpha = get_number(e, "alpha", 1.0);
  const bool radial = id.back() == 'b';
  if (e.contains("nonradial")) {
    const json& nr = e.at("nonradial");
    if (!nr.is_object()) throw ConfigError("'nonradial' must be an object");
    for (auto it = nr.begin(); it != nr.end(); ++it)
      if (it.key() != "eps" && it.key() != "k")
        throw ConfigError("unknown key 'nonradial." + it.key() + "'");
    if (s.n_eff != 2.0) throw ConfigError("non-radial checks run at N = 2 only");
    if (id != "T1a" && id != "T1b" && id != "T4chain")
      throw ConfigError("non-radial entries support T1a, T1b and T4chain");
    const double eps = get_number(nr, "eps");
    const double k = get_number(nr, "k", 2.0);
    if (k != std::floor(k)) throw ConfigError("nonradial.k must be an integer");
    return pick(verify_nonradial(s.A, s.X, f, s.p, eps, static_cast<int>(k), alpha, q),
                id);
  }
  if (starts_with(id, "T2")) {
    if (e.contains("alpha") && alpha != 1.0) throw ConfigError("T2 runs at alpha = 1");
  }
  const TermSet t = eval_terms(s, alpha, q);
  IdentityReport rep;
  if (starts_with(id, "T1")) rep = verify_t1(t, s.p, radial);
  else if (starts_with(id, "T2")) rep = verify_t2(t, s.p, radial);
  else if (starts_with(id, "T3")) rep = verify_t3(s, t, radial, q);
  else rep = verify_t4_chain(t, s.p);
  rep.family = f.family();
  return rep;
}

IdentityReport run_entry_impl(const json& e, const QuadOptions& q) {
  const std::string id = e.at("identity_id").get<std::string>();
  if (starts_with(id, "T1") || starts_with(id, "T2") || starts_with(id, "T3") ||
      id == "T4chain")
    return run_theorem_entry(e, id, q);

  if (id == "T5chain" || starts_with(id, "C5i")) {
    if (!e.contains("pair")) throw ConfigError(id + " needs 'pair'");
    const BesselPair pair = pair_from_json(e.at("pair"));
    const RadialProfile f = entry_profile(e, entry_params(e));
    BesselChainResult res = verify_bessel_chain(pair, f, q);
    if (id == "T5chain") return res.chain;
    if (res.exact.empty()) throw ConfigError(id + " needs a p = 2 pair");
    return pick(std::move(res.exact), id);
  }

  if (id == "T5.1mono") {
    if (!e.contains("pair")) throw ConfigError(id + " needs 'pair'");
    if (!e.contains("P") || !e.at("P").is_array()) throw ConfigError(id + " needs 'P'");
    const BesselPair pair = pair_from_json(e.at("pair"));
    const RadialProfile f = entry_profile(e, entry_params(e));
    MonomialWeight P;
    for (const auto& x : e.at("P")) {
      if (!x.is_number()) throw ConfigError("'P' entries must be numbers");
      P.P.push_back(x.get<double>());
    }
    const double N = get_number(e, "N");
    if (N != std::floor(N) || N < 1) throw ConfigError("'N' must be a positive integer");
    return verify_monomial(pair, static_cast<int>(N), P, f, q);
  }

  if (starts_with(id, "ICKN")) {
    const auto params = entry_params(e);
    if (!params) throw ConfigError(id + " needs 'params'");
    const RadialProfile f = entry_profile(e, params);
    return verify_2ckn_remainder(*params, id.back() - '0', f, q);
  }

  if (starts_with(id, "PCKN")) {
    const auto params = entry_params(e);
    if (!params) throw ConfigError(id + " needs 'params'");
    const RadialProfile f = entry_profile(e, params);
    return verify_pckn_remainder(*params, id[4] - '0', id[5] == 'p', f, q);
  }
  throw ConfigError("unknown identity_id '" + id + "'");
}

IdentityReport skipped(const json& e, const std::string& why) {
  IdentityReport rep;
  rep.identity_id = e.at("identity_id").get<std::string>();
  if (e.contains("params")) rep.params = params_from_json(e.at("params"));
  if (e.contains("family") && e.at("family").is_object())
    rep.family = e.at("family").value("family", std::string());
  rep.status = Status::SkippedIntegrability;
  rep.message = why;
  return rep;
}

}  // namespace

const std::vector<std::string>& identity_ids() {
  static const std::vector<std::string> ids = {
      "T1a",   "T1b",   "T2a",   "T2b",   "T3a",   "T3b",   "T4chain", "T5chain",
      "T5.1mono", "C5i1", "C5i2", "C5i3", "C5i4", "ICKN1", "ICKN2",   "ICKN3",
      "ICKN4", "PCKN1p", "PCKN2p", "PCKN3p", "PCKN4p", "PCKN1n", "PCKN2n", "PCKN3n",
      "PCKN4n"};
  return ids;
}

void validate_entry(const json& e) {
  if (!e.is_object()) throw ConfigError("suite entries must be objects");
  for (auto it = e.begin(); it != e.end(); ++it)
    if (!kEntryKeys.count(it.key())) throw ConfigError("unknown key '" + it.key() + "'");
  if (!e.contains("identity_id") || !e.at("identity_id").is_string())
    throw ConfigError("entry needs a string 'identity_id'");
  const auto& ids = identity_ids();
  const std::string id = e.at("identity_id").get<std::string>();
  if (std::find(ids.begin(), ids.end(), id) == ids.end())
    throw ConfigError("unknown identity_id '" + id + "'");
}

IdentityReport run_entry(const json& e, const RunSettings& s) {
  validate_entry(e);
  QuadOptions q = s.quad;
  IdentityReport rep;
  try {
    rep = run_entry_impl(e, q);
  } catch (const IntegrabilityError& err) {
    return skipped(e, err.what());
  } catch (const ZeroDenominator& err) {
    return skipped(e, err.what());
  } catch (const ConvergenceError& err) {
    rep = skipped(e, err.what());
    rep.status = Status::Fail;
    rep.residual_abs = rep.residual_rel = kInf;
    return rep;
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
  if (!rep.params && e.contains("params")) rep.params = params_from_json(e.at("params"));
  finalize(rep, s.tol);
  return rep;
}

std::vector<IdentityReport> run_suite(const json& suite, const RunSettings& s) {
  if (!suite.is_array()) throw ConfigError("'suite' must be an array");
  for (const auto& e : suite) validate_entry(e);
  std::vector<IdentityReport> out(suite.size());
  parallel_for(suite.size(), s.threads,
               [&](std::size_t i) { out[i] = run_entry(suite[i], s); });
  return out;
}

namespace {

json bump_json(double lo, double hi) { return {{"family", "bump"}, {"lo", lo}, {"hi", hi}}; }

json log_bump_json(double lo, double hi) {
  return {{"family", "log_bump"}, {"lo", lo}, {"hi", hi}};
}

// r^s exp(-r^2) with s large enough for every CKN term to converge at 0.
json gauss_power_json(const CknParams& c) {
  const double N = c.N, p = c.p;
  const double need = std::max({1.0 + c.b - N / p, c.a - N / p, (c.sigma() - N) / p});
  return {{"family", "gauss_power"}, {"s", std::max(0.0, need + 0.5)}, {"q", 1.0}, {"m", 2.0}};
}

json entry(const std::string& id, const CknParams& c, const json& fam) {
  return {{"identity_id", id}, {"params", to_json(c)}, {"family", fam}};
}

}  // namespace

json default_suite() {
  json suite = json::array();
  // three parameter sets per p = 2 regime
  const std::vector<CknParams> p2 = {
      {3, 2, -1, 0},  {4, 2, 0, 0},     {5, 2, 0.5, 0.5}, {3, 2, 2, 0.5},
      {4, 2, 3, 1.2}, {5, 2, 4, 2},     {5, 2, 2, 0},     {4, 2, 1.5, 0},
      {6, 2, 2.5, 0.5}, {4, 2, 1.5, 1.5}, {3, 2, 0.5, 1}, {5, 2, 1, 2}};
  // general p, both signs of b + 1 - a
  const std::vector<CknParams> pos = {{5, 3, 0, 0}, {4, 2.5, -0.5, 0.2}, {3, 3, -1, 0}};
  const std::vector<CknParams> neg = {{3, 3, 3, 1}, {4, 2.5, 3, 1}, {5, 3, 4, 2}};

  std::vector<CknParams> all = p2;
  all.insert(all.end(), pos.begin(), pos.end());
  all.insert(all.end(), neg.begin(), neg.end());
  for (const auto& c : all) {
    for (const json& fam : {bump_json(1, 2), gauss_power_json(c)}) {
      for (double alpha : {0.5, 1.0, 2.0})
        for (const char* id : {"T1a", "T1b"}) {
          json e = entry(id, c, fam);
          e["alpha"] = alpha;
          suite.push_back(e);
        }
      for (const char* id : {"T2a", "T2b", "T3a", "T3b", "T4chain"})
        suite.push_back(entry(id, c, fam));
    }
  }

  for (const auto& c : p2) {
    const int k = static_cast<int>(classify_regime(c).tag) + 1;
    const std::string id = "ICKN" + std::to_string(k);
    suite.push_back(entry(id, c, bump_json(1, 2)));
    suite.push_back(entry(id, c, gauss_power_json(c)));
    suite.push_back(entry(id, c,
                          {{"family", "perturbed_extremizer"},
                           {"beta", 1.0},
                           {"eps", 0.1},
                           {"lo", 0.5},
                           {"hi", 1.5}}));
  }

  for (int d = 1; d <= 4; ++d) {
    for (const auto& c : pos) {
      const std::string id = "PCKN" + std::to_string(d) + "p";
      suite.push_back(entry(id, c, bump_json(1, 2)));
      suite.push_back(entry(id, c, gauss_power_json(c)));
    }
    for (const auto& c : neg) {
      const std::string id = "PCKN" + std::to_string(d) + "n";
      suite.push_back(entry(id, c, bump_json(1, 2)));
      suite.push_back(entry(id, c, gauss_power_json(c)));
    }
  }

  const json ckn_pair = {{"kind", "ckn_exp"},
                         {"params", to_json(CknParams{3, 2, -1, 0})},
                         {"t", -1.0}};
  const json tilted2 = {{"kind", "tilted"}, {"N_eff", 3},     {"p", 2},
                        {"gamma", 0.5},     {"s", -0.2},      {"m", 1},
                        {"kappa", -0.5},    {"rate", -0.3},   {"mu", 1}};
  const json tilted3 = {{"kind", "tilted"}, {"N_eff", 4},     {"p", 3},
                        {"gamma", 0.0},     {"s", 0.0},       {"m", 1},
                        {"kappa", -0.2},    {"rate", -0.5},   {"mu", 1}};
  const std::vector<json> p2_pairs = {{{"kind", "hardy"}, {"N_eff", 3}, {"p", 2}},
                                      {{"kind", "hardy"}, {"N_eff", 4}, {"p", 2}},
                                      ckn_pair, tilted2};
  const std::vector<json> chain_pairs = {p2_pairs[0], p2_pairs[1], ckn_pair, tilted2,
                                         {{"kind", "hardy"}, {"N_eff", 5}, {"p", 3}},
                                         tilted3};
  const std::vector<json> pair_fams = {bump_json(1, 2), log_bump_json(0.5, 2)};
  for (const auto& pr : chain_pairs)
    for (const auto& fam : pair_fams)
      suite.push_back({{"identity_id", "T5chain"}, {"pair", pr}, {"family", fam}});
  for (const auto& pr : p2_pairs)
    for (const auto& fam : pair_fams)
      for (const char* id : {"C5i1", "C5i2", "C5i3", "C5i4"})
        suite.push_back({{"identity_id", id}, {"pair", pr}, {"family", fam}});

  struct Mono {
    int N;
    std::vector<double> P;
    json pair;
  };
  const std::vector<Mono> monos = {
      {2, {1, 0}, {{"kind", "hardy"}, {"N_eff", 3}, {"p", 2}}},
      {1, {2}, {{"kind", "hardy"}, {"N_eff", 3}, {"p", 2}}},
      {2, {0.5, 0.5}, {{"kind", "hardy"}, {"N_eff", 3}, {"p", 3}}}};
  for (const auto& m : monos)
    for (const auto& fam : pair_fams)
      suite.push_back({{"identity_id", "T5.1mono"},
                       {"N", m.N},
                       {"P", m.P},
                       {"pair", m.pair},
                       {"family", fam}});

  // u = f(r)(1 + eps cos k theta) at N = 2
  for (const auto& c : {CknParams{2, 2, -1, 0}, CknParams{2, 3, 1, 0.5}})
    for (const char* id : {"T1a", "T1b", "T4chain"}) {
      json e = entry(id, c, bump_json(1, 2));
      e["nonradial"] = {{"eps", 0.3}, {"k", 2}};
      suite.push_back(e);
    }
  return suite;
}

}  // namespace cknlab
