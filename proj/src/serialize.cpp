#include "cknlab/serialize.hpp"

#include <cmath>

#include "cknlab/errors.hpp"

namespace cknlab {

namespace {

json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

std::string get_string(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string())
    throw ConfigError("missing or non-string key '" + key + "'");
  return j.at(key).get<std::string>();
}

std::vector<double> get_vector(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_array())
    throw ConfigError("missing or non-array key '" + key + "'");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError("non-numeric entry in '" + key + "'");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<PowerTerm> get_terms(const json& j) {
  if (!j.contains("terms") || !j.at("terms").is_array())
    throw ConfigError("missing or non-array key 'terms'");
  std::vector<PowerTerm> out;
  for (const auto& t : j.at("terms")) {
    if (!t.is_array() || t.size() != 2 || !t[0].is_number() || !t[1].is_number())
      throw ConfigError("each term must be [coef, exponent]");
    out.push_back({t[0].get<double>(), t[1].get<double>()});
  }
  return out;
}

json terms_json(const std::vector<PowerTerm>& terms) {
  json arr = json::array();
  for (const auto& t : terms) arr.push_back({t.coef, t.exponent});
  return arr;
}

PowerExp power_exp_from(const json& j) {
  return {get_number(j, "coef", 1.0), get_number(j, "kappa", 0.0),
          get_number(j, "rate", 0.0), get_number(j, "m", 1.0)};
}

json power_exp_json(const PowerExp& pe) {
  return {{"coef", pe.coef}, {"kappa", pe.kappa}, {"rate", pe.rate}, {"m", pe.m}};
}

Bump bump_from(const json& j, bool log_coords) {
  Bump b;
  b.lo = get_number(j, "lo");
  b.hi = get_number(j, "hi");
  b.width = get_number(j, "width", 1.0);
  b.coef = get_number(j, "coef", 1.0);
  b.log_coords = j.value("log_coords", log_coords);
  if (!(b.lo > 0.0) || !(b.hi > b.lo)) throw ConfigError("bump needs 0 < lo < hi");
  return b;
}

json bump_json(const Bump& b) {
  return {{"lo", b.lo}, {"hi", b.hi}, {"width", b.width}, {"coef", b.coef},
          {"log_coords", b.log_coords}};
}

RegimeTag context_regime(const json& j, const CknParams& c) {
  if (j.contains("regime")) return regime_tag_from_string(get_string(j, "regime"));
  return classify_regime(c).tag;
}

}  // namespace

double get_number(const json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number())
    throw ConfigError("missing or non-numeric key '" + key + "'");
  return j.at(key).get<double>();
}

double get_number(const json& j, const std::string& key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("non-numeric key '" + key + "'");
  return j.at(key).get<double>();
}

json to_json(const CknParams& c) {
  return {{"N", c.N}, {"p", c.p}, {"a", c.a}, {"b", c.b}};
}

CknParams params_from_json(const json& j) {
  CknParams c;
  const double n = get_number(j, "N");
  if (n != std::floor(n)) throw ConfigError("N must be an integer");
  c.N = static_cast<int>(n);
  c.p = get_number(j, "p", 2.0);
  c.a = get_number(j, "a");
  c.b = get_number(j, "b");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

json to_json(const Regime& r) {
  return {{"regime", to_string(r.tag)},
          {"sharp_constant", r.sharp_constant},
          {"extremizer", to_string(r.extremizer)},
          {"attained", r.attained}};
}

RadialProfile profile_from_json(const json& j, const std::optional<CknParams>& ctx) {
  if (!j.is_object()) throw ConfigError("profile must be an object");
  const std::string fam = get_string(j, "family");
  RadialProfile f;
  if (fam == "bump") {
    f = RadialProfile(bump_from(j, false), "bump");
  } else if (fam == "log_bump") {
    f = RadialProfile(bump_from(j, true), "log_bump");
  } else if (fam == "gauss_power") {
    f = make_gauss_power(get_number(j, "s"), get_number(j, "q"), get_number(j, "m"));
  } else if (fam == "power_exp") {
    f = RadialProfile(power_exp_from(j), "power_exp");
  } else if (fam == "extremizer" || fam == "perturbed_extremizer") {
    if (!ctx) throw ConfigError("family '" + fam + "' needs params");
    const RegimeTag tag = context_regime(j, *ctx);
    const double beta = get_number(j, "beta", 1.0);
    if (fam == "extremizer")
      f = make_extremizer(*ctx, tag, beta, get_number(j, "coef", 1.0));
    else
      f = make_perturbed_extremizer(*ctx, tag, beta, get_number(j, "eps"),
                                    get_number(j, "lo", 0.5), get_number(j, "hi", 1.5));
  } else if (fam == "modulated") {
    if (!j.contains("base") || !j.contains("window"))
      throw ConfigError("modulated needs 'base' and 'window'");
    f = make_modulated(power_exp_from(j.at("base")), get_number(j, "c0", 1.0),
                       get_number(j, "eps", 0.0), bump_from(j.at("window"), false));
  } else if (fam == "tabulated") {
    Tabulated t{get_vector(j, "r"), get_vector(j, "f"), get_vector(j, "df")};
    if (t.r.size() < 2 || t.f.size() != t.r.size() || t.df.size() != t.r.size())
      throw ConfigError("tabulated profile needs equal-length r, f, df (>= 2 nodes)");
    f = RadialProfile(std::move(t), "tabulated");
  } else {
    throw ConfigError("unknown profile family '" + fam + "'");
  }
  if (j.contains("scale")) f = f.scaled(get_number(j, "scale"));
  if (j.contains("dilate")) f = f.dilated(get_number(j, "dilate"));
  return f;
}

json to_json(const RadialProfile& f) {
  return std::visit(
      [&](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        json out;
        if constexpr (std::is_same_v<T, Bump>) {
          out = bump_json(s);
          out["family"] = s.log_coords ? "log_bump" : "bump";
        } else if constexpr (std::is_same_v<T, PowerExp>) {
          out = power_exp_json(s);
          out["family"] = "power_exp";
        } else if constexpr (std::is_same_v<T, Modulated>) {
          out = {{"family", "modulated"},
                 {"base", power_exp_json(s.base)},
                 {"c0", s.c0},
                 {"eps", s.eps},
                 {"window", bump_json(s.window)}};
        } else {
          out = {{"family", "tabulated"}, {"r", s.r}, {"f", s.f}, {"df", s.df}};
        }
        if (!f.family().empty()) out["label"] = f.family();
        return out;
      },
      f.spec());
}

WeightSpec weight_from_json(const json& j) {
  if (j.is_number()) return WeightSpec::power(j.get<double>());
  if (!j.is_object()) throw ConfigError("weight must be an object");
  const std::string kind = get_string(j, "weight");
  if (kind == "power") return WeightSpec::power(get_number(j, "gamma"), get_number(j, "coef", 1.0));
  if (kind == "tilted")
    return WeightSpec::tilted(get_number(j, "gamma"), get_number(j, "s"),
                              get_number(j, "m", 1.0), get_number(j, "coef", 1.0));
  if (kind == "powersum")
    return WeightSpec::power_sum(get_terms(j), get_number(j, "s", 0.0),
                                 get_number(j, "m", 1.0));
  if (kind == "tabulated") {
    auto r = get_vector(j, "r");
    auto v = get_vector(j, "values");
    try {
      return WeightSpec::tabulated(std::move(r), std::move(v));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  throw ConfigError("unknown weight kind '" + kind + "'");
}

json to_json(const WeightSpec& w) {
  if (w.is_tabulated()) return {{"weight", "tabulated"}, {"r", w.grid()}, {"values", w.values()}};
  return {{"weight", "powersum"},
          {"terms", terms_json(w.terms())},
          {"s", w.exp_rate()},
          {"m", w.exp_power()}};
}

RadialField field_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("field must be an object");
  const std::string kind = get_string(j, "field");
  if (kind == "powersum") return RadialField::power_sum(get_terms(j));
  if (kind == "log_derivative") {
    if (!j.contains("phi")) throw ConfigError("log_derivative needs 'phi'");
    return RadialField::log_derivative(profile_from_json(j.at("phi")));
  }
  throw ConfigError("unknown field kind '" + kind + "'");
}

BesselPair pair_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("pair must be an object");
  if (j.contains("V")) {
    BesselPair pair;
    pair.name = j.value("name", std::string("custom"));
    pair.V = weight_from_json(j.at("V"));
    if (!j.contains("phi")) throw ConfigError("pair needs 'phi'");
    pair.phi = profile_from_json(j.at("phi"));
    pair.p = get_number(j, "p", 2.0);
    pair.n_eff = get_number(j, "N_eff");
    pair.R = get_number(j, "R", kInf);
    if (j.contains("W")) {
      pair.W = weight_from_json(j.at("W"));
    } else {
      const double hi = std::isfinite(pair.R) ? pair.R : 1e3;
      pair.W = derive_W(pair.V, pair.phi, pair.p, pair.n_eff, log_grid(1e-3, hi, 8193));
    }
    return pair;
  }
  const std::string kind = get_string(j, "kind");
  if (kind == "hardy") return hardy_pair(get_number(j, "N_eff"), get_number(j, "p", 2.0));
  if (kind == "ckn_exp") {
    if (!j.contains("params")) throw ConfigError("ckn_exp pair needs 'params'");
    return ckn_exp_pair(params_from_json(j.at("params")), get_number(j, "t"));
  }
  if (kind == "tilted")
    return tilted_pair(get_number(j, "N_eff"), get_number(j, "p", 2.0),
                       get_number(j, "gamma"), get_number(j, "s"), get_number(j, "m", 1.0),
                       get_number(j, "kappa"), get_number(j, "rate"),
                       get_number(j, "mu", 1.0));
  throw ConfigError("unknown pair kind '" + kind + "'");
}

json to_json(const BesselPair& pair) {
  json out = {{"name", pair.name},      {"V", to_json(pair.V)}, {"W", to_json(pair.W)},
              {"phi", to_json(pair.phi)}, {"p", pair.p},        {"N_eff", pair.n_eff}};
  out["R"] = finite_or_null(pair.R);
  return out;
}

json to_json(const Integral& i) { return {{"value", i.value}, {"error", i.error}}; }

json to_json(const TermSet& t) {
  return {{"alpha", t.alpha},       {"T_grad", to_json(t.grad)}, {"T_rad", to_json(t.rad)},
          {"T_pot", to_json(t.pot)}, {"T_div", to_json(t.div)},  {"T_rem", to_json(t.rem)},
          {"T_rem_rad", to_json(t.rem_rad)}};
}

json to_json(const IdentityReport& r) {
  json params = json::object();
  if (r.params) params = to_json(*r.params);
  if (!r.P.empty()) params["P"] = r.P;
  json out = {{"identity_id", r.identity_id},
              {"params", params},
              {"family", r.family},
              {"status", to_string(r.status)}};
  if (!r.detail.empty()) out["detail"] = r.detail;
  if (!r.message.empty()) out["message"] = r.message;
  if (r.status != Status::SkippedIntegrability) {
    out["lhs"] = finite_or_null(r.lhs);
    out["rhs"] = finite_or_null(r.rhs);
    out["residual_abs"] = finite_or_null(r.residual_abs);
    out["residual_rel"] = finite_or_null(r.residual_rel);
    out["quad_error"] = finite_or_null(r.quad_error);
    out["term_scale"] = finite_or_null(r.term_scale);
    out["remainder"] = finite_or_null(r.remainder);
    if (r.terms) out["terms"] = to_json(*r.terms);
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2); }

}  // namespace cknlab
