#pragma once

// Tagged JSON for parameters, profiles, weights, fields, Bessel pairs and
// reports. Objects use sorted keys; doubles print as shortest round-trip.

#include <optional>
#include <string>

#include <json.hpp>

#include "cknlab/bessel.hpp"
#include "cknlab/domain.hpp"
#include "cknlab/identities.hpp"

namespace cknlab {

using json = nlohmann::json;

inline constexpr const char* kSchema = "cknlab/1";

json to_json(const CknParams& c);
CknParams params_from_json(const json& j);

json to_json(const Regime& r);

// Input forms: bump | log_bump | gauss_power | power_exp | extremizer |
// perturbed_extremizer | modulated | tabulated, plus optional "scale" and
// "dilate". The two extremizer families need `ctx`.
RadialProfile profile_from_json(const json& j, const std::optional<CknParams>& ctx = {});
// Always emits a loadable low-level form.
json to_json(const RadialProfile& f);

// power | tilted | powersum | tabulated
WeightSpec weight_from_json(const json& j);
json to_json(const WeightSpec& w);

// powersum | log_derivative
RadialField field_from_json(const json& j);

// hardy | ckn_exp | tilted, or an explicit {V, phi, W?, p, N_eff, R?}.
BesselPair pair_from_json(const json& j);
json to_json(const BesselPair& pair);

json to_json(const Integral& i);
json to_json(const TermSet& t);
json to_json(const IdentityReport& r);

// Throws ConfigError with the key path when a required key is missing or
// has the wrong type.
double get_number(const json& j, const std::string& key);
double get_number(const json& j, const std::string& key, double fallback);

std::string dump(const json& j);

}  // namespace cknlab
