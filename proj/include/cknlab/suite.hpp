#pragma once

// Identity suites: JSON entries -> reports, run in parallel with results
// kept in entry order.

#include <vector>

#include "cknlab/identities.hpp"
#include "cknlab/serialize.hpp"

namespace cknlab {

struct RunSettings {
  double tol = kDefaultTol;
  QuadOptions quad;
  int threads = 0;  // 0: CKNLAB_THREADS or hardware count
};

// Every identity id the catalog knows.
const std::vector<std::string>& identity_ids();

// Throws ConfigError on unknown keys or ids.
void validate_entry(const json& entry);

// One entry -> one report. IntegrabilityError becomes a skipped report;
// RegimeError and ConfigError propagate.
IdentityReport run_entry(const json& entry, const RunSettings& s);

std::vector<IdentityReport> run_suite(const json& suite, const RunSettings& s);

// All identity ids over >= 3 parameter sets per regime and >= 2 profile
// families.
json default_suite();

}  // namespace cknlab
