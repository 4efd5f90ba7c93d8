#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cknlab {

// Exit codes: 0 all pass, 1 some residual above tolerance, 2 config,
// regime or integrability problem.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cknlab
