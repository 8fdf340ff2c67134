// Command-line front end: check, infer, analyze, simulate, qm, properties.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mps/global_lts.hpp"
#include "mps/session.hpp"
#include "mps/terms.hpp"

namespace mps {

// Exhaustive co-simulation of a session N || [] with the configuration
// G || [], breadth first and up to `depth` steps.
struct CoSimReport {
  std::size_t pairs = 0;  // distinct (session, configuration) pairs visited
  std::size_t fidelity_violations = 0;  // a type step the session cannot follow
  std::size_t reduction_violations = 0;  // a session step the type cannot follow
  std::size_t typing_violations = 0;  // a matched pair that no longer type checks
  std::size_t deadlocks = 0;
  std::vector<std::string> failures;  // first few, rendered

  std::size_t violations() const {
    return fidelity_violations + reduction_violations + typing_violations + deadlocks;
  }
};

CoSimReport co_simulate(const Global& g, const Network& n, int depth);

// Returns the exit status. Reports go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mps
