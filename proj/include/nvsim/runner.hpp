#pragma once

#include "nvsim/config.hpp"
#include "nvsim/validation.hpp"

namespace nvsim {

struct RunOptions {
  int threads = 0;  // 0: hardware concurrency
  bool keep_going = false;
  std::optional<std::string> out_dir_override;
};

struct RunOutcome {
  std::string out_dir;
  std::vector<std::string> artifacts;  // files written (relative to out_dir)
};

// central + optional nitrogen + bath per config, hyperfine assigned, dipolar
// couplings for pairs inside r_dip and all pairs touching the core
struct AssembledSystem {
  SpinSystem system;
  std::vector<int> core_ids;
};

AssembledSystem assemble_system(const RunConfig& cfg);

// executes the scenario and writes all artifacts; throws on hard errors
RunOutcome run_scenario(const RunConfig& cfg, const RunOptions& opts);

}  // namespace nvsim
