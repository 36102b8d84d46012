#pragma once

#include "nvsim/sequences.hpp"

namespace nvsim {

// Pinned small-bath instances used by the oracle checks: for each seed a
// random 13C bath (2 or 3 spins) with one close pair so the nuclear-nuclear
// dynamics matter, point-dipole tensors, bath-free NV (D = 2870 MHz, E = 0),
// axial field. Deterministic under the seed.
struct OracleInstance {
  std::string name;
  SpinSystem system;
  std::vector<double> times_us;  // echo taus
};

OracleInstance make_oracle_instance(std::uint64_t seed, int n_spins);

// the published suite: seeds {11, 12, 13} x {2, 3} bath spins
std::vector<OracleInstance> pinned_validation_suite();

struct OracleReport {
  std::string name;
  int n_spins = 0;
  double dev_gcce1 = 0.0;  // max-abs deviation from exact
  double dev_gcce2 = 0.0;
};

// echo deviations of gCCE-1 and gCCE-2 against the exact oracle
OracleReport run_oracle_check(const OracleInstance& inst);

}  // namespace nvsim
