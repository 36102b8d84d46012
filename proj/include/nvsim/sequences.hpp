#pragma once

#include "nvsim/cce.hpp"

namespace nvsim {

// uniform grid starting at 0, t_max inclusive
std::vector<double> uniform_time_grid(double t_max_us, int n_points);

// rough quasi-static dephasing scale of a bath, used for default grids:
// T2* ~ sqrt(2) / (2 pi b) with b^2 the second moment of the Azz distribution
double estimate_t2star_us(const SpinSystem& sys, const std::vector<int>& core_ids);

// free induction decay: superposition prepared on the selected qubit pair,
// free evolution, off-diagonal readout; ideal pulses act as identity on the bath
CoherenceCurve run_ramsey(const SpinSystem& sys, const CceConfig& cfg,
                          const QubitSelector& qubit,
                          const std::vector<double>& times);

// Hahn echo over total free-evolution times tau: tau/2, ideal pi swap of the
// qubit pair (identity on bath and spectator levels), tau/2, readout
CoherenceCurve run_hahn_echo(const SpinSystem& sys, const CceConfig& cfg,
                             const QubitSelector& qubit,
                             const std::vector<double>& taus);

}  // namespace nvsim
