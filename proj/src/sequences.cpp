#include "nvsim/sequences.hpp"

#include <cmath>

namespace nvsim {

std::vector<double> uniform_time_grid(double t_max_us, int n_points) {
  if (!(t_max_us > 0) || n_points < 2)
    throw ConfigError("time grid needs t_max > 0 and at least 2 points");
  std::vector<double> t(n_points);
  for (int k = 0; k < n_points; ++k)
    t[k] = t_max_us * static_cast<double>(k) / (n_points - 1);
  return t;
}

double estimate_t2star_us(const SpinSystem& sys, const std::vector<int>& core_ids) {
  double second_moment = 0.0;  // MHz^2
  for (int i = 0; i < static_cast<int>(sys.spins.size()); ++i) {
    if (std::find(core_ids.begin(), core_ids.end(), i) != core_ids.end()) continue;
    const double s = sys.spins[i].spec.spin;
    const double azz = sys.spins[i].hyperfine.azz();
    second_moment += azz * azz * s * (s + 1.0) / 3.0;
  }
  if (second_moment <= 0) return 100.0;
  return std::sqrt(2.0) / (2.0 * constants::pi * std::sqrt(second_moment));
}

CoherenceCurve run_ramsey(const SpinSystem& sys, const CceConfig& cfg,
                          const QubitSelector& qubit,
                          const std::vector<double>& times) {
  PulseProtocol protocol;
  protocol.kind = ProtocolKind::ramsey;
  protocol.qubit = qubit;
  return run_gcce(sys, cfg, protocol, times);
}

CoherenceCurve run_hahn_echo(const SpinSystem& sys, const CceConfig& cfg,
                             const QubitSelector& qubit,
                             const std::vector<double>& taus) {
  PulseProtocol protocol;
  protocol.kind = ProtocolKind::hahn_echo;
  protocol.qubit = qubit;
  return run_gcce(sys, cfg, protocol, taus);
}

}  // namespace nvsim
