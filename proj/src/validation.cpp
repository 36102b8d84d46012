#include "nvsim/validation.hpp"

#include <cmath>

#include "nvsim/bath.hpp"

namespace nvsim {

OracleInstance make_oracle_instance(std::uint64_t seed, int n_spins) {
  if (n_spins < 1 || n_spins > 4)
    throw ConfigError("oracle instance supports 1..4 bath spins");
  const CounterRng rng(seed);

  auto unit_vector = [&](std::uint64_t ctr) {
    const double u = rng.uniform(rng_stream::test_generator, 2 * ctr);
    const double v = rng.uniform(rng_stream::test_generator, 2 * ctr + 1);
    const double cos_t = 2.0 * u - 1.0;
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2.0 * constants::pi * v;
    return Eigen::Vector3d(sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t);
  };

  std::vector<BathSpin> bath;
  // first spin at 3.5..5.5 A, second forms a close pair 2.0..3.0 A away,
  // further spins independent at 4.5..7 A
  const double r1 = 3.5 + 2.0 * rng.uniform(rng_stream::test_generator, 100);
  BathSpin s1;
  s1.spec = species::c13();
  s1.position = r1 * unit_vector(0);
  bath.push_back(s1);
  if (n_spins >= 2) {
    const double sep = 2.0 + 1.0 * rng.uniform(rng_stream::test_generator, 101);
    BathSpin s2;
    s2.spec = species::c13();
    s2.position = s1.position + sep * unit_vector(1);
    bath.push_back(s2);
  }
  for (int k = 2; k < n_spins; ++k) {
    const double r = 4.5 + 2.5 * rng.uniform(rng_stream::test_generator, 102 + k);
    BathSpin s;
    s.spec = species::c13();
    s.position = r * unit_vector(2 + k);
    bath.push_back(s);
  }
  bath = assign_hyperfine(bath, std::nullopt);

  CentralSpinModel central;
  central.d_mhz = 2870.0;
  central.e_mhz = 0.0;

  OracleInstance inst;
  inst.name = "seed" + std::to_string(seed) + "_n" + std::to_string(n_spins);
  inst.system = make_system(central, bath, pair_couplings_from_positions(bath),
                            Eigen::Vector3d(0, 0, 30.0));
  inst.times_us = uniform_time_grid(200.0, 101);
  return inst;
}

std::vector<OracleInstance> pinned_validation_suite() {
  std::vector<OracleInstance> suite;
  for (std::uint64_t seed : {11ull, 12ull, 13ull})
    for (int n : {2, 3}) suite.push_back(make_oracle_instance(seed, n));
  return suite;
}

OracleReport run_oracle_check(const OracleInstance& inst) {
  PulseProtocol protocol;
  protocol.kind = ProtocolKind::hahn_echo;

  const CoherenceCurve exact =
      exact_coherence(inst.system, protocol, inst.times_us, {});

  CceConfig cfg;
  cfg.core_spins = {};
  cfg.bath_state = BathStatePolicy::exact_mixed;
  cfg.r_dip = 10.0;

  cfg.order = 1;
  const CoherenceCurve g1 =
      run_hahn_echo(inst.system, cfg, protocol.qubit, inst.times_us);
  cfg.order = 2;
  const CoherenceCurve g2 =
      run_hahn_echo(inst.system, cfg, protocol.qubit, inst.times_us);

  OracleReport rep;
  rep.name = inst.name;
  rep.n_spins = static_cast<int>(inst.system.spins.size());
  for (size_t k = 0; k < inst.times_us.size(); ++k) {
    rep.dev_gcce1 = std::max(rep.dev_gcce1, std::abs(g1.values[k] - exact.values[k]));
    rep.dev_gcce2 = std::max(rep.dev_gcce2, std::abs(g2.values[k] - exact.values[k]));
  }
  return rep;
}

}  // namespace nvsim
