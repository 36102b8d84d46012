#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvsim/pulse.hpp"
#include "nvsim/spin_core.hpp"

namespace nvsim {

// ---------------------------------------------------------------------------
// configuration and result types
// ---------------------------------------------------------------------------

enum class BathStatePolicy { exact_mixed, sampled_product };

struct CceConfig {
  int order = 1;                   // 1 or 2
  std::vector<int> core_spins;     // spin ids fused into the zero-order subsystem
  double r_dip = 8.0;              // pair cutoff, Angstrom (order 2)
  BathStatePolicy bath_state = BathStatePolicy::exact_mixed;
  int n_samples = 25;              // sampled_product only
  std::uint64_t seed = 0;
  int dimension_cap = 4096;
  int threads = 1;                 // cluster-level parallelism
};

void validate_cce(const CceConfig& cfg);

struct SpinCluster {
  std::vector<int> members;  // sorted spin ids, core ids always included
  int order_tag = 0;         // bath spins beyond the core
};

struct CurveMeta {
  std::string protocol_tag;
  std::string config_hash;
  std::uint64_t seed = 0;
  int n_clusters_order1 = 0;
  int n_clusters_order2 = 0;
  std::string bath_state_policy;
  int n_samples = 1;
  std::string rng_algorithm;
  bool magnitude_warning = false;  // |L| exceeded 1 + 1e-6 somewhere
  int order2_fallbacks = 0;  // points where the pair layer left convergence
};

struct CoherenceCurve {
  std::vector<double> times_us;  // ascending; total tau for echo curves
  std::vector<Complex> values;
  CurveMeta meta;
};

// one product state per sample: z-basis level index for every bath spin
struct BathSampleSet {
  std::vector<std::vector<int>> levels;  // [sample][spin id]
};

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

// order-0 core cluster, one order-1 cluster per non-core spin, order-2
// clusters for non-core pairs closer than r_dip
std::vector<SpinCluster> enumerate_clusters(const SpinSystem& sys, const CceConfig& cfg);

// coherence contribution of one cluster. The central qubit is prepared in
// (|a> + |b>)/sqrt(2) of the core eigensystem, tensored with the bath state;
// returns <a|rho_central(t)|b> / <a|rho_central(0)|b> per time.
// bath_levels: product state per non-core member (parallel to the cluster's
// sorted extra ids); nullopt = exact maximally mixed bath.
std::vector<Complex> cluster_coherence(
    const SpinSystem& sys, const SpinCluster& cluster,
    const std::vector<int>& core_ids, const QubitLevels& qubit,
    const PulseProtocol& protocol, const std::vector<double>& times,
    const std::optional<std::vector<int>>& bath_levels = std::nullopt);

// standard CCE factorization: every cluster contribution is divided by the
// contributions of its sub-clusters; sub-cluster magnitudes below 1e-12 mark
// the time point as saturated (|L| -> 0) instead of amplifying noise
CoherenceCurve combine_gcce(const std::vector<CoherenceCurve>& per_cluster_curves,
                            const std::vector<SpinCluster>& clusters);

// n independent product states, each nuclear spin in a uniformly random
// z-basis eigenstate; deterministic under (seed, sample index, spin index)
BathSampleSet sample_bath_states(const SpinSystem& sys, int n, std::uint64_t seed);

// every bath basis state exactly once (stratified limit of sampled_product)
BathSampleSet all_basis_states(const SpinSystem& sys,
                               const std::vector<int>& core_ids);

// full gCCE run: enumerate clusters, evaluate them (optionally in parallel),
// combine per sample, average samples
CoherenceCurve run_gcce(const SpinSystem& sys, const CceConfig& cfg,
                        const PulseProtocol& protocol,
                        const std::vector<double>& times);

struct GcceDetailedResult {
  CoherenceCurve mean;
  std::vector<std::vector<Complex>> per_sample;  // combined curve per sample
};

GcceDetailedResult run_gcce_detailed(const SpinSystem& sys, const CceConfig& cfg,
                                     const PulseProtocol& protocol,
                                     const std::vector<double>& times);

// exact full-Hilbert-space oracle (always exact_mixed over the non-core bath)
CoherenceCurve exact_coherence(const SpinSystem& sys, const PulseProtocol& protocol,
                               const std::vector<double>& times,
                               const std::vector<int>& core_spins = {});

// default core composition: nitrogen-like core spins plus the strongest-|Azz|
// 13C, per the id rules documented in the README
std::vector<int> default_core_spins(const SpinSystem& sys);

}  // namespace nvsim
