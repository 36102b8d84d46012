#include "nvsim/cce.hpp"

#include "nvsim/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace nvsim {

namespace {

constexpr double kSaturationGuard = 1e-12;

std::string cluster_name(const SpinCluster& c) {
  std::ostringstream os;
  os << "{";
  for (size_t k = 0; k < c.members.size(); ++k)
    os << (k ? "," : "") << c.members[k];
  os << "}";
  return os.str();
}

// members list with core ids first (ascending), then extras (ascending);
// cluster systems are built in this order so the core occupies the leading
// tensor factors and the qubit vectors from the core system stay valid
std::vector<int> core_first_order(const std::vector<int>& members,
                                  const std::vector<int>& core_ids) {
  std::vector<int> extras;
  for (int id : members)
    if (std::find(core_ids.begin(), core_ids.end(), id) == core_ids.end())
      extras.push_back(id);
  std::vector<int> ordered = core_ids;
  ordered.insert(ordered.end(), extras.begin(), extras.end());
  return ordered;
}

struct ReadoutWorkspace {
  Vector phase;      // eigenbasis phases for one time step
  Vector c0;         // initial state in eigenbasis
  Vector scratch_a;  // full-dimension scratch
  Vector scratch_b;
};

// <a| Tr_bath |phi><phi| |b> for a product-basis vector phi, core leading
Complex offdiag_element(const Vector& phi, const Vector& a, const Vector& b,
                        int core_dim, int bath_dim) {
  using RowMajorMap =
      Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>;
  RowMajorMap m(phi.data(), core_dim, bath_dim);
  Eigen::RowVectorXcd ra = a.adjoint() * m;
  Eigen::RowVectorXcd rb = b.adjoint() * m;
  Complex out(0, 0);
  for (int k = 0; k < bath_dim; ++k) out += ra(k) * std::conj(rb(k));
  return out;
}

void apply_core_operator(Vector& phi, const Matrix& op, int core_dim, int bath_dim) {
  using RowMajorMap = Eigen::Map<
      Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  RowMajorMap m(phi.data(), core_dim, bath_dim);
  m = op * m;
}

}  // namespace

void validate_cce(const CceConfig& cfg) {
  if (cfg.order != 1 && cfg.order != 2)
    throw ConfigError("cce order must be 1 or 2, got " + std::to_string(cfg.order));
  if (cfg.order == 2 && !(cfg.r_dip > 0))
    throw ConfigError("r_dip must be > 0 for order-2 expansion");
  if (cfg.n_samples < 1) throw ConfigError("n_samples must be >= 1");
  std::set<int> seen(cfg.core_spins.begin(), cfg.core_spins.end());
  if (seen.size() != cfg.core_spins.size())
    throw ConfigError("core spin ids not distinct");
  if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
}

std::vector<int> default_core_spins(const SpinSystem& sys) {
  std::vector<int> core;
  int best_c13 = -1;
  double best_azz = -1.0;
  for (int i = 0; i < static_cast<int>(sys.spins.size()); ++i) {
    const auto& s = sys.spins[i];
    if (s.spec.label == "15N") core.push_back(i);
    if (s.spec.label == "13C" && std::abs(s.hyperfine.azz()) > best_azz) {
      best_azz = std::abs(s.hyperfine.azz());
      best_c13 = i;
    }
  }
  if (best_c13 >= 0) core.push_back(best_c13);
  std::sort(core.begin(), core.end());
  return core;
}

std::vector<SpinCluster> enumerate_clusters(const SpinSystem& sys,
                                            const CceConfig& cfg) {
  validate_cce(cfg);
  const int n = static_cast<int>(sys.spins.size());
  std::vector<int> core = cfg.core_spins;
  std::sort(core.begin(), core.end());
  for (int id : core)
    if (id < 0 || id >= n) throw ConfigError("core spin id out of range");

  std::vector<int> others;
  for (int i = 0; i < n; ++i)
    if (std::find(core.begin(), core.end(), i) == core.end()) others.push_back(i);

  auto make_cluster = [&](std::vector<int> extras, int order) {
    SpinCluster c;
    c.members = core;
    c.members.insert(c.members.end(), extras.begin(), extras.end());
    std::sort(c.members.begin(), c.members.end());
    c.order_tag = order;
    long dim = sys.central.spec.dim();
    for (int id : c.members) dim *= sys.spins[id].spec.dim();
    if (dim > cfg.dimension_cap)
      throw ConfigError("cluster " + cluster_name(c) + " Hilbert dimension " +
                        std::to_string(dim) + " exceeds cap " +
                        std::to_string(cfg.dimension_cap));
    return c;
  };

  std::vector<SpinCluster> clusters;
  clusters.push_back(make_cluster({}, 0));
  for (int i : others) clusters.push_back(make_cluster({i}, 1));
  if (cfg.order >= 2) {
    for (size_t a = 0; a < others.size(); ++a)
      for (size_t b = a + 1; b < others.size(); ++b) {
        const double dist =
            (sys.spins[others[a]].position - sys.spins[others[b]].position).norm();
        if (dist < cfg.r_dip)
          clusters.push_back(make_cluster({others[a], others[b]}, 2));
      }
  }
  return clusters;
}

// ---------------------------------------------------------------------------
// single-cluster evolution
// ---------------------------------------------------------------------------

namespace {

struct ClusterContext {
  SpinSystem cluster_sys;
  Propagator prop;
  Matrix pulse;  // core-space pi pulse for echo, empty for ramsey
  int core_dim = 0;
  int bath_dim = 0;
  std::vector<int> extras;  // sorted non-core member ids (global numbering)
  Vector psi0_core;

  ClusterContext(SpinSystem s, Propagator p) : cluster_sys(std::move(s)), prop(std::move(p)) {}
};

ClusterContext build_cluster_context(const SpinSystem& sys, const SpinCluster& cluster,
                                     const std::vector<int>& core_ids,
                                     const QubitLevels& qubit,
                                     const PulseProtocol& protocol) {
  const std::vector<int> ordered = core_first_order(cluster.members, core_ids);
  SpinSystem cluster_sys = subsystem(sys, ordered);
  Propagator prop(build_hamiltonian(cluster_sys));
  ClusterContext ctx(std::move(cluster_sys), std::move(prop));
  for (int id : ordered)
    if (std::find(core_ids.begin(), core_ids.end(), id) == core_ids.end())
      ctx.extras.push_back(id);

  int core_dim = sys.central.spec.dim();
  for (int id : core_ids) core_dim *= sys.spins[id].spec.dim();
  ctx.core_dim = core_dim;
  ctx.bath_dim = ctx.cluster_sys.dimension() / core_dim;
  ctx.psi0_core = (qubit.state_a + qubit.state_b) / std::sqrt(2.0);

  if (protocol.kind == ProtocolKind::hahn_echo) {
    const Matrix id = Matrix::Identity(core_dim, core_dim);
    ctx.pulse = id - qubit.state_a * qubit.state_a.adjoint() -
                qubit.state_b * qubit.state_b.adjoint() +
                qubit.state_a * qubit.state_b.adjoint() +
                qubit.state_b * qubit.state_a.adjoint();
  }
  return ctx;
}

// evolve one bath basis state and accumulate the weighted off-diagonal element
void accumulate_curve(const ClusterContext& ctx, const PulseProtocol& protocol,
                      const std::vector<double>& times, const QubitLevels& qubit,
                      int bath_basis_index, double weight,
                      std::vector<Complex>& acc) {
  const int d = ctx.core_dim * ctx.bath_dim;
  Vector phi0 = Vector::Zero(d);
  for (int c = 0; c < ctx.core_dim; ++c)
    phi0(c * ctx.bath_dim + bath_basis_index) = ctx.psi0_core(c);

  const Vector c0 = ctx.prop.to_eigenbasis(phi0);

  Vector c1(d), phi(d);
  for (size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (protocol.kind == ProtocolKind::ramsey) {
      c1 = c0;
      ctx.prop.phase_advance(c1, t);
      phi = ctx.prop.from_eigenbasis(c1);
    } else {
      c1 = c0;
      ctx.prop.phase_advance(c1, 0.5 * t);
      phi = ctx.prop.from_eigenbasis(c1);
      apply_core_operator(phi, ctx.pulse, ctx.core_dim, ctx.bath_dim);
      c1 = ctx.prop.to_eigenbasis(phi);
      ctx.prop.phase_advance(c1, 0.5 * t);
      phi = ctx.prop.from_eigenbasis(c1);
    }
    acc[k] += weight * offdiag_element(phi, qubit.state_a, qubit.state_b,
                                       ctx.core_dim, ctx.bath_dim) /
              0.5;
  }
}

int bath_basis_index(const ClusterContext& ctx, const SpinSystem& sys,
                     const std::vector<int>& levels_per_extra) {
  int idx = 0;
  for (size_t k = 0; k < ctx.extras.size(); ++k) {
    const int dim = sys.spins[ctx.extras[k]].spec.dim();
    idx = idx * dim + levels_per_extra[k];
  }
  return idx;
}

}  // namespace

std::vector<Complex> cluster_coherence(
    const SpinSystem& sys, const SpinCluster& cluster,
    const std::vector<int>& core_ids, const QubitLevels& qubit,
    const PulseProtocol& protocol, const std::vector<double>& times,
    const std::optional<std::vector<int>>& bath_levels) {
  const auto ctx = build_cluster_context(sys, cluster, core_ids, qubit, protocol);
  std::vector<Complex> acc(times.size(), Complex(0, 0));
  if (bath_levels) {
    if (static_cast<int>(bath_levels->size()) != static_cast<int>(ctx.extras.size()))
      throw DomainError("cluster_coherence: bath level list does not match cluster");
    accumulate_curve(ctx, protocol, times, qubit,
                     bath_basis_index(ctx, sys, *bath_levels), 1.0, acc);
  } else {
    const double w = 1.0 / ctx.bath_dim;
    for (int beta = 0; beta < ctx.bath_dim; ++beta)
      accumulate_curve(ctx, protocol, times, qubit, beta, w, acc);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// factorization
// ---------------------------------------------------------------------------

namespace {

// extras of a cluster (members minus core), used as the factorization key
std::vector<int> cluster_extras(const SpinCluster& c, const std::set<int>& core) {
  std::vector<int> extras;
  for (int id : c.members)
    if (!core.count(id)) extras.push_back(id);
  return extras;
}

struct Factorization {
  std::vector<std::vector<Complex>> corrections;  // per cluster (input order)
  std::vector<Complex> combined;
  std::vector<bool> saturated;
  bool magnitude_warning = false;
  int order2_fallbacks = 0;  // time points where the pair layer diverged
};

Factorization factorize(const std::vector<std::vector<Complex>>& raw,
                        const std::vector<SpinCluster>& clusters,
                        const std::set<int>& core, size_t n_times) {
  std::map<std::vector<int>, size_t> by_extras;
  for (size_t c = 0; c < clusters.size(); ++c) {
    auto key = cluster_extras(clusters[c], core);
    if (!by_extras.emplace(std::move(key), c).second)
      throw ConfigError("duplicate cluster in combine_gcce: " +
                        cluster_name(clusters[c]));
  }

  // process in ascending order so sub-cluster corrections exist when needed
  std::vector<size_t> order(clusters.size());
  for (size_t c = 0; c < clusters.size(); ++c) order[c] = c;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (clusters[a].order_tag != clusters[b].order_tag)
      return clusters[a].order_tag < clusters[b].order_tag;
    return clusters[a].members < clusters[b].members;
  });

  Factorization out;
  out.corrections.assign(clusters.size(), std::vector<Complex>(n_times, Complex(1, 0)));
  out.combined.assign(n_times, Complex(1, 0));
  out.saturated.assign(n_times, false);

  std::vector<Complex> low_order(n_times, Complex(1, 0));   // orders 0 and 1
  std::vector<Complex> pair_layer(n_times, Complex(1, 0));  // order-2 corrections

  for (size_t oi : order) {
    const auto extras = cluster_extras(clusters[oi], core);
    auto& corr = out.corrections[oi];
    for (size_t t = 0; t < n_times; ++t) corr[t] = raw[oi][t];

    // divide by the corrections of all proper sub-clusters
    const int m = static_cast<int>(extras.size());
    for (int mask = 0; mask < (1 << m) - 1; ++mask) {
      std::vector<int> sub;
      for (int bit = 0; bit < m; ++bit)
        if (mask & (1 << bit)) sub.push_back(extras[bit]);
      auto it = by_extras.find(sub);
      if (it == by_extras.end()) {
        if (sub.empty())
          throw ConfigError("combine_gcce: missing order-0 core cluster");
        continue;  // pair outside r_dip has no order-1 conflict; singles always exist
      }
      const auto& sub_corr = out.corrections[it->second];
      for (size_t t = 0; t < n_times; ++t) {
        if (std::abs(sub_corr[t]) < kSaturationGuard) {
          out.saturated[t] = true;
          corr[t] = Complex(1, 0);
        } else {
          corr[t] /= sub_corr[t];
        }
      }
    }
    auto& layer = clusters[oi].order_tag >= 2 ? pair_layer : low_order;
    for (size_t t = 0; t < n_times; ++t) layer[t] *= corr[t];
  }

  for (size_t t = 0; t < n_times; ++t) {
    // a fully decayed low-order product marks the time point as saturated:
    // dividing pair clusters by it would only amplify noise
    if (std::abs(low_order[t]) < kSaturationGuard) out.saturated[t] = true;
    if (out.saturated[t]) {
      out.combined[t] = Complex(0, 0);
      continue;
    }
    Complex value = low_order[t] * pair_layer[t];
    // the pair layer is an asymptotic correction; where it produces a
    // non-physical magnitude the expansion has left its convergence region
    // and the stable low-order result is kept for that time point
    if (!std::isfinite(std::abs(value)) || std::abs(value) > 1.0 + 1e-6) {
      value = low_order[t];
      ++out.order2_fallbacks;
      if (!std::isfinite(std::abs(value)) || std::abs(value) > 1.0 + 1e-6) {
        out.magnitude_warning = true;
      }
    }
    out.combined[t] = value;
  }
  return out;
}

std::set<int> infer_core(const std::vector<SpinCluster>& clusters) {
  // the core ids are the intersection of all member lists = members of the
  // order-0 cluster
  for (const auto& c : clusters)
    if (c.order_tag == 0) return {c.members.begin(), c.members.end()};
  throw ConfigError("combine_gcce: no order-0 cluster present");
}

}  // namespace

CoherenceCurve combine_gcce(const std::vector<CoherenceCurve>& per_cluster_curves,
                            const std::vector<SpinCluster>& clusters) {
  if (per_cluster_curves.size() != clusters.size() || clusters.empty())
    throw ConfigError("combine_gcce: curve/cluster count mismatch");
  const auto& times = per_cluster_curves.front().times_us;
  for (const auto& c : per_cluster_curves)
    if (c.times_us != times)
      throw ConfigError("combine_gcce: curves do not share a time grid");

  std::vector<std::vector<Complex>> raw;
  raw.reserve(per_cluster_curves.size());
  for (const auto& c : per_cluster_curves) raw.push_back(c.values);

  const auto core = infer_core(clusters);
  auto fact = factorize(raw, clusters, core, times.size());

  CoherenceCurve out;
  out.times_us = times;
  out.values = std::move(fact.combined);
  out.meta = per_cluster_curves.front().meta;
  out.meta.magnitude_warning = fact.magnitude_warning;
  out.meta.order2_fallbacks = fact.order2_fallbacks;
  for (const auto& c : clusters) {
    if (c.order_tag == 1) ++out.meta.n_clusters_order1;
    if (c.order_tag == 2) ++out.meta.n_clusters_order2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// sampling
// ---------------------------------------------------------------------------

BathSampleSet sample_bath_states(const SpinSystem& sys, int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("sample_bath_states: n must be >= 1");
  const CounterRng rng(seed);
  BathSampleSet set;
  set.levels.resize(n);
  for (int s = 0; s < n; ++s) {
    auto& lv = set.levels[s];
    lv.resize(sys.spins.size());
    for (size_t i = 0; i < sys.spins.size(); ++i) {
      const int dim = sys.spins[i].spec.dim();
      const double u = rng.uniform(rng_stream::bath_state_sample,
                                   (static_cast<std::uint64_t>(s) << 32) | i);
      lv[i] = std::min(dim - 1, static_cast<int>(u * dim));
    }
  }
  return set;
}

BathSampleSet all_basis_states(const SpinSystem& sys,
                               const std::vector<int>& core_ids) {
  std::vector<int> others;
  for (int i = 0; i < static_cast<int>(sys.spins.size()); ++i)
    if (std::find(core_ids.begin(), core_ids.end(), i) == core_ids.end())
      others.push_back(i);
  long total = 1;
  for (int id : others) total *= sys.spins[id].spec.dim();
  if (total > 65536) throw ConfigError("all_basis_states: bath too large to enumerate");

  BathSampleSet set;
  for (long idx = 0; idx < total; ++idx) {
    std::vector<int> lv(sys.spins.size(), 0);
    long rem = idx;
    for (auto it = others.rbegin(); it != others.rend(); ++it) {
      const int dim = sys.spins[*it].spec.dim();
      lv[*it] = static_cast<int>(rem % dim);
      rem /= dim;
    }
    set.levels.push_back(std::move(lv));
  }
  return set;
}

// ---------------------------------------------------------------------------
// full engine run
// ---------------------------------------------------------------------------

namespace {

void run_parallel(int n_jobs, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n_jobs <= 1) {
    for (int k = 0; k < n_jobs; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  const int nt = std::min(threads, n_jobs);
  for (int w = 0; w < nt; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= n_jobs) return;
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

CoherenceCurve run_gcce(const SpinSystem& sys, const CceConfig& cfg,
                        const PulseProtocol& protocol,
                        const std::vector<double>& times) {
  return run_gcce_detailed(sys, cfg, protocol, times).mean;
}

GcceDetailedResult run_gcce_detailed(const SpinSystem& sys, const CceConfig& cfg,
                                     const PulseProtocol& protocol,
                                     const std::vector<double>& times) {
  validate_cce(cfg);
  if (times.empty() || times.front() != 0.0)
    throw ConfigError("time grid must start at 0");
  for (size_t k = 1; k < times.size(); ++k)
    if (times[k] <= times[k - 1]) throw ConfigError("time grid must ascend");

  std::vector<int> core_ids = cfg.core_spins;
  std::sort(core_ids.begin(), core_ids.end());

  const SpinSystem core_sys = subsystem(sys, core_ids);
  const EigenSystem core_es = eigendecompose(build_hamiltonian(core_sys));
  const QubitLevels qubit =
      select_qubit_levels(core_es, sys.central.spec.dim(), protocol.qubit);

  const auto clusters = enumerate_clusters(sys, cfg);
  const size_t n_times = times.size();

  std::vector<std::vector<int>> samples;  // per-sample level lists (all spins)
  if (cfg.bath_state == BathStatePolicy::sampled_product)
    samples = sample_bath_states(sys, cfg.n_samples, cfg.seed).levels;
  else
    samples.push_back({});  // single pseudo-sample: exact mixed inside clusters
  const size_t n_samples = samples.size();

  // raw[cluster][sample][time]
  std::vector<std::vector<std::vector<Complex>>> raw(clusters.size());
  run_parallel(static_cast<int>(clusters.size()), cfg.threads, [&](int ci) {
    const auto& cluster = clusters[ci];
    const auto ctx = build_cluster_context(sys, cluster, core_ids, qubit, protocol);
    auto& per_sample = raw[ci];
    per_sample.assign(n_samples, std::vector<Complex>(n_times, Complex(0, 0)));
    if (cfg.bath_state == BathStatePolicy::sampled_product) {
      for (size_t s = 0; s < n_samples; ++s) {
        std::vector<int> levels;
        levels.reserve(ctx.extras.size());
        for (int id : ctx.extras) levels.push_back(samples[s][id]);
        accumulate_curve(ctx, protocol, times, qubit,
                         bath_basis_index(ctx, sys, levels), 1.0, per_sample[s]);
      }
    } else {
      const double w = 1.0 / ctx.bath_dim;
      for (int beta = 0; beta < ctx.bath_dim; ++beta)
        accumulate_curve(ctx, protocol, times, qubit, beta, w, per_sample[0]);
    }
  });

  const std::set<int> core_set(core_ids.begin(), core_ids.end());
  GcceDetailedResult result;
  result.per_sample.reserve(n_samples);
  std::vector<Complex> mean(n_times, Complex(0, 0));
  bool warn = false;
  int fallbacks = 0;
  for (size_t s = 0; s < n_samples; ++s) {
    std::vector<std::vector<Complex>> sample_raw(clusters.size());
    for (size_t ci = 0; ci < clusters.size(); ++ci) sample_raw[ci] = raw[ci][s];
    auto fact = factorize(sample_raw, clusters, core_set, n_times);
    warn = warn || fact.magnitude_warning;
    fallbacks += fact.order2_fallbacks;
    for (size_t t = 0; t < n_times; ++t) mean[t] += fact.combined[t];
    result.per_sample.push_back(std::move(fact.combined));
  }
  for (auto& v : mean) v /= static_cast<double>(n_samples);

  CoherenceCurve curve;
  curve.times_us = times;
  curve.values = std::move(mean);
  curve.meta.protocol_tag =
      protocol.kind == ProtocolKind::ramsey ? "ramsey" : "hahn_echo";
  curve.meta.seed = cfg.seed;
  curve.meta.bath_state_policy =
      cfg.bath_state == BathStatePolicy::exact_mixed ? "exact_mixed" : "sampled_product";
  curve.meta.n_samples = static_cast<int>(n_samples);
  curve.meta.rng_algorithm = CounterRng::algorithm_id();
  curve.meta.magnitude_warning = warn;
  curve.meta.order2_fallbacks = fallbacks;
  for (const auto& c : clusters) {
    if (c.order_tag == 1) ++curve.meta.n_clusters_order1;
    if (c.order_tag == 2) ++curve.meta.n_clusters_order2;
  }
  if (std::abs(curve.values.front() - Complex(1, 0)) > 1e-9)
    throw NumericalError("coherence curve does not start at 1");
  result.mean = std::move(curve);
  return result;
}

CoherenceCurve exact_coherence(const SpinSystem& sys, const PulseProtocol& protocol,
                               const std::vector<double>& times,
                               const std::vector<int>& core_spins) {
  if (sys.dimension() > 4096)
    throw ConfigError("exact_coherence: full Hilbert dimension " +
                      std::to_string(sys.dimension()) + " exceeds the 4096 cap");
  std::vector<int> core_ids = core_spins;
  std::sort(core_ids.begin(), core_ids.end());
  const SpinSystem core_sys = subsystem(sys, core_ids);
  const EigenSystem core_es = eigendecompose(build_hamiltonian(core_sys));
  const QubitLevels qubit =
      select_qubit_levels(core_es, sys.central.spec.dim(), protocol.qubit);

  SpinCluster whole;
  for (int i = 0; i < static_cast<int>(sys.spins.size()); ++i)
    whole.members.push_back(i);
  whole.order_tag = 0;

  CoherenceCurve curve;
  curve.times_us = times;
  curve.values = cluster_coherence(sys, whole, core_ids, qubit, protocol, times);
  curve.meta.protocol_tag =
      protocol.kind == ProtocolKind::ramsey ? "ramsey" : "hahn_echo";
  curve.meta.bath_state_policy = "exact_mixed";
  curve.meta.rng_algorithm = CounterRng::algorithm_id();
  if (std::abs(curve.values.front() - Complex(1, 0)) > 1e-9)
    throw NumericalError("coherence curve does not start at 1");
  return curve;
}

}  // namespace nvsim
