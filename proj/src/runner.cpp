#include "nvsim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <thread>

namespace nvsim {

namespace fs = std::filesystem;

namespace {

std::string phi_tag(double phi_deg) {
  // normalized to [0, 360) for stable file names
  double p = std::fmod(phi_deg, 360.0);
  if (p < 0) p += 360.0;
  char buf[16];
  std::snprintf(buf, sizeof buf, "phi%03d", static_cast<int>(std::lround(p)));
  return buf;
}

class RunLog {
 public:
  void line(const std::string& s) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    std::ostringstream os;
    os << "[" << ms << "] " << s << "\n";
    text_ += os.str();
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::vector<BathSpin> build_bath(const RunConfig& cfg) {
  std::vector<BathSpin> bath;
  switch (cfg.bath.source) {
    case BathConfig::Source::none:
      return {};
    case BathConfig::Source::bulk_lattice:
      bath = generate_bulk_bath(cfg.bath.lattice);
      break;
    case BathConfig::Source::surface:
      bath = generate_surface_bath(cfg.bath.surface, cfg.bath.lattice);
      break;
    case BathConfig::Source::explicit_list:
      for (const auto& e : cfg.bath.explicit_spins) {
        BathSpin s;
        s.spec = species::by_label(e.species);
        s.position = e.position;
        if (e.tensor) {
          s.hyperfine = make_hyperfine(*e.tensor);
          s.provenance = BathSpin::Provenance::explicit_tensor;
        }
        bath.push_back(s);
      }
      break;
  }
  std::optional<HyperfineTable> table;
  if (cfg.bath.hyperfine_table_file)
    table = parse_hyperfine_table(*cfg.bath.hyperfine_table_file,
                                  cfg.bath.match_tolerance);
  return assign_hyperfine(std::move(bath), table, cfg.central.gyro_mhz_per_g,
                          cfg.bath.azz_max_mhz);
}

}  // namespace

AssembledSystem assemble_system(const RunConfig& cfg) {
  CentralSpinModel central;
  central.spec.gyro_mhz_per_g = cfg.central.gyro_mhz_per_g;
  central.d_mhz = cfg.central.d_mhz;
  central.e_mhz = cfg.central.e_mhz;
  validate_central(central);

  std::vector<BathSpin> spins;
  if (cfg.central.nitrogen.present) {
    BathSpin n;
    n.spec = species::n15();
    n.position = cfg.central.nitrogen.position;
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    a.diagonal() << cfg.central.nitrogen.aperp_mhz, cfg.central.nitrogen.aperp_mhz,
        cfg.central.nitrogen.azz_mhz;
    n.hyperfine = make_hyperfine(a);
    n.provenance = BathSpin::Provenance::explicit_tensor;
    spins.push_back(n);
  }
  for (auto& s : build_bath(cfg)) spins.push_back(std::move(s));

  // core resolution
  std::vector<int> core_ids;
  switch (cfg.engine.core.mode) {
    case CoreSelection::Mode::electron_only:
      break;
    case CoreSelection::Mode::explicit_ids:
      core_ids = cfg.engine.core.ids;
      for (int id : core_ids)
        if (id < 0 || id >= static_cast<int>(spins.size()))
          throw ConfigError("cce.core id " + std::to_string(id) + " out of range");
      break;
    case CoreSelection::Mode::auto_default: {
      int best_c13 = -1;
      double best_azz = -1.0;
      for (int i = 0; i < static_cast<int>(spins.size()); ++i) {
        if (spins[i].spec.label == "15N") core_ids.push_back(i);
        if (spins[i].spec.label == "13C" &&
            std::abs(spins[i].hyperfine.azz()) > best_azz) {
          best_azz = std::abs(spins[i].hyperfine.azz());
          best_c13 = i;
        }
      }
      if (best_c13 >= 0) core_ids.push_back(best_c13);
      break;
    }
  }
  std::sort(core_ids.begin(), core_ids.end());

  // dipolar couplings for pairs inside r_dip plus every pair touching the core
  std::map<std::pair<int, int>, Eigen::Matrix3d> couplings;
  const double r_pair = cfg.engine.order >= 2 ? cfg.engine.r_dip : 0.0;
  for (int i = 0; i < static_cast<int>(spins.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(spins.size()); ++j) {
      const bool core_pair =
          std::binary_search(core_ids.begin(), core_ids.end(), i) ||
          std::binary_search(core_ids.begin(), core_ids.end(), j);
      const double dist = (spins[i].position - spins[j].position).norm();
      if (!core_pair && dist >= r_pair) continue;
      couplings[{i, j}] =
          dipolar_coupling(spins[i].position, spins[j].position,
                           spins[i].spec.gyro_mhz_per_g, spins[j].spec.gyro_mhz_per_g);
    }

  AssembledSystem out{
      make_system(central, std::move(spins), std::move(couplings),
                  cfg.field.geometry.total_field(), {}, kUnboundedDimensionCap),
      std::move(core_ids)};
  return out;
}

namespace {

std::vector<double> protocol_times(const RunConfig& cfg, const AssembledSystem& asys) {
  double t_max = cfg.protocol.t_max_us;
  if (!(t_max > 0)) {
    const double est = estimate_t2star_us(asys.system, asys.core_ids);
    t_max = std::max(10.0, 2.0 * est);
  }
  return uniform_time_grid(t_max, cfg.protocol.n_times);
}

CceConfig engine_config(const RunConfig& cfg, const AssembledSystem& asys,
                        int threads) {
  CceConfig ec;
  ec.order = cfg.engine.order;
  ec.core_spins = asys.core_ids;
  ec.r_dip = cfg.engine.r_dip;
  ec.bath_state = cfg.engine.bath_state;
  ec.n_samples = cfg.engine.n_samples;
  ec.seed = cfg.seed;
  ec.dimension_cap = cfg.engine.dimension_cap;
  ec.threads = threads;
  return ec;
}

struct Emitter {
  std::string dir;
  RunLog* log;
  std::vector<std::string>* artifacts;
  std::string config_hash;

  void file(const std::string& name, const std::string& content) const {
    atomic_write_text((fs::path(dir) / name).string(), content);
    artifacts->push_back(name);
    log->line("wrote " + name + " (" + std::to_string(content.size()) + " bytes)");
  }

  void json_file(const std::string& name, const Json& j) const {
    file(name, j.dump(2) + "\n");
  }
};

void run_fid_sweep(const RunConfig& cfg, const RunOptions& opts,
                   const AssembledSystem& asys, const Emitter& emit, int threads) {
  const auto grid = cfg.field.scan.grid();
  const auto times = protocol_times(cfg, asys);
  std::vector<double> phis = cfg.field.phi_list_deg;
  if (phis.empty()) phis.push_back(cfg.field.geometry.phi_deg);

  for (double phi : phis) {
    FieldGeometry geom = cfg.field.geometry;
    geom.phi_deg = phi;
    FieldSweepModel model{asys.system, geom};
    SweepOptions sweep_opts;
    sweep_opts.kind = cfg.protocol.kind;
    sweep_opts.method = cfg.protocol.fit;
    sweep_opts.qubit = cfg.protocol.qubit;
    sweep_opts.keep_going = opts.keep_going;
    const auto sweep = sweep_t2star(model, grid, engine_config(cfg, asys, threads),
                                    times, sweep_opts);
    CurveMeta meta;
    meta.config_hash = emit.config_hash;
    meta.seed = cfg.seed;
    meta.rng_algorithm = CounterRng::algorithm_id();
    const std::string base =
        phis.size() == 1 && cfg.field.phi_list_deg.empty() ? "sweep" : "sweep_" + phi_tag(phi);
    emit.file(base + ".csv", sweep_csv(sweep));
    emit.json_file(base + ".meta.json", sweep_sidecar(sweep, meta));
  }
}

void run_depth_scan(const RunConfig& cfg, const AssembledSystem& asys,
                    const Emitter& emit, int threads) {
  DepthScanConfig scan;
  scan.depths_angstrom = cfg.depth.depths_angstrom;
  scan.terminations = cfg.depth.terminations;
  scan.fields = cfg.depth.fields;
  scan.e_of_depth = cfg.depth.e_of_depth;
  scan.mix_ratio = cfg.depth.mix_ratio;
  scan.lateral_extent = cfg.depth.lateral_extent;
  scan.central = asys.system.central;
  scan.lattice = cfg.bath.lattice;

  CceConfig ec = engine_config(cfg, asys, threads);
  ec.core_spins = {};  // surface runs use the electron-only core
  const auto taus = uniform_time_grid(cfg.depth.tau_max_us, cfg.depth.n_taus);
  const auto rows = depth_scan(scan, ec, cfg.protocol.qubit, taus, cfg.protocol.fit);
  emit.file("depth_scan.csv", depth_scan_csv(rows));
  Json meta;
  meta["config_hash"] = emit.config_hash;
  meta["seed"] = cfg.seed;
  meta["rng_algorithm"] = CounterRng::algorithm_id();
  meta["n_rows"] = rows.size();
  emit.json_file("depth_scan.meta.json", meta);
}

void run_level_diagram(const RunConfig& cfg, const AssembledSystem& asys,
                       const Emitter& emit, bool with_clock_find) {
  if (asys.system.dimension() > 4096)
    throw ConfigError("level diagram needs the full system diagonalizable "
                      "(dimension <= 4096); reduce the bath");
  FieldSweepModel model{asys.system, cfg.field.geometry};
  const auto diagram = level_diagram(model, cfg.field.scan.grid());
  emit.file("level_diagram.csv", level_diagram_csv(diagram));
  Json meta;
  meta["config_hash"] = emit.config_hash;
  meta["n_tracks"] = diagram.n_tracks;
  meta["warnings"] = diagram.warnings;
  emit.json_file("level_diagram.meta.json", meta);
  if (with_clock_find) {
    const auto cts = find_clock_transitions(model, diagram);
    emit.file("clock_transitions.csv", clock_transitions_csv(cts));
  }
}

void run_odmr(const RunConfig& cfg, const AssembledSystem& asys, const Emitter& emit) {
  if (asys.system.dimension() > 4096)
    throw ConfigError("odmr needs the full system diagonalizable; reduce the bath");
  const auto spec =
      odmr_spectrum(asys.system, cfg.odmr.linewidth_mhz, cfg.odmr.options);
  emit.file("odmr.csv", odmr_csv(spec));
  Json meta = odmr_sidecar(spec);
  meta["config_hash"] = emit.config_hash;
  emit.json_file("odmr.meta.json", meta);
}

void run_oracle(const RunConfig& cfg, const AssembledSystem& asys,
                const Emitter& emit) {
  std::vector<OracleReport> reports;
  if (cfg.oracle.use_pinned_suite) {
    for (const auto& inst : pinned_validation_suite())
      reports.push_back(run_oracle_check(inst));
  } else {
    OracleInstance inst;
    inst.name = "config_system";
    inst.system = asys.system;
    if (inst.system.dimension() > 4096)
      throw ConfigError("oracle check needs the full system diagonalizable");
    inst.times_us = protocol_times(cfg, asys);
    reports.push_back(run_oracle_check(inst));
  }
  std::ostringstream os;
  os << "instance,n_spins,dev_gcce1,dev_gcce2\n";
  double worst = 0.0;
  for (const auto& r : reports) {
    os << r.name << ',' << r.n_spins << ',' << format_double(r.dev_gcce1) << ','
       << format_double(r.dev_gcce2) << '\n';
    worst = std::max(worst, r.dev_gcce2);
  }
  emit.file("oracle_report.csv", os.str());
  Json meta;
  meta["config_hash"] = emit.config_hash;
  meta["max_dev_gcce2"] = worst;
  emit.json_file("oracle_report.meta.json", meta);
}

}  // namespace

RunOutcome run_scenario(const RunConfig& cfg, const RunOptions& opts) {
  const int threads = opts.threads > 0
                          ? opts.threads
                          : std::max(1u, std::thread::hardware_concurrency());

  RunOutcome outcome;
  outcome.out_dir = opts.out_dir_override.value_or(cfg.out_dir);
  fs::create_directories(outcome.out_dir);

  RunLog log;
  log.line("scenario " + scenario_name(cfg.scenario) + ", seed " +
           std::to_string(cfg.seed) + ", threads " + std::to_string(threads));

  const std::string resolved_dump = cfg.resolved.dump(2) + "\n";
  const std::string config_hash = fnv1a_hex(resolved_dump);
  Emitter emit{outcome.out_dir, &log, &outcome.artifacts, config_hash};
  emit.file("resolved_config.json", resolved_dump);

  const AssembledSystem asys = assemble_system(cfg);
  log.line("system: " + std::to_string(asys.system.spins.size()) + " spins, core ids " +
           [&] {
             std::ostringstream os;
             for (int id : asys.core_ids) os << id << ' ';
             return os.str();
           }());

  // bath snapshot for scenarios that realized a bath
  if (!asys.system.spins.empty() && cfg.scenario != Scenario::oracle_check)
    emit.json_file("bath_snapshot.json", bath_snapshot(asys.system.spins));

  switch (cfg.scenario) {
    case Scenario::fid_sweep:
      run_fid_sweep(cfg, opts, asys, emit, threads);
      break;
    case Scenario::echo_depth_scan:
      run_depth_scan(cfg, asys, emit, threads);
      break;
    case Scenario::level_diagram:
      run_level_diagram(cfg, asys, emit, false);
      break;
    case Scenario::clock_find:
      run_level_diagram(cfg, asys, emit, true);
      break;
    case Scenario::odmr:
      run_odmr(cfg, asys, emit);
      break;
    case Scenario::oracle_check:
      run_oracle(cfg, asys, emit);
      break;
  }

  log.line("done");
  atomic_write_text((fs::path(outcome.out_dir) / "log.txt").string(), log.text());
  outcome.artifacts.push_back("log.txt");
  return outcome;
}

}  // namespace nvsim
