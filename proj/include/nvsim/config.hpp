#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nvsim/io.hpp"

namespace nvsim {

enum class Scenario {
  fid_sweep,
  echo_depth_scan,
  level_diagram,
  clock_find,
  odmr,
  oracle_check,
};

std::string scenario_name(Scenario s);

struct NitrogenConfig {
  bool present = false;
  double azz_mhz = 3.03;
  double aperp_mhz = 3.65;
  Eigen::Vector3d position{0.0, 0.0, 1.68};
};

struct CentralConfig {
  double d_mhz = 0.0;  // required in the file: no physical default is assumed
  double e_mhz = 0.0;
  double gyro_mhz_per_g = constants::gyro_electron;
  NitrogenConfig nitrogen;
};

struct ExplicitSpin {
  std::string species = "13C";
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  std::optional<Eigen::Matrix3d> tensor;  // point-dipole when absent
};

struct BathConfig {
  enum class Source { none, bulk_lattice, surface, explicit_list };
  Source source = Source::none;
  LatticeConfig lattice;
  SurfaceConfig surface;
  std::vector<ExplicitSpin> explicit_spins;
  std::optional<std::string> hyperfine_table_file;
  double match_tolerance = 0.1;
  std::optional<double> azz_max_mhz;
};

struct CoreSelection {
  enum class Mode { auto_default, electron_only, explicit_ids };
  Mode mode = Mode::auto_default;
  std::vector<int> ids;
};

struct EngineConfig {
  int order = 1;
  double r_dip = 8.0;
  BathStatePolicy bath_state = BathStatePolicy::exact_mixed;
  int n_samples = 25;
  CoreSelection core;
  int dimension_cap = 4096;
};

struct ProtocolConfig {
  ProtocolKind kind = ProtocolKind::ramsey;
  QubitSelector qubit;
  double t_max_us = 0.0;  // 0: derive from the bath scale
  int n_times = 512;
  DecayMethod fit = DecayMethod::one_over_e;
};

struct ScanConfig {
  bool present = false;
  double from_gauss = 0.0;
  double to_gauss = 0.0;
  int points = 0;

  std::vector<double> grid() const;
};

struct FieldConfig {
  FieldGeometry geometry;  // b0_gauss = single-point value
  ScanConfig scan;
  std::vector<double> phi_list_deg;  // fid_sweep families
};

struct OdmrConfig {
  double linewidth_mhz = 1.0;
  OdmrOptions options;
};

struct DepthScanFileConfig {
  std::vector<double> depths_angstrom;
  std::vector<Termination> terminations;
  std::vector<std::pair<std::string, Eigen::Vector3d>> fields;
  std::vector<std::pair<double, double>> e_of_depth;
  double mix_ratio = 0.7;
  double lateral_extent = 60.0;
  double tau_max_us = 1000.0;
  int n_taus = 129;
};

struct OracleConfig {
  bool use_pinned_suite = true;
};

struct RunConfig {
  int schema_version = 1;
  Scenario scenario = Scenario::fid_sweep;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  CentralConfig central;
  BathConfig bath;
  EngineConfig engine;
  ProtocolConfig protocol;
  FieldConfig field;
  OdmrConfig odmr;
  DepthScanFileConfig depth;
  OracleConfig oracle;

  Json resolved;  // every default materialized; reruns reproduce outputs
};

// schema and invariant diagnostics with json paths; empty means valid
std::vector<std::string> validate_config_json(const Json& j);

// throws ConfigError carrying the diagnostics when invalid
RunConfig parse_run_config(const Json& j);

RunConfig load_run_config(const std::string& path);

}  // namespace nvsim
