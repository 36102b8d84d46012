#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvsim/rng.hpp"
#include "nvsim/spin_core.hpp"

namespace nvsim {

// ---------------------------------------------------------------------------
// configuration types
// ---------------------------------------------------------------------------

struct LatticeConfig {
  double lattice_constant = constants::diamond_lattice_constant;  // Angstrom
  double abundance = constants::c13_natural_abundance;  // fraction of sites with 13C
  double r_bath = 30.0;                                 // cutoff radius, Angstrom
  std::uint64_t seed = 0;

  // NV axis orientation of the emitted frame; positions come out with z along
  // the NV axis ([111] of the crystal by default)
  enum class Orientation { nv_111, crystal_001 };
  Orientation orientation = Orientation::nv_111;
};

void validate_lattice(const LatticeConfig& cfg);

enum class Termination { fluorine, hydrogen, mixed };

struct SurfaceConfig {
  Termination termination = Termination::fluorine;
  double mix_ratio = 0.7;       // fraction fluorine when mixed
  double depth = 12.0;          // NV distance below the surface plane, Angstrom
  double lateral_extent = 60.0; // half-width of the generated patch, Angstrom
};

void validate_surface(const SurfaceConfig& cfg);

struct HyperfineTable {
  struct Entry {
    Eigen::Vector3d position;  // Angstrom, central frame
    Eigen::Matrix3d tensor;    // MHz
  };
  std::vector<Entry> entries;
  double match_tolerance = 0.1;  // Angstrom
};

// checks that entries are unique within match_tolerance
void validate_table(const HyperfineTable& table);

// plain-text table: x y z Axx Axy Axz Ayx Ayy Ayz Azx Azy Azz per line,
// '#' comments and blank lines ignored
HyperfineTable parse_hyperfine_table(const std::string& path, double match_tolerance);

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

// all diamond lattice sites within r_bath of the origin (a carbon site),
// occupied independently with probability = abundance; positions in the NV
// frame; no hyperfine assigned yet
std::vector<BathSpin> generate_bulk_bath(const LatticeConfig& cfg);

// enumeration helper shared with tests: all candidate site positions (NV
// frame) within r_bath, origin site excluded
std::vector<Eigen::Vector3d> enumerate_lattice_sites(const LatticeConfig& cfg);

// idealized termination monolayer at the (001) bulk site density, plane
// normal along +z at height = depth above the NV; species per site drawn
// from mix_ratio for mixed termination; sites beyond lattice.r_bath excluded
std::vector<BathSpin> generate_surface_bath(const SurfaceConfig& cfg,
                                            const LatticeConfig& lattice);

// point-dipole tensor  C * g1 * g2 / r^3 * (1 - 3 rr^T), traceless symmetric
HyperfineTensor point_dipole_hyperfine(const Eigen::Vector3d& position_angstrom,
                                       double central_gyro, double nuclear_gyro);

Eigen::Matrix3d dipolar_coupling(const Eigen::Vector3d& pos_i,
                                 const Eigen::Vector3d& pos_j, double gyro_i,
                                 double gyro_j);

// tensor assignment: table entries win within match_tolerance, everything else
// falls back to the point-dipole model; output sorted by descending |Azz|
// (ties by lexicographic position); optional truncation drops spins with
// |Azz| >= azz_max
std::vector<BathSpin> assign_hyperfine(std::vector<BathSpin> bath,
                                       const std::optional<HyperfineTable>& table,
                                       double central_gyro = constants::gyro_electron,
                                       std::optional<double> azz_max = std::nullopt);

// dipolar tensors for every pair of bath spins (keys i<j)
std::map<std::pair<int, int>, Eigen::Matrix3d> pair_couplings_from_positions(
    const std::vector<BathSpin>& bath);

}  // namespace nvsim
