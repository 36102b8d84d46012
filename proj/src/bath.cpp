#include "nvsim/bath.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nvsim {

namespace {

constexpr double kExclusionRadius = 0.5;  // Angstrom, around the defect origin

// rotation taking crystal axes to the NV frame: z || [111], x || [11-2], y || [-110]
Eigen::Matrix3d crystal_to_nv() {
  Eigen::Matrix3d r;
  r.row(0) = Eigen::Vector3d(1, 1, -2).normalized();
  r.row(1) = Eigen::Vector3d(-1, 1, 0).normalized();
  r.row(2) = Eigen::Vector3d(1, 1, 1).normalized();
  return r;
}

std::uint64_t pack_site_key(int ix, int iy, int iz, int basis) {
  auto enc = [](int v) -> std::uint64_t {
    return static_cast<std::uint64_t>(static_cast<std::uint32_t>(v + (1 << 20)));
  };
  return (enc(ix) << 43) ^ (enc(iy) << 22) ^ (enc(iz) << 1) ^
         static_cast<std::uint64_t>(basis);
}

bool position_less(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

}  // namespace

void validate_lattice(const LatticeConfig& cfg) {
  if (!(cfg.lattice_constant > 0)) throw ConfigError("lattice constant must be > 0");
  if (cfg.abundance < 0.0 || cfg.abundance > 1.0)
    throw ConfigError("abundance must lie in [0,1]");
  if (!(cfg.r_bath > 0)) throw ConfigError("r_bath must be > 0");
}

void validate_surface(const SurfaceConfig& cfg) {
  if (cfg.mix_ratio < 0.0 || cfg.mix_ratio > 1.0)
    throw ConfigError("mix_ratio must lie in [0,1]");
  if (!(cfg.depth > 0)) throw ConfigError("surface depth must be > 0");
  if (!(cfg.lateral_extent > 0)) throw ConfigError("lateral extent must be > 0");
}

void validate_table(const HyperfineTable& table) {
  if (!(table.match_tolerance > 0)) throw ConfigError("match tolerance must be > 0");
  for (size_t i = 0; i < table.entries.size(); ++i)
    for (size_t j = i + 1; j < table.entries.size(); ++j)
      if ((table.entries[i].position - table.entries[j].position).norm() <=
          table.match_tolerance) {
        std::ostringstream os;
        os << "hyperfine table entries " << i << " and " << j
           << " coincide within match tolerance at ("
           << table.entries[i].position.transpose() << ")";
        throw ConfigError(os.str());
      }
}

HyperfineTable parse_hyperfine_table(const std::string& path, double match_tolerance) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open hyperfine table file: " + path);
  HyperfineTable table;
  table.match_tolerance = match_tolerance;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    if (vals.empty()) continue;
    if (vals.size() != 12)
      throw ConfigError("hyperfine table " + path + " line " + std::to_string(lineno) +
                        ": expected 12 numbers, got " + std::to_string(vals.size()));
    HyperfineTable::Entry e;
    e.position = Eigen::Vector3d(vals[0], vals[1], vals[2]);
    e.tensor << vals[3], vals[4], vals[5], vals[6], vals[7], vals[8], vals[9], vals[10],
        vals[11];
    table.entries.push_back(e);
  }
  validate_table(table);
  return table;
}

std::vector<Eigen::Vector3d> enumerate_lattice_sites(const LatticeConfig& cfg) {
  validate_lattice(cfg);
  const double a = cfg.lattice_constant;
  // conventional cell: fcc positions plus the (1/4,1/4,1/4) basis
  static const double fcc[4][3] = {{0, 0, 0}, {0, .5, .5}, {.5, 0, .5}, {.5, .5, 0}};
  const int ncell = static_cast<int>(std::ceil(cfg.r_bath / a)) + 1;
  const Eigen::Matrix3d rot = cfg.orientation == LatticeConfig::Orientation::nv_111
                                  ? crystal_to_nv()
                                  : Eigen::Matrix3d::Identity();
  std::vector<Eigen::Vector3d> sites;
  for (int ix = -ncell; ix <= ncell; ++ix)
    for (int iy = -ncell; iy <= ncell; ++iy)
      for (int iz = -ncell; iz <= ncell; ++iz)
        for (int b = 0; b < 8; ++b) {
          const int f = b % 4;
          const double off = (b < 4) ? 0.0 : 0.25;
          Eigen::Vector3d crystal(a * (ix + fcc[f][0] + off), a * (iy + fcc[f][1] + off),
                                  a * (iz + fcc[f][2] + off));
          const double r = crystal.norm();
          if (r > cfg.r_bath || r <= kExclusionRadius) continue;
          sites.push_back(rot * crystal);
        }
  std::sort(sites.begin(), sites.end(), position_less);
  return sites;
}

std::vector<BathSpin> generate_bulk_bath(const LatticeConfig& cfg) {
  validate_lattice(cfg);
  const double a = cfg.lattice_constant;
  static const double fcc[4][3] = {{0, 0, 0}, {0, .5, .5}, {.5, 0, .5}, {.5, .5, 0}};
  const int ncell = static_cast<int>(std::ceil(cfg.r_bath / a)) + 1;
  const Eigen::Matrix3d rot = cfg.orientation == LatticeConfig::Orientation::nv_111
                                  ? crystal_to_nv()
                                  : Eigen::Matrix3d::Identity();
  const CounterRng rng(cfg.seed);

  std::vector<BathSpin> bath;
  for (int ix = -ncell; ix <= ncell; ++ix)
    for (int iy = -ncell; iy <= ncell; ++iy)
      for (int iz = -ncell; iz <= ncell; ++iz)
        for (int b = 0; b < 8; ++b) {
          const int f = b % 4;
          const double off = (b < 4) ? 0.0 : 0.25;
          Eigen::Vector3d crystal(a * (ix + fcc[f][0] + off), a * (iy + fcc[f][1] + off),
                                  a * (iz + fcc[f][2] + off));
          const double r = crystal.norm();
          if (r > cfg.r_bath || r <= kExclusionRadius) continue;
          // occupancy keyed on integer site coordinates, independent of r_bath
          if (!rng.bernoulli(cfg.abundance, rng_stream::lattice_occupancy,
                             pack_site_key(ix, iy, iz, b)))
            continue;
          BathSpin s;
          s.spec = species::c13();
          s.position = rot * crystal;
          bath.push_back(s);
        }
  std::sort(bath.begin(), bath.end(), [](const BathSpin& x, const BathSpin& y) {
    return position_less(x.position, y.position);
  });
  return bath;
}

std::vector<BathSpin> generate_surface_bath(const SurfaceConfig& cfg,
                                            const LatticeConfig& lattice) {
  validate_surface(cfg);
  validate_lattice(lattice);
  const double a = lattice.lattice_constant;
  const double spacing = a / std::sqrt(2.0);  // (001) bulk areal density 2/a^2
  const int n = static_cast<int>(std::floor(cfg.lateral_extent / spacing));
  const CounterRng rng(lattice.seed);

  std::vector<BathSpin> bath;
  for (int ix = -n; ix <= n; ++ix)
    for (int iy = -n; iy <= n; ++iy) {
      Eigen::Vector3d pos(ix * spacing, iy * spacing, cfg.depth);
      if (pos.norm() > lattice.r_bath) continue;
      bool fluorine = true;
      switch (cfg.termination) {
        case Termination::fluorine: fluorine = true; break;
        case Termination::hydrogen: fluorine = false; break;
        case Termination::mixed:
          fluorine = rng.bernoulli(cfg.mix_ratio, rng_stream::surface_species,
                                   pack_site_key(ix, iy, 0, 0));
          break;
      }
      BathSpin s;
      s.spec = fluorine ? species::f19() : species::h1();
      s.position = pos;
      bath.push_back(s);
    }
  std::sort(bath.begin(), bath.end(), [](const BathSpin& x, const BathSpin& y) {
    return position_less(x.position, y.position);
  });
  return bath;
}

HyperfineTensor point_dipole_hyperfine(const Eigen::Vector3d& position_angstrom,
                                       double central_gyro, double nuclear_gyro) {
  const double r = position_angstrom.norm();
  if (!(r > 0)) throw DomainError("point_dipole_hyperfine: zero-length position");
  const Eigen::Vector3d n = position_angstrom / r;
  const double c = constants::dipole_prefactor * central_gyro * nuclear_gyro / (r * r * r);
  const Eigen::Matrix3d t =
      c * (Eigen::Matrix3d::Identity() - 3.0 * (n * n.transpose()));
  return HyperfineTensor{t};
}

Eigen::Matrix3d dipolar_coupling(const Eigen::Vector3d& pos_i,
                                 const Eigen::Vector3d& pos_j, double gyro_i,
                                 double gyro_j) {
  const Eigen::Vector3d d = pos_j - pos_i;
  const double r = d.norm();
  if (!(r > 0)) throw DomainError("dipolar_coupling: coincident positions");
  const Eigen::Vector3d n = d / r;
  const double c = constants::dipole_prefactor * gyro_i * gyro_j / (r * r * r);
  return c * (Eigen::Matrix3d::Identity() - 3.0 * (n * n.transpose()));
}

std::vector<BathSpin> assign_hyperfine(std::vector<BathSpin> bath,
                                       const std::optional<HyperfineTable>& table,
                                       double central_gyro,
                                       std::optional<double> azz_max) {
  if (table) validate_table(*table);
  for (auto& spin : bath) {
    // user-specified tensors are kept as-is
    if (spin.provenance == BathSpin::Provenance::explicit_tensor) continue;
    const HyperfineTable::Entry* match = nullptr;
    if (table) {
      std::vector<size_t> hits;
      for (size_t k = 0; k < table->entries.size(); ++k)
        if ((table->entries[k].position - spin.position).norm() <=
            table->match_tolerance)
          hits.push_back(k);
      if (hits.size() > 1) {
        std::ostringstream os;
        os << "ambiguous hyperfine table match for spin at ("
           << spin.position.transpose() << "): entries";
        for (auto k : hits) os << " " << k;
        throw ConfigError(os.str());
      }
      if (hits.size() == 1) match = &table->entries[hits[0]];
    }
    if (match) {
      spin.hyperfine = make_hyperfine(match->tensor);
      spin.provenance = BathSpin::Provenance::tabulated;
    } else {
      spin.hyperfine =
          point_dipole_hyperfine(spin.position, central_gyro, spin.spec.gyro_mhz_per_g);
      spin.provenance = BathSpin::Provenance::point_dipole;
    }
  }
  if (azz_max) {
    std::erase_if(bath, [&](const BathSpin& s) {
      return std::abs(s.hyperfine.azz()) >= *azz_max;
    });
  }
  std::stable_sort(bath.begin(), bath.end(), [](const BathSpin& x, const BathSpin& y) {
    const double ax = std::abs(x.hyperfine.azz());
    const double ay = std::abs(y.hyperfine.azz());
    if (ax != ay) return ax > ay;
    return position_less(x.position, y.position);
  });
  return bath;
}

std::map<std::pair<int, int>, Eigen::Matrix3d> pair_couplings_from_positions(
    const std::vector<BathSpin>& bath) {
  std::map<std::pair<int, int>, Eigen::Matrix3d> couplings;
  for (int i = 0; i < static_cast<int>(bath.size()); ++i)
    for (int j = i + 1; j < static_cast<int>(bath.size()); ++j)
      couplings[{i, j}] =
          dipolar_coupling(bath[i].position, bath[j].position,
                           bath[i].spec.gyro_mhz_per_g, bath[j].spec.gyro_mhz_per_g);
  return couplings;
}

}  // namespace nvsim
