#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nvsim/constants.hpp"

namespace nvsim {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Complex = std::complex<double>;

// error taxonomy: configuration problems exit 2 at the CLI, numerical ones exit 3
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// domain types
// ---------------------------------------------------------------------------

struct SpinSpecies {
  std::string label;
  double spin = 0.5;           // quantum number, 1/2 or 1
  double gyro_mhz_per_g = 0.0; // signed, linear-frequency convention

  int dim() const { return static_cast<int>(2.0 * spin + 1.5); }
};

// built-in species with the frozen default gyromagnetic ratios
namespace species {
SpinSpecies electron();
SpinSpecies c13();
SpinSpecies n15();
SpinSpecies h1();
SpinSpecies f19();
SpinSpecies by_label(const std::string& label);
}  // namespace species

void validate_species(const SpinSpecies& s, bool is_central = false);

struct SpinOperators {
  Matrix sx, sy, sz;
};

// angular-momentum matrices for the supported spin values (1/2 and 1),
// basis ordered by descending m
SpinOperators spin_operators(const SpinSpecies& s);

struct HyperfineTensor {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();  // MHz, central-spin frame

  double azz() const { return a(2, 2); }
};

// rejects non-finite entries and asymmetry beyond 1e-6 relative
HyperfineTensor make_hyperfine(const Eigen::Matrix3d& a);

struct CentralSpinModel {
  SpinSpecies spec = species::electron();
  double d_mhz = 0.0;  // axial zero-field splitting
  double e_mhz = 0.0;  // transverse zero-field splitting
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();  // columns x,y,z; z = NV axis
};

void validate_central(const CentralSpinModel& m);

struct BathSpin {
  SpinSpecies spec;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();  // Angstrom, central frame
  HyperfineTensor hyperfine;

  enum class Provenance { point_dipole, tabulated, explicit_tensor };
  Provenance provenance = Provenance::point_dipole;
};

// term toggles; everything on by default, tests and special configs switch
// individual Eq-of-motion pieces off without touching species data
struct HamiltonianTerms {
  bool hyperfine = true;
  bool zero_field = true;
  bool electron_zeeman = true;
  bool nuclear_zeeman = true;
  bool pair_couplings = true;
};

// cap value for container systems that are never diagonalized as a whole
// (cluster enumeration and the exact oracle enforce their own caps)
inline constexpr int kUnboundedDimensionCap = std::numeric_limits<int>::max();

struct SpinSystem {
  CentralSpinModel central;
  std::vector<BathSpin> spins;  // ordered; index is the spin id within this system
  std::map<std::pair<int, int>, Eigen::Matrix3d> pair_couplings;  // keys i<j, MHz
  Eigen::Vector3d field_gauss = Eigen::Vector3d::Zero();          // central frame
  HamiltonianTerms terms;
  int dimension_cap = 4096;

  int dimension() const;  // clamped at kUnboundedDimensionCap for large baths
  std::vector<int> site_dims() const;  // central first, then spins
};

// validates invariants (cap, finite entries, coupling keys/symmetry/trace)
SpinSystem make_system(CentralSpinModel central, std::vector<BathSpin> spins,
                       std::map<std::pair<int, int>, Eigen::Matrix3d> pair_couplings,
                       const Eigen::Vector3d& field_gauss,
                       HamiltonianTerms terms = {}, int dimension_cap = 4096);

// restriction of a system to a subset of spin ids (sorted ascending),
// keeping field, terms and the couplings among kept spins
SpinSystem subsystem(const SpinSystem& sys, const std::vector<int>& keep_ids);

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

Matrix kron(const Matrix& a, const Matrix& b);

// operator acting on one site, identity elsewhere; dims as from site_dims()
Matrix embed(const Matrix& op, int site, const std::vector<int>& dims);

// full Eq-of-motion Hamiltonian in linear-frequency MHz:
//   sum_i S^T A^(i) I^(i) + D(Sz^2 - S(S+1)/3) + E(Sx^2 - Sy^2)
//   + ge B.S - sum_i gN^(i) B.I^(i) + sum_{i<j} I^T J^(ij) I
Matrix build_hamiltonian(const SpinSystem& sys);

struct EigenSystem {
  RealVector evals;  // ascending
  Matrix evecs;      // orthonormal columns
};

// dense Hermitian eigendecomposition with deterministic ordering: eigenvalues
// ascending; inside degenerate blocks columns are ordered by the index of the
// largest-magnitude component and every column's phase is fixed so that its
// largest component is real positive
EigenSystem eigendecompose(const Matrix& h);

// reorders columns inside degenerate blocks (and only there) to follow the
// previous sweep step's eigenvectors by descending overlap
void align_degenerate_blocks(EigenSystem& es, const Matrix& previous_evecs);

// time evolution exp(-i 2 pi H t), t in us, via a cached eigendecomposition
class Propagator {
 public:
  explicit Propagator(EigenSystem es) : es_(std::move(es)) {}
  explicit Propagator(const Matrix& h) : es_(eigendecompose(h)) {}

  const EigenSystem& eigensystem() const { return es_; }

  Matrix unitary(double t_us) const;
  Vector evolve(const Vector& state, double t_us) const;
  Matrix evolve_density(const Matrix& rho, double t_us) const;

  // eigenbasis helpers used by the hot cluster loops
  Vector to_eigenbasis(const Vector& v) const { return es_.evecs.adjoint() * v; }
  Vector from_eigenbasis(const Vector& c) const { return es_.evecs * c; }
  void phase_advance(Vector& c_eigen, double t_us) const;

 private:
  EigenSystem es_;
};

// one-shot convenience forms of the propagation contract
Vector propagate(const Matrix& h, double t_us, const Vector& state);
Matrix propagate(const Matrix& h, double t_us, const Matrix& density);

}  // namespace nvsim
