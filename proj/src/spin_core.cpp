#include "nvsim/spin_core.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace nvsim {

namespace {

bool is_half_integer_spin(double s) {
  return std::abs(s - 0.5) < 1e-12 || std::abs(s - 1.0) < 1e-12;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

namespace species {

SpinSpecies electron() { return {"e", 1.0, constants::gyro_electron}; }
SpinSpecies c13() { return {"13C", 0.5, constants::gyro_c13}; }
SpinSpecies n15() { return {"15N", 0.5, constants::gyro_n15}; }
SpinSpecies h1() { return {"1H", 0.5, constants::gyro_h1}; }
SpinSpecies f19() { return {"19F", 0.5, constants::gyro_f19}; }

SpinSpecies by_label(const std::string& label) {
  if (label == "e") return electron();
  if (label == "13C") return c13();
  if (label == "15N") return n15();
  if (label == "1H") return h1();
  if (label == "19F") return f19();
  throw ConfigError("unknown spin species label: " + label);
}

}  // namespace species

void validate_species(const SpinSpecies& s, bool is_central) {
  if (!is_half_integer_spin(s.spin))
    throw ConfigError("species " + s.label + ": unsupported spin value " + fmt(s.spin) +
                      " (supported: 1/2, 1)");
  if (!std::isfinite(s.gyro_mhz_per_g))
    throw ConfigError("species " + s.label + ": gyromagnetic ratio not finite");
  if (!is_central && s.gyro_mhz_per_g == 0.0)
    throw ConfigError("species " + s.label + ": bath gyromagnetic ratio must be nonzero");
}

SpinOperators spin_operators(const SpinSpecies& s) {
  validate_species(s, true);
  const double j = s.spin;
  const int n = s.dim();
  Matrix sp = Matrix::Zero(n, n);  // raising operator, basis |m> ordered m = j .. -j
  for (int k = 1; k < n; ++k) {
    const double m = j - k;  // S+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>
    sp(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  SpinOperators ops;
  ops.sx = 0.5 * (sp + sp.adjoint());
  ops.sy = Complex(0, -0.5) * (sp - Matrix(sp.adjoint()));
  ops.sz = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) ops.sz(k, k) = j - k;
  return ops;
}

HyperfineTensor make_hyperfine(const Eigen::Matrix3d& a) {
  if (!a.allFinite()) throw ConfigError("hyperfine tensor has non-finite entries");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0 && asym > 1e-6 * scale)
    throw ConfigError("hyperfine tensor asymmetric beyond 1e-6 relative (|a-a^T| = " +
                      fmt(asym) + ", scale = " + fmt(scale) + ")");
  return HyperfineTensor{a};
}

void validate_central(const CentralSpinModel& m) {
  validate_species(m.spec, true);
  if (std::abs(m.spec.spin - 1.0) > 1e-12)
    throw ConfigError("central spin must have spin 1");
  if (!std::isfinite(m.d_mhz) || !std::isfinite(m.e_mhz))
    throw ConfigError("central D/E not finite");
  if (std::abs(m.e_mhz) > std::abs(m.d_mhz))
    throw ConfigError("|E| <= |D| violated: E = " + fmt(m.e_mhz) + " MHz, D = " +
                      fmt(m.d_mhz) + " MHz");
  const Eigen::Matrix3d gram = m.frame.transpose() * m.frame;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("central frame columns not orthonormal to 1e-12");
  if (m.frame.determinant() < 0)
    throw ConfigError("central frame is left-handed");
}

int SpinSystem::dimension() const {
  long long d = central.spec.dim();
  for (const auto& s : spins) {
    d *= s.spec.dim();
    if (d >= kUnboundedDimensionCap) return kUnboundedDimensionCap;
  }
  return static_cast<int>(d);
}

std::vector<int> SpinSystem::site_dims() const {
  std::vector<int> dims;
  dims.reserve(spins.size() + 1);
  dims.push_back(central.spec.dim());
  for (const auto& s : spins) dims.push_back(s.spec.dim());
  return dims;
}

SpinSystem make_system(CentralSpinModel central, std::vector<BathSpin> spins,
                       std::map<std::pair<int, int>, Eigen::Matrix3d> pair_couplings,
                       const Eigen::Vector3d& field_gauss, HamiltonianTerms terms,
                       int dimension_cap) {
  validate_central(central);
  for (const auto& s : spins) {
    validate_species(s.spec);
    if (!s.position.allFinite()) throw ConfigError("bath spin position not finite");
    make_hyperfine(s.hyperfine.a);  // re-check invariants
  }
  if (!field_gauss.allFinite()) throw ConfigError("field vector not finite");

  const int n = static_cast<int>(spins.size());
  for (const auto& [key, j] : pair_couplings) {
    const auto [i, k] = key;
    if (i >= k || i < 0 || k >= n)
      throw ConfigError("pair coupling key (" + fmt(i) + "," + fmt(k) +
                        ") violates 0 <= i < j < n");
    const double scale = std::max(1e-300, j.cwiseAbs().maxCoeff());
    if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
      throw ConfigError("pair coupling (" + fmt(i) + "," + fmt(k) + ") not symmetric");
    if (std::abs(j.trace()) > 1e-9 * scale)
      throw ConfigError("pair coupling (" + fmt(i) + "," + fmt(k) + ") not traceless");
  }

  SpinSystem sys{std::move(central), std::move(spins), std::move(pair_couplings),
                 field_gauss, terms, dimension_cap};
  const int dim = sys.dimension();
  if (dim > dimension_cap)
    throw ConfigError("Hilbert dimension " + fmt(dim) + " exceeds cap " +
                      fmt(dimension_cap));
  return sys;
}

SpinSystem subsystem(const SpinSystem& sys, const std::vector<int>& keep_ids) {
  // spin order is preserved as given (cluster systems put core spins first)
  std::vector<BathSpin> spins;
  std::map<int, int> new_index;
  for (int id : keep_ids) {
    if (id < 0 || id >= static_cast<int>(sys.spins.size()))
      throw ConfigError("subsystem: spin id " + fmt(id) + " out of range");
    if (!new_index.emplace(id, static_cast<int>(spins.size())).second)
      throw ConfigError("subsystem: duplicate spin id " + fmt(id));
    spins.push_back(sys.spins[id]);
  }
  std::map<std::pair<int, int>, Eigen::Matrix3d> couplings;
  for (const auto& [key, j] : sys.pair_couplings) {
    auto a = new_index.find(key.first);
    auto b = new_index.find(key.second);
    if (a != new_index.end() && b != new_index.end()) {
      const int i = std::min(a->second, b->second);
      const int k = std::max(a->second, b->second);
      couplings[{i, k}] = j;  // symmetric tensor, key order free
    }
  }
  return make_system(sys.central, std::move(spins), std::move(couplings),
                     sys.field_gauss, sys.terms, sys.dimension_cap);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix embed(const Matrix& op, int site, const std::vector<int>& dims) {
  Matrix out = Matrix::Identity(1, 1);
  for (int k = 0; k < static_cast<int>(dims.size()); ++k) {
    if (k == site)
      out = kron(out, op);
    else
      out = kron(out, Matrix::Identity(dims[k], dims[k]));
  }
  return out;
}

Matrix build_hamiltonian(const SpinSystem& sys) {
  const auto dims = sys.site_dims();
  const int dim = sys.dimension();
  if (dim > sys.dimension_cap)
    throw ConfigError("Hilbert dimension exceeds cap in build_hamiltonian");

  const auto s_ops = spin_operators(sys.central.spec);
  const Matrix s_site[3] = {s_ops.sx, s_ops.sy, s_ops.sz};

  Matrix h = Matrix::Zero(dim, dim);

  // electron: zero-field splitting and Zeeman
  if (sys.terms.zero_field) {
    const double spin = sys.central.spec.spin;
    Matrix zf = sys.central.d_mhz *
                    (s_ops.sz * s_ops.sz -
                     (spin * (spin + 1.0) / 3.0) * Matrix::Identity(dims[0], dims[0])) +
                sys.central.e_mhz * (s_ops.sx * s_ops.sx - s_ops.sy * s_ops.sy);
    h += embed(zf, 0, dims);
  }
  if (sys.terms.electron_zeeman) {
    Matrix zee = Matrix::Zero(dims[0], dims[0]);
    for (int a = 0; a < 3; ++a)
      zee += sys.central.spec.gyro_mhz_per_g * sys.field_gauss(a) * s_site[a];
    h += embed(zee, 0, dims);
  }

  // per-nucleus: hyperfine and nuclear Zeeman
  for (int i = 0; i < static_cast<int>(sys.spins.size()); ++i) {
    const auto& spin = sys.spins[i];
    const auto i_ops = spin_operators(spin.spec);
    const Matrix i_site[3] = {i_ops.sx, i_ops.sy, i_ops.sz};

    if (sys.terms.hyperfine) {
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double c = spin.hyperfine.a(a, b);
          if (c == 0.0) continue;
          h += c * embed(s_site[a], 0, dims) * embed(i_site[b], i + 1, dims);
        }
    }
    if (sys.terms.nuclear_zeeman) {
      Matrix zee = Matrix::Zero(dims[i + 1], dims[i + 1]);
      for (int b = 0; b < 3; ++b)
        zee -= spin.spec.gyro_mhz_per_g * sys.field_gauss(b) * i_site[b];
      h += embed(zee, i + 1, dims);
    }
  }

  // nuclear-nuclear dipolar couplings
  if (sys.terms.pair_couplings) {
    for (const auto& [key, j] : sys.pair_couplings) {
      const auto ops_i = spin_operators(sys.spins[key.first].spec);
      const auto ops_j = spin_operators(sys.spins[key.second].spec);
      const Matrix iA[3] = {ops_i.sx, ops_i.sy, ops_i.sz};
      const Matrix iB[3] = {ops_j.sx, ops_j.sy, ops_j.sz};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double c = j(a, b);
          if (c == 0.0) continue;
          h += c * embed(iA[a], key.first + 1, dims) * embed(iB[b], key.second + 1, dims);
        }
    }
  }

  return h;
}

namespace {

// deterministic column treatment: phase-fix every column, order degenerate
// blocks by the largest-component rule
void canonicalize(EigenSystem& es) {
  const int n = static_cast<int>(es.evals.size());
  const double scale = std::max(std::abs(es.evals(0)), std::abs(es.evals(n - 1)));
  const double tol = std::max(1e-300, 1e-10 * std::max(1.0, scale));

  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && es.evals(end) - es.evals(end - 1) <= tol) ++end;
    if (end - start > 1) {
      std::vector<int> order(end - start);
      std::vector<int> anchor(end - start);
      for (int k = 0; k < end - start; ++k) {
        int idx = 0;
        es.evecs.col(start + k).cwiseAbs().maxCoeff(&idx);
        anchor[k] = idx;
        order[k] = k;
      }
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (anchor[a] != anchor[b]) return anchor[a] < anchor[b];
        return a < b;
      });
      Matrix block(es.evecs.rows(), end - start);
      for (int k = 0; k < end - start; ++k) block.col(k) = es.evecs.col(start + order[k]);
      es.evecs.middleCols(start, end - start) = block;
    }
    start = end;
  }

  for (int k = 0; k < n; ++k) {
    int idx = 0;
    es.evecs.col(k).cwiseAbs().maxCoeff(&idx);
    const Complex v = es.evecs(idx, k);
    const double mag = std::abs(v);
    if (mag > 0) es.evecs.col(k) *= std::conj(v) / mag;
  }
}

}  // namespace

EigenSystem eigendecompose(const Matrix& h) {
  if (h.rows() != h.cols()) throw NumericalError("eigendecompose: matrix not square");
  if (!h.allFinite()) throw NumericalError("eigendecompose: non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigendecomposition failed to converge: dim = " << h.rows()
       << ", |H|_max = " << h.cwiseAbs().maxCoeff()
       << ", |H - H^+|_max = " << (h - h.adjoint()).cwiseAbs().maxCoeff();
    throw NumericalError(os.str());
  }
  EigenSystem es{solver.eigenvalues(), solver.eigenvectors()};
  canonicalize(es);

  if (h.rows() <= 128) {
    const double hnorm = std::max(1e-300, h.cwiseAbs().maxCoeff());
    const double resid =
        (h * es.evecs - es.evecs * es.evals.asDiagonal().toDenseMatrix().cast<Complex>())
            .cwiseAbs()
            .maxCoeff();
    if (resid > 1e-9 * hnorm)
      throw NumericalError("eigendecomposition residual " + fmt(resid) +
                           " exceeds 1e-9 * |H| = " + fmt(1e-9 * hnorm));
  }
  return es;
}

void align_degenerate_blocks(EigenSystem& es, const Matrix& previous_evecs) {
  const int n = static_cast<int>(es.evals.size());
  const double scale = std::max(std::abs(es.evals(0)), std::abs(es.evals(n - 1)));
  const double tol = std::max(1e-300, 1e-10 * std::max(1.0, scale));

  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && es.evals(end) - es.evals(end - 1) <= tol) ++end;
    if (end - start > 1) {
      // greedy assignment by descending overlap with the previous step
      const int m = end - start;
      Eigen::MatrixXd overlap(m, m);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c)
          overlap(r, c) = std::abs(
              previous_evecs.col(start + r).dot(es.evecs.col(start + c)));
      std::vector<int> assign(m, -1);
      std::vector<bool> used(m, false);
      for (int pass = 0; pass < m; ++pass) {
        int br = -1, bc = -1;
        double best = -1.0;
        for (int r = 0; r < m; ++r) {
          if (assign[r] >= 0) continue;
          for (int c = 0; c < m; ++c) {
            if (used[c]) continue;
            if (overlap(r, c) > best) {
              best = overlap(r, c);
              br = r;
              bc = c;
            }
          }
        }
        assign[br] = bc;
        used[bc] = true;
      }
      Matrix block(es.evecs.rows(), m);
      for (int r = 0; r < m; ++r) block.col(r) = es.evecs.col(start + assign[r]);
      es.evecs.middleCols(start, m) = block;
    }
    start = end;
  }
}

Matrix Propagator::unitary(double t_us) const {
  const int n = static_cast<int>(es_.evals.size());
  Vector phases(n);
  for (int k = 0; k < n; ++k)
    phases(k) = std::exp(Complex(0.0, -2.0 * constants::pi * es_.evals(k) * t_us));
  return es_.evecs * phases.asDiagonal() * es_.evecs.adjoint();
}

Vector Propagator::evolve(const Vector& state, double t_us) const {
  Vector c = to_eigenbasis(state);
  phase_advance(c, t_us);
  return from_eigenbasis(c);
}

Matrix Propagator::evolve_density(const Matrix& rho, double t_us) const {
  const Matrix u = unitary(t_us);
  return u * rho * u.adjoint();
}

void Propagator::phase_advance(Vector& c_eigen, double t_us) const {
  for (Eigen::Index k = 0; k < c_eigen.size(); ++k)
    c_eigen(k) *= std::exp(Complex(0.0, -2.0 * constants::pi * es_.evals(k) * t_us));
}

Vector propagate(const Matrix& h, double t_us, const Vector& state) {
  if (t_us < 0) throw DomainError("propagate: negative time");
  return Propagator(h).evolve(state, t_us);
}

Matrix propagate(const Matrix& h, double t_us, const Matrix& density) {
  if (t_us < 0) throw DomainError("propagate: negative time");
  return Propagator(h).evolve_density(density, t_us);
}

}  // namespace nvsim
