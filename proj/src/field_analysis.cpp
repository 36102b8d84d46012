#include "nvsim/field_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace nvsim {

namespace {

double deg2rad(double d) { return d * constants::pi / 180.0; }

}  // namespace

Eigen::Vector3d FieldGeometry::applied_direction() const {
  const double t = deg2rad(theta0_deg);
  return {std::sin(t), 0.0, std::cos(t)};
}

Eigen::Vector3d FieldGeometry::residual_field() const {
  const double t = deg2rad(theta_r_deg);
  const double p = deg2rad(phi_deg);
  return br_gauss *
         Eigen::Vector3d(std::sin(t) * std::cos(p), std::sin(t) * std::sin(p),
                         std::cos(t));
}

Eigen::Vector3d FieldGeometry::total_field() const {
  return b0_gauss * applied_direction() + residual_field();
}

FieldGeometry FieldGeometry::with_b0(double b0) const {
  FieldGeometry g = *this;
  g.b0_gauss = b0;
  return g;
}

double FieldGeometry::axial_projection(double b0) const {
  return with_b0(b0).total_field().z();
}

SpinSystem FieldSweepModel::at(double b0) const {
  return at_field(geometry.with_b0(b0).total_field());
}

SpinSystem FieldSweepModel::at_field(const Eigen::Vector3d& field_gauss) const {
  SpinSystem sys = base;
  sys.field_gauss = field_gauss;
  return sys;
}

// ---------------------------------------------------------------------------
// level diagram
// ---------------------------------------------------------------------------

Eigen::MatrixXd LevelDiagram::pair_gaps(int field_index) const {
  const int dim = static_cast<int>(energies.cols());
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      g(i, j) = std::abs(energies(field_index, i) - energies(field_index, j));
  return g;
}

LevelDiagram level_diagram(const FieldSweepModel& model,
                           const std::vector<double>& b0_grid) {
  if (b0_grid.size() < 2) throw ConfigError("level diagram needs at least 2 points");
  for (size_t k = 1; k < b0_grid.size(); ++k)
    if (b0_grid[k] <= b0_grid[k - 1])
      throw ConfigError("level diagram grid must be strictly monotone");

  const int nf = static_cast<int>(b0_grid.size());
  const int dim = model.base.dimension();
  LevelDiagram diagram;
  diagram.fields_gauss = b0_grid;
  diagram.energies.resize(nf, dim);
  diagram.tracks.resize(nf, dim);
  diagram.n_tracks = dim;

  Matrix prev_vecs;
  std::vector<int> prev_tracks(dim);
  for (int f = 0; f < nf; ++f) {
    EigenSystem es = eigendecompose(build_hamiltonian(model.at(b0_grid[f])));
    if (f > 0) align_degenerate_blocks(es, prev_vecs);
    for (int k = 0; k < dim; ++k) diagram.energies(f, k) = es.evals(k);

    if (f == 0) {
      for (int k = 0; k < dim; ++k) diagram.tracks(0, k) = k;
      for (int k = 0; k < dim; ++k) prev_tracks[k] = k;
    } else {
      // greedy assignment of current columns to previous columns by overlap
      Eigen::MatrixXd overlap(dim, dim);
      for (int p = 0; p < dim; ++p)
        for (int c = 0; c < dim; ++c)
          overlap(p, c) = std::abs(prev_vecs.col(p).dot(es.evecs.col(c)));
      std::vector<int> owner(dim, -1);  // current column -> previous column
      std::vector<bool> prev_used(dim, false), cur_used(dim, false);
      for (int pass = 0; pass < dim; ++pass) {
        int bp = -1, bc = -1;
        double best = -1.0;
        for (int p = 0; p < dim; ++p) {
          if (prev_used[p]) continue;
          for (int c = 0; c < dim; ++c) {
            if (cur_used[c]) continue;
            if (overlap(p, c) > best) {
              best = overlap(p, c);
              bp = p;
              bc = c;
            }
          }
        }
        prev_used[bp] = true;
        cur_used[bc] = true;
        owner[bc] = bp;
        if (best < 0.6) owner[bc] = -1;  // track lost, will split
      }
      std::vector<int> cur_tracks(dim);
      for (int c = 0; c < dim; ++c) {
        if (owner[c] >= 0) {
          cur_tracks[c] = prev_tracks[owner[c]];
        } else {
          cur_tracks[c] = diagram.n_tracks++;
          std::ostringstream os;
          os << "track split at b0 = " << b0_grid[f] << " G, level " << c;
          diagram.warnings.push_back(os.str());
        }
        diagram.tracks(f, c) = cur_tracks[c];
      }
      prev_tracks = cur_tracks;
    }
    prev_vecs = es.evecs;
  }
  return diagram;
}

// ---------------------------------------------------------------------------
// clock transitions
// ---------------------------------------------------------------------------

namespace {

struct ClassifiedPoint {
  EigenSystem es;
  std::vector<bool> pm;  // true when the level is +-1 dominant
};

ClassifiedPoint classify(const FieldSweepModel& model, double b0) {
  ClassifiedPoint p{eigendecompose(build_hamiltonian(model.at(b0))), {}};
  const Eigen::MatrixXd w = electron_weights(p.es, model.base.central.spec.dim());
  const int dim = static_cast<int>(p.es.evals.size());
  p.pm.resize(dim);
  for (int k = 0; k < dim; ++k) p.pm[k] = !(w(1, k) >= w(0, k) && w(1, k) >= w(2, k));
  return p;
}

// index of the eigenvector with the largest overlap onto `ref`
int track_state(const EigenSystem& es, const Vector& ref) {
  int best = 0;
  double best_ov = -1.0;
  for (int k = 0; k < es.evals.size(); ++k) {
    const double ov = std::abs(es.evecs.col(k).dot(ref));
    if (ov > best_ov) {
      best_ov = ov;
      best = k;
    }
  }
  return best;
}

// energy of the two-state subspace best matching span{u, l}
double pair_center_energy(const EigenSystem& es, const Vector& u, const Vector& l) {
  std::vector<std::pair<double, int>> scored;
  for (int k = 0; k < es.evals.size(); ++k) {
    const double ov = std::norm(es.evecs.col(k).dot(u)) +
                      std::norm(es.evecs.col(k).dot(l));
    scored.emplace_back(ov, k);
  }
  std::sort(scored.rbegin(), scored.rend());
  return 0.5 * (es.evals(scored[0].second) + es.evals(scored[1].second));
}

Matrix embedded_sx(int electron_dim, int dim) {
  const auto sx = spin_operators(species::electron()).sx;
  const int rest = dim / electron_dim;
  Matrix out = Matrix::Zero(dim, dim);
  for (int m1 = 0; m1 < electron_dim; ++m1)
    for (int m2 = 0; m2 < electron_dim; ++m2) {
      if (sx(m1, m2) == Complex(0, 0)) continue;
      for (int r = 0; r < rest; ++r) out(m1 * rest + r, m2 * rest + r) = sx(m1, m2);
    }
  return out;
}

}  // namespace

std::vector<ClockTransition> find_clock_transitions(const FieldSweepModel& model,
                                                    const LevelDiagram& diagram) {
  const auto& grid = diagram.fields_gauss;
  const int nf = static_cast<int>(grid.size());
  const int dim = static_cast<int>(diagram.energies.cols());
  if (nf < 3) return {};

  // pm classification across the grid
  std::vector<std::vector<bool>> pm(nf);
  for (int f = 0; f < nf; ++f) pm[f] = classify(model, grid[f]).pm;

  std::vector<ClockTransition> found;
  for (int k = 0; k + 1 < dim; ++k) {
    for (int f = 1; f + 1 < nf; ++f) {
      auto gap = [&](int ff) {
        return diagram.energies(ff, k + 1) - diagram.energies(ff, k);
      };
      const double g0 = gap(f - 1), g1 = gap(f), g2 = gap(f + 1);
      if (!(g1 < g0 && g1 < g2)) continue;          // strict local minimum
      if (!pm[f][k] || !pm[f][k + 1]) continue;     // both levels in the pm manifold

      // quadratic refinement of the minimum position
      const double x0 = grid[f - 1], x1 = grid[f], x2 = grid[f + 1];
      const double d21 = (g2 - g1) / (x2 - x1);
      const double d10 = (g1 - g0) / (x1 - x0);
      const double curv = (d21 - d10) / (0.5 * (x2 - x0));
      double b_star = x1;
      if (curv > 0) {
        b_star = x1 - (0.5 * (d21 + d10)) / curv;
        b_star = std::clamp(b_star, x0, x2);
      }

      const ClassifiedPoint at_min = classify(model, b_star);
      const double gap_star = at_min.es.evals(k + 1) - at_min.es.evals(k);

      ClockTransition ct;
      ct.b0_gauss = b_star;
      ct.axial_gauss = model.geometry.axial_projection(b_star);
      ct.level_lower = k;
      ct.level_upper = k + 1;
      ct.gap_mhz = gap_star;

      // axial derivative of the qubit transition frequency: pair center minus
      // the Sx-connected ms0 reference, under +-delta Bz perturbations
      const Vector u = at_min.es.evecs.col(k + 1);
      const Vector l = at_min.es.evecs.col(k);
      const Matrix sx = embedded_sx(model.base.central.spec.dim(), dim);
      int ref = -1;
      double best = -1.0;
      for (int r = 0; r < dim; ++r) {
        if (at_min.pm[r]) continue;
        const double amp = std::norm(at_min.es.evecs.col(r).dot(sx * u)) +
                           std::norm(at_min.es.evecs.col(r).dot(sx * l));
        if (amp > best) {
          best = amp;
          ref = r;
        }
      }
      if (ref >= 0) {
        const double delta = 0.02;  // G
        const Eigen::Vector3d f_star = model.geometry.with_b0(b_star).total_field();
        auto freq_at = [&](double dz) {
          const EigenSystem es = eigendecompose(build_hamiltonian(
              model.at_field(f_star + Eigen::Vector3d(0, 0, dz))));
          const double center = pair_center_energy(es, u, l);
          const double e_ref = es.evals(track_state(es, at_min.es.evecs.col(ref)));
          return center - e_ref;
        };
        ct.dfdb_mhz_per_g = (freq_at(delta) - freq_at(-delta)) / (2.0 * delta);
      }

      // grid-fineness diagnostic near the minimum
      const double rel_change =
          std::max(std::abs(g0 - g1), std::abs(g2 - g1)) / std::max(1e-12, g1);
      ct.refine_warning = rel_change > 0.2;
      found.push_back(ct);
    }
  }
  std::sort(found.begin(), found.end(),
            [](const ClockTransition& a, const ClockTransition& b) {
              if (a.b0_gauss != b.b0_gauss) return a.b0_gauss < b.b0_gauss;
              return a.level_lower < b.level_lower;
            });
  return found;
}

// ---------------------------------------------------------------------------
// ODMR
// ---------------------------------------------------------------------------

double OdmrSpectrum::total_amplitude() const {
  double s = 0;
  for (const auto& l : lines) s += l.amplitude;
  return s;
}

OdmrSpectrum odmr_spectrum(const SpinSystem& sys, double linewidth_mhz,
                           const OdmrOptions& opts) {
  if (!(linewidth_mhz > 0)) throw ConfigError("odmr linewidth must be > 0");
  const EigenSystem es = eigendecompose(build_hamiltonian(sys));
  const int dim = static_cast<int>(es.evals.size());
  const int edim = sys.central.spec.dim();
  const Eigen::MatrixXd w = electron_weights(es, edim);

  std::vector<int> ms0, pmset;
  for (int k = 0; k < dim; ++k) {
    if (w(1, k) >= w(0, k) && w(1, k) >= w(2, k))
      ms0.push_back(k);
    else
      pmset.push_back(k);
  }
  if (ms0.empty() || pmset.empty())
    throw NumericalError("odmr: could not classify ms manifolds");

  const auto ops = spin_operators(sys.central.spec);
  const int rest = dim / edim;
  auto embed_drive = [&](const Matrix& core) {
    Matrix drive = Matrix::Zero(dim, dim);
    for (int m1 = 0; m1 < edim; ++m1)
      for (int m2 = 0; m2 < edim; ++m2) {
        if (core(m1, m2) == Complex(0, 0)) continue;
        for (int r = 0; r < rest; ++r)
          drive(m1 * rest + r, m2 * rest + r) = core(m1, m2);
      }
    return drive;
  };
  std::vector<std::pair<Matrix, double>> drives;  // operator, weight
  switch (opts.polarization) {
    case MwPolarization::x: drives.emplace_back(embed_drive(ops.sx), 1.0); break;
    case MwPolarization::y: drives.emplace_back(embed_drive(ops.sy), 1.0); break;
    case MwPolarization::unpolarized:
      drives.emplace_back(embed_drive(ops.sx), 0.5);
      drives.emplace_back(embed_drive(ops.sy), 0.5);
      break;
  }

  OdmrSpectrum spec;
  const double pop = 1.0 / static_cast<double>(ms0.size());
  for (int a : ms0)
    for (int b : pmset) {
      OdmrLine line;
      line.freq_mhz = es.evals(b) - es.evals(a);
      for (const auto& [drive, weight] : drives)
        line.amplitude +=
            weight * pop * std::norm(es.evecs.col(b).dot(drive * es.evecs.col(a)));
      if (line.amplitude > 1e-12) spec.lines.push_back(line);
    }
  std::sort(spec.lines.begin(), spec.lines.end(),
            [](const OdmrLine& a, const OdmrLine& b) { return a.freq_mhz < b.freq_mhz; });
  if (spec.lines.empty()) return spec;

  const double lo =
      spec.lines.front().freq_mhz - opts.pad_mhz - 5.0 * linewidth_mhz;
  const double hi = spec.lines.back().freq_mhz + opts.pad_mhz + 5.0 * linewidth_mhz;
  spec.freq_mhz.resize(opts.n_grid);
  spec.intensity.assign(opts.n_grid, 0.0);
  const double hw = 0.5 * linewidth_mhz;
  for (int g = 0; g < opts.n_grid; ++g) {
    const double f = lo + (hi - lo) * g / (opts.n_grid - 1);
    spec.freq_mhz[g] = f;
    double v = 0;
    for (const auto& line : spec.lines) {
      const double d = f - line.freq_mhz;
      v += line.amplitude * (hw / constants::pi) / (d * d + hw * hw);
    }
    spec.intensity[g] = v;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// sweeps
// ---------------------------------------------------------------------------

namespace {

void run_parallel_indexed(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(threads, n); ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= n) return;
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

SweepResult sweep_t2star(const FieldSweepModel& model,
                         const std::vector<double>& b0_grid, const CceConfig& cce,
                         const std::vector<double>& times, const SweepOptions& opts) {
  if (b0_grid.empty()) throw ConfigError("sweep grid is empty");
  validate_cce(cce);

  SweepResult result;
  result.protocol_tag = opts.kind == ProtocolKind::ramsey ? "ramsey" : "hahn_echo";
  result.method_tag =
      opts.method == DecayMethod::one_over_e ? "one_over_e" : "stretched_fit";

  // clock transitions of the core system over the same grid
  {
    std::vector<int> core_ids = cce.core_spins;
    std::sort(core_ids.begin(), core_ids.end());
    FieldSweepModel core_model{subsystem(model.base, core_ids), model.geometry};
    std::vector<double> diagram_grid = b0_grid;
    if (diagram_grid.size() >= 3) {
      const LevelDiagram diagram = level_diagram(core_model, diagram_grid);
      result.transitions = find_clock_transitions(core_model, diagram);
    }
  }

  result.points.resize(b0_grid.size());
  run_parallel_indexed(static_cast<int>(b0_grid.size()), cce.threads, [&](int k) {
    SweepPoint& pt = result.points[k];
    pt.b0_gauss = b0_grid[k];
    try {
      const SpinSystem sys = model.at(b0_grid[k]);
      CceConfig point_cfg = cce;
      point_cfg.threads = 1;  // parallelism lives at the sweep level
      // per-point seed derived from (global seed, field index)
      point_cfg.seed = CounterRng(cce.seed).bits(7777, static_cast<std::uint64_t>(k));
      PulseProtocol protocol;
      protocol.kind = opts.kind;
      protocol.qubit = opts.qubit;
      const CoherenceCurve curve = run_gcce(sys, point_cfg, protocol, times);
      pt.fit = extract_decay_time(curve.times_us, curve.values, opts.method);
    } catch (const std::exception& e) {
      if (!opts.keep_going) throw;
      pt.error = e.what();
      pt.fit.resolved = false;
      pt.fit.note = e.what();
    }
    if (!result.transitions.empty()) {
      double best = std::numeric_limits<double>::max();
      for (const auto& ct : result.transitions)
        if (std::abs(ct.b0_gauss - pt.b0_gauss) < best) {
          best = std::abs(ct.b0_gauss - pt.b0_gauss);
          pt.gap_mhz_nearest_ct = ct.gap_mhz;
        }
    }
  });
  return result;
}

AsymmetryResult asymmetry_metric(const SweepResult& sweep) {
  AsymmetryResult out;
  if (sweep.transitions.size() < 2) {
    out.note = "fewer than two clock transitions in sweep";
    return out;
  }
  const double anchor_left = sweep.transitions.front().b0_gauss;
  const double anchor_right = sweep.transitions.back().b0_gauss;
  const double window = 0.35 * (anchor_right - anchor_left);

  auto peak_near = [&](double anchor, double& peak_b0, double& peak_t2) -> bool {
    bool found = false;
    peak_t2 = 0;
    for (const auto& pt : sweep.points) {
      if (!pt.fit.resolved) continue;
      if (std::abs(pt.b0_gauss - anchor) > window) continue;
      if (pt.fit.t_char_us > peak_t2) {
        peak_t2 = pt.fit.t_char_us;
        peak_b0 = pt.b0_gauss;
        found = true;
      }
    }
    return found;
  };

  if (!peak_near(anchor_left, out.peak_left_b0, out.t2_left) ||
      !peak_near(anchor_right, out.peak_right_b0, out.t2_right)) {
    out.note = "peak missing near a clock transition (unresolved decay?)";
    return out;
  }
  out.center_b0 = 0.5 * (out.peak_left_b0 + out.peak_right_b0);
  out.metric = (out.t2_left - out.t2_right) / (out.t2_left + out.t2_right);
  out.resolved = true;
  return out;
}

// ---------------------------------------------------------------------------
// depth scan
// ---------------------------------------------------------------------------

double interpolate_e_of_depth(const std::vector<std::pair<double, double>>& table,
                              double depth) {
  if (table.empty()) throw ConfigError("empty E(depth) table");
  auto sorted = table;
  std::sort(sorted.begin(), sorted.end());
  if (depth <= sorted.front().first) return sorted.front().second;
  if (depth >= sorted.back().first) return sorted.back().second;
  for (size_t k = 1; k < sorted.size(); ++k)
    if (depth <= sorted[k].first) {
      const auto [x0, y0] = sorted[k - 1];
      const auto [x1, y1] = sorted[k];
      return y0 + (y1 - y0) * (depth - x0) / (x1 - x0);
    }
  return sorted.back().second;
}

namespace {

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::fluorine: return "fluorine";
    case Termination::hydrogen: return "hydrogen";
    case Termination::mixed: return "mixed";
  }
  return "?";
}

}  // namespace

std::vector<DepthScanEntry> depth_scan(const DepthScanConfig& scan, const CceConfig& cce,
                                       const QubitSelector& qubit,
                                       const std::vector<double>& taus,
                                       DecayMethod method) {
  for (double d : scan.depths_angstrom)
    if (!(d > 0)) throw ConfigError("depth scan depths must be > 0");

  std::vector<DepthScanEntry> rows;
  for (double depth : scan.depths_angstrom) {
    for (Termination term : scan.terminations) {
      SurfaceConfig surf;
      surf.termination = term;
      surf.mix_ratio = scan.mix_ratio;
      surf.depth = depth;
      surf.lateral_extent = scan.lateral_extent;

      auto bath = generate_surface_bath(surf, scan.lattice);
      bath = assign_hyperfine(bath, std::nullopt, scan.central.spec.gyro_mhz_per_g);

      CentralSpinModel central = scan.central;
      if (!scan.e_of_depth.empty())
        central.e_mhz = interpolate_e_of_depth(scan.e_of_depth, depth);

      auto couplings = pair_couplings_from_positions(bath);
      for (const auto& [label, field] : scan.fields) {
        SpinSystem sys = make_system(central, bath, couplings, field, {},
                                     kUnboundedDimensionCap);
        PulseProtocol protocol;
        protocol.kind = ProtocolKind::hahn_echo;
        protocol.qubit = qubit;
        const auto run = run_gcce_detailed(sys, cce, protocol, taus);

        DepthScanEntry row;
        row.depth_angstrom = depth;
        row.termination = termination_name(term);
        row.field_label = label;
        row.fit = extract_decay_time(run.mean.times_us, run.mean.values, method);

        double sum = 0, sum2 = 0;
        int n = 0;
        for (const auto& sample : run.per_sample) {
          const DecayFit f = extract_decay_time(taus, sample, method);
          if (!f.resolved) continue;
          sum += f.t_char_us;
          sum2 += f.t_char_us * f.t_char_us;
          ++n;
        }
        row.n_resolved_samples = n;
        if (n > 0) {
          row.t2_sample_mean = sum / n;
          const double var = std::max(0.0, sum2 / n - row.t2_sample_mean * row.t2_sample_mean);
          row.t2_sample_std = std::sqrt(var);
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace nvsim
