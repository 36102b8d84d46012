#pragma once

#include <limits>

#include "nvsim/bath.hpp"
#include "nvsim/sequences.hpp"

namespace nvsim {

// ---------------------------------------------------------------------------
// field geometry
// ---------------------------------------------------------------------------

// applied field B0 (signed magnitude along a fixed direction in the xz plane)
// plus a residual field Br; angles in degrees, z is the NV axis
struct FieldGeometry {
  double b0_gauss = 0.0;
  double theta0_deg = 0.0;
  double br_gauss = 0.0;
  double theta_r_deg = 0.0;
  double phi_deg = 0.0;  // relative azimuth between B0 and Br

  Eigen::Vector3d applied_direction() const;
  Eigen::Vector3d residual_field() const;
  Eigen::Vector3d total_field() const;  // b0 * dir + residual
  FieldGeometry with_b0(double b0) const;

  // z component of the total field at a given scan value
  double axial_projection(double b0) const;
};

// system template plus scan geometry; the scan coordinate is the signed B0
// magnitude at fixed direction
struct FieldSweepModel {
  SpinSystem base;         // field member is overwritten per scan point
  FieldGeometry geometry;  // b0 member is the scan coordinate

  SpinSystem at(double b0) const;
  SpinSystem at_field(const Eigen::Vector3d& field_gauss) const;
};

// ---------------------------------------------------------------------------
// level diagrams and clock transitions
// ---------------------------------------------------------------------------

struct LevelDiagram {
  std::vector<double> fields_gauss;  // monotone scan grid
  Eigen::MatrixXd energies;          // n_fields x dim, ascending per row
  Eigen::MatrixXi tracks;            // continuity label per (field, column)
  int n_tracks = 0;
  std::vector<std::string> warnings;  // split / refine records

  Eigen::MatrixXd pair_gaps(int field_index) const;
};

LevelDiagram level_diagram(const FieldSweepModel& model,
                           const std::vector<double>& b0_grid);

struct ClockTransition {
  double b0_gauss = 0.0;     // refined scan coordinate of the gap minimum
  double axial_gauss = 0.0;  // total-field z projection there
  int level_lower = -1;      // ascending-energy indices of the pair
  int level_upper = -1;
  double gap_mhz = 0.0;
  // axial-field derivative of the qubit transition frequency (pair center
  // minus the Sx-connected ms0 reference level)
  double dfdb_mhz_per_g = 0.0;
  bool refine_warning = false;  // gap changed > 20% per grid step near the minimum
};

// strict local minima of adjacent level gaps inside the ms=+-1 dominant
// manifold, refined by a 3-point quadratic fit and re-evaluated exactly
std::vector<ClockTransition> find_clock_transitions(const FieldSweepModel& model,
                                                    const LevelDiagram& diagram);

// ---------------------------------------------------------------------------
// ODMR
// ---------------------------------------------------------------------------

struct OdmrLine {
  double freq_mhz = 0.0;
  double amplitude = 0.0;
};

struct OdmrSpectrum {
  std::vector<double> freq_mhz;
  std::vector<double> intensity;
  std::vector<OdmrLine> lines;

  // analytic integrated amplitude (profiles are unit-area Lorentzians)
  double total_amplitude() const;
};

enum class MwPolarization { unpolarized, x, y };

struct OdmrOptions {
  int n_grid = 2001;
  double pad_mhz = 5.0;  // grid margin beyond the outer lines (plus 5 widths)
  // unpolarized averages the x and y drive amplitudes; at exactly zero field a
  // pure linear drive couples to only one of the two E-split branches
  MwPolarization polarization = MwPolarization::unpolarized;
};

// transitions between the ms0-dominant and +-1-dominant manifolds, amplitude
// from the microwave drive matrix elements with equal populations across the
// ms0 sublevels, broadened by unit-area Lorentzians of FWHM = linewidth
OdmrSpectrum odmr_spectrum(const SpinSystem& sys, double linewidth_mhz,
                           const OdmrOptions& opts = {});

// ---------------------------------------------------------------------------
// coherence sweeps
// ---------------------------------------------------------------------------

struct SweepPoint {
  double b0_gauss = 0.0;
  DecayFit fit;
  double gap_mhz_nearest_ct = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // per-point hard error when keep-going
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<ClockTransition> transitions;  // from the core-system diagram
  std::string protocol_tag;
  std::string method_tag;
};

struct SweepOptions {
  ProtocolKind kind = ProtocolKind::ramsey;
  DecayMethod method = DecayMethod::one_over_e;
  QubitSelector qubit;
  bool keep_going = false;
};

SweepResult sweep_t2star(const FieldSweepModel& model,
                         const std::vector<double>& b0_grid, const CceConfig& cce,
                         const std::vector<double>& times, const SweepOptions& opts);

struct AsymmetryResult {
  bool resolved = false;
  double metric = 0.0;
  double center_b0 = 0.0;  // fitted center (midpoint of the matched peaks)
  double peak_left_b0 = 0.0, peak_right_b0 = 0.0;
  double t2_left = 0.0, t2_right = 0.0;
  std::string note;
};

// (T2*_left - T2*_right) / (T2*_left + T2*_right) for the peaks matched to the
// outermost clock transitions after shift correction
AsymmetryResult asymmetry_metric(const SweepResult& sweep);

// ---------------------------------------------------------------------------
// depth scans
// ---------------------------------------------------------------------------

struct DepthScanEntry {
  double depth_angstrom = 0.0;
  std::string termination;
  std::string field_label;
  DecayFit fit;                  // from the sample-averaged curve
  double t2_sample_mean = 0.0;   // statistics over per-sample fits
  double t2_sample_std = 0.0;
  int n_resolved_samples = 0;
};

struct DepthScanConfig {
  std::vector<double> depths_angstrom;
  std::vector<Termination> terminations;
  std::vector<std::pair<std::string, Eigen::Vector3d>> fields;  // label, Gauss
  std::vector<std::pair<double, double>> e_of_depth;  // (depth, E MHz), interpolated
  double mix_ratio = 0.7;
  double lateral_extent = 60.0;
  CentralSpinModel central;  // D and frame; E replaced per depth
  LatticeConfig lattice;     // r_bath and seed for the surface patch
};

std::vector<DepthScanEntry> depth_scan(const DepthScanConfig& scan, const CceConfig& cce,
                                       const QubitSelector& qubit,
                                       const std::vector<double>& taus,
                                       DecayMethod method);

double interpolate_e_of_depth(const std::vector<std::pair<double, double>>& table,
                              double depth);

}  // namespace nvsim
