#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nvsim/field_analysis.hpp"

using namespace nvsim;

namespace {

SpinSystem nv_with_n15(double e_mhz, double azz = 3.03, double aperp = 3.65) {
  CentralSpinModel central;
  central.d_mhz = 2870.0;
  central.e_mhz = e_mhz;
  BathSpin n;
  n.spec = species::n15();
  n.position = {0, 0, 1.68};
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  a.diagonal() << aperp, aperp, azz;
  n.hyperfine = make_hyperfine(a);
  return make_system(central, {n}, {}, {0, 0, 0});
}

SpinSystem bare_nv(double e_mhz) {
  CentralSpinModel central;
  central.d_mhz = 2870.0;
  central.e_mhz = e_mhz;
  return make_system(central, {}, {}, {0, 0, 0});
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("field geometry composition") {
  FieldGeometry g;
  g.b0_gauss = 2.0;
  g.theta0_deg = 60.0;
  g.br_gauss = 0.45;
  g.theta_r_deg = 120.0;
  g.phi_deg = 180.0;
  const Eigen::Vector3d f = g.total_field();
  // supplementary angles with phi = 180: residual is antiparallel to B0
  const Eigen::Vector3d expected = (2.0 - 0.45) * g.applied_direction();
  CHECK((f - expected).norm() < 1e-12);

  g.phi_deg = 0.0;
  const Eigen::Vector3d f0 = g.total_field();
  CHECK(f0.z() == doctest::Approx(2.0 * 0.5 + 0.45 * (-0.5)).epsilon(1e-12));
  CHECK(f0.y() == doctest::Approx(0.0));
  CHECK(g.axial_projection(2.0) == doctest::Approx(f0.z()).epsilon(1e-12));

  // negative b0 flips the applied direction
  const Eigen::Vector3d fneg = g.with_b0(-2.0).total_field();
  CHECK(fneg.x() == doctest::Approx(-2.0 * std::sin(constants::pi / 3.0) +
                                    0.45 * std::sin(2.0 * constants::pi / 3.0))
                        .epsilon(1e-12));
}

TEST_CASE("level diagram: bare Zeeman lines match closed forms") {
  FieldSweepModel model{bare_nv(0.0), FieldGeometry{}};  // axial scan
  const auto grid = linspace(-5.0, 5.0, 41);
  const auto diagram = level_diagram(model, grid);
  const double d = 2870.0;
  for (int f = 0; f < 41; ++f) {
    const double b = grid[f];
    const double ge = constants::gyro_electron;
    // ascending eigenvalues: {-2D/3, D/3 - |ge b|, D/3 + |ge b|}
    CHECK(diagram.energies(f, 0) == doctest::Approx(-2.0 * d / 3.0).epsilon(1e-12));
    CHECK(diagram.energies(f, 1) ==
          doctest::Approx(d / 3.0 - std::abs(ge * b)).epsilon(1e-12));
    CHECK(diagram.energies(f, 2) ==
          doctest::Approx(d / 3.0 + std::abs(ge * b)).epsilon(1e-12));
  }
  // tracks stay continuous across the crossing (eigenvector overlap tracking)
  CHECK(diagram.n_tracks == 3);
}

TEST_CASE("clock transitions of the 15N system sit at Azz/(2 ge cos theta0)") {
  SpinSystem sys = nv_with_n15(1.25);
  FieldGeometry geom;
  geom.theta0_deg = 60.0;
  FieldSweepModel model{sys, geom};
  const auto grid = linspace(-2.5, 2.5, 101);
  const auto diagram = level_diagram(model, grid);
  const auto cts = find_clock_transitions(model, diagram);
  REQUIRE(cts.size() >= 2);

  const double expected_b0 =
      3.03 / (2.0 * constants::gyro_electron * std::cos(constants::pi / 3.0));
  bool found_pos = false, found_neg = false;
  for (const auto& ct : cts) {
    if (std::abs(ct.b0_gauss - expected_b0) < 0.02 * expected_b0) {
      found_pos = true;
      CHECK(ct.gap_mhz == doctest::Approx(2.0 * 1.25).epsilon(0.05));
      CHECK(std::abs(ct.dfdb_mhz_per_g) < 1e-3);
    }
    if (std::abs(ct.b0_gauss + expected_b0) < 0.02 * expected_b0) found_neg = true;
  }
  CHECK(found_pos);
  CHECK(found_neg);
}

TEST_CASE("bath-free avoided crossing gap equals 2E for the quoted E values") {
  for (double e : {0.65, 1.25, 15.0}) {
    FieldGeometry geom;
    geom.theta0_deg = 60.0;
    FieldSweepModel model{bare_nv(e), geom};
    const auto grid = linspace(-2.0, 2.0, 81);
    const auto diagram = level_diagram(model, grid);
    const auto cts = find_clock_transitions(model, diagram);
    REQUIRE(!cts.empty());
    // the minimum at zero total field has gap exactly 2E
    double best_gap = 1e300;
    double best_b0 = 1e300;
    for (const auto& ct : cts)
      if (std::abs(ct.b0_gauss) < std::abs(best_b0)) {
        best_b0 = ct.b0_gauss;
        best_gap = ct.gap_mhz;
      }
    CHECK(std::abs(best_b0) < 1e-9);
    CHECK(std::abs(best_gap - 2.0 * e) < 1e-6 * 2.0 * e);
  }
}

TEST_CASE("second 13C adds closely positioned splits") {
  SpinSystem sys = nv_with_n15(1.25);
  BathSpin c;
  c.spec = species::c13();
  c.position = {0, 0, 2.5};
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  a.diagonal() << 0.1, 0.1, 0.6;
  c.hyperfine = make_hyperfine(a);
  sys.spins.push_back(c);

  FieldGeometry geom;
  geom.theta0_deg = 60.0;
  FieldSweepModel model{sys, geom};
  const auto grid = linspace(-2.5, 2.5, 201);
  const auto diagram = level_diagram(model, grid);
  const auto cts = find_clock_transitions(model, diagram);
  // two 15N crossings split into (Azz_N +- Azz_C)/(2 ge cos) pairs
  int near_expected = 0;
  const double ge_cos = 2.0 * constants::gyro_electron * 0.5;
  for (double target : {(3.03 + 0.6) / ge_cos, (3.03 - 0.6) / ge_cos,
                        -(3.03 + 0.6) / ge_cos, -(3.03 - 0.6) / ge_cos}) {
    for (const auto& ct : cts)
      if (std::abs(ct.b0_gauss - target) < 0.05 * std::abs(target)) {
        ++near_expected;
        break;
      }
  }
  CHECK(near_expected == 4);
}

TEST_CASE("NV1 geometry: crossing at 1.1 G scan value, 0.55 G axial") {
  SpinSystem sys = nv_with_n15(0.65, 3.1, 3.65);
  FieldGeometry geom;
  geom.theta0_deg = 61.3;
  FieldSweepModel model{sys, geom};
  const auto grid = linspace(-2.5, 2.5, 101);
  const auto diagram = level_diagram(model, grid);
  const auto cts = find_clock_transitions(model, diagram);
  bool ok = false;
  for (const auto& ct : cts)
    if (std::abs(ct.b0_gauss - 1.1) <= 0.05 * 1.1 &&
        std::abs(ct.axial_gauss - 0.55) <= 0.05 * 0.55)
      ok = true;
  CHECK(ok);
}

TEST_CASE("residual field shifts transitions by -br cos(theta_r)/cos(theta0)") {
  SpinSystem sys = nv_with_n15(1.25);
  FieldGeometry geom;
  geom.theta0_deg = 60.0;
  FieldSweepModel base_model{sys, geom};
  const auto grid = linspace(-3.0, 3.0, 121);
  const auto cts0 =
      find_clock_transitions(base_model, level_diagram(base_model, grid));

  geom.br_gauss = 0.45;
  geom.theta_r_deg = 120.0;
  geom.phi_deg = 70.0;  // arbitrary azimuth: only the axial part shifts positions
  FieldSweepModel shifted_model{sys, geom};
  const auto cts1 =
      find_clock_transitions(shifted_model, level_diagram(shifted_model, grid));

  REQUIRE(cts0.size() >= 2);
  REQUIRE(cts1.size() >= 2);
  const double shift = -0.45 * std::cos(2.0 * constants::pi / 3.0) /
                       std::cos(constants::pi / 3.0);  // +0.45
  // compare the principal (outermost) transitions
  CHECK(cts1.front().b0_gauss - cts0.front().b0_gauss ==
        doctest::Approx(shift).epsilon(0.03));
  CHECK(cts1.back().b0_gauss - cts0.back().b0_gauss ==
        doctest::Approx(shift).epsilon(0.03));
}

TEST_CASE("odmr: 15N doublet split by Azz") {
  SpinSystem sys = nv_with_n15(0.0);
  sys.field_gauss = {0, 0, 10.0};
  const auto spec = odmr_spectrum(sys, 0.4);
  REQUIRE(spec.lines.size() >= 4);
  // lower branch doublet: two lowest-frequency lines split by ~Azz
  CHECK(spec.lines[1].freq_mhz - spec.lines[0].freq_mhz ==
        doctest::Approx(3.03).epsilon(0.02));
  // upper branch doublet as well
  const size_t n = spec.lines.size();
  CHECK(spec.lines[n - 1].freq_mhz - spec.lines[n - 2].freq_mhz ==
        doctest::Approx(3.03).epsilon(0.02));
}

TEST_CASE("odmr: zero-field E splitting of 0.65 MHz gives two lines 2E apart") {
  SpinSystem sys = bare_nv(0.65);
  const auto spec = odmr_spectrum(sys, 0.1);
  REQUIRE(spec.lines.size() == 2);
  CHECK(spec.lines[1].freq_mhz - spec.lines[0].freq_mhz ==
        doctest::Approx(2.0 * 0.65).epsilon(1e-6));
}

TEST_CASE("odmr: 1 MHz linewidth leaves a 0.6 MHz split unresolvable") {
  SpinSystem sys = bare_nv(0.3);  // two lines 0.6 MHz apart
  const auto spec = odmr_spectrum(sys, 1.0);
  REQUIRE(spec.lines.size() == 2);
  CHECK(spec.lines[1].freq_mhz - spec.lines[0].freq_mhz == doctest::Approx(0.6).epsilon(1e-6));
  // the central dip between the overlapping Lorentzians is below any
  // realistic contrast resolution (< 1% of the peak)
  const double center = 0.5 * (spec.lines[0].freq_mhz + spec.lines[1].freq_mhz);
  double peak = 0, at_center = 0, best_df = 1e300;
  for (size_t k = 0; k < spec.intensity.size(); ++k) {
    peak = std::max(peak, spec.intensity[k]);
    const double df = std::abs(spec.freq_mhz[k] - center);
    if (df < best_df) {
      best_df = df;
      at_center = spec.intensity[k];
    }
  }
  CHECK((peak - at_center) / peak < 0.01);

  // a 0.25 MHz linewidth resolves the same pair cleanly
  const auto sharp = odmr_spectrum(sys, 0.25);
  double speak = 0, scenter = 0;
  best_df = 1e300;
  for (size_t k = 0; k < sharp.intensity.size(); ++k) {
    speak = std::max(speak, sharp.intensity[k]);
    const double df = std::abs(sharp.freq_mhz[k] - center);
    if (df < best_df) {
      best_df = df;
      scenter = sharp.intensity[k];
    }
  }
  CHECK((speak - scenter) / speak > 0.2);
}

TEST_CASE("odmr integrated amplitude is linewidth invariant") {
  SpinSystem sys = nv_with_n15(0.65);
  sys.field_gauss = {2.0, 0.5, 8.0};
  const auto narrow = odmr_spectrum(sys, 0.5);
  const auto wide = odmr_spectrum(sys, 1.7);
  CHECK(std::abs(narrow.total_amplitude() - wide.total_amplitude()) <
        1e-6 * narrow.total_amplitude());

  // numeric integral approaches the analytic amplitude on a wide grid
  OdmrOptions opts;
  opts.pad_mhz = 200.0;
  opts.n_grid = 40001;
  const auto spec = odmr_spectrum(sys, 0.5, opts);
  double integral = 0;
  for (size_t k = 1; k < spec.freq_mhz.size(); ++k)
    integral += 0.5 * (spec.intensity[k] + spec.intensity[k - 1]) *
                (spec.freq_mhz[k] - spec.freq_mhz[k - 1]);
  CHECK(integral == doctest::Approx(spec.total_amplitude()).epsilon(0.01));
}

TEST_CASE("asymmetry metric on a synthetic symmetric sweep is zero") {
  SweepResult sweep;
  ClockTransition left, right;
  left.b0_gauss = -1.0;
  right.b0_gauss = +1.0;
  sweep.transitions = {left, right};
  for (double b = -1.6; b <= 1.6 + 1e-12; b += 0.1) {
    SweepPoint pt;
    pt.b0_gauss = b;
    pt.fit.resolved = true;
    // symmetric double-peak profile
    pt.fit.t_char_us = 1.0 + 5.0 * std::exp(-std::pow((std::abs(b) - 1.0) / 0.2, 2));
    sweep.points.push_back(pt);
  }
  const auto res = asymmetry_metric(sweep);
  REQUIRE(res.resolved);
  CHECK(std::abs(res.metric) < 1e-9);
  CHECK(res.center_b0 == doctest::Approx(0.0));
}

TEST_CASE("T2* is enhanced at the clock transition (15N core + 13C bath)") {
  // core = electron + 15N; several weak bath carbons provide the dephasing
  // (a single spin only beats, its envelope never decays)
  SpinSystem sys = nv_with_n15(1.25);
  const Eigen::Vector3d positions[] = {
      {5.0, 2.0, 4.0}, {-4.5, 3.5, -3.0}, {6.0, -2.5, 2.0}, {-3.0, -5.0, 4.5},
      {2.5, 6.0, -3.5}};
  for (const auto& p : positions) {
    BathSpin c;
    c.spec = species::c13();
    c.position = p;
    c.hyperfine = point_dipole_hyperfine(p, constants::gyro_electron,
                                         constants::gyro_c13);
    sys.spins.push_back(c);
  }

  FieldGeometry geom;
  geom.theta0_deg = 60.0;
  FieldSweepModel model{sys, geom};

  CceConfig cfg;
  cfg.core_spins = {0};  // the nitrogen
  const auto times = uniform_time_grid(600.0, 1025);

  const double ct_b0 = 3.03 / (2.0 * constants::gyro_electron * 0.5);
  auto t2_at = [&](double b0) {
    const auto curve = run_ramsey(model.at(b0), cfg, {}, times);
    return extract_decay_time(curve.times_us, curve.values, DecayMethod::one_over_e);
  };
  const auto on = t2_at(ct_b0);
  const auto off = t2_at(5.0);
  REQUIRE(off.resolved);
  if (on.resolved)
    CHECK(on.t_char_us > 3.0 * off.t_char_us);
  // if unresolved the coherence outlived the window, which also qualifies
}

TEST_CASE("sweep mirror symmetry under phi -> -phi for a y-symmetric system") {
  SpinSystem sys = nv_with_n15(15.0);
  BathSpin c;
  c.spec = species::c13();
  c.position = {4.5, 0.0, 3.0};  // in the xz plane: y-reflection symmetric
  c.hyperfine = point_dipole_hyperfine(c.position, constants::gyro_electron,
                                       constants::gyro_c13);
  sys.spins.push_back(c);

  FieldGeometry geom;
  geom.theta0_deg = 60.0;
  geom.br_gauss = 0.45;
  geom.theta_r_deg = 120.0;

  CceConfig cfg;
  cfg.core_spins = {0};
  SweepOptions opts;
  const auto times = uniform_time_grid(300.0, 257);
  const auto grid = linspace(-1.0, 1.9, 7);

  geom.phi_deg = 90.0;
  const auto plus = sweep_t2star({sys, geom}, grid, cfg, times, opts);
  geom.phi_deg = -90.0;
  const auto minus = sweep_t2star({sys, geom}, grid, cfg, times, opts);
  REQUIRE(plus.points.size() == minus.points.size());
  for (size_t k = 0; k < plus.points.size(); ++k) {
    CHECK(plus.points[k].fit.resolved == minus.points[k].fit.resolved);
    if (plus.points[k].fit.resolved)
      CHECK(plus.points[k].fit.t_char_us ==
            doctest::Approx(minus.points[k].fit.t_char_us).epsilon(1e-6));
  }
}

TEST_CASE("deep NV approaches the terminationless limit") {
  // at 10 G the termination bath imprints a collapse-and-revival echo
  // modulation at the 19F Larmor period (~25 us); its depth falls off
  // steeply with distance, so a deep NV barely notices the surface
  auto dip_at_depth = [](double depth, double r_bath) {
    SurfaceConfig surf;
    surf.termination = Termination::fluorine;
    surf.depth = depth;
    surf.lateral_extent = 26.0;
    LatticeConfig lat;
    lat.r_bath = r_bath;
    lat.seed = 7;
    auto bath = generate_surface_bath(surf, lat);
    bath = assign_hyperfine(bath, std::nullopt);
    CentralSpinModel central;
    central.d_mhz = 2870.0;
    central.e_mhz = 10.0;
    auto sys = make_system(central, bath, pair_couplings_from_positions(bath),
                           {0, 0, 10.0}, {}, kUnboundedDimensionCap);
    CceConfig cfg;
    cfg.order = 2;
    cfg.r_dip = 6.0;
    cfg.threads = 4;
    const auto taus = uniform_time_grid(60.0, 121);
    const auto echo = run_hahn_echo(sys, cfg, {}, taus);
    double dip = 1e300, tail = 0.0;
    for (size_t k = 0; k < taus.size(); ++k) {
      dip = std::min(dip, std::abs(echo.values[k]));
      if (taus[k] > 45.0) tail = std::max(tail, std::abs(echo.values[k]));
    }
    const auto fit = extract_decay_time(taus, echo.values, DecayMethod::one_over_e);
    return std::tuple{dip, tail, fit.resolved};
  };

  const auto [deep_dip, deep_tail, deep_resolved] = dip_at_depth(40.0, 55.0);
  const auto [shallow_dip, shallow_tail, shallow_resolved] = dip_at_depth(12.0, 30.0);

  // the deep centre never loses coherence: modulation dip above 1/e, revival
  // near unity, and the envelope decay is unresolved (terminationless limit)
  CHECK(deep_dip > std::exp(-1.0));
  CHECK(deep_tail > 0.95);
  CHECK_FALSE(deep_resolved);
  // the shallow centre collapses deeply within the same window
  CHECK(shallow_dip < 0.3);
  CHECK(deep_dip > 2.0 * shallow_dip);
  (void)shallow_tail;
  (void)shallow_resolved;
}

TEST_CASE("e_of_depth interpolation") {
  std::vector<std::pair<double, double>> table{{9.0, 30.0}, {12.0, 24.0}, {20.0, 8.0}};
  CHECK(interpolate_e_of_depth(table, 9.0) == doctest::Approx(30.0));
  CHECK(interpolate_e_of_depth(table, 10.5) == doctest::Approx(27.0));
  CHECK(interpolate_e_of_depth(table, 30.0) == doctest::Approx(8.0));
  CHECK(interpolate_e_of_depth(table, 5.0) == doctest::Approx(30.0));
}
