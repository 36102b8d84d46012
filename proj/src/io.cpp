#include "nvsim/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nvsim {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

std::string curve_csv(const CoherenceCurve& curve) {
  std::ostringstream os;
  os << "time_us,re_L,im_L,abs_L\n";
  for (size_t k = 0; k < curve.times_us.size(); ++k) {
    const Complex v = curve.values[k];
    os << format_double(curve.times_us[k]) << ',' << format_double(v.real()) << ','
       << format_double(v.imag()) << ',' << format_double(std::abs(v)) << '\n';
  }
  return os.str();
}

Json curve_sidecar(const CoherenceCurve& curve) {
  Json j;
  j["protocol"] = curve.meta.protocol_tag;
  j["config_hash"] = curve.meta.config_hash;
  j["seed"] = curve.meta.seed;
  j["clusters_order1"] = curve.meta.n_clusters_order1;
  j["clusters_order2"] = curve.meta.n_clusters_order2;
  j["bath_state_policy"] = curve.meta.bath_state_policy;
  j["n_samples"] = curve.meta.n_samples;
  j["rng_algorithm"] = curve.meta.rng_algorithm;
  j["magnitude_warning"] = curve.meta.magnitude_warning;
  return j;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::ostringstream os;
  os << "b0_gauss,t2_us,method,resolved_flag,gap_mhz_nearest_ct\n";
  for (const auto& pt : sweep.points) {
    os << format_double(pt.b0_gauss) << ',';
    if (pt.fit.resolved)
      os << format_double(pt.fit.t_char_us);
    else
      os << "nan";
    os << ',' << sweep.method_tag << ',' << (pt.fit.resolved ? 1 : 0) << ',';
    if (std::isfinite(pt.gap_mhz_nearest_ct))
      os << format_double(pt.gap_mhz_nearest_ct);
    else
      os << "nan";
    os << '\n';
  }
  return os.str();
}

Json sweep_sidecar(const SweepResult& sweep, const CurveMeta& engine_meta) {
  Json j;
  j["protocol"] = sweep.protocol_tag;
  j["method"] = sweep.method_tag;
  j["config_hash"] = engine_meta.config_hash;
  j["seed"] = engine_meta.seed;
  j["rng_algorithm"] = engine_meta.rng_algorithm;
  Json cts = Json::array();
  for (const auto& ct : sweep.transitions) {
    Json c;
    c["b0_gauss"] = ct.b0_gauss;
    c["axial_gauss"] = ct.axial_gauss;
    c["gap_mhz"] = ct.gap_mhz;
    c["dfdb_mhz_per_g"] = ct.dfdb_mhz_per_g;
    c["level_lower"] = ct.level_lower;
    c["level_upper"] = ct.level_upper;
    c["refine_warning"] = ct.refine_warning;
    cts.push_back(c);
  }
  j["clock_transitions"] = cts;
  Json errs = Json::array();
  for (const auto& pt : sweep.points)
    if (!pt.error.empty()) {
      Json e;
      e["b0_gauss"] = pt.b0_gauss;
      e["error"] = pt.error;
      errs.push_back(e);
    }
  j["point_errors"] = errs;
  return j;
}

std::string level_diagram_csv(const LevelDiagram& diagram) {
  std::ostringstream os;
  os << "b_gauss,track_id,energy_mhz\n";
  for (size_t f = 0; f < diagram.fields_gauss.size(); ++f)
    for (int k = 0; k < diagram.energies.cols(); ++k)
      os << format_double(diagram.fields_gauss[f]) << ',' << diagram.tracks(f, k)
         << ',' << format_double(diagram.energies(f, k)) << '\n';
  return os.str();
}

std::string clock_transitions_csv(const std::vector<ClockTransition>& cts) {
  std::ostringstream os;
  os << "b0_gauss,axial_gauss,level_lower,level_upper,gap_mhz,dfdb_mhz_per_g,"
        "refine_warning\n";
  for (const auto& ct : cts)
    os << format_double(ct.b0_gauss) << ',' << format_double(ct.axial_gauss) << ','
       << ct.level_lower << ',' << ct.level_upper << ',' << format_double(ct.gap_mhz)
       << ',' << format_double(ct.dfdb_mhz_per_g) << ',' << (ct.refine_warning ? 1 : 0)
       << '\n';
  return os.str();
}

std::string odmr_csv(const OdmrSpectrum& spec) {
  std::ostringstream os;
  os << "freq_mhz,intensity\n";
  for (size_t k = 0; k < spec.freq_mhz.size(); ++k)
    os << format_double(spec.freq_mhz[k]) << ',' << format_double(spec.intensity[k])
       << '\n';
  return os.str();
}

Json odmr_sidecar(const OdmrSpectrum& spec) {
  Json j;
  Json lines = Json::array();
  for (const auto& l : spec.lines) {
    Json e;
    e["freq_mhz"] = l.freq_mhz;
    e["amplitude"] = l.amplitude;
    lines.push_back(e);
  }
  j["lines"] = lines;
  j["total_amplitude"] = spec.total_amplitude();
  return j;
}

std::string depth_scan_csv(const std::vector<DepthScanEntry>& rows) {
  std::ostringstream os;
  os << "depth_angstrom,termination,field_label,t2_us,method,resolved_flag,"
        "t2_sample_mean_us,t2_sample_std_us,n_resolved_samples\n";
  for (const auto& r : rows) {
    os << format_double(r.depth_angstrom) << ',' << r.termination << ','
       << r.field_label << ',';
    if (r.fit.resolved)
      os << format_double(r.fit.t_char_us);
    else
      os << "nan";
    os << ',' << (r.fit.method == DecayMethod::one_over_e ? "one_over_e" : "stretched_fit")
       << ',' << (r.fit.resolved ? 1 : 0) << ',' << format_double(r.t2_sample_mean)
       << ',' << format_double(r.t2_sample_std) << ',' << r.n_resolved_samples << '\n';
  }
  return os.str();
}

Json bath_snapshot(const std::vector<BathSpin>& bath) {
  Json arr = Json::array();
  for (const auto& s : bath) {
    Json j;
    j["species"] = s.spec.label;
    j["position_angstrom"] = {s.position.x(), s.position.y(), s.position.z()};
    Json tensor = Json::array();
    for (int r = 0; r < 3; ++r)
      tensor.push_back({s.hyperfine.a(r, 0), s.hyperfine.a(r, 1), s.hyperfine.a(r, 2)});
    j["tensor_mhz"] = tensor;
    switch (s.provenance) {
      case BathSpin::Provenance::point_dipole: j["provenance"] = "point_dipole"; break;
      case BathSpin::Provenance::tabulated: j["provenance"] = "tabulated"; break;
      case BathSpin::Provenance::explicit_tensor: j["provenance"] = "explicit"; break;
    }
    arr.push_back(j);
  }
  return arr;
}

}  // namespace nvsim
