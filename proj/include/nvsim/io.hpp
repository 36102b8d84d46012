#pragma once

#include <string>

// vendor single-header json
#include <json.hpp>

#include "nvsim/cce.hpp"
#include "nvsim/field_analysis.hpp"

namespace nvsim {

using Json = nlohmann::json;

// fixed float formatting so identical runs produce byte-identical files
std::string format_double(double x);

// write via temp file + rename in the destination directory
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

// 64-bit FNV-1a, hex string; used as the config hash in metadata sidecars
std::string fnv1a_hex(const std::string& data);

// ---------------------------------------------------------------------------
// result serialization (CSV bodies + JSON sidecars)
// ---------------------------------------------------------------------------

std::string curve_csv(const CoherenceCurve& curve);
Json curve_sidecar(const CoherenceCurve& curve);

std::string sweep_csv(const SweepResult& sweep);
Json sweep_sidecar(const SweepResult& sweep, const CurveMeta& engine_meta);

std::string level_diagram_csv(const LevelDiagram& diagram);
std::string clock_transitions_csv(const std::vector<ClockTransition>& cts);

std::string odmr_csv(const OdmrSpectrum& spec);
Json odmr_sidecar(const OdmrSpectrum& spec);

std::string depth_scan_csv(const std::vector<DepthScanEntry>& rows);

Json bath_snapshot(const std::vector<BathSpin>& bath);

}  // namespace nvsim
