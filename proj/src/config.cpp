#include "nvsim/config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace nvsim {

namespace {

struct Parser {
  std::vector<std::string> diags;

  void err(const std::string& path, const std::string& msg) {
    diags.push_back(path + ": " + msg);
  }

  void check_keys(const Json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
      err(path, "expected an object");
      return;
    }
    for (const auto& [key, _] : obj.items())
      if (!allowed.count(key)) err(path + "." + key, "unknown key");
  }

  double num(const Json& obj, const std::string& path, const std::string& key,
             std::optional<double> fallback) {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      err(path + "." + key, "required number missing");
      return 0.0;
    }
    if (!obj[key].is_number()) {
      err(path + "." + key, "expected a number");
      return fallback.value_or(0.0);
    }
    return obj[key].get<double>();
  }

  long long integer(const Json& obj, const std::string& path, const std::string& key,
                    std::optional<long long> fallback) {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      err(path + "." + key, "required integer missing");
      return 0;
    }
    if (!obj[key].is_number_integer() && !obj[key].is_number_unsigned()) {
      err(path + "." + key, "expected an integer");
      return fallback.value_or(0);
    }
    return obj[key].get<long long>();
  }

  std::string str(const Json& obj, const std::string& path, const std::string& key,
                  std::optional<std::string> fallback) {
    if (!obj.contains(key)) {
      if (fallback) return *fallback;
      err(path + "." + key, "required string missing");
      return {};
    }
    if (!obj[key].is_string()) {
      err(path + "." + key, "expected a string");
      return fallback.value_or("");
    }
    return obj[key].get<std::string>();
  }

  Eigen::Vector3d vec3(const Json& obj, const std::string& path, const std::string& key,
                       const Eigen::Vector3d& fallback, bool required = false) {
    if (!obj.contains(key)) {
      if (required) err(path + "." + key, "required 3-vector missing");
      return fallback;
    }
    const Json& v = obj[key];
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number()) {
      err(path + "." + key, "expected [x, y, z]");
      return fallback;
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }
};

Termination parse_termination(Parser& p, const std::string& path, const std::string& s) {
  if (s == "fluorine") return Termination::fluorine;
  if (s == "hydrogen") return Termination::hydrogen;
  if (s == "mixed") return Termination::mixed;
  p.err(path, "unknown termination '" + s + "' (fluorine|hydrogen|mixed)");
  return Termination::fluorine;
}

Json tensor_json(const Eigen::Matrix3d& t) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({t(r, 0), t(r, 1), t(r, 2)});
  return rows;
}

std::optional<Eigen::Matrix3d> parse_tensor(Parser& p, const Json& obj,
                                            const std::string& path,
                                            const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  const Json& t = obj[key];
  Eigen::Matrix3d m;
  if (!t.is_array() || t.size() != 3) {
    p.err(path + "." + key, "expected a 3x3 matrix");
    return std::nullopt;
  }
  for (int r = 0; r < 3; ++r) {
    if (!t[r].is_array() || t[r].size() != 3) {
      p.err(path + "." + key, "expected a 3x3 matrix");
      return std::nullopt;
    }
    for (int c = 0; c < 3; ++c) {
      if (!t[r][c].is_number()) {
        p.err(path + "." + key, "expected numeric entries");
        return std::nullopt;
      }
      m(r, c) = t[r][c].get<double>();
    }
  }
  return m;
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::fid_sweep: return "fid_sweep";
    case Scenario::echo_depth_scan: return "echo_depth_scan";
    case Scenario::level_diagram: return "level_diagram";
    case Scenario::clock_find: return "clock_find";
    case Scenario::odmr: return "odmr";
    case Scenario::oracle_check: return "oracle_check";
  }
  return "?";
}

std::vector<double> ScanConfig::grid() const {
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k)
    g[k] = from_gauss + (to_gauss - from_gauss) * k / (points - 1);
  return g;
}

namespace {

RunConfig parse_impl(const Json& j, std::vector<std::string>& diags) {
  Parser p;
  RunConfig cfg;
  Json res;  // resolved config

  p.check_keys(j, "$",
               {"schema_version", "scenario", "seed", "output", "central", "bath",
                "cce", "protocol", "field", "odmr", "depth_scan", "oracle"});

  cfg.schema_version = static_cast<int>(p.integer(j, "$", "schema_version", 1));
  if (cfg.schema_version != 1) p.err("$.schema_version", "unsupported schema version");
  res["schema_version"] = 1;

  const std::string sc = p.str(j, "$", "scenario", std::nullopt);
  if (sc == "fid_sweep") cfg.scenario = Scenario::fid_sweep;
  else if (sc == "echo_depth_scan") cfg.scenario = Scenario::echo_depth_scan;
  else if (sc == "level_diagram") cfg.scenario = Scenario::level_diagram;
  else if (sc == "clock_find") cfg.scenario = Scenario::clock_find;
  else if (sc == "odmr") cfg.scenario = Scenario::odmr;
  else if (sc == "oracle_check") cfg.scenario = Scenario::oracle_check;
  else if (!sc.empty()) p.err("$.scenario", "unknown scenario '" + sc + "'");
  res["scenario"] = scenario_name(cfg.scenario);

  cfg.seed = static_cast<std::uint64_t>(p.integer(j, "$", "seed", 0));
  res["seed"] = cfg.seed;

  if (j.contains("output")) {
    p.check_keys(j["output"], "$.output", {"dir"});
    cfg.out_dir = p.str(j["output"], "$.output", "dir", std::string("out"));
  }
  res["output"]["dir"] = cfg.out_dir;

  // ----- central
  if (!j.contains("central")) {
    p.err("$.central", "required block missing");
  } else {
    const Json& c = j["central"];
    p.check_keys(c, "$.central", {"d_mhz", "e_mhz", "gyro_mhz_per_g", "nitrogen"});
    cfg.central.d_mhz = p.num(c, "$.central", "d_mhz", std::nullopt);
    cfg.central.e_mhz = p.num(c, "$.central", "e_mhz", std::nullopt);
    cfg.central.gyro_mhz_per_g =
        p.num(c, "$.central", "gyro_mhz_per_g", constants::gyro_electron);
    if (std::abs(cfg.central.e_mhz) > std::abs(cfg.central.d_mhz))
      p.err("$.central.e_mhz", "|E| must not exceed |D|");
    if (c.contains("nitrogen")) {
      const Json& n = c["nitrogen"];
      p.check_keys(n, "$.central.nitrogen",
                   {"present", "azz_mhz", "aperp_mhz", "position_angstrom"});
      cfg.central.nitrogen.present =
          !n.contains("present") || n["present"].get<bool>();
      cfg.central.nitrogen.azz_mhz = p.num(n, "$.central.nitrogen", "azz_mhz", 3.03);
      cfg.central.nitrogen.aperp_mhz =
          p.num(n, "$.central.nitrogen", "aperp_mhz", 3.65);
      cfg.central.nitrogen.position = p.vec3(n, "$.central.nitrogen",
                                             "position_angstrom", {0, 0, 1.68});
    }
  }
  res["central"]["d_mhz"] = cfg.central.d_mhz;
  res["central"]["e_mhz"] = cfg.central.e_mhz;
  res["central"]["gyro_mhz_per_g"] = cfg.central.gyro_mhz_per_g;
  res["central"]["nitrogen"]["present"] = cfg.central.nitrogen.present;
  res["central"]["nitrogen"]["azz_mhz"] = cfg.central.nitrogen.azz_mhz;
  res["central"]["nitrogen"]["aperp_mhz"] = cfg.central.nitrogen.aperp_mhz;
  res["central"]["nitrogen"]["position_angstrom"] = {
      cfg.central.nitrogen.position.x(), cfg.central.nitrogen.position.y(),
      cfg.central.nitrogen.position.z()};

  // ----- bath
  if (j.contains("bath")) {
    const Json& b = j["bath"];
    p.check_keys(b, "$.bath",
                 {"source", "lattice", "surface", "explicit_spins",
                  "hyperfine_table_file", "match_tolerance_angstrom", "azz_max_mhz"});
    const std::string src = p.str(b, "$.bath", "source", std::nullopt);
    if (src == "none") cfg.bath.source = BathConfig::Source::none;
    else if (src == "bulk_lattice") cfg.bath.source = BathConfig::Source::bulk_lattice;
    else if (src == "surface") cfg.bath.source = BathConfig::Source::surface;
    else if (src == "explicit") cfg.bath.source = BathConfig::Source::explicit_list;
    else if (!src.empty())
      p.err("$.bath.source", "unknown source '" + src + "'");

    if (b.contains("lattice")) {
      const Json& l = b["lattice"];
      p.check_keys(l, "$.bath.lattice",
                   {"lattice_constant_angstrom", "abundance", "r_bath_angstrom"});
      cfg.bath.lattice.lattice_constant = p.num(
          l, "$.bath.lattice", "lattice_constant_angstrom",
          constants::diamond_lattice_constant);
      cfg.bath.lattice.abundance =
          p.num(l, "$.bath.lattice", "abundance", constants::c13_natural_abundance);
      cfg.bath.lattice.r_bath = p.num(l, "$.bath.lattice", "r_bath_angstrom", 30.0);
      if (cfg.bath.lattice.abundance < 0.0 || cfg.bath.lattice.abundance > 1.0)
        p.err("$.bath.lattice.abundance", "abundance must lie in [0,1]");
      if (!(cfg.bath.lattice.r_bath > 0))
        p.err("$.bath.lattice.r_bath_angstrom", "must be > 0");
    }
    cfg.bath.lattice.seed = cfg.seed;

    if (b.contains("surface")) {
      const Json& s = b["surface"];
      p.check_keys(s, "$.bath.surface",
                   {"termination", "mix_ratio", "depth_angstrom",
                    "lateral_extent_angstrom"});
      cfg.bath.surface.termination = parse_termination(
          p, "$.bath.surface.termination",
          p.str(s, "$.bath.surface", "termination", std::string("fluorine")));
      cfg.bath.surface.mix_ratio = p.num(s, "$.bath.surface", "mix_ratio", 0.7);
      cfg.bath.surface.depth = p.num(s, "$.bath.surface", "depth_angstrom", 12.0);
      cfg.bath.surface.lateral_extent =
          p.num(s, "$.bath.surface", "lateral_extent_angstrom", 60.0);
      if (cfg.bath.surface.mix_ratio < 0.0 || cfg.bath.surface.mix_ratio > 1.0)
        p.err("$.bath.surface.mix_ratio", "must lie in [0,1]");
      if (!(cfg.bath.surface.depth > 0))
        p.err("$.bath.surface.depth_angstrom", "must be > 0");
    }

    if (b.contains("explicit_spins")) {
      if (!b["explicit_spins"].is_array()) {
        p.err("$.bath.explicit_spins", "expected an array");
      } else {
        int idx = 0;
        for (const auto& e : b["explicit_spins"]) {
          const std::string path = "$.bath.explicit_spins[" + std::to_string(idx) + "]";
          p.check_keys(e, path, {"species", "position_angstrom", "tensor_mhz"});
          ExplicitSpin spin;
          spin.species = p.str(e, path, "species", std::string("13C"));
          spin.position = p.vec3(e, path, "position_angstrom", {0, 0, 0}, true);
          spin.tensor = parse_tensor(p, e, path, "tensor_mhz");
          cfg.bath.explicit_spins.push_back(spin);
          ++idx;
        }
      }
    }

    if (b.contains("hyperfine_table_file"))
      cfg.bath.hyperfine_table_file =
          p.str(b, "$.bath", "hyperfine_table_file", std::string());
    cfg.bath.match_tolerance = p.num(b, "$.bath", "match_tolerance_angstrom", 0.1);
    if (b.contains("azz_max_mhz"))
      cfg.bath.azz_max_mhz = p.num(b, "$.bath", "azz_max_mhz", 0.0);

    if (cfg.bath.source == BathConfig::Source::explicit_list &&
        cfg.bath.explicit_spins.empty())
      p.err("$.bath.explicit_spins", "explicit source needs at least one spin");
  }
  res["bath"]["source"] = [&] {
    switch (cfg.bath.source) {
      case BathConfig::Source::none: return "none";
      case BathConfig::Source::bulk_lattice: return "bulk_lattice";
      case BathConfig::Source::surface: return "surface";
      case BathConfig::Source::explicit_list: return "explicit";
    }
    return "none";
  }();
  res["bath"]["lattice"]["lattice_constant_angstrom"] = cfg.bath.lattice.lattice_constant;
  res["bath"]["lattice"]["abundance"] = cfg.bath.lattice.abundance;
  res["bath"]["lattice"]["r_bath_angstrom"] = cfg.bath.lattice.r_bath;
  res["bath"]["surface"]["termination"] = [&] {
    switch (cfg.bath.surface.termination) {
      case Termination::fluorine: return "fluorine";
      case Termination::hydrogen: return "hydrogen";
      case Termination::mixed: return "mixed";
    }
    return "fluorine";
  }();
  res["bath"]["surface"]["mix_ratio"] = cfg.bath.surface.mix_ratio;
  res["bath"]["surface"]["depth_angstrom"] = cfg.bath.surface.depth;
  res["bath"]["surface"]["lateral_extent_angstrom"] = cfg.bath.surface.lateral_extent;
  {
    Json spins = Json::array();
    for (const auto& s : cfg.bath.explicit_spins) {
      Json e;
      e["species"] = s.species;
      e["position_angstrom"] = {s.position.x(), s.position.y(), s.position.z()};
      if (s.tensor) e["tensor_mhz"] = tensor_json(*s.tensor);
      spins.push_back(e);
    }
    res["bath"]["explicit_spins"] = spins;
  }
  if (cfg.bath.hyperfine_table_file)
    res["bath"]["hyperfine_table_file"] = *cfg.bath.hyperfine_table_file;
  res["bath"]["match_tolerance_angstrom"] = cfg.bath.match_tolerance;
  if (cfg.bath.azz_max_mhz) res["bath"]["azz_max_mhz"] = *cfg.bath.azz_max_mhz;

  // ----- cce
  bool r_dip_given = false;
  if (j.contains("cce")) {
    const Json& c = j["cce"];
    p.check_keys(c, "$.cce",
                 {"order", "r_dip_angstrom", "bath_state", "n_samples", "core",
                  "dimension_cap"});
    cfg.engine.order = static_cast<int>(p.integer(c, "$.cce", "order", 1));
    if (cfg.engine.order != 1 && cfg.engine.order != 2)
      p.err("$.cce.order", "order must be 1 or 2");
    r_dip_given = c.contains("r_dip_angstrom");
    cfg.engine.r_dip = p.num(c, "$.cce", "r_dip_angstrom", 8.0);
    const std::string bs =
        p.str(c, "$.cce", "bath_state", std::string("exact_mixed"));
    if (bs == "exact_mixed") cfg.engine.bath_state = BathStatePolicy::exact_mixed;
    else if (bs == "sampled_product")
      cfg.engine.bath_state = BathStatePolicy::sampled_product;
    else p.err("$.cce.bath_state", "unknown bath state '" + bs + "'");
    cfg.engine.n_samples = static_cast<int>(p.integer(c, "$.cce", "n_samples", 25));
    if (cfg.engine.n_samples < 1) p.err("$.cce.n_samples", "must be >= 1");
    cfg.engine.dimension_cap =
        static_cast<int>(p.integer(c, "$.cce", "dimension_cap", 4096));
    if (c.contains("core")) {
      const Json& core = c["core"];
      if (core.is_string()) {
        const std::string mode = core.get<std::string>();
        if (mode == "auto") cfg.engine.core.mode = CoreSelection::Mode::auto_default;
        else if (mode == "electron_only")
          cfg.engine.core.mode = CoreSelection::Mode::electron_only;
        else p.err("$.cce.core", "expected 'auto', 'electron_only' or an id list");
      } else if (core.is_array()) {
        cfg.engine.core.mode = CoreSelection::Mode::explicit_ids;
        for (const auto& id : core) {
          if (!id.is_number_integer()) {
            p.err("$.cce.core", "core ids must be integers");
            break;
          }
          cfg.engine.core.ids.push_back(id.get<int>());
        }
      } else {
        p.err("$.cce.core", "expected 'auto', 'electron_only' or an id list");
      }
    }
  }
  if (cfg.engine.order == 2 && !r_dip_given)
    p.err("$.cce.r_dip_angstrom", "required when order = 2");
  res["cce"]["order"] = cfg.engine.order;
  res["cce"]["r_dip_angstrom"] = cfg.engine.r_dip;
  res["cce"]["bath_state"] = cfg.engine.bath_state == BathStatePolicy::exact_mixed
                                 ? "exact_mixed"
                                 : "sampled_product";
  res["cce"]["n_samples"] = cfg.engine.n_samples;
  res["cce"]["dimension_cap"] = cfg.engine.dimension_cap;
  switch (cfg.engine.core.mode) {
    case CoreSelection::Mode::auto_default: res["cce"]["core"] = "auto"; break;
    case CoreSelection::Mode::electron_only: res["cce"]["core"] = "electron_only"; break;
    case CoreSelection::Mode::explicit_ids: res["cce"]["core"] = cfg.engine.core.ids; break;
  }

  // ----- protocol
  if (j.contains("protocol")) {
    const Json& pr = j["protocol"];
    p.check_keys(pr, "$.protocol", {"kind", "qubit", "t_max_us", "n_times", "fit"});
    const std::string kind = p.str(pr, "$.protocol", "kind", std::string("ramsey"));
    if (kind == "ramsey") cfg.protocol.kind = ProtocolKind::ramsey;
    else if (kind == "hahn_echo") cfg.protocol.kind = ProtocolKind::hahn_echo;
    else p.err("$.protocol.kind", "unknown kind '" + kind + "'");
    if (pr.contains("qubit")) {
      const Json& q = pr["qubit"];
      if (q.is_string()) {
        const std::string qs = q.get<std::string>();
        if (qs == "ms0_to_lower_branch")
          cfg.protocol.qubit.mode = QubitSelector::Mode::ms0_to_lower_branch;
        else if (qs == "ms0_to_upper_branch")
          cfg.protocol.qubit.mode = QubitSelector::Mode::ms0_to_upper_branch;
        else p.err("$.protocol.qubit", "unknown selector '" + qs + "'");
      } else if (q.is_array() && q.size() == 2 && q[0].is_number_integer() &&
                 q[1].is_number_integer()) {
        cfg.protocol.qubit.mode = QubitSelector::Mode::explicit_levels;
        cfg.protocol.qubit.level_a = q[0].get<int>();
        cfg.protocol.qubit.level_b = q[1].get<int>();
      } else {
        p.err("$.protocol.qubit", "expected a selector name or [a, b] indices");
      }
    }
    cfg.protocol.t_max_us = p.num(pr, "$.protocol", "t_max_us", 0.0);
    cfg.protocol.n_times = static_cast<int>(p.integer(pr, "$.protocol", "n_times", 512));
    if (cfg.protocol.n_times < 2) p.err("$.protocol.n_times", "must be >= 2");
    const std::string fit = p.str(pr, "$.protocol", "fit", std::string("one_over_e"));
    if (fit == "one_over_e") cfg.protocol.fit = DecayMethod::one_over_e;
    else if (fit == "stretched_fit") cfg.protocol.fit = DecayMethod::stretched_fit;
    else p.err("$.protocol.fit", "unknown fit method '" + fit + "'");
  }
  res["protocol"]["kind"] =
      cfg.protocol.kind == ProtocolKind::ramsey ? "ramsey" : "hahn_echo";
  switch (cfg.protocol.qubit.mode) {
    case QubitSelector::Mode::ms0_to_lower_branch:
      res["protocol"]["qubit"] = "ms0_to_lower_branch";
      break;
    case QubitSelector::Mode::ms0_to_upper_branch:
      res["protocol"]["qubit"] = "ms0_to_upper_branch";
      break;
    case QubitSelector::Mode::explicit_levels:
      res["protocol"]["qubit"] = {cfg.protocol.qubit.level_a, cfg.protocol.qubit.level_b};
      break;
  }
  res["protocol"]["t_max_us"] = cfg.protocol.t_max_us;
  res["protocol"]["n_times"] = cfg.protocol.n_times;
  res["protocol"]["fit"] =
      cfg.protocol.fit == DecayMethod::one_over_e ? "one_over_e" : "stretched_fit";

  // ----- field
  if (j.contains("field")) {
    const Json& f = j["field"];
    p.check_keys(f, "$.field",
                 {"b0_gauss", "theta0_deg", "br_gauss", "theta_r_deg", "phi_deg",
                  "scan", "phi_list_deg"});
    cfg.field.geometry.b0_gauss = p.num(f, "$.field", "b0_gauss", 0.0);
    cfg.field.geometry.theta0_deg = p.num(f, "$.field", "theta0_deg", 0.0);
    cfg.field.geometry.br_gauss = p.num(f, "$.field", "br_gauss", 0.0);
    cfg.field.geometry.theta_r_deg = p.num(f, "$.field", "theta_r_deg", 0.0);
    cfg.field.geometry.phi_deg = p.num(f, "$.field", "phi_deg", 0.0);
    if (f.contains("scan")) {
      const Json& s = f["scan"];
      p.check_keys(s, "$.field.scan", {"from_gauss", "to_gauss", "points"});
      cfg.field.scan.present = true;
      cfg.field.scan.from_gauss = p.num(s, "$.field.scan", "from_gauss", std::nullopt);
      cfg.field.scan.to_gauss = p.num(s, "$.field.scan", "to_gauss", std::nullopt);
      cfg.field.scan.points =
          static_cast<int>(p.integer(s, "$.field.scan", "points", std::nullopt));
      if (cfg.field.scan.points < 2) p.err("$.field.scan.points", "must be >= 2");
      if (!(cfg.field.scan.to_gauss > cfg.field.scan.from_gauss))
        p.err("$.field.scan", "to_gauss must exceed from_gauss");
    }
    if (f.contains("phi_list_deg")) {
      if (!f["phi_list_deg"].is_array()) {
        p.err("$.field.phi_list_deg", "expected an array of angles");
      } else {
        for (const auto& v : f["phi_list_deg"]) {
          if (!v.is_number()) {
            p.err("$.field.phi_list_deg", "expected numbers");
            break;
          }
          cfg.field.phi_list_deg.push_back(v.get<double>());
        }
      }
    }
  }
  res["field"]["b0_gauss"] = cfg.field.geometry.b0_gauss;
  res["field"]["theta0_deg"] = cfg.field.geometry.theta0_deg;
  res["field"]["br_gauss"] = cfg.field.geometry.br_gauss;
  res["field"]["theta_r_deg"] = cfg.field.geometry.theta_r_deg;
  res["field"]["phi_deg"] = cfg.field.geometry.phi_deg;
  if (cfg.field.scan.present) {
    res["field"]["scan"]["from_gauss"] = cfg.field.scan.from_gauss;
    res["field"]["scan"]["to_gauss"] = cfg.field.scan.to_gauss;
    res["field"]["scan"]["points"] = cfg.field.scan.points;
  }
  if (!cfg.field.phi_list_deg.empty()) res["field"]["phi_list_deg"] = cfg.field.phi_list_deg;

  // ----- odmr
  if (j.contains("odmr")) {
    const Json& o = j["odmr"];
    p.check_keys(o, "$.odmr", {"linewidth_mhz", "n_grid", "pad_mhz", "polarization"});
    cfg.odmr.linewidth_mhz = p.num(o, "$.odmr", "linewidth_mhz", 1.0);
    if (!(cfg.odmr.linewidth_mhz > 0)) p.err("$.odmr.linewidth_mhz", "must be > 0");
    cfg.odmr.options.n_grid = static_cast<int>(p.integer(o, "$.odmr", "n_grid", 2001));
    cfg.odmr.options.pad_mhz = p.num(o, "$.odmr", "pad_mhz", 5.0);
    const std::string pol =
        p.str(o, "$.odmr", "polarization", std::string("unpolarized"));
    if (pol == "unpolarized") cfg.odmr.options.polarization = MwPolarization::unpolarized;
    else if (pol == "x") cfg.odmr.options.polarization = MwPolarization::x;
    else if (pol == "y") cfg.odmr.options.polarization = MwPolarization::y;
    else p.err("$.odmr.polarization", "expected unpolarized|x|y");
  }
  res["odmr"]["linewidth_mhz"] = cfg.odmr.linewidth_mhz;
  res["odmr"]["n_grid"] = cfg.odmr.options.n_grid;
  res["odmr"]["pad_mhz"] = cfg.odmr.options.pad_mhz;
  res["odmr"]["polarization"] = [&] {
    switch (cfg.odmr.options.polarization) {
      case MwPolarization::unpolarized: return "unpolarized";
      case MwPolarization::x: return "x";
      case MwPolarization::y: return "y";
    }
    return "unpolarized";
  }();

  // ----- depth_scan
  if (j.contains("depth_scan")) {
    const Json& d = j["depth_scan"];
    p.check_keys(d, "$.depth_scan",
                 {"depths_angstrom", "terminations", "fields", "e_of_depth",
                  "mix_ratio", "lateral_extent_angstrom", "tau_max_us", "n_taus"});
    if (d.contains("depths_angstrom") && d["depths_angstrom"].is_array())
      for (const auto& v : d["depths_angstrom"])
        cfg.depth.depths_angstrom.push_back(v.get<double>());
    if (d.contains("terminations") && d["terminations"].is_array())
      for (const auto& v : d["terminations"])
        cfg.depth.terminations.push_back(
            parse_termination(p, "$.depth_scan.terminations", v.get<std::string>()));
    if (d.contains("fields") && d["fields"].is_array()) {
      int idx = 0;
      for (const auto& fj : d["fields"]) {
        const std::string path = "$.depth_scan.fields[" + std::to_string(idx) + "]";
        p.check_keys(fj, path, {"label", "b_gauss"});
        cfg.depth.fields.emplace_back(p.str(fj, path, "label", std::nullopt),
                                      p.vec3(fj, path, "b_gauss", {0, 0, 0}, true));
        ++idx;
      }
    }
    if (d.contains("e_of_depth") && d["e_of_depth"].is_array())
      for (const auto& v : d["e_of_depth"]) {
        if (!v.is_array() || v.size() != 2) {
          p.err("$.depth_scan.e_of_depth", "expected [depth, E] pairs");
          break;
        }
        cfg.depth.e_of_depth.emplace_back(v[0].get<double>(), v[1].get<double>());
      }
    cfg.depth.mix_ratio = p.num(d, "$.depth_scan", "mix_ratio", 0.7);
    cfg.depth.lateral_extent = p.num(d, "$.depth_scan", "lateral_extent_angstrom", 60.0);
    cfg.depth.tau_max_us = p.num(d, "$.depth_scan", "tau_max_us", 1000.0);
    cfg.depth.n_taus = static_cast<int>(p.integer(d, "$.depth_scan", "n_taus", 129));
    if (cfg.scenario == Scenario::echo_depth_scan) {
      if (cfg.depth.depths_angstrom.empty())
        p.err("$.depth_scan.depths_angstrom", "at least one depth required");
      if (cfg.depth.terminations.empty())
        p.err("$.depth_scan.terminations", "at least one termination required");
      if (cfg.depth.fields.empty())
        p.err("$.depth_scan.fields", "at least one field required");
      for (double dep : cfg.depth.depths_angstrom)
        if (!(dep > 0)) p.err("$.depth_scan.depths_angstrom", "depths must be > 0");
    }
  } else if (cfg.scenario == Scenario::echo_depth_scan) {
    p.err("$.depth_scan", "required for the echo_depth_scan scenario");
  }
  {
    Json d;
    d["depths_angstrom"] = cfg.depth.depths_angstrom;
    Json terms = Json::array();
    for (auto t : cfg.depth.terminations)
      terms.push_back(t == Termination::fluorine
                          ? "fluorine"
                          : (t == Termination::hydrogen ? "hydrogen" : "mixed"));
    d["terminations"] = terms;
    Json fields = Json::array();
    for (const auto& [label, b] : cfg.depth.fields) {
      Json e;
      e["label"] = label;
      e["b_gauss"] = {b.x(), b.y(), b.z()};
      fields.push_back(e);
    }
    d["fields"] = fields;
    Json eod = Json::array();
    for (const auto& [dep, e] : cfg.depth.e_of_depth) eod.push_back({dep, e});
    d["e_of_depth"] = eod;
    d["mix_ratio"] = cfg.depth.mix_ratio;
    d["lateral_extent_angstrom"] = cfg.depth.lateral_extent;
    d["tau_max_us"] = cfg.depth.tau_max_us;
    d["n_taus"] = cfg.depth.n_taus;
    res["depth_scan"] = d;
  }

  // ----- oracle
  if (j.contains("oracle")) {
    p.check_keys(j["oracle"], "$.oracle", {"use_pinned_suite"});
    if (j["oracle"].contains("use_pinned_suite"))
      cfg.oracle.use_pinned_suite = j["oracle"]["use_pinned_suite"].get<bool>();
  }
  res["oracle"]["use_pinned_suite"] = cfg.oracle.use_pinned_suite;

  // scenario-specific requirements
  const bool needs_scan = cfg.scenario == Scenario::fid_sweep ||
                          cfg.scenario == Scenario::level_diagram ||
                          cfg.scenario == Scenario::clock_find;
  if (needs_scan && !cfg.field.scan.present)
    p.err("$.field.scan", "required for the " + scenario_name(cfg.scenario) +
                              " scenario");

  cfg.resolved = std::move(res);
  diags = std::move(p.diags);
  return cfg;
}

}  // namespace

std::vector<std::string> validate_config_json(const Json& j) {
  std::vector<std::string> diags;
  parse_impl(j, diags);
  return diags;
}

RunConfig parse_run_config(const Json& j) {
  std::vector<std::string> diags;
  RunConfig cfg = parse_impl(j, diags);
  if (!diags.empty()) {
    std::ostringstream os;
    os << "invalid configuration (" << diags.size() << " problem"
       << (diags.size() == 1 ? "" : "s") << "):";
    for (const auto& d : diags) os << "\n  " << d;
    throw ConfigError(os.str());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config parse error in ") + path + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace nvsim
