#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "nvsim/config.hpp"
#include "nvsim/io.hpp"

using namespace nvsim;
namespace fs = std::filesystem;

namespace {

Json minimal_config() {
  Json j;
  j["schema_version"] = 1;
  j["scenario"] = "odmr";
  j["central"]["d_mhz"] = 2870.0;
  j["central"]["e_mhz"] = 0.65;
  j["field"]["b0_gauss"] = 10.0;
  return j;
}

bool has_diag_containing(const std::vector<std::string>& diags, const std::string& s) {
  for (const auto& d : diags)
    if (d.find(s) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal config validates clean") {
  CHECK(validate_config_json(minimal_config()).empty());
}

TEST_CASE("abundance out of range is reported at its path") {
  Json j = minimal_config();
  j["scenario"] = "fid_sweep";
  j["field"]["scan"] = {{"from_gauss", -1.0}, {"to_gauss", 1.0}, {"points", 11}};
  j["bath"]["source"] = "bulk_lattice";
  j["bath"]["lattice"]["abundance"] = 1.5;
  const auto diags = validate_config_json(j);
  CHECK(has_diag_containing(diags, "abundance"));
  CHECK(has_diag_containing(diags, "[0,1]"));
}

TEST_CASE("r_dip required when order is 2") {
  Json j = minimal_config();
  j["cce"]["order"] = 2;
  const auto diags = validate_config_json(j);
  CHECK(has_diag_containing(diags, "r_dip_angstrom"));

  j["cce"]["r_dip_angstrom"] = 6.0;
  CHECK(validate_config_json(j).empty());
}

TEST_CASE("unknown keys are rejected with their path") {
  Json j = minimal_config();
  j["central"]["d_mzh"] = 2870.0;  // typo
  const auto diags = validate_config_json(j);
  CHECK(has_diag_containing(diags, "$.central.d_mzh"));
  CHECK(has_diag_containing(diags, "unknown key"));
}

TEST_CASE("scenario-specific requirements") {
  Json j = minimal_config();
  j["scenario"] = "level_diagram";
  const auto diags = validate_config_json(j);
  CHECK(has_diag_containing(diags, "$.field.scan"));

  Json d = minimal_config();
  d["scenario"] = "echo_depth_scan";
  CHECK(has_diag_containing(validate_config_json(d), "$.depth_scan"));
}

TEST_CASE("|E| > |D| is a configuration error") {
  Json j = minimal_config();
  j["central"]["e_mhz"] = 4000.0;
  CHECK(has_diag_containing(validate_config_json(j), "e_mhz"));
}

TEST_CASE("parse_run_config throws with joined diagnostics") {
  Json j = minimal_config();
  j["scenario"] = "nonsense";
  CHECK_THROWS_AS(parse_run_config(j), ConfigError);
}

TEST_CASE("resolved config materializes defaults and round-trips") {
  const RunConfig cfg = parse_run_config(minimal_config());
  CHECK(cfg.resolved["cce"]["order"] == 1);
  CHECK(cfg.resolved["odmr"]["linewidth_mhz"] == 1.0);
  CHECK(cfg.resolved["central"]["gyro_mhz_per_g"] == constants::gyro_electron);
  // re-parsing the resolved config reproduces the same resolved config
  const RunConfig again = parse_run_config(cfg.resolved);
  CHECK(again.resolved == cfg.resolved);
}

TEST_CASE("format_double is stable and compact") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.23456789012e-7) == "1.23456789012e-07");
}

TEST_CASE("atomic_write_text replaces content completely") {
  const std::string path = "/tmp/nvsim_io_test/file.txt";
  fs::remove_all("/tmp/nvsim_io_test");
  atomic_write_text(path, "first");
  CHECK(read_text(path) == "first");
  atomic_write_text(path, "second-longer-content");
  CHECK(read_text(path) == "second-longer-content");
  // no stray temp files
  int count = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator("/tmp/nvsim_io_test"))
    ++count;
  CHECK(count == 1);
}

TEST_CASE("fnv1a hash is stable") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
}

TEST_CASE("hyperfine table file parsing") {
  const std::string path = "/tmp/nvsim_io_test_table.txt";
  atomic_write_text(path,
                    "# position (A) and tensor (MHz)\n"
                    "0 0 4.0   0.1 0 0   0 0.1 0   0 0 0.6\n"
                    "\n"
                    "1.5 0 2.0  0.0 0 0   0 0.0 0   0 0 0.2\n");
  const auto table = parse_hyperfine_table(path, 0.1);
  REQUIRE(table.entries.size() == 2);
  CHECK(table.entries[0].tensor(2, 2) == 0.6);
  CHECK(table.entries[1].position.x() == 1.5);

  atomic_write_text(path, "1 2 3 4\n");
  CHECK_THROWS_AS(parse_hyperfine_table(path, 0.1), ConfigError);
}

TEST_CASE("curve CSV format") {
  CoherenceCurve c;
  c.times_us = {0.0, 0.5};
  c.values = {Complex(1, 0), Complex(0.25, -0.5)};
  const std::string csv = curve_csv(c);
  CHECK(csv.find("time_us,re_L,im_L,abs_L\n") == 0);
  CHECK(csv.find("0.5,0.25,-0.5,") != std::string::npos);
}

TEST_CASE("bath snapshot JSON carries provenance") {
  BathSpin s;
  s.spec = species::c13();
  s.position = {1, 2, 3};
  s.provenance = BathSpin::Provenance::tabulated;
  const Json snap = bath_snapshot({s});
  REQUIRE(snap.size() == 1);
  CHECK(snap[0]["species"] == "13C");
  CHECK(snap[0]["provenance"] == "tabulated");
}
