#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "gcd/io/config.hpp"
#include "gcd/io/output.hpp"

using namespace gcd;
using namespace gcd::io;

namespace {

std::string key_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("presets") {
  CHECK(preset_names().size() == 3);
  CHECK(preset("conspicuous").params.conspicuous);
  CHECK_THROWS_AS(preset("nope"), ConfigError);
  CHECK(preset("baseline").schedule.empty());
}

TEST_CASE("austerity schedule") {
  const auto c = preset("austerity");
  const auto at = [&](double t, bool left = false) {
    return integrator::apply_schedule(c.params, c.schedule, t, left);
  };
  CHECK(at(29.9).gamma_D == doctest::Approx(0.5));
  CHECK(at(30).gamma_D == doctest::Approx(0.6));
  CHECK(at(45).gamma_D == doctest::Approx(0.55));
  CHECK(at(55).gamma_D == doctest::Approx(0.5));
  CHECK(at(60).gamma_D == doctest::Approx(0.6));
  CHECK(at(60, true).mu_p1 == doctest::Approx(50));
  CHECK(at(60).mu_p1 == doctest::Approx(0.5));
  CHECK(at(60).mu_r == doctest::Approx(0.2));
}

TEST_CASE("bad keys are named") {
  CHECK(key_of(R"({"bogus": 1})") == "bogus");
  CHECK(key_of(R"({"params": {"thetaa": 0.2}})") == "params.thetaa");
  CHECK(key_of(R"({"params": {"theta": 1.5}})") == "theta");
  CHECK(key_of(R"({"run": {"t_end": "x"}})") == "run.t_end");
  CHECK(key_of(R"({"schedule": {"nope": [[0, 1]]}})").find("nope") != std::string::npos);
  CHECK(key_of(R"({"parallelism": 0})") == "parallelism");
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("overrides") {
  const auto c = parse_config(R"({"params": {"theta": 0.25}, "initial": {"r_M": 0.045}, "seed": 9})");
  CHECK(c.params.theta == 0.25);
  CHECK(c.params.r_M_offset == doctest::Approx(-0.005));
  CHECK(c.seed == 9);
  const auto d = parse_config(R"({"preset": "baseline"})", "conspicuous");
  CHECK(d.preset == "conspicuous");
}

TEST_CASE("canonical JSON round trips") {
  for (const auto& name : preset_names()) {
    const auto a = to_json(preset(name));
    CHECK(to_json(parse_config(a)) == a);
  }
}

TEST_CASE("FNV-1a") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("numbers keep 17 digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("trajectory CSV parses back") {
  integrator::RunConfig rc;
  rc.t_end = 0.3;
  const auto tr = integrator::integrate(macro::MacroParams{}, {}, macro::baseline_state(), rc);
  const auto t = parse_csv(trajectory_csv(tr));
  CHECK(t.header.front() == "t");
  CHECK(t.header[1] == "K_f1");
  CHECK(t.rows.size() == tr.samples.size());
  CHECK(t.rows.back()[16] == tr.back().x[macro::Var::p_1]);
  CHECK_THROWS_AS(parse_csv("a,b\n1,x\n"), ConfigError);
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ConfigError);
}

TEST_CASE("plots are deterministic") {
  const auto t = parse_csv("t,x,y\n0,1,2\n1,2,1\n2,3,0\n");
  const auto a = plot_svg(t, {"x", "y"}, "demo");
  CHECK(a == plot_svg(t, {"x", "y"}, "demo"));
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("demo") != std::string::npos);
  CHECK_THROWS_AS(plot_svg(t, {}), ConfigError);
  try {
    plot_svg(t, {"z"});
    FAIL("no throw");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("available: t, x, y") != std::string::npos);
  }
}

TEST_CASE("atomic write") {
  const auto dir = std::filesystem::temp_directory_path() / "gcd_io_test";
  std::filesystem::remove_all(dir);
  const auto path = (dir / "sub" / "f.txt").string();
  write_atomic(path, "one");
  write_atomic(path, "two");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "two");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}
