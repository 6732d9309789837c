#include "doctest.h"

#include <cstring>
#include <string>

#include "gcd/gcd.h"

namespace {

struct Str {
  char* p = nullptr;
  ~Str() { gcd_string_free(p); }
};

}  // namespace

TEST_CASE("config handles") {
  gcd_config* c = nullptr;
  REQUIRE(gcd_config_preset("baseline", &c) == GCD_OK);
  double v = 0;
  CHECK(gcd_config_get_param(c, "theta", &v) == GCD_OK);
  CHECK(v == doctest::Approx(0.2));
  CHECK(gcd_config_set_param(c, "theta", 1.5) == GCD_ERR_CONFIG);
  CHECK(std::string(gcd_last_error_key()) == "theta");
  CHECK(gcd_config_get_param(c, "theta", &v) == GCD_OK);
  CHECK(v == doctest::Approx(0.2));
  CHECK(gcd_config_set_parallelism(c, 0) == GCD_ERR_CONFIG);
  Str hash;
  REQUIRE(gcd_config_hash(c, &hash.p) == GCD_OK);
  CHECK(std::strlen(hash.p) == 16);
  gcd_config_free(c);
}

TEST_CASE("errors") {
  gcd_config* c = nullptr;
  CHECK(gcd_config_preset("nope", &c) == GCD_ERR_CONFIG);
  CHECK(std::string(gcd_last_error()).find("nope") != std::string::npos);
  CHECK(gcd_config_parse(R"({"extra": 1})", nullptr, &c) == GCD_ERR_CONFIG);
  CHECK(std::string(gcd_last_error_key()) == "extra");
  CHECK(gcd_config_preset(nullptr, &c) == GCD_ERR_CONFIG);
  CHECK(gcd_config_load("/nonexistent/x.json", nullptr, &c) == GCD_ERR_CONFIG);
  REQUIRE(gcd_config_preset("baseline", &c) == GCD_OK);
  CHECK(std::string(gcd_last_error()).empty());
  gcd_config_free(c);
}

TEST_CASE("simulation reports the abort") {
  gcd_config* c = nullptr;
  REQUIRE(gcd_config_parse(R"({"run": {"t_end": 15}})", nullptr, &c) == GCD_OK);
  gcd_trajectory* t = nullptr;
  CHECK(gcd_simulate(c, &t) == GCD_ERR_POSITIVITY);
  REQUIRE(t != nullptr);
  CHECK(std::string(gcd_last_error_key()) == "L_b2");
  CHECK(std::string(gcd_trajectory_stop(t)) == "positivity_abort");
  CHECK(gcd_trajectory_stop_time(t) == doctest::Approx(10.65).epsilon(0.002));
  CHECK(gcd_trajectory_samples(t) > 100);
  Str csv;
  REQUIRE(gcd_trajectory_csv(t, &csv.p) == GCD_OK);
  CHECK(std::strncmp(csv.p, "t,K_f1,", 7) == 0);
  gcd_trajectory_free(t);
  gcd_config_free(c);
}

TEST_CASE("completed run") {
  gcd_config* c = nullptr;
  REQUIRE(gcd_config_parse(R"({"run": {"t_end": 1}})", nullptr, &c) == GCD_OK);
  gcd_trajectory* t = nullptr;
  CHECK(gcd_simulate(c, &t) == GCD_OK);
  CHECK(std::string(gcd_trajectory_stop(t)) == "completed");
  gcd_trajectory_free(t);
  gcd_config_free(c);
}

TEST_CASE("stationary report") {
  gcd_config* c = nullptr;
  REQUIRE(gcd_config_preset("baseline", &c) == GCD_OK);
  Str js;
  int pass = 0;
  CHECK(gcd_stationary(c, &js.p, &pass) == GCD_OK);
  CHECK(pass == 1);
  CHECK(gcd_config_set_param(c, "rho_b", 0.07) == GCD_OK);
  Str bad;
  CHECK(gcd_stationary(c, &bad.p, nullptr) == GCD_ERR_CONFIG);
  gcd_config_free(c);
}

TEST_CASE("plot") {
  const char* cols[] = {"x"};
  Str svg;
  CHECK(gcd_plot("t,x\n0,1\n1,2\n", cols, 1, "t", &svg.p) == GCD_OK);
  const char* missing[] = {"y"};
  Str none;
  CHECK(gcd_plot("t,x\n0,1\n", missing, 1, nullptr, &none.p) == GCD_ERR_CONFIG);
  CHECK(std::string(gcd_last_error()).find("available") != std::string::npos);
}
