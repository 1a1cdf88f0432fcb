#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "cpn/config.hpp"
#include "cpn/errors.hpp"

using namespace cpn;

namespace {

// Parses text expected to fail and checks every listed fragment appears in
// the combined violation message.
std::string violations_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

std::size_t violation_count(const std::string& msg) {
  std::size_t n = 0;
  for (std::size_t at = msg.find("\n  - "); at != std::string::npos;
       at = msg.find("\n  - ", at + 1))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("a one-line config yields the documented defaults") {
  const auto cfg = parse_config_text("[model]\nname = zero\n");
  CHECK(cfg.model_name == "zero");
  CHECK(cfg.horizon == 1.0);
  CHECK(cfg.dt == 0.001);  // horizon / 1000 when absent
  CHECK(cfg.population == 16);
  CHECK(cfg.n_grid == std::vector<std::size_t>{8, 16, 32, 64, 128});
  CHECK(cfg.n_ref == 2048);
  CHECK(cfg.replications == 64);
  CHECK(cfg.coupled == 8);
  CHECK(cfg.w2_times == 25);
  CHECK(cfg.threads == 1);
  CHECK(cfg.seeds.common == 1);
  CHECK(cfg.seeds.idiosyncratic == 2);
  CHECK_FALSE(cfg.seeds.init_on_common);
  CHECK(cfg.out_dir == "out");
  CHECK(cfg.trajectories);
  CHECK(cfg.max_particles == 16);
}

TEST_CASE("every recognized key parses into its field") {
  const auto cfg = parse_config_text(
      "# experiment description\n"
      "[model]\n"
      "name = systemic_risk\n"
      "mean_reversion = 2.5\n"
      "vol = 0.4\n"
      "jump_scale = -0.6\n"
      "lambda0 = 1.5\n"
      "lambda1 = 0.25\n"
      "lambda_bar = 6\n"
      "init_kind = uniform\n"
      "init_a = -1\n"
      "init_b = 1\n"
      "\n"
      "[sim]\n"
      "horizon = 2\n"
      "dt = 0.01\n"
      "population = 32\n"
      "n_grid = 4, 8,16\n"
      "n_ref = 256\n"
      "replications = 10\n"
      "coupled = 4\n"
      "w2_times = 11\n"
      "threads = 3\n"
      "\n"
      "[seeds]\n"
      "common = 123\n"
      "idiosyncratic = 0xdeadbeefcafef00d\n"
      "init_on_common = true\n"
      "\n"
      "[output]\n"
      "dir = results\n"
      "trajectories = false\n"
      "max_particles = 4\n");

  CHECK(cfg.model_name == "systemic_risk");
  CHECK(cfg.systemic.mean_reversion == 2.5);
  CHECK(cfg.systemic.vol == 0.4);
  CHECK(cfg.systemic.jump_scale == -0.6);
  CHECK(cfg.systemic.lambda0 == 1.5);
  CHECK(cfg.systemic.lambda1 == 0.25);
  CHECK(cfg.systemic.lambda_bar == 6.0);
  CHECK(cfg.init.kind == InitSpec::Kind::uniform);
  CHECK(cfg.init.a == std::vector<double>{-1.0});
  CHECK(cfg.init.b == std::vector<double>{1.0});
  CHECK(cfg.horizon == 2.0);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.population == 32);
  CHECK(cfg.n_grid == std::vector<std::size_t>{4, 8, 16});
  CHECK(cfg.n_ref == 256);
  CHECK(cfg.replications == 10);
  CHECK(cfg.coupled == 4);
  CHECK(cfg.w2_times == 11);
  CHECK(cfg.threads == 3);
  CHECK(cfg.seeds.common == 123);
  CHECK(cfg.seeds.idiosyncratic == 0xdeadbeefcafef00dULL);
  CHECK(cfg.seeds.init_on_common);
  CHECK(cfg.out_dir == "results");
  CHECK_FALSE(cfg.trajectories);
  CHECK(cfg.max_particles == 4);
}

TEST_CASE("comment styles and spacing are tolerated") {
  const auto cfg = parse_config_text(
      "; leading comment\n"
      "  [model]  \n"
      "  name=zero\n"
      "# another\n"
      "[sim]\n"
      "  horizon   =   4  \n");
  CHECK(cfg.model_name == "zero");
  CHECK(cfg.horizon == 4.0);
  CHECK(cfg.dt == 0.004);
}

TEST_CASE("all violations are reported together, each with its path") {
  const std::string msg = violations_of(
      "[model]\n"
      "name = systemic_risk\n"
      "vol = -1\n"
      "bogus = 3\n"
      "[sim]\n"
      "dt = 0\n"
      "[nope]\n"
      "x = 1\n");
  CHECK(violation_count(msg) == 4);
  CHECK(msg.find("config: 4 violation(s)") != std::string::npos);
  CHECK(msg.find("model.vol: must be nonnegative") != std::string::npos);
  CHECK(msg.find("unknown key model.bogus") != std::string::npos);
  CHECK(msg.find("sim.dt: must be positive") != std::string::npos);
  CHECK(msg.find("unknown section [nope]") != std::string::npos);
}

TEST_CASE("structural mistakes are named individually") {
  CHECK(violations_of("name = zero\n").find("key before any section") !=
        std::string::npos);
  CHECK(violations_of("[model\nname = zero\n")
            .find("malformed section header") != std::string::npos);
  CHECK(violations_of("[model]\nname = zero\nname = zero\n")
            .find("duplicate key model.name") != std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[model]\n")
            .find("duplicate section [model]") != std::string::npos);
  CHECK(violations_of("[model]\nname = zero\njust words\n")
            .find("expected key = value") != std::string::npos);
  CHECK(violations_of("[model]\n").find("model.name: required") !=
        std::string::npos);
  CHECK(violations_of("[model]\nname = banana\n")
            .find("expected zero, systemic_risk or regime") !=
        std::string::npos);
}

TEST_CASE("model-specific keys are unknown to the other models") {
  CHECK(violations_of("[model]\nname = systemic_risk\nq12 = 1\n")
            .find("unknown key model.q12") != std::string::npos);
  CHECK(violations_of("[model]\nname = regime\njump_scale = 1\n")
            .find("unknown key model.jump_scale") != std::string::npos);
  // The dimension overrides exist for the zero model only.
  CHECK(violations_of("[model]\nname = systemic_risk\n[sim]\nd = 2\n")
            .find("unknown key sim.d") != std::string::npos);
  const auto cfg =
      parse_config_text("[model]\nname = zero\n[sim]\nd = 2\nk = 3\nl = 1\n");
  CHECK(cfg.dims.d == 2);
  CHECK(cfg.dims.k == 3);
  CHECK(violations_of("[model]\nname = zero\n[sim]\nd = 0\n")
            .find("dimensions must be >= 1") != std::string::npos);
}

TEST_CASE("numeric fields reject what they cannot represent") {
  CHECK(violations_of("[model]\nname = zero\n[sim]\nhorizon = tall\n")
            .find("sim.horizon: expected a real number") != std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[sim]\npopulation = -3\n")
            .find("sim.population: expected a nonnegative integer") !=
        std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[sim]\nn_grid = 8, x\n")
            .find("comma-separated list") != std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[seeds]\ncommon = -1\n")
            .find("seeds.common: expected a 64-bit unsigned integer") !=
        std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[seeds]\ninit_on_common = maybe\n")
            .find("expected true or false") != std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[sim]\nthreads = 0\n")
            .find("sim.threads: must be >= 1") != std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[sim]\ndt = 2\n")
            .find("sim.dt: must not exceed the horizon") != std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[sim]\nn_grid = 8, 4\n")
            .find("sim.n_grid: must be strictly increasing") !=
        std::string::npos);
  CHECK(violations_of("[model]\nname = zero\n[sim]\nn_grid = 0\n")
            .find("sim.n_grid: entries must be >= 1") != std::string::npos);
}

TEST_CASE("initial conditions are validated at parse time") {
  const auto point = parse_config_text(
      "[model]\nname = systemic_risk\ninit_kind = point\ninit_a = 2.5\n");
  CHECK(point.init.kind == InitSpec::Kind::point);
  CHECK(point.init.a == std::vector<double>{2.5});

  CHECK(violations_of("[model]\nname = systemic_risk\ninit_b = 0\n")
            .find("gaussian sd must be positive") != std::string::npos);
  CHECK(violations_of("[model]\nname = systemic_risk\ninit_kind = uniform\n"
                      "init_a = 1\ninit_b = 1\n")
            .find("uniform needs init_a < init_b") != std::string::npos);
  CHECK(violations_of("[model]\nname = systemic_risk\ninit_kind = banana\n")
            .find("model.init_kind: expected point, gaussian or uniform") !=
        std::string::npos);
}

TEST_CASE("regime settings parse and build the switching model") {
  const auto cfg = parse_config_text(
      "[model]\n"
      "name = regime\n"
      "q12 = 0.5\n"
      "q21 = 1.5\n"
      "state1 = -1\n"
      "state2 = 2\n"
      "initial_state = 2\n"
      "mean_reversion = 0.8\n"
      "vol = 0.1\n");
  CHECK(cfg.q12 == 0.5);
  CHECK(cfg.q21 == 1.5);
  CHECK(cfg.state1 == -1.0);
  CHECK(cfg.state2 == 2.0);
  CHECK(cfg.initial_state == 2);
  CHECK(cfg.mean_reversion == 0.8);
  CHECK(cfg.regime_vol == 0.1);

  const auto model = build_regime_model(cfg);
  CHECK(model.initial_state == 1);  // file is 1-based
  CHECK(model.regime.state_values == std::vector<double>{-1.0, 2.0});
  CHECK(model.vol == 0.1);

  // The drift pulls toward the active state's value.
  std::vector<double> out(1);
  const EmpiricalMeasure nu({0.0}, 1);
  const std::vector<double> x{0.5};
  model.drift(0.0, nu, x, 0, out);
  CHECK(out[0] == doctest::Approx(0.8 * (-1.0 - 0.5)).epsilon(1e-15));
  model.drift(0.0, nu, x, 1, out);
  CHECK(out[0] == doctest::Approx(0.8 * (2.0 - 0.5)).epsilon(1e-15));

  CHECK(violations_of("[model]\nname = regime\ninitial_state = 3\n")
            .find("must be 1 or 2") != std::string::npos);
}

TEST_CASE("model dispatch respects the declared name") {
  const auto zero = parse_config_text("[model]\nname = zero\n");
  CHECK(build_model(zero).dims.d == 1);
  CHECK_THROWS_AS(build_regime_model(zero), ConfigError);

  const auto sys = parse_config_text(
      "[model]\nname = systemic_risk\nvol = 0.4\ninit_kind = point\n"
      "init_a = 1\n");
  const auto model = build_model(sys);
  CHECK(model.init.kind == InitSpec::Kind::point);

  const auto reg = parse_config_text("[model]\nname = regime\n");
  CHECK_THROWS_AS(build_model(reg), ConfigError);
  CHECK(build_regime_model(reg).regime.n_states() == 2);
}

TEST_CASE("configs load from files and missing paths are reported") {
  const std::string path = "cpn_test_config.ini";
  {
    std::ofstream out(path, std::ios::binary);
    out << "[model]\nname = zero\n[sim]\nhorizon = 3\n";
  }
  const auto cfg = parse_config(path);
  CHECK(cfg.horizon == 3.0);
  CHECK(cfg.dt == 0.003);
  std::remove(path.c_str());

  CHECK_THROWS_WITH_AS(parse_config("definitely/not/here.ini"),
                       doctest::Contains("cannot open"), ConfigError);
}
