#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "brwre/config.hpp"

using namespace brwre;

namespace {

const char* kMinimal = R"(
# E1 in one dimension
dimension = 1
t_max = 100
master_seed = 1
n_runs = 10
env {
  component weight=0.5 pmf=1:1
  component weight=0.5 pmf=3:1
}
)";

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config parses") {
  ExperimentConfig cfg = parse_config(kMinimal);
  CHECK(cfg.dimension == 1);
  CHECK(cfg.t_max == 100);
  REQUIRE(cfg.master_seed.has_value());
  CHECK(*cfg.master_seed == 1);
  CHECK(cfg.n_runs == 10);
  REQUIRE(cfg.env.has_value());
  CHECK(cfg.env->size() == 2);
  CHECK(env_moments(*cfg.env).m == 2.0);
  CHECK_FALSE(cfg.exact_mode);
  CHECK(cfg.sampling.gaussian_threshold == count_t{1} << 32);
  CHECK(cfg.record_every == 1);
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  std::string err = config_error(R"(
dimention = 1
t_max = 10
master_seed = 1
env {
  component weight=1 pmf=2:1
}
)");
  CHECK(err.find("unknown key 'dimention'") != std::string::npos);
  CHECK(err.find("did you mean 'dimension'?") != std::string::npos);

  err = config_error("dimension = 1\nworkrs = 2\n");
  CHECK(err.find("did you mean 'workers'?") != std::string::npos);
}

TEST_CASE("bad weights are rejected, naming the env block") {
  std::string err = config_error(R"(
dimension = 1
t_max = 10
master_seed = 1
env {
  component weight=0.5 pmf=1:1
  component weight=0.4 pmf=3:1
}
)");
  CHECK(err.find("env block") != std::string::npos);
  CHECK(err.find("weights must sum to 1") != std::string::npos);
}

TEST_CASE("pmf validation flows through the offspring law") {
  std::string err = config_error(R"(
dimension = 1
t_max = 10
master_seed = 1
env {
  component weight=1 pmf=1:0.5,2:0.6
}
)");
  CHECK(err.find("sum to 1") != std::string::npos);
}

TEST_CASE("mode and threshold") {
  std::string base = R"(
dimension = 2
t_max = 5
env_seed = 3
run_seed = 4
env {
  component weight=1 pmf=2:1
}
)";
  ExperimentConfig exact = parse_config(base + "mode = exact\n");
  CHECK(exact.exact_mode);
  CHECK(exact.sampling.gaussian_threshold == count_max());

  ExperimentConfig thin = parse_config(base + "mode = gaussian\ngaussian_threshold = 1024\n");
  CHECK(thin.sampling.gaussian_threshold == 1024);

  CHECK(config_error(base + "mode = exact\ngaussian_threshold = 7\n")
            .find("conflicts") != std::string::npos);
  CHECK(config_error(base + "mode = sometimes\n").find("mode") != std::string::npos);
}

TEST_CASE("seed rules") {
  std::string no_seeds = R"(
dimension = 1
t_max = 10
env {
  component weight=1 pmf=2:1
}
)";
  CHECK(config_error(no_seeds).find("seeds required") != std::string::npos);

  std::string both = no_seeds + "master_seed = 1\nenv_seed = 2\nrun_seed = 3\n";
  CHECK(config_error(both).find("not both") != std::string::npos);

  std::string n_runs_single = no_seeds + "env_seed = 2\nrun_seed = 3\nn_runs = 5\n";
  CHECK(config_error(n_runs_single).find("n_runs") != std::string::npos);
}

TEST_CASE("structural errors") {
  CHECK(config_error("dimension = 9\nt_max = 1\nmaster_seed = 1\nenv {\n component weight=1 pmf=1:1\n}\n")
            .find("dimension") != std::string::npos);
  CHECK(config_error("dimension = 1\nmaster_seed = 1\nenv {\n component weight=1 pmf=1:1\n}\n")
            .find("t_max") != std::string::npos);
  CHECK(config_error("dimension = 1\nt_max = 5\nmaster_seed = 1\n")
            .find("missing env block") != std::string::npos);
  CHECK(config_error("dimension = 1\nt_max = 5\nmaster_seed = 1\nenv {\n component weight=1 pmf=1:1\n")
            .find("missing closing") != std::string::npos);
  CHECK(config_error("dimension = one\n").find("invalid value") != std::string::npos);
  CHECK(config_error("t_max\n").find("key = value") != std::string::npos);
  std::string dup = R"(
dimension = 1
t_max = 5
master_seed = 1
env {
  component weight=1 pmf=1:1
}
env {
  component weight=1 pmf=2:1
}
)";
  CHECK(config_error(dup).find("duplicate env block") != std::string::npos);
}

TEST_CASE("component line grammar") {
  CHECK(config_error("env {\n component pmf=1:1\n}\n").find("missing weight") !=
        std::string::npos);
  std::string base = "dimension = 1\nt_max = 5\nmaster_seed = 1\n";
  CHECK(config_error(base + "env {\ncomponent weight=1\n}\n").find("missing pmf") !=
        std::string::npos);
  CHECK(config_error(base + "env {\ncomponent weight=1 pmf=1\n}\n").find("k:p") !=
        std::string::npos);
  CHECK(config_error(base + "env {\ncomponent weight=1 pmf=1:1 shape=2\n}\n")
            .find("unknown attribute") != std::string::npos);
  // unsorted pmf entries are accepted and sorted
  ExperimentConfig cfg = parse_config(
      base + "env {\ncomponent weight=1 pmf=3:0.5,1:0.5\n}\n");
  CHECK(cfg.env->components()[0].law.atoms()[0].k == 1);
}

TEST_CASE("line numbers are reported") {
  try {
    parse_config("dimension = 1\nt_max = 2\nbad_key = 3\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 3);
  }
}
