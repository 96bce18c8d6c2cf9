#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "brwre/config.hpp"
#include "brwre/harness.hpp"

using namespace brwre;
namespace fs = std::filesystem;

namespace {

const char* kE1Ensemble = R"(
dimension = 1
t_max = 30
master_seed = 90210
n_runs = 6
env {
  component weight=0.5 pmf=1:1
  component weight=0.5 pmf=3:1
}
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("test_harness_out") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("csv schema and thinning") {
  ExperimentConfig cfg = parse_config(kE1Ensemble);
  RunArtifact run = run_single_with_seeds(cfg, 1, 2);
  std::string csv = run_csv_string(run, 1);
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,ln_N,ln_Nbar,rho_star,overlap,V,occupied,approx");
  std::size_t rows = 0;
  std::string row;
  while (std::getline(lines, row))
    if (!row.empty() && row.front() != '#') ++rows;
  CHECK(rows == 31);

  std::string thinned = run_csv_string(run, 10);
  std::istringstream tl(thinned);
  std::getline(tl, header);
  std::vector<std::string> kept;
  while (std::getline(tl, row))
    if (!row.empty() && row.front() != '#') kept.push_back(row);
  REQUIRE(kept.size() == 4);  // t = 0, 10, 20, 30
  CHECK(kept[0].rfind("0,", 0) == 0);
  CHECK(kept[3].rfind("30,", 0) == 0);
  CHECK(thinned.find("# status=completed") != std::string::npos);
}

TEST_CASE("single-run seeding variants") {
  std::string single = R"(
dimension = 1
t_max = 10
env_seed = 42
run_seed = 43
env {
  component weight=1 pmf=2:1
}
)";
  ExperimentConfig cfg = parse_config(single);
  RunArtifact a = run_single(cfg);
  CHECK(a.env_seed == 42);
  CHECK(a.run_seed == 43);
  CHECK(a.status.kind == RunStatusKind::completed);
  CHECK(a.records.size() == 11);
}

TEST_CASE("ensemble determinism and positional concatenation") {
  ExperimentConfig cfg = parse_config(kE1Ensemble);
  auto runs = run_ensemble_runs(cfg);
  auto runs2 = run_ensemble_runs(cfg, /*workers=*/3);
  REQUIRE(runs.size() == 6);
  REQUIRE(runs2.size() == 6);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    CHECK(run_csv_string(runs[i], 1) == run_csv_string(runs2[i], 1));
  }

  // n_runs = a + b equals the concatenation of offset ensembles
  ExperimentConfig head = cfg;
  head.n_runs = 2;
  ExperimentConfig tail = cfg;
  tail.n_runs = 4;
  tail.run_offset = 2;
  auto head_runs = run_ensemble_runs(head);
  auto tail_runs = run_ensemble_runs(tail);
  REQUIRE(head_runs.size() + tail_runs.size() == runs.size());
  for (std::size_t i = 0; i < head_runs.size(); ++i)
    CHECK(run_csv_string(head_runs[i], 1) == run_csv_string(runs[i], 1));
  for (std::size_t i = 0; i < tail_runs.size(); ++i)
    CHECK(run_csv_string(tail_runs[i], 1) == run_csv_string(runs[i + 2], 1));
}

TEST_CASE("ensemble summary: fractions, quantiles, n_runs = 1") {
  ExperimentConfig cfg = parse_config(kE1Ensemble);
  RegimeReport regime = diagnose(cfg);
  CHECK(regime.predicted_regime == Regime::localized_a1);

  auto runs = run_ensemble_runs(cfg);
  EnsembleSummary s = summarize_ensemble(cfg, runs, regime);
  CHECK(s.n_runs == 6);
  CHECK(s.survival_fraction == 1.0);  // E1 has q(0) = 0, extinction impossible
  CHECK(s.overflow_fraction == 0.0);
  CHECK(s.times.front() == 0);
  CHECK(s.times.back() == 30);

  // quantiles are monotone in the probability level
  const QuantileSeries& q = s.quantiles.at("ln_N");
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    CHECK(q.p5[i] <= q.p25[i]);
    CHECK(q.p25[i] <= q.p50[i]);
    CHECK(q.p50[i] <= q.p75[i]);
    CHECK(q.p75[i] <= q.p95[i]);
  }

  // a single run: every quantile equals that run's value
  ExperimentConfig one = cfg;
  one.n_runs = 1;
  auto single = run_ensemble_runs(one);
  EnsembleSummary s1 = summarize_ensemble(one, single, regime);
  const QuantileSeries& q1 = s1.quantiles.at("overlap");
  for (std::size_t i = 0; i < s1.times.size(); ++i) {
    double v = single[0].records[s1.times[i]].overlap;
    CHECK(q1.p5[i] == v);
    CHECK(q1.p50[i] == v);
    CHECK(q1.p95[i] == v);
  }
}

TEST_CASE("ensemble outputs are deterministic on disk") {
  ExperimentConfig cfg = parse_config(kE1Ensemble);
  cfg.n_runs = 3;
  fs::path dir_a = fresh_dir("det_a");
  fs::path dir_b = fresh_dir("det_b");
  run_ensemble(cfg, dir_a.string());
  run_ensemble(cfg, dir_b.string(), /*workers=*/2);
  for (const char* name : {"run_00000.csv", "run_00001.csv", "run_00002.csv",
                           "summary.json"}) {
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }

  nlohmann::json j = nlohmann::json::parse(slurp(dir_a / "summary.json"));
  CHECK(j["n_runs"] == 3);
  CHECK(j["regime"]["predicted_regime"] == "LocalizedA1");
  CHECK(j["quantiles"].contains("overlap"));
  CHECK(j["quantiles"].contains("loc_ratio"));
}

TEST_CASE("diagnose reference environments") {
  std::string e3_d3 = R"(
dimension = 3
t_max = 64
master_seed = 5
env {
  component weight=0.9 pmf=1:1
  component weight=0.1 pmf=2:1
}
)";
  RegimeReport rep = diagnose(parse_config(e3_d3));
  CHECK(rep.predicted_regime == Regime::delocalized_wd2);
  CHECK(rep.m == Catch::Approx(1.1));
  CHECK(rep.alpha == Catch::Approx(1.0744).margin(2e-4));
  REQUIRE(rep.alpha_threshold.has_value());
  CHECK(*rep.alpha_threshold == Catch::Approx(2.937).margin(0.02));
  CHECK_FALSE(rep.threshold_pair.has_value());  // alpha too close to 1

  nlohmann::ordered_json j = regime_report_json(rep);
  CHECK(j["predicted_regime"] == "DelocalizedWD2");
  CHECK(j["t0_epsilon"].is_null());

  std::string e4_d3 = R"(
dimension = 3
t_max = 64
master_seed = 5
env {
  component weight=0.98 pmf=1:1
  component weight=0.02 pmf=100:1
}
)";
  RegimeReport rep4 = diagnose(parse_config(e4_d3));
  CHECK(rep4.predicted_regime == Regime::localized_a3);
  REQUIRE(rep4.threshold_pair.has_value());
  CHECK(rep4.threshold_pair->epsilon == 0.1);
  CHECK(rep4.threshold_pair->t0 == 1);
}

TEST_CASE("plot emission") {
  ExperimentConfig cfg = parse_config(kE1Ensemble);
  RegimeReport regime = diagnose(cfg);
  auto runs = run_ensemble_runs(cfg);
  EnsembleSummary s = summarize_ensemble(cfg, runs, regime);

  fs::path dir = fresh_dir("plots");
  for (const char* kind : {"overlap", "scaling", "locratio", "growth"}) {
    emit_plots(s, kind, dir.string());
    CHECK(fs::exists(dir / (std::string(kind) + ".tsv")));
    CHECK(fs::exists(dir / (std::string(kind) + ".gp")));
    std::string gp = slurp(dir / (std::string(kind) + ".gp"));
    CHECK(gp.find(std::string(kind) + ".tsv") != std::string::npos);
  }

  // c0 reference line for E1: ln(3/2) ~ 0.4055
  std::string growth_gp = slurp(dir / "growth.gp");
  CHECK(growth_gp.find("c0 = 0.405465") != std::string::npos);

  try {
    emit_plots(s, "bogus", dir.string());
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    for (const char* kind : {"overlap", "scaling", "locratio", "growth"})
      CHECK(msg.find(kind) != std::string::npos);
  }
}

TEST_CASE("extinct runs are retained with status") {
  std::string gw = R"(
dimension = 1
t_max = 50
master_seed = 31
n_runs = 40
env {
  component weight=1 pmf=0:0.5,2:0.5
}
)";
  ExperimentConfig cfg = parse_config(gw);
  auto runs = run_ensemble_runs(cfg);
  EnsembleSummary s = summarize_ensemble(cfg, runs, diagnose(cfg));
  CHECK(s.extinct_fraction > 0.5);  // critical GW dies fast
  CHECK(s.extinct_fraction + s.survival_fraction + s.overflow_fraction ==
        Catch::Approx(1.0));
  std::size_t extinct_statuses = 0;
  for (const RunStatus& st : s.statuses)
    if (st.kind == RunStatusKind::extinct) ++extinct_statuses;
  CHECK(static_cast<double>(extinct_statuses) / 40.0 == s.extinct_fraction);

  fs::path dir = fresh_dir("extinct");
  write_ensemble_outputs(cfg, runs, s, dir.string());
  bool found_extinct_csv = false;
  for (const RunArtifact& r : runs) {
    if (r.status.kind != RunStatusKind::extinct) continue;
    char name[32];
    std::snprintf(name, sizeof(name), "run_%05llu.csv",
                  static_cast<unsigned long long>(r.run_index));
    found_extinct_csv = slurp(dir / name).find("# status=extinct") != std::string::npos;
    break;
  }
  CHECK(found_extinct_csv);
}
