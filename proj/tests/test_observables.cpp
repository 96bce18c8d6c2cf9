#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "brwre/engine.hpp"
#include "brwre/observables.hpp"

using namespace brwre;

namespace {

PopulationState<1> state_from(std::initializer_list<std::pair<std::int64_t, count_t>> sites,
                              std::uint32_t t) {
  PopulationState<1> st;
  st.t = t;
  for (auto& [x, n] : sites) {
    st.counts.slot(Site<1>{x}) = n;
    st.total += n;
  }
  st.ln_total = st.total > 0 ? ln_count(st.total) : quiet_nan();
  return st;
}

ObservableRecord synthetic(std::uint32_t t, double overlap, double ln_nbar, double v) {
  ObservableRecord r;
  r.t = t;
  r.ln_N = 0.0;
  r.ln_Nbar = ln_nbar;
  r.rho_star = std::sqrt(overlap);
  r.overlap = overlap;
  r.V = v;
  r.occupied = 1;
  return r;
}

}  // namespace

TEST_CASE("densities") {
  auto single = state_from({{0, 1}}, 0);
  auto d = densities(single);
  REQUIRE(d.size() == 1);
  CHECK(d[0].second == 1.0);

  auto sym = state_from({{-1, 2}, {+1, 2}}, 1);
  for (auto& [site, rho] : densities(sym)) CHECK(rho == 0.5);

  auto skew = state_from({{-1, 3}, {+1, 1}}, 1);
  double sum = 0.0;
  for (auto& [site, rho] : densities(skew)) {
    sum += rho;
    CHECK((rho == 0.75 || rho == 0.25));
  }
  CHECK(sum == Catch::Approx(1.0).margin(1e-9));

  auto extinct = state_from({}, 3);
  CHECK_THROWS_AS(densities(extinct), std::invalid_argument);
}

TEST_CASE("overlap and maximal density") {
  auto single = state_from({{0, 5}}, 0);
  auto [r1, rs1] = overlap_and_max(single);
  CHECK(r1 == 1.0);
  CHECK(rs1 == 1.0);

  auto even = state_from({{-1, 2}, {+1, 2}}, 1);
  auto [r2, rs2] = overlap_and_max(even);
  CHECK(r2 == 0.5);
  CHECK(rs2 == 0.5);

  auto skew = state_from({{-1, 3}, {+1, 1}}, 1);
  auto [r3, rs3] = overlap_and_max(skew);
  CHECK(r3 == Catch::Approx(0.625).epsilon(1e-15));  // (9 + 1)/16
  CHECK(rs3 == 0.75);

  CHECK_THROWS_AS(overlap_and_max(state_from({}, 2)), std::invalid_argument);
}

TEST_CASE("log nbar") {
  CHECK(log_nbar(10.0, 20, 1.5) == Catch::Approx(10.0 - 20.0 * std::log(1.5)));
  CHECK(log_nbar(10.0, 20, 1.5) == Catch::Approx(1.890).margin(1e-3));
  CHECK(log_nbar(0.0, 0, 7.7) == 0.0);  // t = 0: N_0 = 1
  CHECK_THROWS_AS(log_nbar(1.0, 1, 0.0), std::invalid_argument);
}

TEST_CASE("localization ratio") {
  std::vector<ObservableRecord> series;
  series.push_back(synthetic(0, 1.0, 0.0, 0.0));
  series.push_back(synthetic(1, 0.5, -1.0, 0.5));
  series.push_back(synthetic(2, 0.5, -4.0, 1.0));
  series.push_back(synthetic(3, 1.0, -4.0, 2.0));
  series.push_back(synthetic(4, 1.0, +0.5, 3.0));  // ln Nbar >= 0: undefined

  auto ratio = localization_ratio(series);
  REQUIRE(ratio.size() == 5);
  CHECK(std::isnan(ratio[0]));
  CHECK(ratio[2] == Catch::Approx(0.5 / 4.0));
  CHECK(ratio[3] == Catch::Approx(1.0 / 4.0));
  // V_{t-1} = 2.0, ln Nbar_t = -4.0 -> 0.5
  series[2].V = 2.0;
  ratio = localization_ratio(series);
  CHECK(ratio[3] == Catch::Approx(0.5));
  CHECK(std::isnan(ratio[4]));
}

TEST_CASE("overlap scaling") {
  std::vector<ObservableRecord> series{synthetic(16, 0.0156, -1.0, 1.0)};
  auto scaled = overlap_scaling(series, 3);
  REQUIRE(scaled.size() == 1);
  CHECK(scaled[0].first == 16);
  CHECK(scaled[0].second == Catch::Approx(64.0 * 0.0156));  // 16^{3/2} = 64
  CHECK(scaled[0].second == Catch::Approx(0.9984).margin(1e-10));

  // extinct step: NaN propagated
  ObservableRecord dead = synthetic(17, quiet_nan(), quiet_nan(), 1.0);
  series.push_back(dead);
  auto scaled2 = overlap_scaling(series, 3);
  CHECK(std::isnan(scaled2[1].second));
}

TEST_CASE("growth rate series") {
  EnvironmentLaw d2 = EnvironmentLaw::single(OffspringLaw::point_mass(2));
  RunResult res = run_simulation<1>(d2, 1, 2, 15);
  auto g = growth_rate(res.records);
  REQUIRE(g.size() == 15);  // t = 0 excluded
  for (auto& [t, v] : g) {
    CHECK(t >= 1);
    CHECK(v == Catch::Approx(std::log(2.0)).margin(1e-12));
  }
}

TEST_CASE("overlap power ratio") {
  std::vector<ObservableRecord> ones;
  for (std::uint32_t t = 0; t <= 10; ++t) ones.push_back(synthetic(t, 1.0, -1.0, t));
  CHECK(overlap_power_ratio(ones) == Catch::Approx(1.0));

  std::vector<ObservableRecord> constant;
  const double r = 0.17;
  for (std::uint32_t t = 0; t <= 10; ++t)
    constant.push_back(synthetic(t, r, -1.0, t * r));
  CHECK(overlap_power_ratio(constant) == Catch::Approx(std::sqrt(r)).epsilon(1e-12));

  std::vector<ObservableRecord> only_t0{synthetic(0, 1.0, 0.0, 0.0)};
  CHECK_THROWS_AS(overlap_power_ratio(only_t0), std::invalid_argument);
}

TEST_CASE("per-record invariants on simulated trajectories") {
  EnvironmentLaw e1({{0.5, OffspringLaw::point_mass(1)},
                     {0.5, OffspringLaw::point_mass(3)}});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RunResult res = run_simulation<1>(e1, seed, seed + 7, 80);
    double v_prev = 0.0;
    for (const ObservableRecord& rec : res.records) {
      // rho*^2 <= R <= rho* <= 1
      REQUIRE(rec.rho_star <= 1.0);
      REQUIRE(rec.overlap <= rec.rho_star + 1e-15);
      REQUIRE(rec.overlap >= rec.rho_star * rec.rho_star - 1e-15);
      // R >= 1/N, i.e. ln R >= -ln N
      REQUIRE(std::log(rec.overlap) >= -rec.ln_N - 1e-9);
      // occupied sites limited to the reachable d = 1 range
      REQUIRE(rec.occupied <= rec.t + 1);
      // V nondecreasing
      REQUIRE(rec.V >= v_prev - 1e-15);
      v_prev = rec.V;
    }
  }
}

TEST_CASE("records are pure functions of the state") {
  auto st = state_from({{-1, 3}, {+1, 1}}, 1);
  ObservableRecord a = make_record(st, 2.0, 0.25);
  ObservableRecord b = make_record(st, 2.0, 0.25);
  CHECK(a.ln_N == b.ln_N);
  CHECK(a.overlap == b.overlap);
  CHECK(a.V == b.V);
  CHECK(a.V == Catch::Approx(0.25 + 0.625));
}
