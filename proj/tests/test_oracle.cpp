#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>

#include "brwre/oracle.hpp"

using namespace brwre;

namespace {

EnvironmentLaw env_e1() {
  return EnvironmentLaw({{0.5, OffspringLaw::point_mass(1)},
                         {0.5, OffspringLaw::point_mass(3)}});
}
EnvironmentLaw env_half_half() {
  return EnvironmentLaw::single(OffspringLaw({{1, 0.5}, {2, 0.5}}));
}

template <int D>
std::string engine_sample_key(const EnvironmentLaw& env, std::uint64_t env_seed,
                              std::uint64_t run_seed, std::uint32_t t_max) {
  auto st = init_state<D>();
  for (std::uint32_t t = 0; t < t_max; ++t) REQUIRE(step(st, env, env_seed, run_seed));
  return configuration_key(canonical_configuration(st));
}

}  // namespace

TEST_CASE("rational_from_double is exact") {
  CHECK(rational_from_double(0.5) == Rational(1, 2));
  CHECK(rational_from_double(0.25) == Rational(1, 4));
  CHECK(rational_from_double(3.0) == Rational(3));
  CHECK(static_cast<double>(rational_from_double(0.9)) == 0.9);
  CHECK(static_cast<double>(rational_from_double(0.02)) == 0.02);
}

TEST_CASE("particle run: doubling law fills the even sublattice") {
  auto traj = particle_run<1>(EnvironmentLaw::single(OffspringLaw::point_mass(2)),
                              5, 6, 2);
  REQUIRE(traj.size() == 3);
  CHECK(traj[0].particles.size() == 1);
  CHECK(traj[1].particles.size() == 2);
  CHECK(traj[2].particles.size() == 4);
  for (const Site<1>& x : traj[2].particles)
    CHECK((x[0] == -2 || x[0] == 0 || x[0] == 2));

  // histogram satisfies the population-state invariants
  auto st = histogram_particles(traj[2]);
  CHECK(st.total == 4);
  CHECK_FALSE(validate_population_state(st).has_value());
}

TEST_CASE("particle run: critical law keeps one walker forever") {
  auto traj = particle_run<2>(EnvironmentLaw::single(OffspringLaw::point_mass(1)),
                              7, 8, 30);
  REQUIRE(traj.size() == 31);
  for (const auto& pl : traj) CHECK(pl.particles.size() == 1);
}

TEST_CASE("particle run is deterministic and guarded") {
  auto a = particle_run<1>(env_e1(), 11, 12, 6);
  auto b = particle_run<1>(env_e1(), 11, 12, 6);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].particles == b[i].particles);

  EnvironmentLaw boom = EnvironmentLaw::single(OffspringLaw::point_mass(100));
  CHECK_THROWS_AS(particle_run<1>(boom, 1, 2, 4), std::runtime_error);
}

TEST_CASE("engine and particle oracle share the environment PRF") {
  // with point-mass components the (t=0, origin) law fixes N_1 exactly,
  // so the two simulators must agree on it for every environment seed
  EnvironmentLaw env({{0.5, OffspringLaw::point_mass(1)},
                      {0.5, OffspringLaw::point_mass(100)}});
  for (std::uint64_t env_seed = 0; env_seed < 50; ++env_seed) {
    auto st = init_state<1>();
    REQUIRE(step(st, env, env_seed, 999));
    auto traj = particle_run<1>(env, env_seed, 1234, 1);
    CHECK(st.total == traj[1].particles.size());
  }
}

TEST_CASE("exact enumeration: doubling law at t = 1") {
  auto law = enumerate_exact<1>(EnvironmentLaw::single(OffspringLaw::point_mass(2)), 1);
  REQUIRE(law.outcomes.size() == 2);
  Rational total = 0;
  for (const auto& o : law.outcomes) {
    REQUIRE(o.config.size() == 1);
    CHECK(o.config[0].second == 2);
    CHECK((o.config[0].first[0] == -1 || o.config[0].first[0] == 1));
    CHECK(o.probability == Rational(1, 2));
    total += o.probability;
  }
  CHECK(total == Rational(1));
}

TEST_CASE("exact enumeration: E1 total at t = 1 is 1 or 3, equally likely") {
  auto law = enumerate_exact<1>(env_e1(), 1);
  Rational p1 = 0, p3 = 0, total = 0;
  for (const auto& o : law.outcomes) {
    count_t n = configuration_total(o.config);
    if (n == 1) p1 += o.probability;
    if (n == 3) p3 += o.probability;
    total += o.probability;
  }
  CHECK(p1 == Rational(1, 2));
  CHECK(p3 == Rational(1, 2));
  CHECK(total == Rational(1));
}

TEST_CASE("exact enumeration: martingale identity E[N_2] = m^2, exactly") {
  auto law = enumerate_exact<1>(env_e1(), 2);
  CHECK(law.expected_total() == Rational(4));
  Rational total = 0;
  for (const auto& o : law.outcomes) total += o.probability;
  CHECK(total == Rational(1));

  auto law_hh = enumerate_exact<1>(env_half_half(), 2);
  CHECK(law_hh.expected_total() == Rational(9, 4));  // m = 3/2
}

TEST_CASE("exact enumeration guard") {
  EnvironmentLaw big = EnvironmentLaw::single(OffspringLaw({{10, 0.5}, {20, 0.5}}));
  CHECK_THROWS_AS(enumerate_exact<1>(big, 2), std::runtime_error);
  CHECK_THROWS_AS(enumerate_exact<1>(env_e1(), 3), std::invalid_argument);
}

TEST_CASE("engine matches the exact law at (E1, d=1, t=2)") {
  auto exact = enumerate_exact<1>(env_e1(), 2);
  std::map<std::string, std::size_t> observed;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i)
    observed[engine_sample_key<1>(env_e1(), derive_env_seed(31337, i),
                                  derive_run_seed(31337, i), 2)]++;
  ChiSquareResult res = compare_distributions(observed, exact, n);
  INFO("stat = " << res.statistic << " dof = " << res.dof << " p = " << res.p_value);
  CHECK(res.p_value > 1e-3);
}

TEST_CASE("engine matches the particle oracle at t = 3") {
  std::map<std::string, std::size_t> eng, par;
  const std::size_t n = 20000;
  for (std::size_t i = 0; i < n; ++i) {
    eng[engine_sample_key<1>(env_half_half(), derive_env_seed(555, i),
                             derive_run_seed(555, i), 3)]++;
    auto traj = particle_run<1>(env_half_half(), derive_env_seed(556, i),
                                derive_run_seed(556, i), 3);
    par[configuration_key(canonical_configuration(histogram_particles(traj[3])))]++;
  }
  ChiSquareResult res = compare_distributions(eng, par);
  INFO("stat = " << res.statistic << " dof = " << res.dof << " p = " << res.p_value);
  CHECK(res.p_value > 1e-3);
}

TEST_CASE("two-sample comparison: null calibration") {
  // engine against its own resample: the rejection rate at level 1e-3
  // should be about 0.1%
  const int reps = 400;
  const std::size_t n = 1000;
  int rejects = 0;
  std::uint64_t salt = 0;
  for (int rep = 0; rep < reps; ++rep) {
    std::map<std::string, std::size_t> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      a[engine_sample_key<1>(env_e1(), derive_env_seed(2 * rep, salt + i),
                             derive_run_seed(2 * rep, salt + i), 2)]++;
      b[engine_sample_key<1>(env_e1(), derive_env_seed(2 * rep + 1, salt + i),
                             derive_run_seed(2 * rep + 1, salt + i), 2)]++;
    }
    if (compare_distributions(a, b).p_value <= 1e-3) ++rejects;
  }
  INFO("rejects = " << rejects << " / " << reps);
  CHECK(rejects <= reps / 100);  // well calibrated: expect ~0.4 of 400
}

TEST_CASE("comparison input guards") {
  std::map<std::string, std::size_t> tiny{{"a", 10}, {"b", 20}};
  ExactLaw<1> dummy;
  CHECK_THROWS_AS(compare_distributions(tiny, dummy, 30), std::invalid_argument);
  CHECK_THROWS_AS(compare_distributions(tiny, tiny), std::invalid_argument);
}
