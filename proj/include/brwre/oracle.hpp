#pragma once

// Ground-truth references for the engine: a literal per-particle simulator
// and an exhaustive rational-arithmetic enumerator for tiny instances. They
// share nothing with the engine except the environment PRF (so both see the
// same offspring law at every (t, x)); directions and offspring are drawn
// by entirely separate code paths, which makes agreement evidence rather
// than tautology.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "brwre/engine.hpp"
#include "brwre/environment.hpp"
#include "brwre/state.hpp"
#include "brwre/stats.hpp"

namespace brwre {

using Rational = boost::multiprecision::cpp_rational;

// exact value of a double (every finite double is a dyadic rational)
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: not finite");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5, 1)
  long long scaled = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  Rational r(scaled);
  boost::multiprecision::cpp_int one(1);
  if (exp >= 0)
    r *= Rational(one << exp);
  else
    r /= Rational(one << (-exp));
  return r;
}

// --- canonical configurations -------------------------------------------

template <int D>
using SiteCount = std::pair<Site<D>, count_t>;

template <int D>
using Configuration = std::vector<SiteCount<D>>;  // sorted by site

template <int D>
Configuration<D> canonical_configuration(const PopulationState<D>& st) {
  Configuration<D> cfg;
  cfg.reserve(st.counts.size());
  st.counts.for_each([&](const Site<D>& x, count_t n) { cfg.emplace_back(x, n); });
  std::sort(cfg.begin(), cfg.end(),
            [](const SiteCount<D>& a, const SiteCount<D>& b) { return a.first < b.first; });
  return cfg;
}

template <class SiteT>
std::string configuration_key(const std::vector<std::pair<SiteT, count_t>>& cfg) {
  std::ostringstream os;
  for (const auto& [site, n] : cfg) {
    os << '(';
    bool first = true;
    for (std::int64_t c : site) {
      if (!first) os << ',';
      os << c;
      first = false;
    }
    os << "):" << count_to_string(n) << ';';
  }
  return os.str();
}

template <class SiteT>
count_t configuration_total(const std::vector<std::pair<SiteT, count_t>>& cfg) {
  count_t n = 0;
  for (const auto& [site, c] : cfg) n += c;
  return n;
}

// --- per-particle simulator ----------------------------------------------

template <int D>
struct ParticleList {
  std::uint32_t t = 0;
  std::vector<Site<D>> particles;
};

inline constexpr std::size_t kParticleRunGuard = 1000000;

template <int D>
PopulationState<D> histogram_particles(const ParticleList<D>& pl) {
  PopulationState<D> st;
  st.t = pl.t;
  for (const Site<D>& x : pl.particles) st.counts.slot(x) += 1;
  st.total = pl.particles.size();
  st.ln_total = st.total > 0 ? ln_count(st.total) : quiet_nan();
  return st;
}

// Literal transcription of the dynamics, one particle at a time: particle
// nu at (t, x) draws its own destination and offspring count. Throws when
// the population passes the 10^6-particle guard.
template <int D>
std::vector<ParticleList<D>> particle_run(const EnvironmentLaw& env,
                                          std::uint64_t env_seed,
                                          std::uint64_t run_seed,
                                          std::uint32_t t_max) {
  const Prf dir_prf(run_seed, StreamDomain::oracle_direction);
  const Prf off_prf(run_seed, StreamDomain::oracle_offspring);

  std::vector<ParticleList<D>> trajectory;
  trajectory.reserve(t_max + 1);
  trajectory.push_back({0, {Site<D>{}}});

  for (std::uint32_t t = 1; t <= t_max; ++t) {
    const ParticleList<D>& cur = trajectory[t - 1];
    ParticleList<D> next;
    next.t = t;
    for (std::size_t nu = 0; nu < cur.particles.size(); ++nu) {
      const Site<D>& x = cur.particles[nu];
      const std::size_t law_idx =
          sample_law(env, env_seed, cur.t, {x.data(), static_cast<std::size_t>(D)});
      const OffspringLaw& law = env.components()[law_idx].law;

      const std::uint64_t words[2] = {cur.t, static_cast<std::uint64_t>(nu)};
      PrfStream dstream(dir_prf, words);
      PrfStream ostream(off_prf, words);

      int dir = static_cast<int>(dstream.next_unit() * (2 * D));
      if (dir >= 2 * D) dir = 2 * D - 1;
      Site<D> y = neighbor<D>(x, dir);

      double u = ostream.next_unit();
      double cum = 0.0;
      std::uint64_t k = law.atoms().back().k;
      for (const auto& a : law.atoms()) {
        cum += a.probability;
        if (u < cum) {
          k = a.k;
          break;
        }
      }
      if (next.particles.size() + k > kParticleRunGuard)
        throw std::runtime_error("particle_run: population guard (10^6) exceeded");
      for (std::uint64_t i = 0; i < k; ++i) next.particles.push_back(y);
    }
    trajectory.push_back(std::move(next));  // invalidates cur, no longer used
    if (trajectory.back().particles.empty()) break;
  }
  return trajectory;
}

// --- exhaustive enumeration ----------------------------------------------

template <int D>
struct ExactOutcome {
  Configuration<D> config;
  Rational probability;
};

template <int D>
struct ExactLaw {
  std::vector<ExactOutcome<D>> outcomes;  // sorted by configuration key

  Rational expected_total() const {
    Rational e = 0;
    for (const auto& o : outcomes)
      e += o.probability * Rational(count_to_string(configuration_total(o.config)));
    return e;
  }

  std::map<std::string, double> probability_table() const {
    std::map<std::string, double> out;
    for (const auto& o : outcomes)
      out[configuration_key(o.config)] = static_cast<double>(o.probability);
    return out;
  }
};

inline constexpr double kEnumerationGuard = 1e7;

namespace detail {

template <int D>
using WeightedConfig = std::pair<Configuration<D>, Rational>;

// Expand one site with n particles under a fixed law: every particle picks
// one of 2D directions and one support atom, children land together.
template <int D>
void expand_site_particles(const Site<D>& x, count_t n, const OffspringLaw& law,
                           const Rational& dir_prob,
                           std::map<Site<D>, count_t>& acc, const Rational& weight,
                           std::vector<std::pair<std::map<Site<D>, count_t>, Rational>>& out,
                           std::vector<Rational>& atom_probs) {
  if (n == 0) {
    out.emplace_back(acc, weight);
    return;
  }
  for (int dir = 0; dir < 2 * D; ++dir) {
    Site<D> y = neighbor<D>(x, dir);
    for (std::size_t ai = 0; ai < law.atoms().size(); ++ai) {
      const auto& atom = law.atoms()[ai];
      Rational w = weight * dir_prob * atom_probs[ai];
      if (w == 0) continue;
      if (atom.k > 0) acc[y] += atom.k;
      expand_site_particles<D>(x, n - 1, law, dir_prob, acc, w, out, atom_probs);
      if (atom.k > 0) {
        auto it = acc.find(y);
        it->second -= atom.k;
        if (it->second == 0) acc.erase(it);
      }
    }
  }
}

}  // namespace detail

// Exact distribution of the configuration at time t_max (t_max <= 2),
// marginalized over the environment mixture, all directions and all
// offspring values. Probabilities are exact rationals and sum to 1.
template <int D>
ExactLaw<D> enumerate_exact(const EnvironmentLaw& env, std::uint32_t t_max) {
  if (t_max > 2)
    throw std::invalid_argument("enumerate_exact: t_max must be <= 2");

  std::vector<Rational> weights;
  std::vector<std::vector<Rational>> atom_probs;
  for (const auto& c : env.components()) {
    weights.push_back(rational_from_double(c.weight));
    std::vector<Rational> ap;
    for (const auto& a : c.law.atoms()) ap.push_back(rational_from_double(a.probability));
    atom_probs.push_back(std::move(ap));
  }
  // normalize exactly so outcome probabilities sum to exactly 1
  Rational wsum = 0;
  for (const Rational& w : weights) wsum += w;
  for (Rational& w : weights) w /= wsum;
  for (std::size_t i = 0; i < atom_probs.size(); ++i) {
    Rational ps = 0;
    for (const Rational& p : atom_probs[i]) ps += p;
    for (Rational& p : atom_probs[i]) p /= ps;
  }
  const Rational dir_prob = Rational(1, 2 * D);

  std::map<Configuration<D>, Rational> current;
  Configuration<D> start{{Site<D>{}, count_t{1}}};
  current[start] = 1;

  for (std::uint32_t t = 0; t < t_max; ++t) {
    // resource guard: branches per config = prod_sites n_comp * (2d*support)^n
    for (const auto& [cfg, prob] : current) {
      double branches = 1.0;
      for (const auto& [site, n] : cfg) {
        double per_site = 0.0;
        for (const auto& c : env.components())
          per_site = std::max(per_site,
                              std::pow(2.0 * D * c.law.support_size(),
                                       count_to_double(n)));
        branches *= static_cast<double>(env.size()) * per_site;
        if (branches > kEnumerationGuard)
          throw std::runtime_error("enumerate_exact: outcome guard (10^7) exceeded");
      }
    }

    std::map<Configuration<D>, Rational> next;
    for (const auto& [cfg, prob] : current) {
      // per-site component choices are independent; expand sites one at a
      // time, threading the accumulated destination map through
      std::vector<std::pair<std::map<Site<D>, count_t>, Rational>> partial;
      partial.emplace_back(std::map<Site<D>, count_t>{}, prob);
      for (const auto& [site, n] : cfg) {
        std::vector<std::pair<std::map<Site<D>, count_t>, Rational>> expanded;
        for (auto& [acc, w] : partial) {
          for (std::size_t ci = 0; ci < env.size(); ++ci) {
            Rational cw = w * weights[ci];
            if (cw == 0) continue;
            std::map<Site<D>, count_t> acc_copy = acc;
            detail::expand_site_particles<D>(site, n, env.components()[ci].law,
                                             dir_prob, acc_copy, cw, expanded,
                                             atom_probs[ci]);
          }
        }
        partial = std::move(expanded);
      }
      for (auto& [acc, w] : partial) {
        Configuration<D> out_cfg(acc.begin(), acc.end());
        next[out_cfg] += w;
      }
    }
    current = std::move(next);
  }

  ExactLaw<D> law;
  for (auto& [cfg, prob] : current) law.outcomes.push_back({cfg, prob});
  std::sort(law.outcomes.begin(), law.outcomes.end(),
            [](const ExactOutcome<D>& a, const ExactOutcome<D>& b) {
              return configuration_key(a.config) < configuration_key(b.config);
            });
  return law;
}

// --- distribution comparison ---------------------------------------------

inline constexpr std::size_t kCompareMinSamples = 1000;

// engine samples (as configuration keys) against an exact law
template <int D>
ChiSquareResult compare_distributions(const std::map<std::string, std::size_t>& samples,
                                      const ExactLaw<D>& reference,
                                      std::size_t n_samples) {
  if (n_samples < kCompareMinSamples)
    throw std::invalid_argument("compare_distributions: need >= 1000 samples");
  return chi_square_gof(samples, reference.probability_table(), n_samples);
}

// two empirical sample sets (engine vs particle oracle)
inline ChiSquareResult compare_distributions(
    const std::map<std::string, std::size_t>& sample_a,
    const std::map<std::string, std::size_t>& sample_b) {
  std::size_t na = 0, nb = 0;
  for (const auto& [k, c] : sample_a) na += c;
  for (const auto& [k, c] : sample_b) nb += c;
  if (na < kCompareMinSamples || nb < kCompareMinSamples)
    throw std::invalid_argument("compare_distributions: need >= 1000 samples");
  return chi_square_two_sample(sample_a, sample_b);
}

}  // namespace brwre
