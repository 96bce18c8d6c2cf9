#pragma once

// The random environment: an i.i.d. assignment of offspring laws to
// time-space locations, drawn from a finite weighted mixture. All moment
// diagnostics (m, m^(2), m^(3), alpha, the entropy criterion, c0) are
// closed-form sums over the mixture.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "brwre/offspring.hpp"
#include "brwre/prf.hpp"
#include "brwre/walk.hpp"

namespace brwre {

class EnvironmentLaw {
 public:
  struct Component {
    double weight;
    OffspringLaw law;
  };

  explicit EnvironmentLaw(std::vector<Component> components)
      : components_(std::move(components)) {
    if (components_.empty())
      throw std::invalid_argument("environment: at least one component required");
    double sum = 0.0;
    for (const Component& c : components_) {
      if (c.weight <= 0.0 || c.weight > 1.0)
        throw std::invalid_argument("environment: weights must lie in (0,1]");
      sum += c.weight;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance)
      throw std::invalid_argument("environment: weights must sum to 1 within 1e-12");
    for (Component& c : components_) c.weight /= sum;
  }

  static EnvironmentLaw single(OffspringLaw law) {
    return EnvironmentLaw({{1.0, std::move(law)}});
  }

  const std::vector<Component>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

  bool all_means_equal() const {
    double m0 = components_.front().law.mean();
    for (const Component& c : components_)
      if (c.law.mean() != m0) return false;
    return true;
  }

  bool offspring_always_positive() const {
    for (const Component& c : components_)
      if (c.law.mass_at_zero() > 0.0) return false;
    return true;
  }

  std::uint64_t max_support_value() const {
    std::uint64_t k = 0;
    for (const Component& c : components_)
      for (const auto& a : c.law.atoms()) k = std::max(k, a.k);
    return k;
  }

 private:
  std::vector<Component> components_;
};

struct EnvironmentMoments {
  double m;   // annealed mean offspring number
  double m2;  // Q-average of the per-law second moment
  double m3;
  double alpha;  // Q[m_law^2] / m^2, >= 1 by Cauchy-Schwarz
};

inline EnvironmentMoments env_moments(const EnvironmentLaw& env) {
  double m = 0.0, m2 = 0.0, m3 = 0.0, mean_sq = 0.0;
  for (const auto& c : env.components()) {
    double mu = c.law.mean();
    m += c.weight * mu;
    m2 += c.weight * c.law.moment(2);
    m3 += c.weight * c.law.moment(3);
    mean_sq += c.weight * mu * mu;
  }
  if (m <= 0.0)
    throw std::invalid_argument("environment moments: m = 0 (all-zero offspring)");
  return {m, m2, m3, mean_sq / (m * m)};
}

struct EntropyCriterion {
  double value;      // Q[(m_law/m) ln(m_law/m)]
  double threshold;  // ln(2d)
  bool satisfied;
};

// x ln x extended by 0 at x = 0
inline double xlnx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline EntropyCriterion entropy_criterion(const EnvironmentLaw& env, int d) {
  EnvironmentMoments mom = env_moments(env);
  double value = 0.0;
  for (const auto& c : env.components()) value += c.weight * xlnx(c.law.mean() / mom.m);
  double threshold = std::log(2.0 * d);
  return {value, threshold, value > threshold};
}

// c0 = -ln Q[sum_{k>=1} q(k)/k], an almost-sure lower bound on the
// exponential growth rate when offspring counts are always >= 1.
inline double c0(const EnvironmentLaw& env) {
  double acc = 0.0;
  for (const auto& c : env.components()) {
    if (c.law.mass_at_zero() > 0.0)
      throw std::invalid_argument("c0: undefined when some law has mass at k = 0");
    acc += c.weight * c.law.harmonic_mean_inverse();
  }
  return -std::log(acc);
}

// Deterministic law choice at a time-space location: a pure function of
// (env_seed, t, canonical site encoding); distinct (t, x) are independent
// PRF streams.
inline std::size_t sample_law(const EnvironmentLaw& env, std::uint64_t env_seed,
                              std::uint32_t t, std::span<const std::int64_t> site) {
  if (env.size() == 1) return 0;
  std::uint64_t words[1 + kMaxDimension];
  words[0] = t;
  for (std::size_t i = 0; i < site.size(); ++i)
    words[1 + i] = static_cast<std::uint64_t>(site[i]);
  Prf prf(env_seed, StreamDomain::environment);
  std::uint64_t h = prf.hash_words({words, 1 + site.size()});
  double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  double cum = 0.0;
  const auto& comps = env.components();
  for (std::size_t i = 0; i + 1 < comps.size(); ++i) {
    cum += comps[i].weight;
    if (u < cum) return i;
  }
  return comps.size() - 1;
}

enum class Regime {
  survives_wd,
  delocalized_wd2,
  localized_a1,
  localized_a2,
  localized_a3,
  indeterminate,
};

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::survives_wd: return "SurvivesWD";
    case Regime::delocalized_wd2: return "DelocalizedWD2";
    case Regime::localized_a1: return "LocalizedA1";
    case Regime::localized_a2: return "LocalizedA2";
    case Regime::localized_a3: return "LocalizedA3";
    case Regime::indeterminate: return "Indeterminate";
  }
  return "?";
}

struct RegimeReport {
  int d = 0;
  double m = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double alpha = 1.0;
  double entropy = 0.0;
  double ln2d = 0.0;
  std::optional<double> c0;              // absent when some law has mass at 0
  std::optional<double> pi_d;            // walk return probability
  std::optional<double> alpha_threshold; // 1/pi_d, only for d >= 3
  std::optional<T0Epsilon> threshold_pair;
  Regime predicted_regime = Regime::indeterminate;
};

// Decision order: (a1) d=1 with genuinely random means, (a2) d=2 likewise,
// (a3) entropy above ln(2d); otherwise the d>=3 second-moment condition
// alpha < 1/pi_d gives delocalization. Anything else is indeterminate
// (the survival threshold between 1/pi_d and alpha is non-constructive).
inline RegimeReport classify_regime(const EnvironmentLaw& env, int d,
                                    const WalkDiagnostics& walk_diag) {
  RegimeReport rep;
  rep.d = d;
  EnvironmentMoments mom = env_moments(env);
  rep.m = mom.m;
  rep.m2 = mom.m2;
  rep.m3 = mom.m3;
  rep.alpha = mom.alpha;
  EntropyCriterion ent = entropy_criterion(env, d);
  rep.entropy = ent.value;
  rep.ln2d = ent.threshold;
  if (env.offspring_always_positive()) rep.c0 = c0(env);
  rep.pi_d = walk_diag.pi_d;
  if (d >= 3) rep.alpha_threshold = 1.0 / walk_diag.pi_d;

  bool random_means = !env.all_means_equal();
  if (d == 1 && random_means) {
    rep.predicted_regime = Regime::localized_a1;
  } else if (d == 2 && random_means) {
    rep.predicted_regime = Regime::localized_a2;
  } else if (ent.satisfied) {
    rep.predicted_regime = Regime::localized_a3;
  } else if (d >= 3 && mom.m > 1.0 && rep.alpha < *rep.alpha_threshold) {
    rep.predicted_regime = Regime::delocalized_wd2;
  } else {
    rep.predicted_regime = Regime::indeterminate;
  }
  if (rep.alpha > 1.0)
    rep.threshold_pair = t0_epsilon(rep.alpha, d, walk_diag.truncation);
  return rep;
}

}  // namespace brwre
