#pragma once

// Finite-support offspring distributions on {0, 1, 2, ...} with exact
// moment accessors.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace brwre {

inline constexpr double kProbabilityTolerance = 1e-12;
inline constexpr std::uint64_t kDefaultMaxOffspring = 1u << 16;

class OffspringLaw {
 public:
  struct Atom {
    std::uint64_t k;
    double probability;
  };

  // Atoms must be sorted by k, without duplicates, probabilities
  // nonnegative and summing to 1 within kProbabilityTolerance. Inputs
  // farther off are rejected, not silently renormalized.
  explicit OffspringLaw(std::vector<Atom> atoms,
                        std::uint64_t k_max = kDefaultMaxOffspring)
      : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("offspring law: empty support");
    double sum = 0.0;
    std::uint64_t prev_k = 0;
    bool first = true;
    for (const Atom& a : atoms_) {
      if (!first && a.k <= prev_k)
        throw std::invalid_argument("offspring law: support must be strictly increasing");
      if (a.k > k_max)
        throw std::invalid_argument("offspring law: support value exceeds k_max");
      if (a.probability < 0.0)
        throw std::invalid_argument("offspring law: negative probability");
      sum += a.probability;
      prev_k = a.k;
      first = false;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance)
      throw std::invalid_argument("offspring law: probabilities must sum to 1 within 1e-12");
    for (Atom& a : atoms_) a.probability /= sum;
  }

  static OffspringLaw point_mass(std::uint64_t k) { return OffspringLaw({{k, 1.0}}); }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t support_size() const { return atoms_.size(); }

  // probability of exactly zero children
  double mass_at_zero() const {
    return atoms_.front().k == 0 ? atoms_.front().probability : 0.0;
  }

  // sum_k k^p q(k), exact finite sum; p in {1, 2, 3}
  double moment(int p) const {
    if (p < 1 || p > 3) throw std::invalid_argument("law moment: p must be in {1,2,3}");
    double s = 0.0;
    for (const Atom& a : atoms_) {
      double kp = static_cast<double>(a.k);
      for (int i = 1; i < p; ++i) kp *= static_cast<double>(a.k);
      s += kp * a.probability;
    }
    return s;
  }

  double mean() const { return moment(1); }

  // sum_{k>=1} q(k)/k; only meaningful when mass_at_zero() == 0
  double harmonic_mean_inverse() const {
    double s = 0.0;
    for (const Atom& a : atoms_)
      if (a.k > 0) s += a.probability / static_cast<double>(a.k);
    return s;
  }

  bool operator==(const OffspringLaw& o) const = default;

 private:
  std::vector<Atom> atoms_;
};

inline double law_moments(const OffspringLaw& law, int p) { return law.moment(p); }

}  // namespace brwre
