#pragma once

// Sparse population state: particle counts per occupied lattice site. The
// count-based representation is what keeps the step cost proportional to
// the number of occupied sites rather than the (exponentially growing)
// number of particles.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "brwre/flat_map.hpp"
#include "brwre/int128.hpp"
#include "brwre/prf.hpp"

namespace brwre {

template <int D>
using Site = std::array<std::int64_t, D>;

template <int D>
struct SiteHash {
  std::size_t operator()(const Site<D>& s) const {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    for (int i = 0; i < D; ++i)
      h = splitmix64(h ^ static_cast<std::uint64_t>(s[i]));
    return static_cast<std::size_t>(h);
  }
};

template <int D>
struct PopulationState {
  using SiteMap = FlatMap<Site<D>, count_t, SiteHash<D>>;

  std::uint32_t t = 0;
  SiteMap counts;
  count_t total = 0;
  double ln_total = 0.0;
  bool approx = false;  // some draw used the gaussian approximation at a step <= t
};

// one particle at the origin
template <int D>
PopulationState<D> init_state() {
  PopulationState<D> st;
  Site<D> origin{};
  st.counts.slot(origin) = 1;
  st.total = 1;
  st.ln_total = 0.0;
  return st;
}

// Structural checks: totals match, no zero entry, and every occupied site
// is reachable in t unit steps from the origin (sum |x_i| <= t with the
// right parity). Returns a description of the first violation, if any.
template <int D>
std::optional<std::string> validate_population_state(const PopulationState<D>& st) {
  count_t total = 0;
  std::optional<std::string> err;
  st.counts.for_each([&](const Site<D>& x, count_t n) {
    if (err) return;
    if (n == 0) {
      err = "zero count stored";
      return;
    }
    std::uint64_t l1 = 0;
    std::int64_t sum = 0;
    for (int i = 0; i < D; ++i) {
      l1 += static_cast<std::uint64_t>(x[i] < 0 ? -x[i] : x[i]);
      sum += x[i];
    }
    if (l1 > st.t) {
      err = "site outside the reachable ball";
      return;
    }
    if (((sum % 2 + 2) % 2) != (st.t % 2)) {
      err = "site parity inconsistent with t";
      return;
    }
    if (!checked_add(total, n)) {
      err = "count total overflows";
      return;
    }
  });
  if (err) return err;
  if (total != st.total) return "stored total does not match the site counts";
  if (st.total > 0) {
    double expect = ln_count(st.total);
    if (std::abs(st.ln_total - expect) > 1e-9 * (1.0 + std::abs(expect)))
      return "stored ln_total inconsistent";
  }
  return std::nullopt;
}

}  // namespace brwre
