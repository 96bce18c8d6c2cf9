#pragma once

// The count-based simulator. One step moves every particle at each occupied
// site (t, x) to a uniform neighbor and replaces it by the offspring drawn
// from the law sampled at (t, x); all children of a parent land together at
// the parent's destination. Destinations and offspring counts are
// independent given (t, x), so the per-site work factorizes as a direction
// multinomial followed by one offspring sum per nonempty direction group --
// cost O(occupied_sites * (2d + support)) independent of the population.
//
// Randomness comes from counter-based PRF streams keyed by
// (run_seed, domain, t, x[, direction]); results are therefore independent
// of the order in which sites are processed.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "brwre/environment.hpp"
#include "brwre/observables.hpp"
#include "brwre/sampling.hpp"
#include "brwre/state.hpp"

namespace brwre {

enum class RunStatusKind { completed, extinct, overflow };

struct RunStatus {
  RunStatusKind kind = RunStatusKind::completed;
  std::uint32_t t = 0;  // step at which extinction/overflow occurred

  bool operator==(const RunStatus&) const = default;
};

inline const char* run_status_name(RunStatusKind k) {
  switch (k) {
    case RunStatusKind::completed: return "completed";
    case RunStatusKind::extinct: return "extinct";
    case RunStatusKind::overflow: return "overflow";
  }
  return "?";
}

// canonical direction order: (-x0, +x0, -x1, +x1, ...)
template <int D>
Site<D> neighbor(const Site<D>& x, int dir) {
  Site<D> y = x;
  y[dir >> 1] += (dir & 1) ? +1 : -1;
  return y;
}

// Advance the state one step in place. Returns false on 128-bit overflow,
// in which case the state is left untouched.
template <int D>
bool step(PopulationState<D>& st, const EnvironmentLaw& env, std::uint64_t env_seed,
          std::uint64_t run_seed, const SamplingOptions& opts = {}) {
  constexpr int two_d = 2 * D;
  const Prf dir_prf(run_seed, StreamDomain::engine_direction);
  const Prf off_prf(run_seed, StreamDomain::engine_offspring);

  std::array<double, two_d> dir_probs;
  dir_probs.fill(1.0 / two_d);

  typename PopulationState<D>::SiteMap next(2 * st.counts.size() + 8);
  count_t total = 0;
  bool approximated = st.approx;
  bool overflow = false;

  st.counts.for_each([&](const Site<D>& x, count_t n) {
    if (overflow) return;
    const std::size_t law_idx =
        sample_law(env, env_seed, st.t, {x.data(), static_cast<std::size_t>(D)});
    const OffspringLaw& law = env.components()[law_idx].law;

    std::array<std::uint64_t, 2 + D> words;
    words[0] = st.t;
    for (int i = 0; i < D; ++i) words[1 + i] = static_cast<std::uint64_t>(x[i]);

    PrfStream dir_stream(dir_prf, {words.data(), 1 + D});
    std::array<count_t, two_d> per_dir;
    multinomial_split_into(n, {dir_probs.data(), two_d}, dir_stream, opts,
                           approximated, {per_dir.data(), two_d});

    for (int dir = 0; dir < two_d; ++dir) {
      if (per_dir[dir] == 0) continue;
      words[1 + D] = static_cast<std::uint64_t>(dir);
      PrfStream off_stream(off_prf, {words.data(), 2 + D});
      std::optional<count_t> children =
          offspring_sum(per_dir[dir], law, off_stream, opts, approximated);
      if (!children) {
        overflow = true;
        return;
      }
      if (*children == 0) continue;
      count_t& slot = next.slot(neighbor<D>(x, dir));
      if (!checked_add(slot, *children) || !checked_add(total, *children)) {
        overflow = true;
        return;
      }
    }
  });

  if (overflow) return false;
  st.counts = std::move(next);
  st.total = total;
  st.t += 1;
  st.ln_total = total > 0 ? ln_count(total) : quiet_nan();
  st.approx = approximated;
  return true;
}

struct RunResult {
  std::vector<ObservableRecord> records;  // one per step, starting at t = 0
  RunStatus status;
};

// Drive the dynamics for t_max steps, emitting one record per step.
// Deterministic given (env_seed, run_seed). Stops early on extinction
// (final record kept, density statistics NaN) or overflow (no record for
// the failed step).
template <int D>
RunResult run_simulation(const EnvironmentLaw& env, std::uint64_t env_seed,
                         std::uint64_t run_seed, std::uint32_t t_max,
                         const SamplingOptions& opts = {}) {
  const double m = env_moments(env).m;
  RunResult out;
  out.records.reserve(t_max + 1);
  PopulationState<D> st = init_state<D>();
  out.records.push_back(make_record(st, m, 0.0));
  for (std::uint32_t t = 1; t <= t_max; ++t) {
    if (!step(st, env, env_seed, run_seed, opts)) {
      out.status = {RunStatusKind::overflow, t};
      return out;
    }
    out.records.push_back(make_record(st, m, out.records.back().V));
    if (st.total == 0) {
      out.status = {RunStatusKind::extinct, t};
      return out;
    }
  }
  out.status = {RunStatusKind::completed, t_max};
  return out;
}

// runtime-dimension dispatch onto the compile-time engine
template <class F>
auto dispatch_dimension(int d, F&& f) {
  switch (d) {
    case 1: return f(std::integral_constant<int, 1>{});
    case 2: return f(std::integral_constant<int, 2>{});
    case 3: return f(std::integral_constant<int, 3>{});
    case 4: return f(std::integral_constant<int, 4>{});
    case 5: return f(std::integral_constant<int, 5>{});
    case 6: return f(std::integral_constant<int, 6>{});
    case 7: return f(std::integral_constant<int, 7>{});
    case 8: return f(std::integral_constant<int, 8>{});
    default: throw std::invalid_argument("dimension must be in [1,8]");
  }
}

}  // namespace brwre
