#pragma once

// Binomial and multinomial sampling over 128-bit counts.
//
// Exact draws use CDF inversion for small means and the BTRS transformed
// rejection of Hormann for n*p >= 10; both consume uniforms from a PrfStream
// and are platform-deterministic (std::binomial_distribution is not: its
// algorithm is implementation-defined). Above opts.gaussian_threshold a
// rounded, clamped normal with matched mean and variance is substituted and
// the draw is flagged approximate; at the default threshold of 2^32 the
// approximation error is orders of magnitude below every statistic this
// simulator reports.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "brwre/int128.hpp"
#include "brwre/offspring.hpp"
#include "brwre/prf.hpp"

namespace brwre {

struct SamplingOptions {
  count_t gaussian_threshold = count_t{1} << 32;  // count_max() = never approximate
};

namespace detail {

// ln(k!) - Stirling main term; tabulated for small k, series otherwise
inline double stirling_tail(double k) {
  static const double table[10] = {
      0.0810614667953272, 0.0413406959554092, 0.0276779256849983,
      0.0207906721037650, 0.0166446911898211, 0.0138761288230707,
      0.0118967099458917, 0.0104112652619720, 0.00925546218271273,
      0.00833056343336287};
  if (k <= 9.0) return table[static_cast<int>(k)];
  double kp1 = k + 1.0;
  double kp1sq = kp1 * kp1;
  return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 / kp1sq) / kp1sq) / kp1;
}

// inversion, efficient while n*p stays small; requires p <= 0.5
inline count_t binomial_inversion(count_t n, double p, PrfStream& rng) {
  const double q_log = std::log1p(-p);
  double pmf = std::exp(static_cast<double>(n) * q_log);
  double cdf = pmf;
  const double ratio = p / (1.0 - p);
  const double u = rng.next_unit();
  count_t k = 0;
  while (u > cdf && k < n) {
    ++k;
    pmf *= (count_to_double(n - k + 1) / count_to_double(k)) * ratio;
    cdf += pmf;
    if (pmf < 1e-300) break;  // tail numerically exhausted
  }
  return k;
}

// BTRS transformed rejection, requires n*p >= 10 and p <= 0.5
inline count_t binomial_btrs(count_t n, double p, PrfStream& rng) {
  const double nn = count_to_double(n);
  const double stddev = std::sqrt(nn * p * (1.0 - p));
  const double b = 1.15 + 2.53 * stddev;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nn * p + 0.5;
  const double v_r = 0.92 - 4.2 / b;
  const double r = p / (1.0 - p);
  const double alpha = (2.83 + 5.1 / b) * stddev;
  const double m = std::floor((nn + 1.0) * p);
  for (;;) {
    const double u = rng.next_unit() - 0.5;
    const double v = rng.next_open_unit();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + c);
    if (kd < 0.0 || kd > nn) continue;
    if (us >= 0.07 && v <= v_r) return static_cast<count_t>(kd);
    const double lv = std::log(v * alpha / (a / (us * us) + b));
    const double upper =
        (m + 0.5) * std::log((m + 1.0) / (r * (nn - m + 1.0))) +
        (nn + 1.0) * std::log((nn - m + 1.0) / (nn - kd + 1.0)) +
        (kd + 0.5) * std::log(r * (nn - kd + 1.0) / (kd + 1.0)) +
        stirling_tail(m) + stirling_tail(nn - m) - stirling_tail(kd) -
        stirling_tail(nn - kd);
    if (lv <= upper) return static_cast<count_t>(kd);
  }
}

inline count_t binomial_gaussian(count_t n, double p, PrfStream& rng) {
  const double nn = count_to_double(n);
  const double mean = nn * p;
  const double sd = std::sqrt(nn * p * (1.0 - p));
  const double v = std::nearbyint(mean + sd * rng.next_normal());
  if (v <= 0.0) return 0;
  if (v >= nn) return n;
  return static_cast<count_t>(v);
}

}  // namespace detail

// One Binomial(n, p) draw.
inline count_t binomial_draw(count_t n, double p, PrfStream& rng,
                             const SamplingOptions& opts, bool& approximated) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (n > opts.gaussian_threshold) {
    approximated = true;
    return detail::binomial_gaussian(n, p, rng);
  }
  const bool flip = p > 0.5;
  const double ps = flip ? 1.0 - p : p;
  const double np = count_to_double(n) * ps;
  count_t k = np < 10.0 ? detail::binomial_inversion(n, ps, rng)
                        : detail::binomial_btrs(n, ps, rng);
  return flip ? n - k : k;
}

// Multinomial(n, probs) by sequential conditional binomials; the result
// always sums to exactly n (the last category takes the remainder).
inline void multinomial_split_into(count_t n, std::span<const double> probs,
                                   PrfStream& rng, const SamplingOptions& opts,
                                   bool& approximated, std::span<count_t> out) {
  const std::size_t k = probs.size();
  if (k == 0) throw std::invalid_argument("multinomial: empty probability vector");
  if (out.size() != k) throw std::invalid_argument("multinomial: output size mismatch");
  if (k == 1) {
    out[0] = n;
    return;
  }
  // suffix sums, computed once: conditioning on "not in an earlier bin"
  double rest = 0.0;
  std::array<double, 64> suffix_buf;
  std::vector<double> suffix_dyn;
  double* suffix = k <= 64 ? suffix_buf.data() : (suffix_dyn.resize(k), suffix_dyn.data());
  for (std::size_t i = k; i-- > 0;) {
    rest += probs[i];
    suffix[i] = rest;
  }
  count_t remaining = n;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (remaining == 0) {
      out[i] = 0;
      continue;
    }
    double pc = suffix[i] > 0.0 ? probs[i] / suffix[i] : 1.0;
    pc = std::clamp(pc, 0.0, 1.0);
    count_t c = binomial_draw(remaining, pc, rng, opts, approximated);
    out[i] = c;
    remaining -= c;
  }
  out[k - 1] = remaining;
}

inline std::vector<count_t> multinomial_split(count_t n, std::span<const double> probs,
                                              PrfStream& rng,
                                              const SamplingOptions& opts,
                                              bool& approximated) {
  std::vector<count_t> out(probs.size());
  multinomial_split_into(n, probs, rng, opts, approximated, {out.data(), out.size()});
  return out;
}

// Sum of n i.i.d. offspring counts from one law: a multinomial over the
// support followed by sum k * count_k. nullopt on 128-bit overflow.
inline std::optional<count_t> offspring_sum(count_t n, const OffspringLaw& law,
                                            PrfStream& rng, const SamplingOptions& opts,
                                            bool& approximated) {
  const auto& atoms = law.atoms();
  if (n == 0) return count_t{0};
  if (atoms.size() == 1) {  // deterministic law, exact in every mode
    count_t r;
    if (!checked_mul(n, count_t{atoms[0].k}, r)) return std::nullopt;
    return r;
  }
  std::array<double, 64> probs_buf;
  std::vector<double> probs_dyn;
  double* probs = atoms.size() <= 64
                      ? probs_buf.data()
                      : (probs_dyn.resize(atoms.size()), probs_dyn.data());
  for (std::size_t i = 0; i < atoms.size(); ++i) probs[i] = atoms[i].probability;
  std::array<count_t, 64> cnt_buf;
  std::vector<count_t> cnt_dyn;
  count_t* cnt = atoms.size() <= 64 ? cnt_buf.data()
                                    : (cnt_dyn.resize(atoms.size()), cnt_dyn.data());
  multinomial_split_into(n, {probs, atoms.size()}, rng, opts, approximated,
                         {cnt, atoms.size()});
  count_t sum = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    count_t part;
    if (!checked_mul(cnt[i], count_t{atoms[i].k}, part)) return std::nullopt;
    if (!checked_add(sum, part)) return std::nullopt;
  }
  return sum;
}

}  // namespace brwre
