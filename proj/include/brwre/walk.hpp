#pragma once

// Simple-random-walk kernel on Z^d: exact 2l-step return probabilities
// r_l = P_{2l}(0,0), the return probability pi_d, and the (epsilon, t0)
// threshold diagnostic used by the regime classifier.
//
// r_l is computed by iterated convolution of the nearest-neighbor kernel
// over the box [-L, L]^d. Any walk that returns to the origin by step 2L
// never exceeds l1-distance L (it must come back in the remaining steps),
// so truncating at the box boundary is exact for every r_l with l <= L.
// In d = 1 all intermediate values are dyadic rationals with < 53 mantissa
// bits up to l = 26, so the double-precision convolution is exact there.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace brwre {

inline constexpr int kMaxDimension = 8;
inline constexpr double kMaxConvolutionCells = 1e8;

struct NeighborStep {
  std::vector<std::int64_t> offset;
  double probability;
};

// The 2d unit-neighbor offsets, each with probability 1/(2d).
inline std::vector<NeighborStep> step_kernel(int d) {
  if (d < 1 || d > kMaxDimension)
    throw std::invalid_argument("step_kernel: dimension must be in [1,8]");
  std::vector<NeighborStep> out;
  out.reserve(2 * static_cast<std::size_t>(d));
  for (int axis = 0; axis < d; ++axis) {
    for (int sign : {-1, +1}) {
      std::vector<std::int64_t> off(static_cast<std::size_t>(d), 0);
      off[static_cast<std::size_t>(axis)] = sign;
      out.push_back({std::move(off), 1.0 / (2.0 * d)});
    }
  }
  return out;
}

namespace detail {

inline void check_convolution_guard(int d, int L) {
  if (d < 1 || d > kMaxDimension)
    throw std::invalid_argument("return_prob: dimension must be in [1,8]");
  if (L < 1) throw std::invalid_argument("return_prob: truncation must be >= 1");
  double cells = 1.0;
  for (int i = 0; i < d; ++i) cells *= 2.0 * L + 1.0;
  if (cells > kMaxConvolutionCells)
    throw std::invalid_argument(
        "return_prob: (2L+1)^d exceeds the 1e8-cell resource guard; "
        "use the l^{-d/2} tail asymptotic instead");
}

}  // namespace detail

// r_l for l = 1..L in one evolution of the kernel to time 2L.
inline std::vector<double> return_prob_series(int d, int L) {
  detail::check_convolution_guard(d, L);
  const std::size_t side = 2 * static_cast<std::size_t>(L) + 1;
  std::size_t cells = 1;
  std::vector<std::size_t> stride(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    stride[static_cast<std::size_t>(a)] = cells;
    cells *= side;
  }
  std::vector<double> cur(cells, 0.0), next(cells, 0.0);
  const std::size_t origin = cells / 2;  // side is odd
  cur[origin] = 1.0;
  const double inv2d = 1.0 / (2.0 * d);

  std::vector<double> r;
  r.reserve(static_cast<std::size_t>(L));
  std::vector<std::size_t> coord(static_cast<std::size_t>(d), 0);
  for (int step = 1; step <= 2 * L; ++step) {
    std::fill(coord.begin(), coord.end(), 0);
    for (std::size_t idx = 0; idx < cells; ++idx) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a) {
        const std::size_t sa = stride[static_cast<std::size_t>(a)];
        const std::size_t ca = coord[static_cast<std::size_t>(a)];
        if (ca > 0) acc += cur[idx - sa];
        if (ca + 1 < side) acc += cur[idx + sa];
      }
      next[idx] = acc * inv2d;
      // odometer increment of the multi-index
      for (std::size_t a = 0; a < static_cast<std::size_t>(d); ++a) {
        if (++coord[a] < side) break;
        coord[a] = 0;
      }
    }
    cur.swap(next);
    if (step % 2 == 0) r.push_back(cur[origin]);
  }
  return r;
}

// exact P_{2l}(0,0)
inline double return_prob(int d, int l) {
  return return_prob_series(d, l).back();
}

struct PiEstimate {
  double pi;
  double error_bound;
};

namespace detail {

// sum_{l=M}^{inf} l^{-s} for s > 1: explicit partial sum plus integral remainder
inline double zeta_tail(double s, double M) {
  double sum = 0.0;
  double l = M;
  for (int i = 0; i < 200000 && l < M + 200000; ++i, l += 1.0) sum += std::pow(l, -s);
  sum += std::pow(l - 0.5, 1.0 - s) / (s - 1.0);
  return sum;
}

struct TailFit {
  double c;          // fitted constant in r_l ~ c l^{-d/2}
  double residual;   // max relative misfit over the window
};

inline TailFit fit_tail(const std::vector<double>& r, int d) {
  const std::size_t L = r.size();
  const std::size_t window = std::min<std::size_t>(10, L);
  double half_d = 0.5 * d;
  double log_c = 0.0;
  for (std::size_t l = L - window + 1; l <= L; ++l)
    log_c += std::log(r[l - 1]) + half_d * std::log(static_cast<double>(l));
  log_c /= static_cast<double>(window);
  double c = std::exp(log_c);
  double resid = 0.0;
  for (std::size_t l = L - window + 1; l <= L; ++l) {
    double model = c * std::pow(static_cast<double>(l), -half_d);
    resid = std::max(resid, std::abs(r[l - 1] / model - 1.0));
  }
  return {c, resid};
}

}  // namespace detail

// Return probability of the walk. For d <= 2 the return is certain and the
// series sum_l r_l diverges; pi = 1 exactly. For d >= 3 the identity
// sum_{l>=1} r_l = pi/(1-pi) is inverted on the truncated sum plus a
// c l^{-d/2} tail extrapolation fitted to the last 10 computed terms.
inline PiEstimate pi_return(int d, int L, double /*tol*/ = 1e-9,
                            const std::vector<double>* precomputed_r = nullptr) {
  if (d < 1 || d > kMaxDimension)
    throw std::invalid_argument("pi_d: dimension must be in [1,8]");
  if (d <= 2) return {1.0, 0.0};
  std::vector<double> local;
  const std::vector<double>* r = precomputed_r;
  if (r == nullptr) {
    local = return_prob_series(d, L);
    r = &local;
  }
  double partial = 0.0;
  for (double v : *r) partial += v;
  detail::TailFit fit = detail::fit_tail(*r, d);
  double tail = fit.c * detail::zeta_tail(0.5 * d, static_cast<double>(r->size()) + 1.0);
  double total = partial + tail;
  double pi = total / (1.0 + total);
  double err_total = tail * std::max(fit.residual, 1e-3);
  double err = err_total / ((1.0 + total) * (1.0 + total));
  return {pi, err};
}

struct WalkDiagnostics {
  int d = 0;
  std::vector<double> r;  // r_l for l = 1..L
  double pi_d = 0.0;
  int truncation = 0;
  double tail_estimate = 0.0;
  double pi_error_bound = 0.0;
};

inline WalkDiagnostics compute_walk_diagnostics(int d, int L) {
  WalkDiagnostics diag;
  diag.d = d;
  diag.truncation = L;
  diag.r = return_prob_series(d, L);
  if (d <= 2) {
    diag.pi_d = 1.0;
    diag.tail_estimate = 0.0;
    diag.pi_error_bound = 0.0;
  } else {
    detail::TailFit fit = detail::fit_tail(diag.r, d);
    diag.tail_estimate =
        fit.c * detail::zeta_tail(0.5 * d, static_cast<double>(L) + 1.0);
    PiEstimate est = pi_return(d, L, 1e-9, &diag.r);
    diag.pi_d = est.pi;
    diag.pi_error_bound = est.error_bound;
  }
  return diag;
}

inline int default_walk_truncation(int d) {
  if (d == 1) return 4096;
  if (d == 2) return 192;
  return 64;
}

// Process-wide cache: the d = 3 convolution takes seconds and the
// diagnostics are pure functions of (d, L).
inline const WalkDiagnostics& shared_walk_diagnostics(int d, int L) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<WalkDiagnostics>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{d, L}];
  if (!slot) slot = std::make_unique<WalkDiagnostics>(compute_walk_diagnostics(d, L));
  return *slot;
}

struct T0Epsilon {
  double epsilon;
  int t0;
};

inline constexpr double kT0EpsilonGrid[] = {1.0, 0.5, 0.1, 0.01};
inline constexpr double kT0EpsilonMargin = 3.0;

// Threshold diagnostic: find grid pairs (epsilon, t0) whose truncated
// partial sum sum_{s<=t0} r_s clears (1+epsilon)/(alpha-1) with a 3x
// safety margin (the series is truncated and the call is qualitative;
// the margin keeps borderline alphas from flipping the verdict). The
// smallest t0 wins; the largest epsilon breaks ties. Absent when nothing
// clears within the truncation, which for d >= 3 requires alpha well
// above 1/pi_d.
inline std::optional<T0Epsilon> t0_epsilon(double alpha, int d, int L) {
  if (alpha <= 1.0)
    throw std::invalid_argument("t0_epsilon: requires alpha > 1");
  const WalkDiagnostics& diag = shared_walk_diagnostics(d, L);
  std::optional<T0Epsilon> best;
  for (double eps : kT0EpsilonGrid) {
    const double need = kT0EpsilonMargin * (1.0 + eps) / (alpha - 1.0);
    double partial = 0.0;
    for (std::size_t l = 0; l < diag.r.size(); ++l) {
      partial += diag.r[l];
      if (partial >= need) {
        int t0 = static_cast<int>(l) + 1;
        if (!best || t0 < best->t0) best = T0Epsilon{eps, t0};
        break;
      }
    }
  }
  return best;
}

}  // namespace brwre
