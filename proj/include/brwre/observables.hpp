#pragma once

// Per-step statistics: log population, normalized log population, maximal
// site density, replica overlap R_t = sum_x rho_{t,x}^2, and the series
// diagnostics built from them. All ratios are formed from the exact integer
// counts, converting each one once.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "brwre/int128.hpp"
#include "brwre/state.hpp"

namespace brwre {

inline double quiet_nan() { return std::numeric_limits<double>::quiet_NaN(); }

struct ObservableRecord {
  std::uint32_t t = 0;
  double ln_N = 0.0;     // NaN once extinct
  double ln_Nbar = 0.0;  // ln N_t - t ln m
  double rho_star = 1.0; // max site density
  double overlap = 1.0;  // replica overlap R_t
  double V = 0.0;        // sum_{s=1..t} R_s, accumulated every step
  std::uint64_t occupied = 0;
  bool approx = false;
};

// site densities N_{t,x} / N_t
template <int D>
std::vector<std::pair<Site<D>, double>> densities(const PopulationState<D>& st) {
  if (st.total == 0) throw std::invalid_argument("densities: population extinct");
  const double inv_total = 1.0 / count_to_double(st.total);
  std::vector<std::pair<Site<D>, double>> out;
  out.reserve(st.counts.size());
  st.counts.for_each([&](const Site<D>& x, count_t n) {
    out.emplace_back(x, count_to_double(n) * inv_total);
  });
  return out;
}

// (R_t, rho*_t); squares summed over counts in descending order
template <int D>
std::pair<double, double> overlap_and_max(const PopulationState<D>& st) {
  if (st.total == 0) throw std::invalid_argument("overlap: population extinct");
  std::vector<count_t> counts;
  counts.reserve(st.counts.size());
  st.counts.for_each([&](const Site<D>&, count_t n) { counts.push_back(n); });
  std::sort(counts.begin(), counts.end(), std::greater<>());
  const double inv_total = 1.0 / count_to_double(st.total);
  double overlap = 0.0;
  for (count_t n : counts) {
    double rho = count_to_double(n) * inv_total;
    overlap += rho * rho;
  }
  double rho_star = count_to_double(counts.front()) * inv_total;
  return {overlap, rho_star};
}

inline double log_nbar(double ln_N, std::uint32_t t, double m) {
  if (m <= 0.0) throw std::invalid_argument("log_nbar: m must be positive");
  return ln_N - static_cast<double>(t) * std::log(m);
}

// v_prev = V_{t-1}; an extinct state yields NaN density statistics and
// leaves V unchanged.
template <int D>
ObservableRecord make_record(const PopulationState<D>& st, double m, double v_prev) {
  ObservableRecord rec;
  rec.t = st.t;
  rec.occupied = st.counts.size();
  rec.approx = st.approx;
  if (st.total == 0) {
    rec.ln_N = quiet_nan();
    rec.ln_Nbar = quiet_nan();
    rec.rho_star = quiet_nan();
    rec.overlap = quiet_nan();
    rec.V = v_prev;
    return rec;
  }
  rec.ln_N = st.ln_total;
  rec.ln_Nbar = log_nbar(st.ln_total, st.t, m);
  auto [overlap, rho_star] = overlap_and_max(st);
  rec.overlap = overlap;
  rec.rho_star = rho_star;
  rec.V = st.t == 0 ? 0.0 : v_prev + overlap;  // V counts s >= 1
  return rec;
}

// (sum_{1<=s<t} R_s) / (-ln Nbar_t) per step; NaN where ln Nbar_t >= 0,
// at t = 0, or once extinct. The records must be the full per-step series.
inline std::vector<double> localization_ratio(std::span<const ObservableRecord> series) {
  std::vector<double> out(series.size(), quiet_nan());
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double lnb = series[i].ln_Nbar;
    if (!std::isfinite(lnb) || lnb >= 0.0) continue;
    out[i] = series[i - 1].V / (-lnb);
  }
  return out;
}

// t^{d/2} R_t; NaN at extinct steps
inline std::vector<std::pair<std::uint32_t, double>> overlap_scaling(
    std::span<const ObservableRecord> series, int d) {
  std::vector<std::pair<std::uint32_t, double>> out;
  out.reserve(series.size());
  for (const ObservableRecord& r : series) {
    double scaled = std::isfinite(r.overlap)
                        ? std::pow(static_cast<double>(r.t), 0.5 * d) * r.overlap
                        : quiet_nan();
    out.emplace_back(r.t, scaled);
  }
  return out;
}

// ln N_t / t for t >= 1
inline std::vector<std::pair<std::uint32_t, double>> growth_rate(
    std::span<const ObservableRecord> series) {
  std::vector<std::pair<std::uint32_t, double>> out;
  for (const ObservableRecord& r : series) {
    if (r.t == 0) continue;
    out.emplace_back(r.t, r.ln_N / static_cast<double>(r.t));
  }
  return out;
}

// (sum_{s<=t} R_s^{3/2}) / (sum_{s<=t} R_s) at the last recorded step
inline double overlap_power_ratio(std::span<const ObservableRecord> series) {
  double num = 0.0, den = 0.0;
  for (const ObservableRecord& r : series) {
    if (r.t == 0 || !std::isfinite(r.overlap)) continue;
    num += r.overlap * std::sqrt(r.overlap);
    den += r.overlap;
  }
  if (den <= 0.0) throw std::invalid_argument("overlap_power_ratio: requires V_t > 0");
  return num / den;
}

}  // namespace brwre
