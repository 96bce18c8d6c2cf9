#pragma once

// Small statistics toolbox: regularized incomplete gamma (for chi-square
// p-values), goodness-of-fit and two-sample chi-square tests over string
// bins with expected-count pooling, and quantile/mean helpers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace brwre {

namespace detail {

inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_continued_fraction(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 1000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// regularized upper incomplete gamma Q(a, x)
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_continued_fraction(a, x);
}

inline double chi_square_pvalue(double statistic, int dof) {
  if (dof < 1) throw std::invalid_argument("chi-square: dof must be >= 1");
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int dof = 0;
  std::size_t bins = 0;
};

// Goodness of fit of observed counts against reference probabilities.
// Bins with expected count below min_expected are pooled (smallest first)
// into a rest bin; observed keys absent from the reference fall into the
// rest bin as well.
inline ChiSquareResult chi_square_gof(const std::map<std::string, std::size_t>& observed,
                                      const std::map<std::string, double>& probs,
                                      std::size_t n_samples,
                                      double min_expected = 5.0) {
  double prob_sum = 0.0;
  std::vector<std::pair<double, double>> cells;  // (expected, observed)
  for (const auto& [key, p] : probs) {
    auto it = observed.find(key);
    double obs = it == observed.end() ? 0.0 : static_cast<double>(it->second);
    cells.emplace_back(p * static_cast<double>(n_samples), obs);
    prob_sum += p;
  }
  double rest_expected = std::max(0.0, 1.0 - prob_sum) * static_cast<double>(n_samples);
  double rest_observed = 0.0;
  for (const auto& [key, c] : observed)
    if (probs.find(key) == probs.end()) rest_observed += static_cast<double>(c);

  std::sort(cells.begin(), cells.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  while (!cells.empty() && (cells.back().first < min_expected ||
                            rest_expected < min_expected)) {
    rest_expected += cells.back().first;
    rest_observed += cells.back().second;
    cells.pop_back();
  }
  if (rest_expected > 0.0 || rest_observed > 0.0)
    cells.emplace_back(rest_expected, rest_observed);

  if (cells.size() < 2)
    throw std::invalid_argument("chi-square: degenerate binning (fewer than 2 bins)");
  double stat = 0.0;
  for (const auto& [e, o] : cells) {
    if (e <= 0.0) {
      if (o > 0.0) return {std::numeric_limits<double>::infinity(), 0.0,
                           static_cast<int>(cells.size()) - 1, cells.size()};
      continue;
    }
    double d = o - e;
    stat += d * d / e;
  }
  int dof = static_cast<int>(cells.size()) - 1;
  return {stat, chi_square_pvalue(stat, dof), dof, cells.size()};
}

// Two-sample chi-square on the union of keys; bins with fewer than
// min_combined total counts are pooled.
inline ChiSquareResult chi_square_two_sample(
    const std::map<std::string, std::size_t>& sample_a,
    const std::map<std::string, std::size_t>& sample_b,
    double min_combined = 10.0) {
  double na = 0.0, nb = 0.0;
  for (const auto& [k, c] : sample_a) na += static_cast<double>(c);
  for (const auto& [k, c] : sample_b) nb += static_cast<double>(c);
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("chi-square: empty sample");

  std::map<std::string, std::pair<double, double>> cells;
  for (const auto& [k, c] : sample_a) cells[k].first = static_cast<double>(c);
  for (const auto& [k, c] : sample_b) cells[k].second = static_cast<double>(c);

  std::vector<std::pair<double, double>> binned;
  for (auto& [k, oc] : cells) binned.push_back(oc);
  std::sort(binned.begin(), binned.end(), [](const auto& a, const auto& b) {
    return a.first + a.second > b.first + b.second;
  });
  std::pair<double, double> rest{0.0, 0.0};
  while (!binned.empty() &&
         binned.back().first + binned.back().second < min_combined) {
    rest.first += binned.back().first;
    rest.second += binned.back().second;
    binned.pop_back();
  }
  if (rest.first + rest.second > 0.0) binned.push_back(rest);
  if (binned.size() < 2)
    throw std::invalid_argument("chi-square: degenerate binning (fewer than 2 bins)");

  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  double stat = 0.0;
  for (const auto& [oa, ob] : binned) {
    double d = ka * oa - kb * ob;
    stat += d * d / (oa + ob);
  }
  int dof = static_cast<int>(binned.size()) - 1;
  return {stat, chi_square_pvalue(stat, dof), dof, binned.size()};
}

// quantile with linear interpolation between order statistics
inline double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  if (p <= 0.0) return values.front();
  if (p >= 1.0) return values.back();
  double h = p * static_cast<double>(values.size() - 1);
  std::size_t lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

struct MeanStdErr {
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
};

inline MeanStdErr mean_stderr(const std::vector<double>& values) {
  if (values.size() < 2) throw std::invalid_argument("mean_stderr: need >= 2 values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double var = ss / static_cast<double>(values.size() - 1);
  double sd = std::sqrt(var);
  return {mean, sd, sd / std::sqrt(static_cast<double>(values.size()))};
}

}  // namespace brwre
