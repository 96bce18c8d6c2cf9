#pragma once

// Experiment harness: single-run and ensemble execution, per-run CSV
// output, ensemble quantile summaries (JSON), regime diagnosis and plot
// emission. Ensemble members get their seeds positionally from the master
// seed, so an ensemble of a+b runs is byte-identical to two ensembles of a
// and b runs at offsets 0 and a.

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "brwre/config.hpp"
#include "brwre/engine.hpp"
#include "brwre/environment.hpp"
#include "brwre/observables.hpp"
#include "brwre/stats.hpp"
#include "brwre/walk.hpp"

namespace brwre {

struct RunArtifact {
  std::uint64_t run_index = 0;
  std::uint64_t env_seed = 0;
  std::uint64_t run_seed = 0;
  RunStatus status;
  std::vector<ObservableRecord> records;
};

inline constexpr const char* kCsvHeader =
    "t,ln_N,ln_Nbar,rho_star,overlap,V,occupied,approx";

namespace detail {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV rows are thinned to every record_every-th step (the final recorded
// step always included); V is accumulated every step regardless.
inline std::string run_csv_string(const RunArtifact& run, std::uint32_t record_every) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  const auto& recs = run.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const ObservableRecord& r = recs[i];
    if (r.t % record_every != 0 && i + 1 != recs.size()) continue;
    os << r.t << ',' << detail::format_double(r.ln_N) << ','
       << detail::format_double(r.ln_Nbar) << ',' << detail::format_double(r.rho_star)
       << ',' << detail::format_double(r.overlap) << ',' << detail::format_double(r.V)
       << ',' << r.occupied << ',' << (r.approx ? 1 : 0) << '\n';
  }
  os << "# status=" << run_status_name(run.status.kind) << " t=" << run.status.t
     << '\n';
  return os.str();
}

// one trajectory with explicit seeds
inline RunArtifact run_single_with_seeds(const ExperimentConfig& cfg,
                                         std::uint64_t env_seed, std::uint64_t run_seed,
                                         std::uint64_t run_index = 0) {
  RunArtifact art;
  art.run_index = run_index;
  art.env_seed = env_seed;
  art.run_seed = run_seed;
  RunResult res = dispatch_dimension(cfg.dimension, [&](auto dim) {
    return run_simulation<dim.value>(*cfg.env, env_seed, run_seed, cfg.t_max,
                                     cfg.sampling);
  });
  art.status = res.status;
  art.records = std::move(res.records);
  return art;
}

inline RunArtifact run_single(const ExperimentConfig& cfg) {
  if (cfg.env_seed && cfg.run_seed)
    return run_single_with_seeds(cfg, *cfg.env_seed, *cfg.run_seed);
  std::uint64_t idx = cfg.run_offset;
  return run_single_with_seeds(cfg, derive_env_seed(*cfg.master_seed, idx),
                               derive_run_seed(*cfg.master_seed, idx), idx);
}

// All ensemble members; runs are independent and executed by a small worker
// pool (results indexed by position, so the outcome is identical for any
// worker count).
inline std::vector<RunArtifact> run_ensemble_runs(const ExperimentConfig& cfg,
                                                  int workers_override = 0) {
  if (!cfg.master_seed)
    throw std::invalid_argument("ensemble execution requires master_seed seeding");
  const std::uint64_t n = cfg.n_runs;
  std::vector<RunArtifact> runs(n);
  int workers = workers_override > 0 ? workers_override : cfg.workers;
  workers = static_cast<int>(
      std::min<std::uint64_t>(static_cast<std::uint64_t>(std::max(1, workers)), n));

  std::atomic<std::uint64_t> cursor{0};
  auto body = [&]() {
    for (;;) {
      std::uint64_t i = cursor.fetch_add(1);
      if (i >= n) return;
      std::uint64_t idx = cfg.run_offset + i;
      runs[i] = run_single_with_seeds(cfg, derive_env_seed(*cfg.master_seed, idx),
                                      derive_run_seed(*cfg.master_seed, idx), idx);
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  return runs;
}

struct QuantileSeries {
  std::vector<double> p5, p25, p50, p75, p95;
};

struct EnsembleSummary {
  int dimension = 0;
  std::uint32_t t_max = 0;
  std::uint64_t n_runs = 0;
  double survival_fraction = 0.0;
  double extinct_fraction = 0.0;
  double overflow_fraction = 0.0;
  double approx_fraction = 0.0;
  std::vector<RunStatus> statuses;
  std::vector<std::uint32_t> times;   // recorded time grid
  std::vector<std::size_t> alive;     // contributing runs per time
  std::map<std::string, QuantileSeries> quantiles;
  RegimeReport regime;
};

namespace detail {

// per-run value series aligned on t = 0..t_max (NaN where undefined)
inline std::map<std::string, std::vector<double>> aligned_series(
    const RunArtifact& run, int dimension, std::uint32_t t_max) {
  const auto& recs = run.records;
  const std::size_t len = static_cast<std::size_t>(t_max) + 1;
  std::map<std::string, std::vector<double>> out;
  for (const char* key : {"ln_N", "ln_Nbar", "rho_star", "overlap", "V", "occupied",
                          "loc_ratio", "scaled_overlap", "growth_rate"})
    out[key].assign(len, quiet_nan());

  std::vector<double> ratio = localization_ratio(recs);
  auto scaled = overlap_scaling(recs, dimension);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const ObservableRecord& r = recs[i];
    out["ln_N"][r.t] = r.ln_N;
    out["ln_Nbar"][r.t] = r.ln_Nbar;
    out["rho_star"][r.t] = r.rho_star;
    out["overlap"][r.t] = r.overlap;
    out["V"][r.t] = r.V;
    out["occupied"][r.t] = static_cast<double>(r.occupied);
    out["loc_ratio"][r.t] = ratio[i];
    out["scaled_overlap"][r.t] = scaled[i].second;
    out["growth_rate"][r.t] =
        r.t > 0 ? r.ln_N / static_cast<double>(r.t) : quiet_nan();
  }
  return out;
}

}  // namespace detail

inline EnsembleSummary summarize_ensemble(const ExperimentConfig& cfg,
                                          const std::vector<RunArtifact>& runs,
                                          const RegimeReport& regime) {
  EnsembleSummary s;
  s.dimension = cfg.dimension;
  s.t_max = cfg.t_max;
  s.n_runs = runs.size();
  s.regime = regime;

  std::size_t extinct = 0, overflow = 0, approx = 0;
  for (const RunArtifact& r : runs) {
    s.statuses.push_back(r.status);
    if (r.status.kind == RunStatusKind::extinct) ++extinct;
    if (r.status.kind == RunStatusKind::overflow) ++overflow;
    if (!r.records.empty() && r.records.back().approx) ++approx;
  }
  const double n = static_cast<double>(runs.size());
  s.extinct_fraction = extinct / n;
  s.overflow_fraction = overflow / n;
  s.survival_fraction = (n - extinct - overflow) / n;
  s.approx_fraction = approx / n;

  for (std::uint32_t t = 0; t <= cfg.t_max; ++t)
    if (t % cfg.record_every == 0 || t == cfg.t_max) s.times.push_back(t);

  std::vector<std::map<std::string, std::vector<double>>> per_run;
  per_run.reserve(runs.size());
  for (const RunArtifact& r : runs)
    per_run.push_back(detail::aligned_series(r, cfg.dimension, cfg.t_max));

  static const char* kFields[] = {"ln_N", "ln_Nbar", "rho_star",
                                  "overlap", "V", "occupied",
                                  "loc_ratio", "scaled_overlap", "growth_rate"};
  s.alive.assign(s.times.size(), 0);
  for (const char* field : kFields) {
    QuantileSeries q;
    for (std::size_t ti = 0; ti < s.times.size(); ++ti) {
      std::uint32_t t = s.times[ti];
      std::vector<double> vals;
      vals.reserve(runs.size());
      for (const auto& series : per_run) {
        double v = series.at(field)[t];
        if (std::isfinite(v)) vals.push_back(v);
      }
      if (std::string(field) == "ln_N") s.alive[ti] = vals.size();
      if (vals.empty()) {
        q.p5.push_back(quiet_nan());
        q.p25.push_back(quiet_nan());
        q.p50.push_back(quiet_nan());
        q.p75.push_back(quiet_nan());
        q.p95.push_back(quiet_nan());
      } else {
        q.p5.push_back(quantile(vals, 0.05));
        q.p25.push_back(quantile(vals, 0.25));
        q.p50.push_back(quantile(vals, 0.50));
        q.p75.push_back(quantile(vals, 0.75));
        q.p95.push_back(quantile(vals, 0.95));
      }
    }
    s.quantiles[field] = std::move(q);
  }
  return s;
}

// --- JSON serialization ----------------------------------------------------

inline nlohmann::ordered_json regime_report_json(const RegimeReport& rep) {
  nlohmann::ordered_json j;
  j["dimension"] = rep.d;
  j["m"] = rep.m;
  j["m2"] = rep.m2;
  j["m3"] = rep.m3;
  j["alpha"] = rep.alpha;
  j["entropy"] = rep.entropy;
  j["ln2d"] = rep.ln2d;
  j["c0"] = rep.c0 ? nlohmann::ordered_json(*rep.c0) : nlohmann::ordered_json(nullptr);
  j["pi_d"] = rep.pi_d ? nlohmann::ordered_json(*rep.pi_d) : nlohmann::ordered_json(nullptr);
  j["alpha_threshold"] = rep.alpha_threshold
                             ? nlohmann::ordered_json(*rep.alpha_threshold)
                             : nlohmann::ordered_json(nullptr);
  if (rep.threshold_pair) {
    j["t0_epsilon"] = {{"epsilon", rep.threshold_pair->epsilon},
                       {"t0", rep.threshold_pair->t0}};
  } else {
    j["t0_epsilon"] = nullptr;
  }
  j["predicted_regime"] = regime_name(rep.predicted_regime);
  return j;
}

inline nlohmann::ordered_json ensemble_summary_json(const EnsembleSummary& s) {
  nlohmann::ordered_json j;
  j["dimension"] = s.dimension;
  j["t_max"] = s.t_max;
  j["n_runs"] = s.n_runs;
  j["survival_fraction"] = s.survival_fraction;
  j["extinct_fraction"] = s.extinct_fraction;
  j["overflow_fraction"] = s.overflow_fraction;
  j["approx_fraction"] = s.approx_fraction;
  nlohmann::ordered_json statuses = nlohmann::ordered_json::array();
  for (const RunStatus& st : s.statuses)
    statuses.push_back({{"status", run_status_name(st.kind)}, {"t", st.t}});
  j["statuses"] = statuses;
  j["times"] = s.times;
  j["alive_runs"] = s.alive;
  j["regime"] = regime_report_json(s.regime);
  nlohmann::ordered_json q;
  for (const auto& [field, qs] : s.quantiles) {
    q[field] = {{"p5", qs.p5},   {"p25", qs.p25}, {"p50", qs.p50},
                {"p75", qs.p75}, {"p95", qs.p95}};
  }
  j["quantiles"] = q;
  return j;
}

// --- regime diagnosis -------------------------------------------------------

inline RegimeReport diagnose(const ExperimentConfig& cfg) {
  const WalkDiagnostics& diag = shared_walk_diagnostics(
      cfg.dimension, default_walk_truncation(cfg.dimension));
  return classify_regime(*cfg.env, cfg.dimension, diag);
}

// --- file output -------------------------------------------------------------

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string run_file_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "run_%05llu.csv",
                static_cast<unsigned long long>(index));
  return buf;
}

}  // namespace detail

inline void write_ensemble_outputs(const ExperimentConfig& cfg,
                                   const std::vector<RunArtifact>& runs,
                                   const EnsembleSummary& summary,
                                   const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const RunArtifact& r : runs)
    detail::write_file(std::filesystem::path(out_dir) / detail::run_file_name(r.run_index),
                       run_csv_string(r, cfg.record_every));
  detail::write_file(std::filesystem::path(out_dir) / "summary.json",
                     ensemble_summary_json(summary).dump(2) + "\n");
}

// parse -> diagnose -> run -> summarize -> write
inline EnsembleSummary run_ensemble(const ExperimentConfig& cfg,
                                    const std::string& out_dir_override = "",
                                    int workers_override = 0) {
  RegimeReport regime = diagnose(cfg);
  std::vector<RunArtifact> runs = run_ensemble_runs(cfg, workers_override);
  EnsembleSummary summary = summarize_ensemble(cfg, runs, regime);
  std::string dir = out_dir_override.empty() ? cfg.out_dir : out_dir_override;
  write_ensemble_outputs(cfg, runs, summary, dir);
  return summary;
}

// --- plot emission ------------------------------------------------------------

struct PlotSpec {
  const char* field;
  const char* ylabel;
  const char* title;
};

inline const std::map<std::string, PlotSpec>& plot_kinds() {
  static const std::map<std::string, PlotSpec> kinds = {
      {"overlap", {"overlap", "R_t", "replica overlap"}},
      {"scaling", {"scaled_overlap", "t^{d/2} R_t", "overlap scaling"}},
      {"locratio", {"loc_ratio", "V_{t-1} / (-ln Nbar_t)", "localization ratio"}},
      {"growth", {"growth_rate", "ln N_t / t", "growth rate"}},
  };
  return kinds;
}

// Writes <kind>.tsv (t plus the five quantiles) and <kind>.gp, a gnuplot
// script referencing the data file by relative path. The growth plot draws
// a horizontal reference at c0 when defined.
inline void emit_plots(const EnsembleSummary& summary, const std::string& kind,
                       const std::string& out_dir) {
  auto it = plot_kinds().find(kind);
  if (it == plot_kinds().end()) {
    std::string valid;
    for (const auto& [k, spec] : plot_kinds()) valid += (valid.empty() ? "" : ", ") + k;
    throw std::invalid_argument("emit_plots: unknown kind '" + kind +
                                "' (valid kinds: " + valid + ")");
  }
  const PlotSpec& spec = it->second;
  const QuantileSeries& q = summary.quantiles.at(spec.field);

  std::ostringstream data;
  data << "# t\tp5\tp25\tp50\tp75\tp95\n";
  for (std::size_t i = 0; i < summary.times.size(); ++i) {
    data << summary.times[i] << '\t' << detail::format_double(q.p5[i]) << '\t'
         << detail::format_double(q.p25[i]) << '\t' << detail::format_double(q.p50[i])
         << '\t' << detail::format_double(q.p75[i]) << '\t'
         << detail::format_double(q.p95[i]) << '\n';
  }

  std::ostringstream gp;
  gp << "set terminal pngcairo size 900,600\n";
  gp << "set output '" << kind << ".png'\n";
  gp << "set title '" << spec.title << "'\n";
  gp << "set xlabel 't'\n";
  gp << "set ylabel '" << spec.ylabel << "'\n";
  gp << "set datafile missing 'nan'\n";
  if (kind == "growth" && summary.regime.c0) {
    gp << "c0 = " << detail::format_double(*summary.regime.c0) << "\n";
  }
  gp << "plot '" << kind << ".tsv' using 1:4 with lines lw 2 title 'median', \\\n"
     << "     '' using 1:2 with lines dt 2 title 'p5', \\\n"
     << "     '' using 1:6 with lines dt 2 title 'p95'";
  if (kind == "growth" && summary.regime.c0) {
    gp << ", \\\n     c0 with lines dt 3 lw 2 title 'c0'";
  }
  gp << "\n";

  std::filesystem::create_directories(out_dir);
  detail::write_file(std::filesystem::path(out_dir) / (kind + ".tsv"), data.str());
  detail::write_file(std::filesystem::path(out_dir) / (kind + ".gp"), gp.str());
}

}  // namespace brwre
