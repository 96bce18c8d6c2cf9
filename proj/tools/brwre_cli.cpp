// brwre: branching random walks in random environment.
//
// Subcommands:
//   diagnose <config>                 moment diagnostics and predicted regime
//   run <config>                      one trajectory, CSV output
//   ensemble <config>                 independent runs, summary + plots
//   return-prob --dim D --max-l L     walk return probabilities and pi_d
//   oracle-compare <config> --samples N   engine vs. ground-truth oracles
//
// Exit codes: 0 success, 2 config error, 3 overflow in a single-run command,
// 4 oracle-comparison rejection.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "brwre/brwre.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitOverflow = 3;
constexpr int kExitOracleReject = 4;

struct GlobalOptions {
  std::string out_dir;  // overrides the config's out_dir when set
  int workers = 0;      // overrides the config's workers when > 0
};

std::string effective_out_dir(const GlobalOptions& g, const brwre::ExperimentConfig& cfg) {
  return g.out_dir.empty() ? cfg.out_dir : g.out_dir;
}

void print_regime_report(const brwre::RegimeReport& rep) {
  std::printf("dimension        : %d\n", rep.d);
  std::printf("m                : %.6g\n", rep.m);
  std::printf("m^(2), m^(3)     : %.6g, %.6g\n", rep.m2, rep.m3);
  std::printf("alpha            : %.6g\n", rep.alpha);
  std::printf("entropy vs ln 2d : %.6g vs %.6g\n", rep.entropy, rep.ln2d);
  if (rep.c0)
    std::printf("c0               : %.6g\n", *rep.c0);
  else
    std::printf("c0               : undefined (offspring law has mass at 0)\n");
  if (rep.pi_d) std::printf("pi_d             : %.6g\n", *rep.pi_d);
  if (rep.alpha_threshold)
    std::printf("1/pi_d threshold : %.6g\n", *rep.alpha_threshold);
  if (rep.threshold_pair)
    std::printf("(epsilon, t0)    : (%g, %d)\n", rep.threshold_pair->epsilon,
                rep.threshold_pair->t0);
  std::printf("predicted regime : %s\n", brwre::regime_name(rep.predicted_regime));
}

int cmd_diagnose(const std::string& config_path, const GlobalOptions& g) {
  brwre::ExperimentConfig cfg = brwre::parse_config_file(config_path);
  brwre::RegimeReport rep = brwre::diagnose(cfg);
  print_regime_report(rep);
  std::filesystem::path dir = effective_out_dir(g, cfg);
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "diagnose.json");
  out << brwre::regime_report_json(rep).dump(2) << "\n";
  std::printf("report written to %s\n", (dir / "diagnose.json").string().c_str());
  return 0;
}

int cmd_run(const std::string& config_path, const GlobalOptions& g) {
  brwre::ExperimentConfig cfg = brwre::parse_config_file(config_path);
  brwre::RunArtifact art = brwre::run_single(cfg);
  std::filesystem::path dir = effective_out_dir(g, cfg);
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "run.csv", std::ios::binary);
  out << brwre::run_csv_string(art, cfg.record_every);
  const brwre::ObservableRecord& last = art.records.back();
  std::printf("status=%s t=%u ln_N=%.6g ln_Nbar=%.6g overlap=%.6g occupied=%llu\n",
              brwre::run_status_name(art.status.kind), last.t, last.ln_N, last.ln_Nbar,
              last.overlap, static_cast<unsigned long long>(last.occupied));
  std::printf("trajectory written to %s\n", (dir / "run.csv").string().c_str());
  return art.status.kind == brwre::RunStatusKind::overflow ? kExitOverflow : 0;
}

int cmd_ensemble(const std::string& config_path, const GlobalOptions& g) {
  brwre::ExperimentConfig cfg = brwre::parse_config_file(config_path);
  std::string dir = effective_out_dir(g, cfg);
  brwre::EnsembleSummary summary = brwre::run_ensemble(cfg, dir, g.workers);
  for (const auto& [kind, spec] : brwre::plot_kinds())
    brwre::emit_plots(summary, kind, dir);
  std::printf("runs=%llu survived=%.3f extinct=%.3f overflow=%.3f approx=%.3f\n",
              static_cast<unsigned long long>(summary.n_runs),
              summary.survival_fraction, summary.extinct_fraction,
              summary.overflow_fraction, summary.approx_fraction);
  std::printf("regime: %s\n", brwre::regime_name(summary.regime.predicted_regime));
  std::printf("outputs written to %s\n", dir.c_str());
  return 0;
}

int cmd_return_prob(int dim, int max_l) {
  const brwre::WalkDiagnostics& diag = brwre::shared_walk_diagnostics(dim, max_l);
  std::printf("# l\tr_l\n");
  for (std::size_t l = 1; l <= diag.r.size(); ++l)
    std::printf("%zu\t%.12g\n", l, diag.r[l - 1]);
  std::printf("# pi_%d = %.9g (error bound %.2g, truncation L = %d, tail %.3g)\n",
              dim, diag.pi_d, diag.pi_error_bound, diag.truncation,
              diag.tail_estimate);
  return 0;
}

int cmd_oracle_compare(const std::string& config_path, std::size_t samples,
                       const GlobalOptions&) {
  brwre::ExperimentConfig cfg = brwre::parse_config_file(config_path);
  if (!cfg.master_seed)
    throw brwre::ConfigError(0, "oracle-compare requires master_seed seeding");
  const std::uint64_t master = *cfg.master_seed;

  brwre::ChiSquareResult res = brwre::dispatch_dimension(cfg.dimension, [&](auto dim) {
    constexpr int D = dim.value;
    std::map<std::string, std::size_t> engine_samples;
    for (std::size_t i = 0; i < samples; ++i) {
      auto st = brwre::init_state<D>();
      for (std::uint32_t t = 0; t < cfg.t_max; ++t) {
        if (!brwre::step(st, *cfg.env, brwre::derive_env_seed(master, i),
                         brwre::derive_run_seed(master, i), cfg.sampling))
          throw std::runtime_error("oracle-compare: overflow during sampling");
        if (st.total == 0) break;
      }
      engine_samples[brwre::configuration_key(brwre::canonical_configuration(st))]++;
    }
    if (cfg.t_max <= 2) {
      auto exact = brwre::enumerate_exact<D>(*cfg.env, cfg.t_max);
      std::printf("reference: exact enumeration at t = %u (%zu outcomes)\n",
                  cfg.t_max, exact.outcomes.size());
      return brwre::compare_distributions(engine_samples, exact, samples);
    }
    std::map<std::string, std::size_t> particle_samples;
    for (std::size_t i = 0; i < samples; ++i) {
      auto traj = brwre::particle_run<D>(*cfg.env, brwre::derive_env_seed(master, samples + i),
                                         brwre::derive_run_seed(master, samples + i),
                                         cfg.t_max);
      particle_samples[brwre::configuration_key(
          brwre::canonical_configuration(brwre::histogram_particles(traj.back())))]++;
    }
    std::printf("reference: per-particle simulation at t = %u\n", cfg.t_max);
    return brwre::compare_distributions(engine_samples, particle_samples);
  });

  std::printf("chi-square = %.4f, dof = %d, bins = %zu, p = %.6g\n", res.statistic,
              res.dof, res.bins, res.p_value);
  if (res.p_value <= 1e-3) {
    std::printf("REJECTED at level 1e-3\n");
    return kExitOracleReject;
  }
  std::printf("consistent at level 1e-3\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"branching random walks in random environment"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--out", g.out_dir, "output directory (overrides the config)");
  app.add_option("--workers", g.workers, "worker threads for ensembles");

  std::string config_path;
  auto* diag = app.add_subcommand("diagnose", "moment diagnostics and regime");
  diag->add_option("config", config_path, "experiment config file")->required();

  auto* run = app.add_subcommand("run", "simulate one trajectory");
  run->add_option("config", config_path, "experiment config file")->required();

  auto* ens = app.add_subcommand("ensemble", "simulate an ensemble");
  ens->add_option("config", config_path, "experiment config file")->required();

  int dim = 3, max_l = 64;
  auto* rp = app.add_subcommand("return-prob", "walk return probabilities");
  rp->add_option("--dim", dim, "lattice dimension")->required();
  rp->add_option("--max-l", max_l, "series truncation L");

  std::size_t samples = 100000;
  auto* oc = app.add_subcommand("oracle-compare", "engine vs. oracle distributions");
  oc->add_option("config", config_path, "experiment config file")->required();
  oc->add_option("--samples", samples, "samples per side");

  for (CLI::App* sub : {diag, run, ens, rp, oc}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (diag->parsed()) return cmd_diagnose(config_path, g);
    if (run->parsed()) return cmd_run(config_path, g);
    if (ens->parsed()) return cmd_ensemble(config_path, g);
    if (rp->parsed()) return cmd_return_prob(dim, max_l);
    if (oc->parsed()) return cmd_oracle_compare(config_path, samples, g);
  } catch (const brwre::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
