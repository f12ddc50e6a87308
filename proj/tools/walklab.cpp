// walklab command-line front end: declarative experiment configs in,
// machine-readable reports and plot-ready CSV data out.
//
// Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 config or
// capability error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "walklab/config.hpp"
#include "walklab/report.hpp"
#include "walklab/walk.hpp"

namespace {

using walklab::ExperimentConfig;
using walklab::ExperimentResult;
using walklab::Json;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out_dir = ".";
  bool dump = false;
};

int run_config(const CommonArgs& args) {
  ExperimentConfig cfg = ExperimentConfig::load_file(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.threads) cfg.threads = *args.threads;
  const bool dump = args.dump || walklab::detail::optional_or(cfg.raw, "dump", false, "config");

  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult result = run_experiment(cfg);
  const auto runtime_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                            t0)
          .count());

  std::filesystem::create_directories(args.out_dir);
  const Json report = walklab::make_report(cfg.kind, cfg.seed, result, runtime_ms);
  const std::string report_path = args.out_dir + "/" + cfg.kind + "_report.json";
  walklab::write_text_file(report_path, report.dump(2) + "\n");

  if (dump && !result.cdf_rows.empty())
    walklab::write_cdf_csv(args.out_dir + "/" + cfg.kind + "_cdf.csv", result.cdf_rows);
  if (dump && (cfg.kind == "lln" || cfg.kind == "hopf")) {
    // event dump for the single-path experiments: first 10^4 crossings
    const walklab::IncrementLaw law = walklab::parse_law(cfg.raw.at("law"));
    const auto events = walklab::crossings(law, 0.0, walklab::RngState(cfg.seed, 0), 10000,
                                           1'000'000'000ull);
    walklab::write_events_csv(args.out_dir + "/" + cfg.kind + "_events.csv", events.events);
  }

  std::cout << report.dump(2) << "\n";
  std::cerr << "report written to " << report_path << "\n";
  return result.all_pass() ? 0 : 1;
}

int run_list() {
  std::cout << "experiment kinds and the claims they verify:\n";
  for (const auto& [kind, claim] : walklab::experiment_catalog())
    std::cout << "  " << kind << " ↦ " << claim << "\n";
  return 0;
}

int run_dump_density(const CommonArgs& args) {
  ExperimentConfig cfg = ExperimentConfig::load_file(args.config_path);
  const Json& j = cfg.raw;
  walklab::detail::reject_unknown(
      j, {"experiment", "seed", "threads", "law", "density", "set", "grid_lo", "grid_hi",
          "grid_points", "out"},
      "dump-density");
  const walklab::IncrementLaw law = walklab::parse_law(j.at("law"));
  const std::string which = walklab::detail::optional_or<std::string>(j, "density", "pi",
                                                                      "dump-density");
  walklab::DensityOnGroup density = [&] {
    if (which == "pi") return walklab::pi_density(law);
    if (which == "pi_plus") return walklab::pi_plus_density(law);
    if (which == "pi_minus") return walklab::pi_minus_density(law);
    if (which == "entrance")
      return walklab::lambda_entr_density(law, walklab::parse_set(j.at("set")));
    if (which == "exit")
      return walklab::lambda_exit_density(law, walklab::parse_set(j.at("set")));
    throw walklab::ConfigError("dump-density: unknown density \"" + which + "\"");
  }();
  const double lo = walklab::detail::optional_or(j, "grid_lo", density.support_lo(),
                                                 "dump-density");
  const double hi = walklab::detail::optional_or(j, "grid_hi", density.support_hi(),
                                                 "dump-density");
  const auto n = walklab::detail::optional_or<std::size_t>(j, "grid_points", 512,
                                                           "dump-density");
  std::filesystem::create_directories(args.out_dir);
  const std::string path = args.out_dir + "/density_" + which + ".csv";
  walklab::write_density_csv(path, density, lo, hi, n);
  std::cerr << "density grid written to " << path << "\n";
  return 0;
}

int run_finite_suite(const CommonArgs& args, std::size_t n_chains) {
  walklab::FiniteSuiteOptions opt;
  opt.n_chains = n_chains;
  if (args.seed) opt.seed = *args.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentResult result = walklab::run_finite_suite(opt, args.threads.value_or(0));
  const auto runtime_ms = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                            t0)
          .count());
  const Json report = walklab::make_report("finite_suite", opt.seed, result, runtime_ms);
  std::filesystem::create_directories(args.out_dir);
  walklab::write_text_file(args.out_dir + "/finite_suite_report.json", report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return result.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"walklab: exact and statistical verification of entrance/exit chains and "
               "level crossings of random walks"};
  app.require_subcommand(1);

  CommonArgs args;
  std::uint64_t seed_arg = 0;
  unsigned threads_arg = 0;
  std::size_t n_chains = 50;

  CLI::App* run = app.add_subcommand("run", "run an experiment described by a JSON config");
  run->add_option("--config", args.config_path, "path to the experiment config")->required();
  CLI::Option* run_seed = run->add_option("--seed", seed_arg, "override the config seed");
  CLI::Option* run_threads = run->add_option("--threads", threads_arg, "cap worker threads");
  run->add_option("--out", args.out_dir, "output directory (default .)");
  run->add_flag("--dump", args.dump, "also write plottable CSV data");

  CLI::App* list = app.add_subcommand("list", "list experiment kinds and verified claims");

  CLI::App* dump_density =
      app.add_subcommand("dump-density", "evaluate a closed-form density on a grid");
  dump_density->add_option("--config", args.config_path, "law/density description")->required();
  dump_density->add_option("--out", args.out_dir, "output directory (default .)");

  CLI::App* finite =
      app.add_subcommand("finite-suite", "run the randomized exact finite-chain suite");
  finite->add_option("--chains", n_chains, "number of random chains (default 50)");
  CLI::Option* fin_seed = finite->add_option("--seed", seed_arg, "suite seed");
  CLI::Option* fin_threads = finite->add_option("--threads", threads_arg, "cap worker threads");
  finite->add_option("--out", args.out_dir, "output directory (default .)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (run_seed->count()) args.seed = seed_arg;
      if (run_threads->count()) args.threads = threads_arg;
      return run_config(args);
    }
    if (list->parsed()) return run_list();
    if (dump_density->parsed()) return run_dump_density(args);
    if (finite->parsed()) {
      if (fin_seed->count()) args.seed = seed_arg;
      if (fin_threads->count()) args.threads = threads_arg;
      return run_finite_suite(args, n_chains);
    }
  } catch (const walklab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const walklab::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
