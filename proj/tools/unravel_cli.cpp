// Command-line front end: run / compare / enumerate-t0 / scan.
// Config file via --config, individual flags override file values.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <unravel/unravel.hpp>

namespace {

struct FlagValues {
  std::string config_path;
  std::string model;  // preset name
  std::string model_file;
  std::string initial;  // JSON snippet
  std::string engine;
  std::string rate;
  std::string times;  // comma-separated
  std::string scan_list;
  std::string out;
  std::string format;
  std::string ensembles_out;
  double eps = 0, delta = 0, eps_e = 0, eps_p = 0, g = 0;
  double hbar = 0, threshold = 0;
  double free_scale = 0, int_scale = 0;
  int dim = 0, workers = 0;
  std::uint64_t trajectories = 0, seed = 0, model_seed = 0;
};

std::vector<double> parse_times(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  return out;
}

// Registers the shared options on a subcommand and returns the option
// pointers needed to detect which flags were actually given.
void add_common_options(CLI::App* app, FlagValues& v) {
  app->add_option("--config", v.config_path, "JSON config file");
  app->add_option("--model", v.model,
                  "preset name: two-level, epr-decay or random");
  app->add_option("--model-file", v.model_file, "model JSON file");
  app->add_option("--initial", v.initial,
                  "initial spec JSON, e.g. '{\"basis\":0}'");
  app->add_option("--engine", v.engine, "two-process or triplet");
  app->add_option("--rate", v.rate, "jump rate: 'auto' or a number");
  app->add_option("--times", v.times, "comma-separated sample times");
  app->add_option("--trajectories", v.trajectories, "ensemble size M");
  app->add_option("--seed", v.seed, "master seed");
  app->add_option("--workers", v.workers, "worker threads");
  app->add_option("--out", v.out, "output path (default stdout)");
  app->add_option("--format", v.format, "json or csv");
  app->add_option("--threshold", v.threshold, "compare: max error/SE ratio");
  app->add_option("--hbar", v.hbar, "reduced Planck constant");
  app->add_option("--eps", v.eps, "two-level: detuning");
  app->add_option("--delta", v.delta, "two-level: coupling");
  app->add_option("--eps-e", v.eps_e, "epr-decay: excitation energy");
  app->add_option("--eps-p", v.eps_p, "epr-decay: pair energy");
  app->add_option("--g", v.g, "epr-decay: coupling");
  app->add_option("--dim", v.dim, "random: dimension");
  app->add_option("--model-seed", v.model_seed, "random: generator seed");
  app->add_option("--free-scale", v.free_scale, "random: free energy scale");
  app->add_option("--int-scale", v.int_scale, "random: interaction scale");
  app->add_option("--scan-trajectories", v.scan_list,
                  "scan: comma-separated ensemble sizes");
  app->add_option("--ensembles-out", v.ensembles_out,
                  "triplet engine: write compressed ensembles here");
}

unravel::RunConfig build_config(const CLI::App* app, const FlagValues& v) {
  unravel::RunConfig cfg;
  if (!v.config_path.empty()) {
    std::ifstream in(v.config_path);
    if (!in) {
      throw unravel::ConfigError("cannot open config file " + v.config_path);
    }
    unravel::json j;
    try {
      in >> j;
    } catch (const unravel::json::parse_error& e) {
      throw unravel::ConfigError("config file " + v.config_path + ": " +
                                 e.what());
    }
    cfg = unravel::parse_run_config(j);
  }

  auto given = [app](const std::string& name) {
    return app->count(name) > 0;
  };
  if (given("--model")) cfg.preset = v.model;
  if (given("--model-file")) cfg.model_file = v.model_file;
  if (given("--model") && !given("--model-file")) cfg.model_file.clear();
  if (given("--initial")) {
    cfg.initial = unravel::json::parse(v.initial, nullptr, true);
  }
  if (given("--engine")) cfg.engine = v.engine;
  if (given("--rate")) cfg.rate = v.rate;
  if (given("--times")) cfg.sample_times = parse_times(v.times);
  if (given("--trajectories")) cfg.trajectories = v.trajectories;
  if (given("--seed")) cfg.seed = v.seed;
  if (given("--workers")) cfg.workers = v.workers;
  if (given("--out")) cfg.out = v.out;
  if (given("--format")) cfg.format = v.format;
  if (given("--threshold")) cfg.threshold = v.threshold;
  if (given("--hbar")) cfg.hbar = v.hbar;
  if (given("--eps")) cfg.eps = v.eps;
  if (given("--delta")) cfg.delta = v.delta;
  if (given("--eps-e")) cfg.eps_e = v.eps_e;
  if (given("--eps-p")) cfg.eps_p = v.eps_p;
  if (given("--g")) cfg.g = v.g;
  if (given("--dim")) cfg.dim = v.dim;
  if (given("--model-seed")) cfg.model_seed = v.model_seed;
  if (given("--free-scale")) cfg.free_scale = v.free_scale;
  if (given("--int-scale")) cfg.int_scale = v.int_scale;
  if (given("--scan-trajectories")) {
    cfg.scan_trajectories = parse_sizes(v.scan_list);
  }
  if (given("--ensembles-out")) cfg.ensembles_out = v.ensembles_out;

  if (cfg.workers <= 0) {
    if (const char* env = std::getenv("UNRAVEL_WORKERS")) {
      cfg.workers = std::max(1, std::atoi(env));
    } else {
      cfg.workers = 1;
    }
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"superposition-free quantum trajectory simulator"};
  app.set_version_flag("--version", unravel::kVersion);
  app.require_subcommand(1);

  FlagValues flags;
  flags.workers = 0;  // 0 -> UNRAVEL_WORKERS or 1

  CLI::App* run = app.add_subcommand("run", "simulate and estimate rho_t");
  CLI::App* compare =
      app.add_subcommand("compare", "estimator vs exact propagator");
  CLI::App* enumerate =
      app.add_subcommand("enumerate-t0", "exact initial-condition enumeration");
  CLI::App* scan = app.add_subcommand("scan", "error vs ensemble size");
  for (CLI::App* sub : {run, compare, enumerate, scan}) {
    add_common_options(sub, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* active = app.get_subcommands().front();
  unravel::RunConfig cfg;
  try {
    cfg = build_config(active, flags);
  } catch (const unravel::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  if (active == run) return unravel::cmd_run(cfg, std::cout, std::cerr);
  if (active == compare) return unravel::cmd_compare(cfg, std::cout, std::cerr);
  if (active == enumerate) {
    return unravel::cmd_enumerate_t0(cfg, std::cout, std::cerr);
  }
  return unravel::cmd_scan(cfg, std::cout, std::cerr);
}
