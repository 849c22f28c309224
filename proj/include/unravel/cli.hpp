#pragma once

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "io.hpp"
#include "models.hpp"
#include "runner.hpp"

namespace unravel {

inline constexpr const char* kVersion = "unravel 1.0.0";

// Resolved run description: model selection, initial state, engine and
// process parameters. Populated from a JSON config file and/or CLI flags;
// flags win.
struct RunConfig {
  // model: file > inline > preset
  std::string preset = "two-level";
  double eps = 0.0;
  double delta = 1.0;
  double eps_e = 0.0;
  double eps_p = 0.0;
  double g = 0.5;
  int dim = 2;
  std::uint64_t model_seed = 0;
  double free_scale = 1.0;
  double int_scale = 1.0;
  std::string model_file;
  json inline_model;  // null unless the config embeds a model object

  json initial;  // null -> preset default (basis 0 for files/inline)
  std::string engine = "two-process";
  std::string rate = "auto";  // "auto" or a positive number
  std::optional<double> hbar;
  std::vector<double> sample_times{1.0};
  std::size_t trajectories = 10000;
  std::uint64_t seed = 1;
  int workers = 0;  // <= 0: resolved by the front end (UNRAVEL_WORKERS or 1)
  double threshold = 5.0;
  std::vector<std::size_t> scan_trajectories{1000, 4000, 16000, 64000};
  std::string out;            // "" -> stdout
  std::string format = "json";
  std::string ensembles_out;  // triplet engine: dump compressed ensembles
};

inline RunConfig parse_run_config(const json& j) {
  RunConfig cfg;
  if (!j.is_object()) {
    throw ConfigError("run config must be a JSON object");
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.is_object() && m.contains("preset")) {
      cfg.preset = m.at("preset").get<std::string>();
      cfg.eps = m.value("eps", cfg.eps);
      cfg.delta = m.value("delta", cfg.delta);
      cfg.eps_e = m.value("eps_e", cfg.eps_e);
      cfg.eps_p = m.value("eps_p", cfg.eps_p);
      cfg.g = m.value("g", cfg.g);
      cfg.dim = m.value("dim", cfg.dim);
      cfg.model_seed = m.value("seed", cfg.model_seed);
      cfg.free_scale = m.value("free_scale", cfg.free_scale);
      cfg.int_scale = m.value("int_scale", cfg.int_scale);
    } else if (m.is_object() && m.contains("file")) {
      cfg.model_file = m.at("file").get<std::string>();
    } else if (m.is_object() && m.contains("dim")) {
      cfg.inline_model = m;
    } else {
      throw ConfigError("model must specify a preset, a file or an inline model");
    }
  }
  if (j.contains("initial")) cfg.initial = j.at("initial");
  cfg.engine = j.value("engine", cfg.engine);
  if (j.contains("rate")) {
    const json& r = j.at("rate");
    if (r.is_string()) {
      cfg.rate = r.get<std::string>();
    } else {
      std::ostringstream ss;
      ss << std::setprecision(17) << r.get<double>();
      cfg.rate = ss.str();
    }
  }
  if (j.contains("hbar")) cfg.hbar = j.at("hbar").get<double>();
  if (j.contains("sample_times")) {
    cfg.sample_times = j.at("sample_times").get<std::vector<double>>();
  }
  cfg.trajectories = j.value("trajectories", cfg.trajectories);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.threshold = j.value("threshold", cfg.threshold);
  if (j.contains("scan_trajectories")) {
    cfg.scan_trajectories =
        j.at("scan_trajectories").get<std::vector<std::size_t>>();
  }
  cfg.out = j.value("out", cfg.out);
  cfg.format = j.value("format", cfg.format);
  cfg.ensembles_out = j.value("ensembles_out", cfg.ensembles_out);
  return cfg;
}

// Fully resolved setup ready to run.
struct ResolvedRun {
  SplitHamiltonian hamiltonian;
  InitialSpec initial;
  JumpConfig jump;
  Engine engine = Engine::TwoProcess;
  std::vector<std::string> basis_labels;
  json model_echo;  // what the output metadata reports as the model
};

inline ResolvedRun resolve_run(const RunConfig& cfg) {
  ResolvedRun r;

  if (!cfg.model_file.empty()) {
    r.hamiltonian = load_model_file(cfg.model_file);
    r.initial = BasisPure{0};
    r.model_echo = {{"file", cfg.model_file}};
  } else if (!cfg.inline_model.is_null()) {
    r.hamiltonian = model_from_json(cfg.inline_model);
    r.initial = BasisPure{0};
    r.model_echo = cfg.inline_model;
  } else {
    ModelPreset preset;
    if (cfg.preset == "two-level") {
      preset = two_level(cfg.eps, cfg.delta);
      r.model_echo = {{"preset", cfg.preset}, {"eps", cfg.eps}, {"delta", cfg.delta}};
    } else if (cfg.preset == "epr-decay") {
      preset = epr_decay(cfg.eps_e, cfg.eps_p, cfg.g);
      r.model_echo = {{"preset", cfg.preset},
                      {"eps_e", cfg.eps_e},
                      {"eps_p", cfg.eps_p},
                      {"g", cfg.g}};
    } else if (cfg.preset == "random") {
      preset = random_hermitian(cfg.dim, cfg.model_seed, cfg.free_scale,
                                cfg.int_scale);
      r.model_echo = {{"preset", cfg.preset},
                      {"dim", cfg.dim},
                      {"seed", cfg.model_seed},
                      {"free_scale", cfg.free_scale},
                      {"int_scale", cfg.int_scale}};
    } else {
      throw ConfigError("unknown preset '" + cfg.preset +
                        "' (expected two-level, epr-decay or random)");
    }
    r.hamiltonian = std::move(preset.hamiltonian);
    r.initial = std::move(preset.default_initial);
    r.basis_labels = std::move(preset.basis_labels);
  }
  if (r.basis_labels.empty()) {
    for (int i = 0; i < r.hamiltonian.dim; ++i) {
      r.basis_labels.push_back(std::to_string(i));
    }
  }

  if (cfg.hbar.has_value()) {
    r.hamiltonian = validate_hamiltonian(
        r.hamiltonian.dim, r.hamiltonian.free_energies,
        r.hamiltonian.interaction, *cfg.hbar);
  }

  if (!cfg.initial.is_null()) {
    r.initial = initial_from_json(cfg.initial);
  }
  validate_initial(r.initial, r.hamiltonian.dim);

  double rate = 0.0;
  if (cfg.rate == "auto") {
    rate = auto_rate(r.hamiltonian);
  } else {
    try {
      std::size_t pos = 0;
      rate = std::stod(cfg.rate, &pos);
      if (pos != cfg.rate.size()) throw std::invalid_argument(cfg.rate);
    } catch (const std::exception&) {
      throw ConfigError("rate must be 'auto' or a number, got '" + cfg.rate +
                        "'");
    }
  }
  r.jump = make_jump_config(rate, r.hamiltonian.hbar, cfg.sample_times);

  if (cfg.engine == "two-process") {
    r.engine = Engine::TwoProcess;
  } else if (cfg.engine == "triplet") {
    r.engine = Engine::Triplet;
  } else {
    throw ConfigError("engine must be 'two-process' or 'triplet'");
  }
  return r;
}

namespace detail {

// Everything that identifies the run; embedded in every output file.
inline json config_echo(const RunConfig& cfg, const ResolvedRun& r) {
  json j;
  j["model"] = r.model_echo;
  j["initial"] = initial_to_json(r.initial);
  j["engine"] = engine_name(r.engine);
  j["rate_requested"] = cfg.rate;
  j["rate"] = r.jump.rate;
  j["hbar"] = r.hamiltonian.hbar;
  j["sample_times"] = r.jump.sample_times;
  j["trajectories"] = cfg.trajectories;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  return j;
}

inline int write_text(const std::string& path, const std::string& content,
                      std::ostream& fallback, std::ostream& err) {
  if (path.empty()) {
    fallback << content;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    err << "error: cannot write " << path << "\n";
    return 2;
  }
  out << content;
  return 0;
}

}  // namespace detail

// `run`: simulate, estimate, write JSON or CSV.
inline int cmd_run(RunConfig cfg, std::ostream& out, std::ostream& err) {
  cfg.workers = std::max(1, cfg.workers);
  ResolvedRun r;
  try {
    r = resolve_run(cfg);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    EnsembleOptions opts{cfg.trajectories, cfg.seed, cfg.workers, r.engine,
                         !cfg.ensembles_out.empty()};
    const EnsembleResult res = run_ensemble(r.hamiltonian, r.initial, r.jump,
                                            opts);

    std::vector<EstimateSlice> slices;
    slices.reserve(r.jump.sample_times.size());
    for (std::size_t k = 0; k < r.jump.sample_times.size(); ++k) {
      slices.push_back(res.acc.finalize(k));
    }

    std::string payload;
    if (cfg.format == "json") {
      json doc;
      doc["version"] = kVersion;
      doc["command"] = "run";
      doc["config"] = detail::config_echo(cfg, r);
      doc["metadata"] = {{"basis_labels", r.basis_labels},
                         {"total_jumps", res.total_jumps},
                         {"audited_samples", res.audited_samples},
                         {"audit_violations", res.audit_violations}};
      doc["results"] = slices_to_json(r.jump.sample_times, slices);
      payload = doc.dump(2) + "\n";
    } else if (cfg.format == "csv") {
      std::ostringstream ss;
      ss << "# " << kVersion << " run config="
         << detail::config_echo(cfg, r).dump() << "\n";
      write_slices_csv(ss, r.jump.sample_times, slices);
      payload = ss.str();
    } else {
      err << "config error: format must be json or csv\n";
      return 1;
    }

    if (!cfg.ensembles_out.empty()) {
      json ens = json::array();
      for (const auto& e : res.ensembles) ens.push_back(ensemble_to_json(e));
      json doc;
      doc["version"] = kVersion;
      doc["config"] = detail::config_echo(cfg, r);
      doc["ensembles"] = std::move(ens);
      std::ofstream eo(cfg.ensembles_out, std::ios::binary);
      if (!eo) {
        err << "error: cannot write " << cfg.ensembles_out << "\n";
        return 2;
      }
      eo << doc.dump(2) << "\n";
    }

    return detail::write_text(cfg.out, payload, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

// `compare`: estimator vs exact propagator, one row per sample time; exits 0
// only when every error stays within threshold * combined SE.
inline int cmd_compare(RunConfig cfg, std::ostream& out,
                       std::ostream& err) {
  cfg.workers = std::max(1, cfg.workers);
  ResolvedRun r;
  try {
    r = resolve_run(cfg);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    EnsembleOptions opts{cfg.trajectories, cfg.seed, cfg.workers, r.engine,
                         false};
    const EnsembleResult res = run_ensemble(r.hamiltonian, r.initial, r.jump,
                                            opts);
    const ExactPropagator prop = build_propagator(r.hamiltonian);
    const ComplexMatrix rho0 = initial_density(r.initial, r.hamiltonian.dim);
    const std::vector<CompareRow> rows = compare_to_oracle(res.acc, prop, rho0);

    std::ostringstream ss;
    ss << "# " << kVersion << " compare config="
       << detail::config_echo(cfg, r).dump() << "\n";
    ss << std::setprecision(12);
    ss << "t,frobenius_error,combined_se,ratio\n";
    bool ok = true;
    for (const auto& row : rows) {
      ss << row.t << ',' << row.frobenius_error << ',' << row.combined_se
         << ',' << row.ratio() << '\n';
      if (!(row.ratio() <= cfg.threshold)) ok = false;
    }
    ss << (ok ? "PASS" : "FAIL") << ": max ratio vs threshold "
       << cfg.threshold << "\n";
    const int rc = detail::write_text(cfg.out, ss.str(), out, err);
    if (rc != 0) return rc;
    return ok ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

// `enumerate-t0`: deterministic enumeration of every initial outcome; the
// probability-weighted dyad sum must reproduce rho_0 to 1e-14.
inline int cmd_enumerate_t0(RunConfig cfg, std::ostream& out,
                            std::ostream& err) {
  cfg.workers = std::max(1, cfg.workers);
  ResolvedRun r;
  try {
    r = resolve_run(cfg);
    if (r.hamiltonian.dim > 6) {
      throw ConfigError("enumerate-t0 is limited to dim <= 6");
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    const int dim = r.hamiltonian.dim;
    const auto outcomes = enumerate_initial_outcomes(r.initial, dim);
    ComplexMatrix expectation = ComplexMatrix::Zero(dim, dim);
    for (const auto& o : outcomes) {
      expectation += o.probability *
                     dyad_to_matrix(DyadSample{o.phi, o.psi, 0.0, 0}, dim);
    }
    const ComplexMatrix rho0 = initial_density(r.initial, dim);
    const double residual = (expectation - rho0).norm();

    std::ostringstream ss;
    ss << "# " << kVersion << " enumerate-t0 config="
       << detail::config_echo(cfg, r).dump() << "\n";
    ss << std::setprecision(17);
    ss << "outcomes: " << outcomes.size() << "\n";
    ss << "E[dyad]:\n" << expectation << "\n";
    ss << "rho_0:\n" << rho0 << "\n";
    ss << "residual: " << residual << "\n";
    ss << (residual <= 1e-14 ? "PASS" : "FAIL") << "\n";
    const int rc = detail::write_text(cfg.out, ss.str(), out, err);
    if (rc != 0) return rc;
    return residual <= 1e-14 ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

// `scan`: convergence table (Markdown) with the fitted log-log slope.
inline int cmd_scan(RunConfig cfg, std::ostream& out,
                    std::ostream& err) {
  cfg.workers = std::max(1, cfg.workers);
  ResolvedRun r;
  try {
    r = resolve_run(cfg);
    if (cfg.scan_trajectories.empty()) {
      throw ConfigError("scan needs a nonempty trajectory list");
    }
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  }
  try {
    const std::vector<ScanRow> rows =
        convergence_scan(r.hamiltonian, r.initial, r.jump,
                         cfg.scan_trajectories, cfg.seed, cfg.workers,
                         r.engine);
    std::ostringstream ss;
    ss << "# " << kVersion << " scan config="
       << detail::config_echo(cfg, r).dump() << "\n\n";
    ss << "| trajectories | frobenius_error |\n";
    ss << "|---:|---:|\n";
    ss << std::setprecision(6);
    for (const auto& row : rows) {
      ss << "| " << row.trajectories << " | " << row.error << " |\n";
    }
    if (rows.size() >= 2) {
      ss << "\nlog-log slope: " << loglog_slope(rows) << "\n";
    }
    return detail::write_text(cfg.out, ss.str(), out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace unravel
