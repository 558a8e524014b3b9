// qrobust command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 synthesis failure,
// 4 data error (corrupt or missing result files), 1 anything else.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "qrobust/io/experiment.hpp"
#include "qrobust/qrobust.hpp"

namespace fs = std::filesystem;
using namespace qrobust;
using namespace qrobust::io;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSynthesis = 3;
constexpr int kExitData = 4;

class SynthesisFailure : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> epsilon;
  std::optional<double> alg1_step;
  std::optional<std::string> out;
  std::optional<int> jobs;
  bool quiet = false;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "experiment config (YAML)");
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--epsilon", o.epsilon, "error threshold (default 0.01)");
  sub->add_option("--alg1-step", o.alg1_step, "iterative margin step d (default 1e-4)");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--jobs", o.jobs, "worker threads");
  sub->add_flag("-q,--quiet", o.quiet, "only print errors");
}

Experiment load(const Options& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.epsilon) {
    if (!(*o.epsilon > 0.0 && *o.epsilon <= 1.0)) throw ConfigError("--epsilon must lie in (0, 1]");
    cfg.analysis.epsilon = *o.epsilon;
  }
  if (o.alg1_step) {
    if (!(*o.alg1_step > 0.0)) throw ConfigError("--alg1-step must be positive");
    cfg.analysis.alg1_step = *o.alg1_step;
  }
  if (o.out) cfg.output = *o.out;
  if (o.jobs) {
    if (*o.jobs < 1) throw ConfigError("--jobs must be >= 1");
    cfg.jobs = *o.jobs;
  }
  return resolve(cfg);
}

struct Log {
  bool quiet = false;
  template <typename... A>
  void operator()(const char* fmt, A... a) const {
    if (quiet) return;
    std::fprintf(stderr, fmt, a...);
    std::fputc('\n', stderr);
  }
};

void write_config_copy(const Experiment& ex, const fs::path& dir) {
  std::ofstream f(dir / "config.yaml", std::ios::binary);
  if (!f) throw DataError("cannot write " + (dir / "config.yaml").string());
  f << serialize_config(ex.config);
}

std::vector<StoredController> cmd_synthesize(const Experiment& ex, const Log& log) {
  const fs::path dir = ex.config.output;
  fs::create_directories(dir);
  write_config_copy(ex, dir);
  const auto cfg = synthesis_config(ex.config);
  log("synthesizing: up to %d restarts, want %d controllers with e(0) < %g (seed %llu)", cfg.restarts,
      *cfg.wanted, cfg.accept_error, static_cast<unsigned long long>(ex.config.seed));
  const auto t0 = std::chrono::steady_clock::now();
  const auto all = synthesize(ex.system, ex.target, cfg);
  const auto stored = write_controllers(ex, all, dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log("ran %zu restarts in %.1f s; accepted %zu controllers (best e(0) = %.3g)", all.size(), secs,
      stored.size(), all.empty() ? 1.0 : all.front().nominal_error);
  if (stored.empty()) {
    throw SynthesisFailure("no controller reached e(0) < " + format_shortest(ex.config.synthesis.accept_error));
  }
  return stored;
}

void cmd_analyze(const Experiment& ex, const Log& log) {
  const fs::path dir = ex.config.output;
  const auto cs = load_controllers(ex, dir);
  const auto reports = parallel_map(cs.size(), ex.config.jobs, [&](std::size_t i) {
    return analyze(ex.system, cs[i].data.pulse, ex.target, ex.basis);
  });
  std::vector<std::string> labels;
  for (const auto& e : ex.basis.elements()) labels.push_back(e.label());
  sensitivity_table(labels, reports).write((dir / "sensitivity.csv").string());
  worst_sequence_table(labels, reports).write((dir / "worst_sequence.csv").string());
  int violations = 0;
  for (const auto& r : reports) {
    for (Eigen::Index m = 0; m < r.zeta.size(); ++m) violations += std::abs(r.zeta(m)) > r.b2() + 1e-10;
    violations += r.b2() > r.b3() + 1e-10;
  }
  log("analyzed %zu controllers; bound-chain violations: %d", reports.size(), violations);
}

void cmd_certify(const Experiment& ex, const Log& log) {
  const fs::path dir = ex.config.output;
  const auto cs = load_controllers(ex, dir);
  const double eps = ex.config.analysis.epsilon;
  const auto opts = alg1_options(ex.config);
  const auto rows = parallel_map(cs.size(), ex.config.jobs, [&](std::size_t i) {
    CertificateRow row;
    row.nominal_error = gate_fidelity(ex.target, propagate(ex.system, cs[i].data.pulse)).error;
    if (row.nominal_error < eps) row.certificate = certify(ex.system, cs[i].data.pulse, ex.target, ex.basis, eps, opts);
    return row;
  });
  std::vector<std::string> labels;
  for (const auto& e : ex.basis.elements()) labels.push_back(e.label());
  certificate_table(labels, eps, rows).write((dir / "certificates.csv").string());
  trace_table(rows).write((dir / "alg1_trace.csv").string());
  double log_sum = 0.0;
  int n = 0, skipped = 0;
  for (const auto& r : rows) {
    if (!r.certificate) {
      ++skipped;
      std::fprintf(stderr, "warning: controller with e(0) = %.3g >= epsilon skipped\n", r.nominal_error);
      continue;
    }
    const double d3 = r.certificate->theorem3.front().margin.delta_bar;
    if (d3 > 0.0 && std::isfinite(d3) && r.certificate->algorithm1.delta_bar > 0.0) {
      log_sum += std::log(r.certificate->algorithm1.delta_bar / d3);
      ++n;
    }
  }
  log("certified %zu controllers (%d skipped); geometric-mean margin ratio %.4g", rows.size() - skipped,
      skipped, n ? std::exp(log_sum / n) : std::nan(""));
}

void cmd_sweep(const Experiment& ex, const Log& log) {
  const fs::path dir = ex.config.output;
  const auto cs = load_controllers(ex, dir);
  const auto& an = ex.config.analysis;
  const auto nb = static_cast<std::size_t>(ex.basis.size());
  auto rows = parallel_map(cs.size() * nb, ex.config.jobs, [&](std::size_t j) {
    const auto i = j / nb;
    const auto& s = ex.basis[static_cast<int>(j % nb)];
    return SweepRow{i, bound_b1(ex.system, cs[i].data.pulse, s),
                    error_sweep(ex.system, cs[i].data.pulse, ex.target, s, an.sweep_min, an.sweep_max,
                                an.sweep_points, CouplingMethod::Spectral)};
  });
  sweep_table(rows).write((dir / "sweep.csv").string());
  log("swept %zu controllers over [%g, %g]", cs.size(), an.sweep_min, an.sweep_max);
}

void cmd_plot(const fs::path& dir, const Log& log) {
  const auto read = [&](const char* name) { return CsvTable::read((dir / name).string()); };
  sensitivity_figure(read("sensitivity.csv")).write((dir / "fig_sensitivity.svg").string());
  const auto certs = read("certificates.csv");
  theorem3_figure(certs).write((dir / "fig_theorem3.svg").string());
  algorithm1_figure(certs).write((dir / "fig_algorithm1.svg").string());
  log("wrote figures to %s", dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness analysis of quantum gate controllers under structured uncertainty"};
  app.require_subcommand(1);
  Options o;
  auto* syn = app.add_subcommand("synthesize", "optimize controllers and write controller files");
  auto* ana = app.add_subcommand("analyze", "sensitivity and bounds for stored controllers");
  auto* cer = app.add_subcommand("certify", "Lipschitz and iterative margins for stored controllers");
  auto* swp = app.add_subcommand("sweep", "perturbed error over a delta grid");
  auto* plt = app.add_subcommand("plot", "render SVG figures from the CSV results");
  auto* cas = app.add_subcommand("case-study", "run the full pipeline on the three-spin chain");
  for (auto* s : {syn, ana, cer, swp, plt, cas}) add_common(s, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const Log log{o.quiet};
  try {
    if (plt->parsed()) {
      // Pure rendering: only the output directory matters.
      fs::path dir = o.out ? *o.out : (o.config.empty() ? "out" : load_config(o.config).output);
      cmd_plot(dir, log);
      return 0;
    }
    const auto ex = load(o);
    if (syn->parsed()) cmd_synthesize(ex, log);
    if (ana->parsed()) cmd_analyze(ex, log);
    if (cer->parsed()) cmd_certify(ex, log);
    if (swp->parsed()) cmd_sweep(ex, log);
    if (cas->parsed()) {
      cmd_synthesize(ex, log);
      cmd_analyze(ex, log);
      cmd_certify(ex, log);
      cmd_sweep(ex, log);
      cmd_plot(ex.config.output, log);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const SynthesisFailure& e) {
    std::fprintf(stderr, "synthesis failed: %s\n", e.what());
    return kExitSynthesis;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
