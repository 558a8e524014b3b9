#pragma once

// Glue between a parsed ExperimentConfig and the library: system/target/basis
// resolution, controller persistence, and the CSV/SVG artifacts the command
// line tool writes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qrobust/certification.hpp"
#include "qrobust/io/config.hpp"
#include "qrobust/io/controller_file.hpp"
#include "qrobust/io/csv.hpp"
#include "qrobust/io/svg.hpp"
#include "qrobust/random.hpp"
#include "qrobust/sensitivity.hpp"
#include "qrobust/spin.hpp"
#include "qrobust/synthesis.hpp"

namespace qrobust::io {

/// Stream of the master seed reserved for the Haar target; restart streams
/// use small indices and never reach it.
inline constexpr std::uint64_t kTargetStream = 0xffffffffffffffffULL;

struct Experiment {
  ExperimentConfig config;
  ControlSystem system;
  ComplexMatrix target;
  StructureBasis basis;
  std::uint64_t hash = 0;
};

inline Experiment resolve(const ExperimentConfig& cfg) {
  try {
    const auto& s = cfg.system;
    const double dt = s.final_time / s.steps;
    ControlSystem sys = [&] {
      if (s.builder == "heisenberg-chain-3") return build_case_study(s.steps, s.final_time).system;
      return ControlSystem(*s.drift, s.interactions, s.steps, dt);
    }();

    ComplexMatrix target;
    if (cfg.target.gate == "haar") {
      target = haar_random_unitary(sys.dimension(), derive_seed(cfg.seed, kTargetStream));
    } else if (cfg.target.gate == "matrix") {
      target = *cfg.target.matrix;
      require_same_shape(sys.drift(), target, "target gate");
      if (!is_unitary(target)) throw StructureError("target matrix is not unitary");
    } else {
      target = spin::named_gate(cfg.target.gate, sys.dimension());
    }

    StructureBasis basis;
    if (cfg.analysis.basis == "principal") {
      basis = StructureBasis::principal(sys);
    } else {
      std::vector<UncertaintyStructure> el;
      for (const auto& e : cfg.analysis.elements) {
        const auto kind = e.term == "drift" ? StructureKind::drift() : StructureKind::control_term(e.control);
        if (!kind.is_drift() && kind.control >= sys.num_controls()) {
          throw IndexError("basis element '" + e.label + "' refers to a missing control");
        }
        el.push_back(normalize_structure(e.matrix, kind, e.label));
      }
      basis = StructureBasis(std::move(el));
      require_same_shape(sys.drift(), basis[0].matrix(), "basis element");
    }
    const auto hash = system_hash(sys, target);
    return {cfg, std::move(sys), std::move(target), std::move(basis), hash};
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid experiment: ") + e.what());
  }
}

inline SynthesisConfig synthesis_config(const ExperimentConfig& cfg) {
  SynthesisConfig s;
  const auto& y = cfg.synthesis;
  s.restarts = y.restarts;
  s.max_iterations = y.max_iterations;
  s.gradient_tolerance = y.gradient_tolerance;
  s.target_error = y.target_error;
  s.initial_scale = y.initial_scale;
  s.seed = cfg.seed;
  s.amplitude_bound = y.amplitude_bound;
  s.jobs = cfg.jobs;
  s.wanted = y.controllers;
  s.accept_error = y.accept_error;
  s.batch = y.batch;
  return s;
}

inline Algorithm1Options alg1_options(const ExperimentConfig& cfg) {
  Algorithm1Options o;
  o.step = cfg.analysis.alg1_step;
  o.max_iterations = cfg.analysis.alg1_max_iterations;
  return o;
}

struct StoredController {
  std::string file;
  ControllerFile data;
};

inline ControllerFile to_file(const Experiment& ex, const Controller& c) {
  ControllerFile f;
  f.system_hash = ex.hash;
  f.seed = ex.config.seed;
  f.restart = c.restart;
  f.restart_seed = c.seed;
  f.nominal_error = c.nominal_error;
  f.iterations = c.iterations;
  f.status = std::string(to_string(c.status));
  f.pulse = c.pulse;
  return f;
}

inline CsvTable manifest_table(const std::vector<StoredController>& cs) {
  CsvTable t({"controller", "file", "restart", "restart_seed", "seed", "nominal_error", "iterations",
              "status", "system_hash"});
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto& d = cs[i].data;
    t.add_row({std::to_string(i), cs[i].file, std::to_string(d.restart), std::to_string(d.restart_seed),
               std::to_string(d.seed), format_double(d.nominal_error), std::to_string(d.iterations),
               d.status, hex64(d.system_hash)});
  }
  return t;
}

/// Writes one file per accepted controller (error below accept_error, in
/// sorted order) and manifest.csv; returns what was written.
inline std::vector<StoredController> write_controllers(const Experiment& ex,
                                                       const std::vector<Controller>& all,
                                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "controllers");
  std::vector<StoredController> out;
  for (const auto& c : all) {
    if (!(c.nominal_error < ex.config.synthesis.accept_error)) continue;
    if (static_cast<int>(out.size()) >= ex.config.synthesis.controllers) break;
    char name[48];
    std::snprintf(name, sizeof name, "controllers/controller_%03zu.txt", out.size());
    StoredController s{name, to_file(ex, c)};
    write_controller((dir / name).string(), s.data);
    out.push_back(std::move(s));
  }
  manifest_table(out).write((dir / "manifest.csv").string());
  return out;
}

inline std::vector<StoredController> load_controllers(const Experiment& ex, const std::filesystem::path& dir) {
  const auto manifest = CsvTable::read((dir / "manifest.csv").string());
  std::vector<StoredController> out;
  for (std::size_t r = 0; r < manifest.size(); ++r) {
    const auto& file = manifest.cell(r, "file");
    const auto path = (dir / file).string();
    auto data = read_controller(path);
    if (data.system_hash != ex.hash) {
      throw DataError(path + ": controller was produced for a different system or target (hash " +
                      hex64(data.system_hash) + ", expected " + hex64(ex.hash) + ")");
    }
    if (!data.pulse.conforms_to(ex.system)) throw DataError(path + ": amplitude table shape does not match system");
    out.push_back({file, std::move(data)});
  }
  return out;
}

// ---- sensitivity.csv / worst_sequence.csv ----

inline CsvTable sensitivity_table(const std::vector<std::string>& labels,
                                  const std::vector<SensitivityReport>& reports) {
  std::vector<std::string> h{"controller", "nominal_error"};
  for (const auto& l : labels) {
    h.push_back("zeta_" + l);
    h.push_back("abs_zeta_" + l);
    h.push_back("b1_" + l);
  }
  h.insert(h.end(), {"b2", "b3"});
  for (const auto& l : labels) h.push_back("worst_static_" + l);
  h.push_back("abs_zeta_" + labels.front() + "_over_b2");
  h.push_back("degenerate_steps");
  CsvTable t(h);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::vector<std::string> row{std::to_string(i), format_double(r.nominal.error)};
    for (std::size_t m = 0; m < labels.size(); ++m) {
      const auto mi = static_cast<Eigen::Index>(m);
      row.push_back(format_double(r.zeta(mi)));
      row.push_back(format_double(std::abs(r.zeta(mi))));
      row.push_back(format_double(r.b1(mi)));
    }
    row.push_back(format_double(r.b2()));
    row.push_back(format_double(r.b3()));
    for (std::size_t m = 0; m < labels.size(); ++m) {
      row.push_back(r.worst_static.flat ? "nan" : format_double(r.worst_static.direction(static_cast<Eigen::Index>(m))));
    }
    row.push_back(r.b2() > 0.0 ? format_double(std::abs(r.zeta(0)) / r.b2()) : "nan");
    row.push_back(std::to_string(r.worst_sequence.degenerate_rows.size()));
    t.add_row(std::move(row));
  }
  return t;
}

inline CsvTable worst_sequence_table(const std::vector<std::string>& labels,
                                     const std::vector<SensitivityReport>& reports) {
  std::vector<std::string> h{"controller", "step", "row_norm"};
  for (const auto& l : labels) h.push_back("s_" + l);
  h.push_back("degenerate");
  CsvTable t(h);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& w = reports[i].worst_sequence;
    for (std::size_t k = 0; k < w.sequence.size(); ++k) {
      std::vector<std::string> row{std::to_string(i), std::to_string(k),
                                   format_double(w.row_norms(static_cast<Eigen::Index>(k)))};
      for (Eigen::Index m = 0; m < w.sequence[k].size(); ++m) row.push_back(format_double(w.sequence[k](m)));
      const bool degenerate = std::find(w.degenerate_rows.begin(), w.degenerate_rows.end(),
                                        static_cast<int>(k)) != w.degenerate_rows.end();
      row.push_back(degenerate ? "1" : "0");
      t.add_row(std::move(row));
    }
  }
  return t;
}

// ---- certificates.csv / alg1_trace.csv ----

struct CertificateRow {
  double nominal_error = 0.0;
  /// Empty when the controller was skipped (e(0) >= epsilon).
  std::optional<PerformanceCertificate> certificate;
};

inline CsvTable certificate_table(const std::vector<std::string>& labels, double epsilon,
                                  const std::vector<CertificateRow>& rows) {
  std::vector<std::string> h{"controller", "status", "nominal_error", "epsilon"};
  for (const auto& l : labels) {
    for (const char* f : {"thm3_b1_", "thm3_delta_", "thm3_err_plus_", "thm3_err_minus_"}) h.push_back(f + l);
  }
  h.insert(h.end(), {"alg1_step", "alg1_delta_bar", "alg1_iterations", "alg1_err_at_delta_bar",
                     "alg1_err_next", "alg1_exceeded_cap"});
  for (const auto& l : labels) {
    h.push_back("alg1_err_plus_" + l);
    h.push_back("alg1_err_minus_" + l);
  }
  h.push_back("ratio_alg1_thm3_" + labels.front());
  CsvTable t(h);
  const std::string nan = "nan";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::vector<std::string> row{std::to_string(i), r.certificate ? "ok" : "skipped",
                                 format_double(r.nominal_error), format_double(epsilon)};
    if (!r.certificate) {
      row.resize(h.size(), nan);
      t.add_row(std::move(row));
      continue;
    }
    const auto& c = *r.certificate;
    for (const auto& m : c.theorem3) {
      row.push_back(format_double(m.b1));
      row.push_back(m.margin.unbounded ? "inf" : format_double(m.margin.delta_bar));
      row.push_back(format_double(m.error_plus));
      row.push_back(format_double(m.error_minus));
    }
    const auto& a = c.algorithm1;
    row.push_back(format_double(a.step));
    row.push_back(format_double(a.delta_bar));
    row.push_back(std::to_string(a.safe_iterations));
    row.push_back(format_double(a.error_at_delta_bar()));
    row.push_back(format_double(a.error_past_delta_bar()));
    row.push_back(a.exceeded_cap ? "1" : "0");
    for (std::size_t m = 0; m < labels.size(); ++m) {
      row.push_back(format_double(c.principal_error_plus[m]));
      row.push_back(format_double(c.principal_error_minus[m]));
    }
    const double d3 = c.theorem3.front().margin.delta_bar;
    row.push_back(d3 > 0.0 && std::isfinite(d3) ? format_double(a.delta_bar / d3) : nan);
    t.add_row(std::move(row));
  }
  return t;
}

inline CsvTable trace_table(const std::vector<CertificateRow>& rows) {
  CsvTable t({"controller", "n", "delta", "error"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].certificate) continue;
    const auto& tr = rows[i].certificate->algorithm1.trace;
    for (std::size_t n = 0; n < tr.size(); ++n) {
      t.add_row({std::to_string(i), std::to_string(n + 1), format_double(tr[n].delta), format_double(tr[n].error)});
    }
  }
  return t;
}

// ---- sweep.csv ----

struct SweepRow {
  std::size_t controller = 0;
  double b1 = 0.0;
  SweepTrace trace;
};

inline CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t({"controller", "structure", "delta", "error", "zeta", "b1", "phase_defined"});
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.trace.delta.size(); ++j) {
      t.add_row({std::to_string(r.controller), r.trace.label, format_double(r.trace.delta[j]),
                 format_double(r.trace.error[j]), format_double(r.trace.zeta[j]), format_double(r.b1),
                 r.trace.phase_defined[j] ? "1" : "0"});
    }
  }
  return t;
}

// ---- figures (pure renderings of the CSVs) ----

inline const std::vector<std::string>& palette() {
  static const std::vector<std::string> p{"#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
  return p;
}

/// Labels recovered from "<prefix><label>" column names.
inline std::vector<std::string> labels_from(const CsvTable& t, const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& h : t.header()) {
    if (h.rfind(prefix, 0) == 0 && h.find("_over_") == std::string::npos) out.push_back(h.substr(prefix.size()));
  }
  if (out.empty()) throw DataError("missing CSV columns '" + prefix + "*'");
  return out;
}

inline std::vector<double> index_column(const CsvTable& t) { return t.numbers("controller"); }

inline SemilogPlot sensitivity_figure(const CsvTable& t) {
  SemilogPlot p;
  p.title = "Sensitivity and bounds at delta = 0";
  p.x_label = "controller index";
  p.y_label = "|zeta|, B2, B3";
  const auto x = index_column(t);
  const auto labels = labels_from(t, "abs_zeta_");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    p.series.push_back({"|zeta " + labels[i] + "|", x, t.numbers("abs_zeta_" + labels[i]),
                        palette()[i % palette().size()], "circle"});
  }
  p.series.push_back({"B2", x, t.numbers("b2"), "#d62728", "square"});
  p.series.push_back({"B3", x, t.numbers("b3"), "#000000", "cross"});
  return p;
}

inline double column_max(const CsvTable& t, std::size_t r, const std::string& a, const std::string& b) {
  return std::max(t.number(r, a), t.number(r, b));
}

inline SemilogPlot theorem3_figure(const CsvTable& t) {
  SemilogPlot p;
  p.title = "Perturbed error at the Lipschitz margin";
  p.x_label = "controller index";
  p.y_label = "error";
  const auto labels = labels_from(t, "thm3_delta_");
  const auto& first = labels.front();
  PlotSeries nominal{"e(0)", {}, {}, "#7f7f7f", "cross"};
  PlotSeries perturbed{"e~" + first + "(delta_bar)", {}, {}, palette()[0], "circle"};
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (t.cell(r, "status") != "ok") continue;
    const double x = t.number(r, "controller");
    nominal.x.push_back(x);
    nominal.y.push_back(t.number(r, "nominal_error"));
    perturbed.x.push_back(x);
    perturbed.y.push_back(column_max(t, r, "thm3_err_plus_" + first, "thm3_err_minus_" + first));
  }
  p.series = {nominal, perturbed};
  if (!t.empty()) p.lines.push_back({"epsilon", t.number(0, "epsilon")});
  return p;
}

inline SemilogPlot algorithm1_figure(const CsvTable& t) {
  SemilogPlot p;
  p.title = "Perturbed error at the iterative worst-case margin";
  p.x_label = "controller index";
  p.y_label = "error";
  const auto labels = labels_from(t, "alg1_err_plus_");
  std::vector<PlotSeries> per(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    per[i] = {"e~" + labels[i] + "(delta_bar)", {}, {}, palette()[i % palette().size()], "circle"};
  }
  PlotSeries emax{"e~max", {}, {}, "#000000", "cross"};
  for (std::size_t r = 0; r < t.size(); ++r) {
    if (t.cell(r, "status") != "ok") continue;
    const double x = t.number(r, "controller");
    for (std::size_t i = 0; i < labels.size(); ++i) {
      per[i].x.push_back(x);
      per[i].y.push_back(column_max(t, r, "alg1_err_plus_" + labels[i], "alg1_err_minus_" + labels[i]));
    }
    emax.x.push_back(x);
    emax.y.push_back(t.number(r, "alg1_err_at_delta_bar"));
  }
  p.series = per;
  p.series.push_back(emax);
  if (!t.empty()) p.lines.push_back({"epsilon", t.number(0, "epsilon")});
  return p;
}

}  // namespace qrobust::io
