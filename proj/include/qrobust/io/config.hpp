#pragma once

// Experiment configuration (YAML). Every section is optional; omitted keys take
// the reference-experiment defaults. Matrices are lists of rows, each entry a
// real number or a [re, im] pair.
//
//   seed: 1
//   jobs: 1
//   output: out
//   system:
//     builder: heisenberg-chain-3     # or give drift + interactions
//     steps: 32
//     final_time: 15
//   target:
//     gate: haar                      # identity, x, y, z, h, cnot, toffoli, matrix
//   synthesis:
//     restarts: 200
//     controllers: 100
//     ...
//   analysis:
//     basis: principal
//     epsilon: 0.01
//     ...

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qrobust/errors.hpp"
#include "qrobust/io/csv.hpp"
#include "qrobust/linalg.hpp"

namespace qrobust::io {

struct SystemSpec {
  /// Named builder; empty means explicit matrices.
  std::string builder = "heisenberg-chain-3";
  std::optional<ComplexMatrix> drift;
  std::vector<ComplexMatrix> interactions;
  int steps = 32;
  double final_time = 15.0;

  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

struct TargetSpec {
  /// "haar" draws from the master seed; "matrix" uses the explicit matrix.
  std::string gate = "haar";
  std::optional<ComplexMatrix> matrix;

  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

struct SynthesisSpec {
  int restarts = 200;
  /// Stop after this many controllers below accept_error.
  int controllers = 100;
  double accept_error = 0.01;
  int max_iterations = 3000;
  double gradient_tolerance = 1e-9;
  double target_error = 1e-8;
  double initial_scale = 1.0;
  std::optional<double> amplitude_bound;
  int batch = 8;

  friend bool operator==(const SynthesisSpec&, const SynthesisSpec&) = default;
};

struct BasisElementSpec {
  std::string label;
  /// "drift" or "control"
  std::string term = "drift";
  int control = 0;
  ComplexMatrix matrix;

  friend bool operator==(const BasisElementSpec&, const BasisElementSpec&) = default;
};

struct AnalysisSpec {
  /// "principal" or "custom" (uses elements).
  std::string basis = "principal";
  std::vector<BasisElementSpec> elements;
  double epsilon = 0.01;
  double sweep_min = -0.2;
  double sweep_max = 0.2;
  int sweep_points = 201;
  double alg1_step = 1e-4;
  long alg1_max_iterations = 1'000'000;

  friend bool operator==(const AnalysisSpec&, const AnalysisSpec&) = default;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string output = "out";
  SystemSpec system;
  TargetSpec target;
  SynthesisSpec synthesis;
  AnalysisSpec analysis;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string where(const YAML::Mark& mark, const std::string& source) {
  if (mark.is_null()) return source;
  return source + ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& why) const {
    throw ConfigError(where(node.Mark(), source_) + ": " + why);
  }

  void require_map(const YAML::Node& node, const std::string& what,
                   std::initializer_list<const char*> allowed) const {
    if (!node.IsMap()) fail(node, what + " must be a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) fail(kv.first, "unknown key '" + key + "' in " + what);
    }
  }

  template <typename T>
  void get(const YAML::Node& map, const char* key, T& out) const {
    const auto node = map[key];
    if (!node) return;
    if (!node.IsScalar()) fail(node, std::string("'") + key + "' must be a scalar");
    try {
      out = node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, std::string("invalid value '") + node.Scalar() + "' for '" + key + "'");
    }
  }

  void get(const YAML::Node& map, const char* key, double& out) const {
    const auto node = map[key];
    if (!node) return;
    out = real(node, key);
  }

  double real(const YAML::Node& node, const std::string& what) const {
    double v = 0.0;
    if (!node.IsScalar() || !parse_double(node.Scalar(), v)) {
      fail(node, "'" + what + "' must be a number");
    }
    return v;
  }

  Complex entry(const YAML::Node& node) const {
    if (node.IsScalar()) return {real(node, "matrix entry"), 0.0};
    if (node.IsSequence() && node.size() == 2) {
      return {real(node[0], "matrix entry (re)"), real(node[1], "matrix entry (im)")};
    }
    fail(node, "matrix entry must be a number or a [re, im] pair");
  }

  ComplexMatrix matrix(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence() || node.size() == 0) fail(node, what + " must be a non-empty list of rows");
    const auto rows = static_cast<Eigen::Index>(node.size());
    const auto& first = node[0];
    if (!first.IsSequence()) fail(first, what + ": each row must be a list");
    const auto cols = static_cast<Eigen::Index>(first.size());
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto row = node[static_cast<std::size_t>(i)];
      if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != cols) {
        fail(row, what + ": row " + std::to_string(i + 1) + " has the wrong length");
      }
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = entry(row[static_cast<std::size_t>(j)]);
    }
    return m;
  }

 private:
  std::string source_;
};

inline YAML::Node emit_real(double v) {
  YAML::Node n;
  n = format_shortest(v);
  return n;
}

inline YAML::Node emit_matrix(const ComplexMatrix& m) {
  YAML::Node rows(YAML::NodeType::Sequence);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    YAML::Node row(YAML::NodeType::Sequence);
    row.SetStyle(YAML::EmitterStyle::Flow);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j).imag() == 0.0) {
        row.push_back(emit_real(m(i, j).real()));
      } else {
        YAML::Node pair(YAML::NodeType::Sequence);
        pair.SetStyle(YAML::EmitterStyle::Flow);
        pair.push_back(emit_real(m(i, j).real()));
        pair.push_back(emit_real(m(i, j).imag()));
        row.push_back(pair);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(detail::where(e.mark, source) + ": " + e.msg);
  }
  ExperimentConfig cfg;
  if (root.IsNull()) return cfg;
  const detail::Reader rd(source);
  rd.require_map(root, "config", {"seed", "jobs", "output", "system", "target", "synthesis", "analysis"});
  rd.get(root, "seed", cfg.seed);
  rd.get(root, "jobs", cfg.jobs);
  rd.get(root, "output", cfg.output);
  if (cfg.jobs < 1) rd.fail(root["jobs"], "jobs must be >= 1");

  if (const auto s = root["system"]) {
    rd.require_map(s, "system", {"builder", "drift", "interactions", "steps", "final_time"});
    rd.get(s, "builder", cfg.system.builder);
    if (s["drift"] || s["interactions"]) {
      if (s["builder"]) rd.fail(s, "give either a builder or explicit matrices, not both");
      cfg.system.builder.clear();
      if (!s["drift"]) rd.fail(s, "explicit system requires 'drift'");
      cfg.system.drift = rd.matrix(s["drift"], "drift");
      if (const auto list = s["interactions"]) {
        if (!list.IsSequence()) rd.fail(list, "'interactions' must be a list of matrices");
        for (std::size_t i = 0; i < list.size(); ++i) {
          cfg.system.interactions.push_back(rd.matrix(list[i], "interaction " + std::to_string(i + 1)));
        }
      }
      if (cfg.system.interactions.empty()) rd.fail(s, "explicit system requires at least one interaction");
    } else if (cfg.system.builder != "heisenberg-chain-3") {
      rd.fail(s["builder"], "unknown system builder '" + cfg.system.builder + "'");
    }
    rd.get(s, "steps", cfg.system.steps);
    rd.get(s, "final_time", cfg.system.final_time);
    if (cfg.system.steps < 1) rd.fail(s["steps"], "steps must be >= 1");
    if (!(cfg.system.final_time > 0.0)) rd.fail(s["final_time"], "final_time must be positive");
  }

  if (const auto t = root["target"]) {
    rd.require_map(t, "target", {"gate", "matrix"});
    rd.get(t, "gate", cfg.target.gate);
    static const std::set<std::string> gates{"haar", "identity", "x", "y", "z", "h", "cnot", "toffoli", "matrix"};
    if (!gates.count(cfg.target.gate)) rd.fail(t["gate"], "unknown target gate '" + cfg.target.gate + "'");
    if (cfg.target.gate == "matrix") {
      if (!t["matrix"]) rd.fail(t, "gate 'matrix' requires a 'matrix' entry");
      cfg.target.matrix = rd.matrix(t["matrix"], "target matrix");
    } else if (t["matrix"]) {
      rd.fail(t["matrix"], "'matrix' is only allowed with gate: matrix");
    }
  }

  if (const auto y = root["synthesis"]) {
    rd.require_map(y, "synthesis", {"restarts", "controllers", "accept_error", "max_iterations",
                                    "gradient_tolerance", "target_error", "initial_scale",
                                    "amplitude_bound", "batch"});
    auto& sy = cfg.synthesis;
    rd.get(y, "restarts", sy.restarts);
    rd.get(y, "controllers", sy.controllers);
    rd.get(y, "accept_error", sy.accept_error);
    rd.get(y, "max_iterations", sy.max_iterations);
    rd.get(y, "gradient_tolerance", sy.gradient_tolerance);
    rd.get(y, "target_error", sy.target_error);
    rd.get(y, "initial_scale", sy.initial_scale);
    rd.get(y, "batch", sy.batch);
    if (y["amplitude_bound"]) {
      double b = 0.0;
      rd.get(y, "amplitude_bound", b);
      if (!(b > 0.0)) rd.fail(y["amplitude_bound"], "amplitude_bound must be positive");
      sy.amplitude_bound = b;
    }
    if (sy.restarts < 1 || sy.controllers < 1 || sy.max_iterations < 1 || sy.batch < 1) {
      rd.fail(y, "synthesis counts must be >= 1");
    }
    if (!(sy.accept_error > 0.0) || !(sy.gradient_tolerance > 0.0) || !(sy.target_error > 0.0) ||
        !(sy.initial_scale > 0.0)) {
      rd.fail(y, "synthesis tolerances and scale must be positive");
    }
  }

  if (const auto a = root["analysis"]) {
    rd.require_map(a, "analysis", {"basis", "epsilon", "sweep", "alg1_step", "alg1_max_iterations"});
    auto& an = cfg.analysis;
    if (const auto b = a["basis"]) {
      if (b.IsScalar()) {
        an.basis = b.as<std::string>();
        if (an.basis != "principal") rd.fail(b, "basis must be 'principal' or a list of elements");
      } else if (b.IsSequence()) {
        an.basis = "custom";
        for (std::size_t i = 0; i < b.size(); ++i) {
          const auto e = b[i];
          rd.require_map(e, "basis element", {"label", "term", "control", "matrix"});
          BasisElementSpec el;
          el.label = "B" + std::to_string(i);
          rd.get(e, "label", el.label);
          rd.get(e, "term", el.term);
          rd.get(e, "control", el.control);
          if (el.term != "drift" && el.term != "control") rd.fail(e["term"], "term must be 'drift' or 'control'");
          if (el.term == "control" && el.control < 0) rd.fail(e["control"], "control index must be >= 0");
          if (!e["matrix"]) rd.fail(e, "basis element requires 'matrix'");
          el.matrix = rd.matrix(e["matrix"], "basis matrix");
          an.elements.push_back(std::move(el));
        }
        if (an.elements.empty()) rd.fail(b, "custom basis must not be empty");
      } else {
        rd.fail(b, "basis must be 'principal' or a list of elements");
      }
    }
    rd.get(a, "epsilon", an.epsilon);
    if (!(an.epsilon > 0.0 && an.epsilon <= 1.0)) rd.fail(a["epsilon"], "epsilon must lie in (0, 1]");
    if (const auto sw = a["sweep"]) {
      rd.require_map(sw, "sweep", {"min", "max", "points"});
      rd.get(sw, "min", an.sweep_min);
      rd.get(sw, "max", an.sweep_max);
      rd.get(sw, "points", an.sweep_points);
      if (!(an.sweep_min < an.sweep_max)) rd.fail(sw, "sweep requires min < max");
      if (an.sweep_points < 2) rd.fail(sw, "sweep requires at least two points");
    }
    rd.get(a, "alg1_step", an.alg1_step);
    rd.get(a, "alg1_max_iterations", an.alg1_max_iterations);
    if (!(an.alg1_step > 0.0)) rd.fail(a["alg1_step"], "alg1_step must be positive");
    if (an.alg1_max_iterations < 1) rd.fail(a["alg1_max_iterations"], "alg1_max_iterations must be >= 1");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  using detail::emit_matrix;
  using detail::emit_real;
  YAML::Node root(YAML::NodeType::Map);
  root["seed"] = cfg.seed;
  root["jobs"] = cfg.jobs;
  root["output"] = cfg.output;

  YAML::Node sys(YAML::NodeType::Map);
  if (!cfg.system.builder.empty()) {
    sys["builder"] = cfg.system.builder;
  } else {
    if (cfg.system.drift) sys["drift"] = emit_matrix(*cfg.system.drift);
    YAML::Node list(YAML::NodeType::Sequence);
    for (const auto& m : cfg.system.interactions) list.push_back(emit_matrix(m));
    sys["interactions"] = list;
  }
  sys["steps"] = cfg.system.steps;
  sys["final_time"] = emit_real(cfg.system.final_time);
  root["system"] = sys;

  YAML::Node tgt(YAML::NodeType::Map);
  tgt["gate"] = cfg.target.gate;
  if (cfg.target.matrix) tgt["matrix"] = emit_matrix(*cfg.target.matrix);
  root["target"] = tgt;

  const auto& sy = cfg.synthesis;
  YAML::Node syn(YAML::NodeType::Map);
  syn["restarts"] = sy.restarts;
  syn["controllers"] = sy.controllers;
  syn["accept_error"] = emit_real(sy.accept_error);
  syn["max_iterations"] = sy.max_iterations;
  syn["gradient_tolerance"] = emit_real(sy.gradient_tolerance);
  syn["target_error"] = emit_real(sy.target_error);
  syn["initial_scale"] = emit_real(sy.initial_scale);
  if (sy.amplitude_bound) syn["amplitude_bound"] = emit_real(*sy.amplitude_bound);
  syn["batch"] = sy.batch;
  root["synthesis"] = syn;

  const auto& an = cfg.analysis;
  YAML::Node ana(YAML::NodeType::Map);
  if (an.basis == "principal") {
    ana["basis"] = "principal";
  } else {
    YAML::Node list(YAML::NodeType::Sequence);
    for (const auto& e : an.elements) {
      YAML::Node n(YAML::NodeType::Map);
      n["label"] = e.label;
      n["term"] = e.term;
      if (e.term == "control") n["control"] = e.control;
      n["matrix"] = emit_matrix(e.matrix);
      list.push_back(n);
    }
    ana["basis"] = list;
  }
  ana["epsilon"] = emit_real(an.epsilon);
  YAML::Node sw(YAML::NodeType::Map);
  sw["min"] = emit_real(an.sweep_min);
  sw["max"] = emit_real(an.sweep_max);
  sw["points"] = an.sweep_points;
  ana["sweep"] = sw;
  ana["alg1_step"] = emit_real(an.alg1_step);
  ana["alg1_max_iterations"] = an.alg1_max_iterations;
  root["analysis"] = ana;

  YAML::Emitter out;
  out << root;
  return std::string(out.c_str()) + "\n";
}

}  // namespace qrobust::io
