#pragma once

// Performance guarantees under structured uncertainty: the Lipschitz margin
// (eps - e(0)) / B1, the iterative worst-case margin that follows the
// time-varying worst direction step by step, and delta sweeps.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qrobust/errors.hpp"
#include "qrobust/sensitivity.hpp"
#include "qrobust/system.hpp"
#include "qrobust/uncertainty.hpp"

namespace qrobust {

struct Theorem3Margin {
  /// Certified half-width: e~(delta) <= eps for all |delta| < delta_bar.
  double delta_bar = 0.0;
  /// e(0) >= eps; delta_bar is 0.
  bool already_violating = false;
  /// B1 = 0; delta_bar is +infinity.
  bool unbounded = false;
};

inline Theorem3Margin theorem3_margin(double nominal_error, double epsilon, double b1) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw PreconditionError("epsilon must lie in (0, 1]");
  if (!(b1 >= 0.0) || !std::isfinite(b1)) throw PreconditionError("B1 must be finite and non-negative");
  Theorem3Margin m;
  if (nominal_error >= epsilon) {
    m.already_violating = true;
    return m;
  }
  if (b1 == 0.0) {
    m.unbounded = true;
    m.delta_bar = std::numeric_limits<double>::infinity();
    return m;
  }
  m.delta_bar = (epsilon - nominal_error) / b1;
  return m;
}

struct Algorithm1Options {
  /// Quantization step d of the perturbation size.
  double step = 1e-4;
  long max_iterations = 1'000'000;
  /// Spectral and block routes agree to ~1e-12; spectral reuses the step
  /// eigendecompositions and is several times cheaper in this loop.
  CouplingMethod method = CouplingMethod::Spectral;
};

struct TracePoint {
  double delta = 0.0;
  double error = 0.0;
};

struct Algorithm1Result {
  double epsilon = 0.0;
  double nominal_error = 0.0;
  double step = 0.0;
  /// n-bar: the last iterate whose error stayed below eps.
  long safe_iterations = 0;
  double delta_bar = 0.0;
  /// (n d, e~(n d)) for n = 1, 2, ...; the final entry is the first with e~ >= eps.
  std::vector<TracePoint> trace;
  bool exceeded_cap = false;

  double error_at_delta_bar() const {
    return safe_iterations == 0 ? nominal_error
                                : trace[static_cast<std::size_t>(safe_iterations - 1)].error;
  }
  /// e~(delta_bar + d), the first violating iterate.
  double error_past_delta_bar() const { return trace.empty() ? nominal_error : trace.back().error; }
};

/// Grows the perturbation in steps of d, each step along the time-varying
/// worst direction recomputed on the accumulated perturbed Hamiltonians, and
/// stops at the first iterate whose error reaches eps.
inline Algorithm1Result algorithm1_margin(const ControlSystem& sys, const PulseSequence& pulse,
                                          const ComplexMatrix& target, const StructureBasis& basis,
                                          double epsilon, const Algorithm1Options& options = {}) {
  if (!(options.step > 0.0) || !std::isfinite(options.step)) {
    throw PreconditionError("iterative margin step must be positive");
  }
  if (options.max_iterations < 1) throw PreconditionError("iteration cap must be >= 1");
  basis.require_conforming(sys, pulse);

  auto hams = step_hamiltonians(sys, pulse);
  auto prop = propagate_hamiltonians(hams, sys.step_length());

  Algorithm1Result r;
  r.epsilon = epsilon;
  r.step = options.step;
  r.nominal_error = gate_fidelity(target, prop).error;
  if (!(r.nominal_error < epsilon)) {
    throw PreconditionError("nominal error must be below epsilon");
  }

  const auto advance = [&] {
    const auto worst =
        bound_b3_and_worst(build_z(prop, target, basis, pulse, options.method).z);
    const auto gens = step_directions(basis, worst.sequence, pulse);
    for (std::size_t k = 0; k < hams.size(); ++k) hams[k] += options.step * gens[k];
    prop = propagate_hamiltonians(hams, sys.step_length());
  };

  long n = 1;
  advance();
  double err = gate_fidelity(target, prop).error;
  r.trace.push_back({options.step, err});
  while (epsilon - err > 0.0) {
    if (n >= options.max_iterations) {
      r.exceeded_cap = true;
      break;
    }
    ++n;
    advance();
    err = gate_fidelity(target, prop).error;
    r.trace.push_back({static_cast<double>(n) * options.step, err});
  }
  r.safe_iterations = r.exceeded_cap ? n : n - 1;
  r.delta_bar = static_cast<double>(r.safe_iterations) * options.step;
  return r;
}

/// Uniform grid on [lo, hi]; when 0 lies inside it is present exactly.
inline std::vector<double> sweep_grid(double lo, double hi, int points) {
  if (!(lo < hi)) throw PreconditionError("sweep requires delta1 < delta2");
  if (points < 2) throw PreconditionError("sweep requires at least two points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  grid.back() = hi;
  if (lo <= 0.0 && hi >= 0.0) {
    auto nearest = std::min_element(grid.begin(), grid.end(),
                                    [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (std::abs(*nearest) <= 1e-9 * (hi - lo)) {
      *nearest = 0.0;
    } else {
      grid.insert(std::upper_bound(grid.begin(), grid.end(), 0.0), 0.0);
    }
  }
  return grid;
}

struct SweepTrace {
  std::string label;
  std::vector<double> delta;
  std::vector<double> error;
  /// NaN where the perturbed fidelity vanishes.
  std::vector<double> zeta;
  std::vector<bool> phase_defined;
};

inline SweepTrace error_sweep(const ControlSystem& sys, const PulseSequence& pulse,
                              const ComplexMatrix& target, const UncertaintyStructure& structure,
                              double delta1, double delta2, int points,
                              CouplingMethod method = CouplingMethod::Block) {
  SweepTrace t;
  t.label = structure.label();
  t.delta = sweep_grid(delta1, delta2, points);
  const auto dirs = step_directions(structure, pulse);
  for (double d : t.delta) {
    const auto prop = propagate(sys, pulse, d, dirs);
    const auto fid = gate_fidelity(target, prop);
    t.error.push_back(fid.error);
    t.phase_defined.push_back(fid.phase_defined);
    t.zeta.push_back(fid.phase_defined ? sensitivity_along(prop, target, dirs, method)
                                       : std::numeric_limits<double>::quiet_NaN());
  }
  return t;
}

struct StructureMargin {
  std::string label;
  double b1 = 0.0;
  Theorem3Margin margin;
  /// e~(+delta_bar) and e~(-delta_bar) along this structure; NaN when unbounded.
  double error_plus = 0.0;
  double error_minus = 0.0;
};

struct PerformanceCertificate {
  double epsilon = 0.0;
  double nominal_error = 0.0;
  std::vector<StructureMargin> theorem3;
  Algorithm1Result algorithm1;
  /// e~(+/- alg1 delta_bar) along each basis element on its own.
  std::vector<double> principal_error_plus;
  std::vector<double> principal_error_minus;
};

inline PerformanceCertificate certify(const ControlSystem& sys, const PulseSequence& pulse,
                                      const ComplexMatrix& target, const StructureBasis& basis,
                                      double epsilon, const Algorithm1Options& options = {}) {
  PerformanceCertificate c;
  c.epsilon = epsilon;
  c.nominal_error = gate_fidelity(target, propagate(sys, pulse)).error;
  for (const auto& s : basis.elements()) {
    StructureMargin sm;
    sm.label = s.label();
    sm.b1 = bound_b1(sys, pulse, s);
    sm.margin = theorem3_margin(c.nominal_error, epsilon, sm.b1);
    if (sm.margin.unbounded) {
      sm.error_plus = sm.error_minus = std::numeric_limits<double>::quiet_NaN();
    } else {
      sm.error_plus = perturbed_error(sys, pulse, target, s, sm.margin.delta_bar);
      sm.error_minus = perturbed_error(sys, pulse, target, s, -sm.margin.delta_bar);
    }
    c.theorem3.push_back(sm);
  }
  c.algorithm1 = algorithm1_margin(sys, pulse, target, basis, epsilon, options);
  for (const auto& s : basis.elements()) {
    c.principal_error_plus.push_back(perturbed_error(sys, pulse, target, s, c.algorithm1.delta_bar));
    c.principal_error_minus.push_back(perturbed_error(sys, pulse, target, s, -c.algorithm1.delta_bar));
  }
  return c;
}

}  // namespace qrobust
