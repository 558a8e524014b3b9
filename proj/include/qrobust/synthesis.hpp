#pragma once

// Fidelity-optimal piecewise-constant controls: exact gradients of the gate
// error with respect to every amplitude, multi-restart quasi-Newton descent,
// and the three-spin Heisenberg chain used as the reference system.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "qrobust/lbfgs.hpp"
#include "qrobust/linalg.hpp"
#include "qrobust/parallel.hpp"
#include "qrobust/random.hpp"
#include "qrobust/sensitivity.hpp"
#include "qrobust/spin.hpp"
#include "qrobust/system.hpp"
#include "qrobust/uncertainty.hpp"

namespace qrobust {

struct ErrorAndGradient {
  FidelityValue fidelity;
  /// d e / d f_m^(k), controls by row and steps by column.
  RealMatrix gradient;
};

/// The step-k amplitude of control m perturbs only H^(k), along H_m, so each
/// partial derivative is one coupling integral weighted by the cached
/// prefix/suffix products.
inline ErrorAndGradient fidelity_gradient(const ControlSystem& sys, const PropagationResult& prop,
                                          const ComplexMatrix& target,
                                          CouplingMethod method = CouplingMethod::Spectral) {
  ErrorAndGradient out;
  out.fidelity = gate_fidelity(target, prop);
  const Complex factor = detail::phase_factor(prop, target);
  const auto weights = detail::trace_weights(prop, target);
  out.gradient.resize(sys.num_controls(), sys.steps());

  std::vector<ComplexMatrix> neg_i_controls;
  for (const auto& h : sys.interactions()) neg_i_controls.push_back(-kI * h);

  for (int k = 0; k < sys.steps(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    if (method == CouplingMethod::Block) {
      for (int m = 0; m < sys.num_controls(); ++m) {
        const auto x = coupling_integral_block(prop.hamiltonians[uk], sys.interaction(m),
                                               sys.step_length());
        out.gradient(m, k) = (factor * trace_product(weights[uk], x)).real();
      }
      continue;
    }
    // Tr[W V (G o V^+ B V) V^+] = Tr[(V^+ W V) (G o V^+ B V)]
    const auto& spec = prop.spectra[uk];
    const auto& v = spec.eigenvectors;
    const ComplexMatrix kernel = coupling_kernel(spec, sys.step_length());
    const ComplexMatrix w_rot = v.adjoint() * weights[uk] * v;
    for (int m = 0; m < sys.num_controls(); ++m) {
      const ComplexMatrix b_rot = v.adjoint() * neg_i_controls[static_cast<std::size_t>(m)] * v;
      out.gradient(m, k) = (factor * trace_product(w_rot, kernel.cwiseProduct(b_rot))).real();
    }
  }
  return out;
}

inline ErrorAndGradient fidelity_gradient(const ControlSystem& sys, const PulseSequence& pulse,
                                          const ComplexMatrix& target,
                                          CouplingMethod method = CouplingMethod::Spectral) {
  return fidelity_gradient(sys, propagate(sys, pulse), target, method);
}

struct SynthesisConfig {
  int restarts = 200;
  int max_iterations = 3000;
  double gradient_tolerance = 1e-9;
  /// Stop a restart once its error drops below this.
  double target_error = 1e-8;
  /// Initial amplitudes are uniform in [-scale, scale].
  double initial_scale = 1.0;
  std::uint64_t seed = 1;
  /// Optional |f| <= bound enforced by projection.
  std::optional<double> amplitude_bound;
  int jobs = 1;
  /// Stop launching restarts once this many controllers have error below
  /// accept_error. Restarts run in fixed batches, so the result does not
  /// depend on jobs.
  std::optional<int> wanted;
  double accept_error = 1e-2;
  int batch = 8;

  void validate() const {
    if (restarts < 1 || max_iterations < 1 || jobs < 1) {
      throw PreconditionError("synthesis counts must be >= 1");
    }
    if (!(gradient_tolerance > 0.0) || !(target_error > 0.0) || !(initial_scale > 0.0)) {
      throw PreconditionError("synthesis tolerances and scale must be positive");
    }
    if (amplitude_bound && !(*amplitude_bound > 0.0)) {
      throw PreconditionError("amplitude bound must be positive");
    }
    if (wanted && *wanted < 1) throw PreconditionError("wanted controller count must be >= 1");
    if (!(accept_error > 0.0) || batch < 1) {
      throw PreconditionError("accept_error must be positive and batch >= 1");
    }
  }
};

struct Controller {
  PulseSequence pulse;
  double nominal_error = 1.0;
  int restart = 0;
  /// Seed of this restart's initial pulse, derived from the master seed.
  std::uint64_t seed = 0;
  int iterations = 0;
  LbfgsStatus status = LbfgsStatus::MaxIterations;

  bool reached_target(const SynthesisConfig& cfg) const { return nominal_error < cfg.target_error; }
};

/// One restart: random initial pulse from the restart's own stream, then L-BFGS.
inline Controller synthesize_restart(const ControlSystem& sys, const ComplexMatrix& target,
                                     const SynthesisConfig& cfg, int restart) {
  const int rows = sys.num_controls();
  const int cols = sys.steps();
  Controller c;
  c.restart = restart;
  c.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(restart));
  Rng rng(c.seed);
  RealVector x0(rows * cols);
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = rng.uniform(-cfg.initial_scale, cfg.initial_scale);

  const Objective objective = [&](const RealVector& x, RealVector& grad) {
    const PulseSequence pulse(Eigen::Map<const RealMatrix>(x.data(), rows, cols));
    const auto prop = propagate(sys, pulse);
    const auto fid = gate_fidelity(target, prop);
    if (!fid.phase_defined) {
      // Zero overlap: e = 1 is the global maximum, any descent direction is fine.
      grad = RealVector::Zero(x.size());
      return fid.error;
    }
    const auto eg = fidelity_gradient(sys, prop, target);
    grad = Eigen::Map<const RealVector>(eg.gradient.data(), x.size());
    return fid.error;
  };

  LbfgsOptions opt;
  opt.max_iterations = cfg.max_iterations;
  opt.gradient_tolerance = cfg.gradient_tolerance;
  opt.target_value = cfg.target_error;
  opt.box = cfg.amplitude_bound;
  const auto res = lbfgs_minimize(objective, std::move(x0), opt);

  c.pulse = PulseSequence(Eigen::Map<const RealMatrix>(res.x.data(), rows, cols));
  c.nominal_error = gate_fidelity(target, propagate(sys, c.pulse)).error;
  c.iterations = res.iterations;
  c.status = res.status;
  return c;
}

/// All executed restarts, sorted by nominal error (ties by restart index).
inline std::vector<Controller> synthesize(const ControlSystem& sys, const ComplexMatrix& target,
                                          const SynthesisConfig& cfg) {
  cfg.validate();
  require_same_shape(sys.drift(), target, "target gate");
  std::vector<Controller> out;
  if (!cfg.wanted) {
    out = parallel_map(static_cast<std::size_t>(cfg.restarts), cfg.jobs, [&](std::size_t r) {
      return synthesize_restart(sys, target, cfg, static_cast<int>(r));
    });
  } else {
    int accepted = 0;
    for (int start = 0; start < cfg.restarts && accepted < *cfg.wanted; start += cfg.batch) {
      const int count = std::min(cfg.batch, cfg.restarts - start);
      auto part = parallel_map(static_cast<std::size_t>(count), cfg.jobs, [&](std::size_t r) {
        return synthesize_restart(sys, target, cfg, start + static_cast<int>(r));
      });
      for (auto& c : part) {
        if (c.nominal_error < cfg.accept_error) ++accepted;
        out.push_back(std::move(c));
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Controller& a, const Controller& b) {
    return a.nominal_error < b.nominal_error;
  });
  return out;
}

struct CaseStudy {
  ControlSystem system;
  StructureBasis basis;
};

inline constexpr int kCaseStudySteps = 32;
inline constexpr double kCaseStudyFinalTime = 15.0;

/// Three-spin Heisenberg chain with x and y control on the first spin only.
inline CaseStudy build_case_study(int steps = kCaseStudySteps,
                                  double final_time = kCaseStudyFinalTime) {
  constexpr int qubits = 3;
  std::vector<ComplexMatrix> controls{0.5 * spin::embed(spin::pauli('x'), 0, qubits),
                                      0.5 * spin::embed(spin::pauli('y'), 0, qubits)};
  ControlSystem sys(spin::heisenberg_chain(qubits), std::move(controls), steps, final_time / steps);
  auto basis = StructureBasis::principal(sys);
  return {std::move(sys), std::move(basis)};
}

}  // namespace qrobust
