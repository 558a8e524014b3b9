#pragma once

// Differential sensitivity of the gate error to structured uncertainty, its
// per-step decomposition Z, and the analytic bounds B1, B2, B3 together with
// the static and time-varying directions that attain B2 and B3.

#include <cmath>
#include <string>
#include <vector>

#include "qrobust/errors.hpp"
#include "qrobust/linalg.hpp"
#include "qrobust/system.hpp"
#include "qrobust/uncertainty.hpp"

namespace qrobust {

namespace detail {

/// W_k = Phi^(k,0) U_f^dagger Phi^(kappa,k+1) for 0-based step k, so that
/// Tr[U_f^dagger Lambda_k] = Tr[W_k X_k].
inline std::vector<ComplexMatrix> trace_weights(const PropagationResult& prop,
                                                const ComplexMatrix& target) {
  require_same_shape(target, prop.total(), "target");
  const ComplexMatrix target_dag = target.adjoint();
  std::vector<ComplexMatrix> w;
  w.reserve(static_cast<std::size_t>(prop.steps()));
  for (int k = 0; k < prop.steps(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    w.push_back(prop.prefix[uk] * target_dag * prop.suffix[uk + 1]);
  }
  return w;
}

/// -e^{-i phi} / N at the operating point; throws where the phase is undefined.
inline Complex phase_factor(const PropagationResult& prop, const ComplexMatrix& target) {
  const auto fid = gate_fidelity(target, prop);
  if (!fid.phase_defined) {
    throw UndefinedPhaseError("gate overlap vanishes; sensitivity undefined at zero fidelity");
  }
  return -std::exp(-kI * fid.phase) / static_cast<double>(prop.dimension());
}

}  // namespace detail

/// Derivative of the step-k propagator (of an arbitrary operating point) with
/// respect to delta along the generator g.
inline ComplexMatrix step_coupling(const PropagationResult& prop, int k, const ComplexMatrix& g,
                                   CouplingMethod method) {
  const auto uk = static_cast<std::size_t>(k);
  if (method == CouplingMethod::Block) {
    return coupling_integral(prop.hamiltonians[uk], g, prop.step_length, CouplingMethod::Block);
  }
  require_hermitian(g, "perturbation generator");
  const auto& spec = prop.spectra[uk];
  return coupling_integral_spectral(spec, coupling_kernel(spec, prop.step_length), g);
}

/// d Phi~^(k,k-1) / d delta at delta = 0 for a single structure (0-based k).
inline ComplexMatrix step_derivative(const ControlSystem& sys, const PulseSequence& pulse, int k,
                                     const UncertaintyStructure& structure,
                                     CouplingMethod method = CouplingMethod::Block) {
  const ComplexMatrix h = step_hamiltonian(sys, pulse, k);
  return coupling_integral(h, structure.alpha(pulse, k) * structure.matrix(), sys.step_length(),
                           method);
}

/// d e~ / d delta at the operating point `prop` along per-step generators.
inline double sensitivity_along(const PropagationResult& prop, const ComplexMatrix& target,
                                const StepDirections& directions,
                                CouplingMethod method = CouplingMethod::Block) {
  if (static_cast<int>(directions.size()) != prop.steps()) {
    throw DimensionError("direction sequence length does not match number of steps");
  }
  const Complex factor = detail::phase_factor(prop, target);
  const auto weights = detail::trace_weights(prop, target);
  Complex acc{0.0, 0.0};
  for (int k = 0; k < prop.steps(); ++k) {
    const auto& g = directions[static_cast<std::size_t>(k)];
    require_same_shape(prop.hamiltonians.front(), g, "perturbation generator");
    if (g.isZero(0.0)) continue;
    acc += trace_product(weights[static_cast<std::size_t>(k)], step_coupling(prop, k, g, method));
  }
  return (factor * acc).real();
}

/// zeta_mu(t_f): sensitivity of the gate error to `structure` at delta = 0.
inline double zeta(const ControlSystem& sys, const PulseSequence& pulse,
                   const ComplexMatrix& target, const UncertaintyStructure& structure,
                   CouplingMethod method = CouplingMethod::Block) {
  return sensitivity_along(propagate(sys, pulse), target, step_directions(structure, pulse), method);
}

/// zeta evaluated on the trajectory perturbed by delta0 along the same structure.
inline double zeta_at(const ControlSystem& sys, const PulseSequence& pulse,
                      const ComplexMatrix& target, const UncertaintyStructure& structure,
                      double delta0, CouplingMethod method = CouplingMethod::Block) {
  const auto dirs = step_directions(structure, pulse);
  return sensitivity_along(propagate(sys, pulse, delta0, dirs), target, dirs, method);
}

/// Sensitivity along arbitrary per-step generators at perturbation delta0.
inline double zeta_at(const ControlSystem& sys, const PulseSequence& pulse,
                      const ComplexMatrix& target, const StepDirections& directions,
                      double delta0, CouplingMethod method = CouplingMethod::Block) {
  return sensitivity_along(propagate(sys, pulse, delta0, directions), target, directions, method);
}

/// Z (steps x basis slots) and Gamma = column sums of Z.
struct SensitivityMatrix {
  RealMatrix z;
  RealVector gamma;

  /// Gamma . s for a static direction.
  double static_sensitivity(const RealVector& s) const { return gamma.dot(s); }

  /// sum_k Z^(k) s^(k) for a per-step direction sequence.
  double time_varying_sensitivity(const std::vector<RealVector>& sequence) const {
    if (static_cast<Eigen::Index>(sequence.size()) != z.rows()) {
      throw DimensionError("sequence length does not match number of steps");
    }
    double acc = 0.0;
    for (Eigen::Index k = 0; k < z.rows(); ++k) acc += z.row(k).dot(sequence[static_cast<std::size_t>(k)]);
    return acc;
  }
};

/// Z^(k)_m at an arbitrary operating point: the slot-m generators are
/// alpha_m^(k) H^_m with alpha read from `pulse`.
inline SensitivityMatrix build_z(const PropagationResult& prop, const ComplexMatrix& target,
                                 const StructureBasis& basis, const PulseSequence& pulse,
                                 CouplingMethod method = CouplingMethod::Block) {
  if (pulse.steps() != prop.steps()) throw DimensionError("pulse does not match propagation");
  if (basis.dimension() != prop.dimension()) throw DimensionError("basis does not match propagation");
  const Complex factor = detail::phase_factor(prop, target);
  const auto weights = detail::trace_weights(prop, target);

  SensitivityMatrix out;
  out.z = RealMatrix::Zero(prop.steps(), basis.size());
  for (int k = 0; k < prop.steps(); ++k) {
    const auto uk = static_cast<std::size_t>(k);
    ComplexMatrix kernel;
    if (method == CouplingMethod::Spectral) kernel = coupling_kernel(prop.spectra[uk], prop.step_length);
    for (int m = 0; m < basis.size(); ++m) {
      const double a = basis[m].alpha(pulse, k);
      if (a == 0.0) continue;
      const ComplexMatrix g = a * basis[m].matrix();
      const ComplexMatrix x = method == CouplingMethod::Spectral
                                  ? coupling_integral_spectral(prop.spectra[uk], kernel, g)
                                  : coupling_integral_block(prop.hamiltonians[uk], g, prop.step_length);
      out.z(k, m) = (factor * trace_product(weights[uk], x)).real();
    }
  }
  out.gamma = out.z.colwise().sum().transpose();
  return out;
}

inline SensitivityMatrix build_z(const ControlSystem& sys, const PulseSequence& pulse,
                                 const ComplexMatrix& target, const StructureBasis& basis,
                                 CouplingMethod method = CouplingMethod::Block) {
  basis.require_conforming(sys, pulse);
  return build_z(propagate(sys, pulse), target, basis, pulse, method);
}

/// B1 = Delta ||H^||_2 sum_k |alpha^(k)|; valid for every delta.
inline double bound_b1(const ControlSystem& sys, const PulseSequence& pulse,
                       const UncertaintyStructure& structure) {
  require_conforming(sys, pulse);
  double alpha_sum = 0.0;
  for (int k = 0; k < sys.steps(); ++k) alpha_sum += std::abs(structure.alpha(pulse, k));
  return sys.step_length() * spectral_norm(structure.matrix()) * alpha_sum;
}

struct StaticWorstCase {
  double b2 = 0.0;
  /// Gamma^T / B2; empty when Gamma = 0.
  RealVector direction;
  bool flat = false;
};

inline StaticWorstCase bound_b2_and_worst(const RealVector& gamma) {
  StaticWorstCase w;
  w.b2 = gamma.norm();
  w.flat = w.b2 == 0.0;
  if (!w.flat) w.direction = gamma / w.b2;
  return w;
}

struct TimeVaryingWorstCase {
  double b3 = 0.0;
  /// ||Z^(k)||_2 per step.
  RealVector row_norms;
  /// Z^(k)^T / ||Z^(k)||; zero rows get e_0 and are listed in degenerate_rows.
  std::vector<RealVector> sequence;
  std::vector<int> degenerate_rows;
};

inline TimeVaryingWorstCase bound_b3_and_worst(const RealMatrix& z) {
  TimeVaryingWorstCase w;
  w.row_norms = z.rowwise().norm();
  w.b3 = w.row_norms.sum();
  w.sequence.reserve(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index k = 0; k < z.rows(); ++k) {
    if (w.row_norms(k) > 0.0) {
      w.sequence.emplace_back(z.row(k).transpose() / w.row_norms(k));
    } else {
      w.sequence.push_back(RealVector::Unit(z.cols(), 0));
      w.degenerate_rows.push_back(static_cast<int>(k));
    }
  }
  return w;
}

struct SensitivityReport {
  FidelityValue nominal;
  std::vector<std::string> labels;
  /// zeta for each basis element on its own, from the full Lambda sum.
  RealVector zeta;
  RealVector b1;
  SensitivityMatrix decomposition;
  StaticWorstCase worst_static;
  TimeVaryingWorstCase worst_sequence;
  RealMatrix gram;

  double b2() const { return worst_static.b2; }
  double b3() const { return worst_sequence.b3; }
};

inline SensitivityReport analyze(const ControlSystem& sys, const PulseSequence& pulse,
                                 const ComplexMatrix& target, const StructureBasis& basis,
                                 CouplingMethod method = CouplingMethod::Block) {
  basis.require_conforming(sys, pulse);
  const auto prop = propagate(sys, pulse);
  SensitivityReport r;
  r.nominal = gate_fidelity(target, prop);
  r.gram = basis.gram();
  r.zeta.resize(basis.size());
  r.b1.resize(basis.size());
  for (int m = 0; m < basis.size(); ++m) {
    r.labels.push_back(basis[m].label());
    r.zeta(m) = sensitivity_along(prop, target, step_directions(basis[m], pulse), method);
    r.b1(m) = bound_b1(sys, pulse, basis[m]);
  }
  r.decomposition = build_z(prop, target, basis, pulse, method);
  r.worst_static = bound_b2_and_worst(r.decomposition.gamma);
  r.worst_sequence = bound_b3_and_worst(r.decomposition.z);
  return r;
}

}  // namespace qrobust
