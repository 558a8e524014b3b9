#pragma once

// Controlled closed quantum system with piecewise-constant controls: step
// Hamiltonians, time-ordered propagation and gate fidelity.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrobust/errors.hpp"
#include "qrobust/linalg.hpp"

namespace qrobust {

/// Drift H0, interaction Hamiltonians H_1..H_M, and a uniform grid of
/// `steps` intervals of length `step_length` (hbar = 1).
class ControlSystem {
 public:
  ControlSystem(ComplexMatrix drift, std::vector<ComplexMatrix> interactions, int steps,
                double step_length)
      : drift_(std::move(drift)),
        interactions_(std::move(interactions)),
        steps_(steps),
        step_length_(step_length) {
    require_hermitian(drift_, "drift Hamiltonian");
    for (std::size_t m = 0; m < interactions_.size(); ++m) {
      require_hermitian(interactions_[m], "interaction Hamiltonian " + std::to_string(m + 1));
      require_same_shape(drift_, interactions_[m], "interaction Hamiltonian");
    }
    if (drift_.rows() < 1) throw DimensionError("system dimension must be positive");
    if (steps_ < 1) throw PreconditionError("number of time steps must be >= 1");
    if (!(step_length_ > 0.0) || !std::isfinite(step_length_)) {
      throw PreconditionError("step length must be positive and finite");
    }
  }

  int dimension() const { return static_cast<int>(drift_.rows()); }
  int num_controls() const { return static_cast<int>(interactions_.size()); }
  int steps() const { return steps_; }
  double step_length() const { return step_length_; }
  double final_time() const { return steps_ * step_length_; }

  const ComplexMatrix& drift() const { return drift_; }
  const std::vector<ComplexMatrix>& interactions() const { return interactions_; }
  const ComplexMatrix& interaction(int m) const {
    if (m < 0 || m >= num_controls()) {
      throw IndexError("control index " + std::to_string(m) + " out of range");
    }
    return interactions_[static_cast<std::size_t>(m)];
  }

 private:
  ComplexMatrix drift_;
  std::vector<ComplexMatrix> interactions_;
  int steps_;
  double step_length_;
};

/// Real amplitude table: row m holds control m (0-based), column k holds step k.
class PulseSequence {
 public:
  PulseSequence() = default;
  explicit PulseSequence(RealMatrix amplitudes) : amplitudes_(std::move(amplitudes)) {
    if (!amplitudes_.allFinite()) throw NumericalError("pulse amplitudes must be finite");
  }

  static PulseSequence zeros(const ControlSystem& sys) {
    return PulseSequence(RealMatrix::Zero(sys.num_controls(), sys.steps()));
  }

  int num_controls() const { return static_cast<int>(amplitudes_.rows()); }
  int steps() const { return static_cast<int>(amplitudes_.cols()); }
  double operator()(int m, int k) const { return amplitudes_(m, k); }
  const RealMatrix& amplitudes() const { return amplitudes_; }

  bool conforms_to(const ControlSystem& sys) const {
    return num_controls() == sys.num_controls() && steps() == sys.steps();
  }

  friend bool operator==(const PulseSequence& a, const PulseSequence& b) {
    return a.amplitudes_.rows() == b.amplitudes_.rows() &&
           a.amplitudes_.cols() == b.amplitudes_.cols() && a.amplitudes_ == b.amplitudes_;
  }

 private:
  RealMatrix amplitudes_;
};

inline void require_conforming(const ControlSystem& sys, const PulseSequence& pulse) {
  if (!pulse.conforms_to(sys)) {
    throw DimensionError("pulse table is " + std::to_string(pulse.num_controls()) + "x" +
                         std::to_string(pulse.steps()) + ", system expects " +
                         std::to_string(sys.num_controls()) + "x" + std::to_string(sys.steps()));
  }
}

inline void require_step(const ControlSystem& sys, int k) {
  if (k < 0 || k >= sys.steps()) {
    throw IndexError("step index " + std::to_string(k) + " out of range [0, " +
                     std::to_string(sys.steps()) + ")");
  }
}

/// H^(k) = H0 + sum_m H_m f_m^(k) for the 0-based step k.
inline ComplexMatrix step_hamiltonian(const ControlSystem& sys, const PulseSequence& pulse, int k) {
  require_conforming(sys, pulse);
  require_step(sys, k);
  ComplexMatrix h = sys.drift();
  for (int m = 0; m < sys.num_controls(); ++m) h += pulse(m, k) * sys.interaction(m);
  return h;
}

inline std::vector<ComplexMatrix> step_hamiltonians(const ControlSystem& sys,
                                                    const PulseSequence& pulse) {
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(sys.steps()));
  for (int k = 0; k < sys.steps(); ++k) out.push_back(step_hamiltonian(sys, pulse, k));
  return out;
}

/// Per-step Hermitian generators G_k of a perturbation H^(k) -> H^(k) + delta G_k.
using StepDirections = std::vector<ComplexMatrix>;

/// Step propagators with cached cumulative products.
///   prefix[k] = Phi^(k,0) = U_k ... U_1, prefix[0] = I
///   suffix[k] = Phi^(kappa,k),          suffix[kappa] = I
/// The step-k Hamiltonians and their spectra are kept for derivative work.
struct PropagationResult {
  double step_length = 0.0;
  std::vector<ComplexMatrix> hamiltonians;
  std::vector<HermitianSpectrum> spectra;
  std::vector<ComplexMatrix> step_props;
  std::vector<ComplexMatrix> prefix;
  std::vector<ComplexMatrix> suffix;

  int steps() const { return static_cast<int>(step_props.size()); }
  int dimension() const { return static_cast<int>(prefix.front().rows()); }
  const ComplexMatrix& total() const { return prefix.back(); }
};

inline PropagationResult propagate_hamiltonians(std::vector<ComplexMatrix> hamiltonians,
                                                double step_length) {
  if (hamiltonians.empty()) throw PreconditionError("propagation needs at least one step");
  const auto kappa = hamiltonians.size();
  const auto n = hamiltonians.front().rows();
  PropagationResult r;
  r.step_length = step_length;
  r.spectra.reserve(kappa);
  r.step_props.reserve(kappa);
  for (const auto& h : hamiltonians) {
    require_same_shape(hamiltonians.front(), h, "step Hamiltonian");
    r.spectra.push_back(hermitian_spectrum(h));
    r.step_props.push_back(exp_neg_i(r.spectra.back(), step_length));
  }
  r.hamiltonians = std::move(hamiltonians);

  r.prefix.resize(kappa + 1);
  r.suffix.resize(kappa + 1);
  r.prefix[0] = ComplexMatrix::Identity(n, n);
  for (std::size_t k = 0; k < kappa; ++k) r.prefix[k + 1] = r.step_props[k] * r.prefix[k];
  r.suffix[kappa] = ComplexMatrix::Identity(n, n);
  for (std::size_t k = kappa; k-- > 0;) r.suffix[k] = r.suffix[k + 1] * r.step_props[k];
  return r;
}

inline PropagationResult propagate(const ControlSystem& sys, const PulseSequence& pulse) {
  return propagate_hamiltonians(step_hamiltonians(sys, pulse), sys.step_length());
}

/// Propagation of H^(k) + delta G_k.
inline PropagationResult propagate(const ControlSystem& sys, const PulseSequence& pulse,
                                   double delta, const StepDirections& directions) {
  auto hams = step_hamiltonians(sys, pulse);
  if (directions.size() != hams.size()) {
    throw DimensionError("perturbation has " + std::to_string(directions.size()) +
                         " steps, system has " + std::to_string(hams.size()));
  }
  if (delta != 0.0) {
    for (std::size_t k = 0; k < hams.size(); ++k) {
      require_same_shape(hams[k], directions[k], "perturbation direction");
      hams[k] += delta * directions[k];
    }
  }
  return propagate_hamiltonians(std::move(hams), sys.step_length());
}

/// F = |Tr[U_f^dagger Phi]| / N, e = 1 - F, phase = arg Tr[U_f^dagger Phi].
struct FidelityValue {
  Complex overlap;
  double fidelity = 0.0;
  double error = 1.0;
  double phase = 0.0;
  bool phase_defined = false;
};

inline FidelityValue gate_fidelity(const ComplexMatrix& target, const ComplexMatrix& achieved) {
  require_same_shape(target, achieved, "gate_fidelity");
  if (!is_square(target)) throw DimensionError("gate_fidelity: target must be square");
  const double n = static_cast<double>(target.rows());
  FidelityValue f;
  f.overlap = trace_inner(target, achieved);
  f.fidelity = std::abs(f.overlap) / n;
  f.error = 1.0 - f.fidelity;
  f.phase_defined = std::abs(f.overlap) >= 1e-14 * n;
  f.phase = f.phase_defined ? std::arg(f.overlap) : 0.0;
  return f;
}

inline FidelityValue gate_fidelity(const ComplexMatrix& target, const PropagationResult& prop) {
  return gate_fidelity(target, prop.total());
}

}  // namespace qrobust
