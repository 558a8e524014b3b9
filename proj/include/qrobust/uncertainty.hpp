#pragma once

// Structured Hermitian uncertainty: unit-Frobenius directions tagged with the
// Hamiltonian term they perturb, bases of such directions, and the per-step
// generators they induce for a given pulse.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qrobust/errors.hpp"
#include "qrobust/linalg.hpp"
#include "qrobust/system.hpp"

namespace qrobust {

/// Which Hamiltonian term a structure perturbs. A drift perturbation is always
/// on (alpha = 1); a perturbation of interaction m is scaled by f_m^(k).
struct StructureKind {
  enum class Term { Drift, Control };

  Term term = Term::Drift;
  int control = -1;

  static StructureKind drift() { return {Term::Drift, -1}; }
  static StructureKind control_term(int m) { return {Term::Control, m}; }

  bool is_drift() const { return term == Term::Drift; }

  friend bool operator==(const StructureKind&, const StructureKind&) = default;
};

/// Per-step scaling alpha^(k) for a structure of the given kind.
inline double alpha(const StructureKind& kind, const PulseSequence& pulse, int k) {
  if (k < 0 || k >= pulse.steps()) {
    throw IndexError("step index " + std::to_string(k) + " out of range");
  }
  if (kind.is_drift()) return 1.0;
  if (kind.control < 0 || kind.control >= pulse.num_controls()) {
    throw IndexError("control index " + std::to_string(kind.control) + " out of range");
  }
  return pulse(kind.control, k);
}

class UncertaintyStructure {
 public:
  /// Takes an already-normalized matrix; use normalize_structure() otherwise.
  UncertaintyStructure(ComplexMatrix matrix, StructureKind kind, std::string label)
      : matrix_(std::move(matrix)), kind_(kind), label_(std::move(label)) {
    require_hermitian(matrix_, "uncertainty structure");
    if (std::abs(matrix_.norm() - 1.0) > 1e-12) {
      throw StructureError("uncertainty structure '" + label_ + "' is not unit Frobenius norm");
    }
  }

  const ComplexMatrix& matrix() const { return matrix_; }
  const StructureKind& kind() const { return kind_; }
  const std::string& label() const { return label_; }

  double alpha(const PulseSequence& pulse, int k) const { return qrobust::alpha(kind_, pulse, k); }

 private:
  ComplexMatrix matrix_;
  StructureKind kind_;
  std::string label_;
};

inline UncertaintyStructure normalize_structure(const ComplexMatrix& h, StructureKind kind,
                                                std::string label = {}) {
  require_hermitian(h, "structure matrix");
  const double norm = h.norm();
  if (norm == 0.0) throw DegenerateStructureError("cannot normalize a zero structure matrix");
  ComplexMatrix unit = h / norm;
  // Rounding can leave the norm a few ulps away from one; renormalize once.
  unit /= unit.norm();
  return UncertaintyStructure(std::move(unit), kind, std::move(label));
}

/// Ordered directions {H^_0, ..., H^_M}. Elements need not be orthogonal; see gram().
class StructureBasis {
 public:
  StructureBasis() = default;
  explicit StructureBasis(std::vector<UncertaintyStructure> elements)
      : elements_(std::move(elements)) {
    if (elements_.empty()) return;
    const auto n = elements_.front().matrix().rows();
    for (const auto& e : elements_) {
      require_same_shape(elements_.front().matrix(), e.matrix(), "basis element");
    }
    if (static_cast<Eigen::Index>(elements_.size()) > n * n) {
      throw DimensionError("basis has more elements than N^2");
    }
  }

  /// Normalized drift followed by each normalized interaction Hamiltonian.
  static StructureBasis principal(const ControlSystem& sys) {
    std::vector<UncertaintyStructure> el;
    el.push_back(normalize_structure(sys.drift(), StructureKind::drift(), "H0"));
    for (int m = 0; m < sys.num_controls(); ++m) {
      el.push_back(normalize_structure(sys.interaction(m), StructureKind::control_term(m),
                                       "H" + std::to_string(m + 1)));
    }
    return StructureBasis(std::move(el));
  }

  int size() const { return static_cast<int>(elements_.size()); }
  int dimension() const { return elements_.empty() ? 0 : static_cast<int>(elements_[0].matrix().rows()); }
  const UncertaintyStructure& operator[](int m) const {
    if (m < 0 || m >= size()) throw IndexError("basis slot " + std::to_string(m) + " out of range");
    return elements_[static_cast<std::size_t>(m)];
  }
  const std::vector<UncertaintyStructure>& elements() const { return elements_; }

  /// Re Tr[H^_a^dagger H^_b]; the identity for an orthonormal basis.
  RealMatrix gram() const {
    const int n = size();
    RealMatrix g(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) g(a, b) = trace_inner((*this)[a].matrix(), (*this)[b].matrix()).real();
    }
    return g;
  }

  bool is_orthonormal(double tol = 1e-12) const {
    return (gram() - RealMatrix::Identity(size(), size())).cwiseAbs().maxCoeff() <= tol;
  }

  void require_conforming(const ControlSystem& sys, const PulseSequence& pulse) const {
    if (dimension() != sys.dimension()) throw DimensionError("basis dimension does not match system");
    for (const auto& e : elements_) {
      if (!e.kind().is_drift() && e.kind().control >= pulse.num_controls()) {
        throw IndexError("basis element '" + e.label() + "' refers to a missing control");
      }
    }
  }

 private:
  std::vector<UncertaintyStructure> elements_;
};

inline void require_unit(const RealVector& s, std::string_view what) {
  if (std::abs(s.norm() - 1.0) > 1e-12) {
    throw PreconditionError(std::string(what) + " must have unit 2-norm");
  }
}

/// sum_m s_m H^_m with no normalization requirement on s.
inline ComplexMatrix combine(const StructureBasis& basis, const RealVector& s) {
  if (s.size() != basis.size()) throw DimensionError("coordinate vector length does not match basis");
  ComplexMatrix out = ComplexMatrix::Zero(basis.dimension(), basis.dimension());
  for (int m = 0; m < basis.size(); ++m) out += s(m) * basis[m].matrix();
  return out;
}

/// sum_m s_m H^_m for a unit coordinate vector s.
inline ComplexMatrix compose_direction(const StructureBasis& basis, const RealVector& s) {
  require_unit(s, "direction vector");
  return combine(basis, s);
}

/// Time-varying composition, one unit vector per step.
inline std::vector<ComplexMatrix> compose_direction(const StructureBasis& basis,
                                                    const std::vector<RealVector>& sequence) {
  std::vector<ComplexMatrix> out;
  out.reserve(sequence.size());
  for (const auto& s : sequence) out.push_back(compose_direction(basis, s));
  return out;
}

/// G_k = alpha^(k) H^ for a single structure.
inline StepDirections step_directions(const UncertaintyStructure& structure,
                                      const PulseSequence& pulse) {
  StepDirections out;
  out.reserve(static_cast<std::size_t>(pulse.steps()));
  for (int k = 0; k < pulse.steps(); ++k) out.push_back(structure.alpha(pulse, k) * structure.matrix());
  return out;
}

/// G_k = sum_m alpha_m^(k) s_m^(k) H^_m; each slot keeps its own alpha.
inline StepDirections step_directions(const StructureBasis& basis,
                                      const std::vector<RealVector>& sequence,
                                      const PulseSequence& pulse) {
  if (static_cast<int>(sequence.size()) != pulse.steps()) {
    throw DimensionError("direction sequence length does not match number of steps");
  }
  StepDirections out;
  out.reserve(sequence.size());
  for (int k = 0; k < pulse.steps(); ++k) {
    const auto& s = sequence[static_cast<std::size_t>(k)];
    if (s.size() != basis.size()) throw DimensionError("coordinate vector length does not match basis");
    ComplexMatrix g = ComplexMatrix::Zero(basis.dimension(), basis.dimension());
    for (int m = 0; m < basis.size(); ++m) g += (basis[m].alpha(pulse, k) * s(m)) * basis[m].matrix();
    out.push_back(std::move(g));
  }
  return out;
}

/// Static composite direction: the same coordinates in every step.
inline StepDirections step_directions(const StructureBasis& basis, const RealVector& s,
                                      const PulseSequence& pulse) {
  return step_directions(basis, std::vector<RealVector>(static_cast<std::size_t>(pulse.steps()), s),
                         pulse);
}

inline PropagationResult propagate(const ControlSystem& sys, const PulseSequence& pulse,
                                   double delta, const UncertaintyStructure& structure) {
  if (structure.matrix().rows() != sys.dimension()) {
    throw DimensionError("structure dimension does not match system");
  }
  return propagate(sys, pulse, delta, step_directions(structure, pulse));
}

/// Perturbed error e~(delta) along a single structure.
inline double perturbed_error(const ControlSystem& sys, const PulseSequence& pulse,
                              const ComplexMatrix& target, const UncertaintyStructure& structure,
                              double delta) {
  return gate_fidelity(target, propagate(sys, pulse, delta, structure)).error;
}

}  // namespace qrobust
