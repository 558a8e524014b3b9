#pragma once

// Dense complex kernel: exponentials of -iH for Hermitian H, the coupling
// integral (first-order response of a step propagator to a generator
// perturbation), norms and trace forms.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <string_view>

#include "qrobust/errors.hpp"

namespace qrobust {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Relative tolerance on ||A - A^dagger||_F.
inline constexpr double kHermitianTolerance = 1e-12;
/// Per-dimension tolerance on ||U^dagger U - I||_F.
inline constexpr double kUnitaryTolerance = 1e-10;

inline bool is_square(const ComplexMatrix& a) { return a.rows() == a.cols(); }

inline bool is_finite(const ComplexMatrix& a) { return a.allFinite(); }

inline bool is_hermitian(const ComplexMatrix& a) {
  if (!is_square(a) || !is_finite(a)) return false;
  const double skew = (a - a.adjoint()).norm();
  return skew <= kHermitianTolerance * std::max(1.0, a.norm());
}

inline bool is_unitary(const ComplexMatrix& u) {
  if (!is_square(u) || !is_finite(u)) return false;
  const auto n = u.rows();
  const double dev = (u.adjoint() * u - ComplexMatrix::Identity(n, n)).norm();
  return dev <= kUnitaryTolerance * static_cast<double>(n);
}

inline void require_hermitian(const ComplexMatrix& a, std::string_view what) {
  if (!is_square(a)) {
    throw DimensionError(std::string(what) + " must be square, got " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()));
  }
  if (!is_hermitian(a)) throw StructureError(std::string(what) + " is not Hermitian");
}

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b,
                               std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

inline void require_finite(const ComplexMatrix& a, std::string_view what) {
  if (!is_finite(a)) throw NumericalError(std::string(what) + " produced non-finite entries");
}

inline double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

/// Largest singular value.
inline double spectral_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

/// Tr[A^dagger B].
inline Complex trace_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "trace_inner");
  return (a.conjugate().cwiseProduct(b)).sum();
}

/// Tr[A B] without forming the product.
inline Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) {
    throw DimensionError("trace_product: non-conforming operands");
  }
  return (a.transpose().cwiseProduct(b)).sum();
}

/// Eigendecomposition H = V diag(lambda) V^dagger of a Hermitian matrix.
struct HermitianSpectrum {
  RealVector eigenvalues;
  ComplexMatrix eigenvectors;

  Eigen::Index dimension() const { return eigenvalues.size(); }
};

inline HermitianSpectrum hermitian_spectrum(const ComplexMatrix& h) {
  require_hermitian(h, "Hamiltonian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// exp(-i H tau) from a precomputed spectrum of H.
inline ComplexMatrix exp_neg_i(const HermitianSpectrum& spectrum, double tau) {
  const auto& v = spectrum.eigenvectors;
  Eigen::VectorXcd phases(spectrum.dimension());
  for (Eigen::Index j = 0; j < phases.size(); ++j) {
    phases(j) = std::exp(-kI * spectrum.eigenvalues(j) * tau);
  }
  ComplexMatrix out = v * phases.asDiagonal() * v.adjoint();
  require_finite(out, "exp_neg_i");
  return out;
}

/// exp(-i H tau) for Hermitian H via unitary eigendecomposition, so the result
/// is unitary up to rounding. Negative tau evolves backwards in time.
inline ComplexMatrix expm_neg_i_hermitian(const ComplexMatrix& h, double tau) {
  if (!std::isfinite(tau)) throw PreconditionError("expm_neg_i_hermitian: non-finite duration");
  return exp_neg_i(hermitian_spectrum(h), tau);
}

/// General matrix exponential: scaling and squaring around the degree-13
/// diagonal Pade approximant (Higham 2005).
inline ComplexMatrix expm_pade13(const ComplexMatrix& a) {
  if (!is_square(a)) throw DimensionError("expm_pade13: matrix must be square");
  require_finite(a, "expm_pade13 input");
  const auto n = a.rows();
  if (n == 0) return a;

  static constexpr double b[] = {64764752532480000.0,
                                 32382376266240000.0,
                                 7771770303897600.0,
                                 1187353796428800.0,
                                 129060195264000.0,
                                 10559470521600.0,
                                 670442572800.0,
                                 33522128640.0,
                                 1323241920.0,
                                 40840800.0,
                                 960960.0,
                                 16380.0,
                                 182.0,
                                 1.0};
  static constexpr double theta13 = 5.371920351148152;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const ComplexMatrix as = a / std::ldexp(1.0, squarings);

  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const ComplexMatrix a2 = as * as;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a4 * a2;

  const ComplexMatrix u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
  const ComplexMatrix u =
      as * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  const ComplexMatrix v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
  const ComplexMatrix v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;

  Eigen::PartialPivLU<ComplexMatrix> lu(v - u);
  ComplexMatrix result = lu.solve(v + u);
  for (int s = 0; s < squarings; ++s) result = result * result;
  require_finite(result, "expm_pade13");
  return result;
}

enum class CouplingMethod {
  /// Upper-right block of exp(tau * [[-iH, -iB], [0, -iH]]).
  Block,
  /// Divided differences in the eigenbasis of H.
  Spectral,
};

inline std::string_view to_string(CouplingMethod m) {
  return m == CouplingMethod::Block ? "block" : "spectral";
}

/// Kernel G_ab = int_0^tau exp(-i l_a (tau - s)) exp(-i l_b s) ds in the
/// eigenbasis of H, written in a form that stays accurate as l_a -> l_b.
inline ComplexMatrix coupling_kernel(const HermitianSpectrum& spectrum, double tau) {
  const auto n = spectrum.dimension();
  ComplexMatrix g(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double mean = 0.5 * (spectrum.eigenvalues(a) + spectrum.eigenvalues(b));
      const double half_gap = 0.5 * (spectrum.eigenvalues(a) - spectrum.eigenvalues(b));
      const double x = half_gap * tau;
      const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
      g(a, b) = std::exp(-kI * mean * tau) * tau * sinc;
    }
  }
  return g;
}

/// int_0^tau exp(-iH(tau-s)) (-iB) exp(-iHs) ds, eigenbasis route.
inline ComplexMatrix coupling_integral_spectral(const HermitianSpectrum& spectrum,
                                                const ComplexMatrix& kernel,
                                                const ComplexMatrix& b) {
  const auto& v = spectrum.eigenvectors;
  const ComplexMatrix rotated = v.adjoint() * (-kI * b) * v;
  ComplexMatrix out = v * kernel.cwiseProduct(rotated) * v.adjoint();
  require_finite(out, "coupling_integral");
  return out;
}

/// int_0^tau exp(-iH(tau-s)) (-iB) exp(-iHs) ds, augmented-block route.
inline ComplexMatrix coupling_integral_block(const ComplexMatrix& h, const ComplexMatrix& b,
                                             double tau) {
  const auto n = h.rows();
  ComplexMatrix big = ComplexMatrix::Zero(2 * n, 2 * n);
  big.topLeftCorner(n, n) = -kI * tau * h;
  big.topRightCorner(n, n) = -kI * tau * b;
  big.bottomRightCorner(n, n) = -kI * tau * h;
  return expm_pade13(big).topRightCorner(n, n);
}

/// First-order response of exp(-iH tau) to the generator perturbation H -> H + eps B.
inline ComplexMatrix coupling_integral(const ComplexMatrix& h, const ComplexMatrix& b, double tau,
                                       CouplingMethod method = CouplingMethod::Block) {
  require_hermitian(h, "coupling_integral H");
  require_hermitian(b, "coupling_integral B");
  require_same_shape(h, b, "coupling_integral");
  if (!std::isfinite(tau)) throw PreconditionError("coupling_integral: non-finite duration");
  if (method == CouplingMethod::Block) return coupling_integral_block(h, b, tau);
  const auto spectrum = hermitian_spectrum(h);
  return coupling_integral_spectral(spectrum, coupling_kernel(spectrum, tau), b);
}

}  // namespace qrobust
