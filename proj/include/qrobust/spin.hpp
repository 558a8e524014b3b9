#pragma once

// Pauli operators, tensor-product embeddings, spin-chain Hamiltonians and a
// few named gates.

#include <cmath>
#include <string>
#include <string_view>

#include <unsupported/Eigen/KroneckerProduct>

#include "qrobust/errors.hpp"
#include "qrobust/linalg.hpp"

namespace qrobust::spin {

inline ComplexMatrix identity2() { return ComplexMatrix::Identity(2, 2); }

inline ComplexMatrix pauli(char axis) {
  ComplexMatrix s(2, 2);
  switch (axis) {
    case 'x': s << 0, 1, 1, 0; break;
    case 'y': s << 0, -kI, kI, 0; break;
    case 'z': s << 1, 0, 0, -1; break;
    default: throw PreconditionError(std::string("unknown Pauli axis '") + axis + "'");
  }
  return s;
}

/// `op` acting on qubit `position` (0 = leftmost factor) of a `qubits`-qubit register.
inline ComplexMatrix embed(const ComplexMatrix& op, int position, int qubits) {
  if (position < 0 || position >= qubits) throw IndexError("qubit position out of range");
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int q = 0; q < qubits; ++q) {
    const ComplexMatrix factor = q == position ? op : identity2();
    out = Eigen::kroneckerProduct(out, factor).eval();
  }
  return out;
}

/// (1/2) sum_l (XX + YY + ZZ) over nearest neighbours of an open chain.
inline ComplexMatrix heisenberg_chain(int qubits) {
  if (qubits < 2) throw PreconditionError("a Heisenberg chain needs at least two spins");
  const auto dim = Eigen::Index{1} << qubits;
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  for (int l = 0; l + 1 < qubits; ++l) {
    for (char a : {'x', 'y', 'z'}) {
      h += embed(pauli(a), l, qubits) * embed(pauli(a), l + 1, qubits);
    }
  }
  return 0.5 * h;
}

/// identity (any N); x, y, z, h (N = 2); cnot (N = 4); toffoli (N = 8).
inline ComplexMatrix named_gate(std::string_view name, int n) {
  auto need = [&](int dim) {
    if (n != dim) {
      throw DimensionError("gate '" + std::string(name) + "' needs dimension " +
                           std::to_string(dim) + ", system has " + std::to_string(n));
    }
  };
  if (name == "identity") return ComplexMatrix::Identity(n, n);
  if (name == "x" || name == "y" || name == "z") {
    need(2);
    return pauli(name[0]);
  }
  if (name == "h") {
    need(2);
    return (pauli('x') + pauli('z')) / std::sqrt(2.0);
  }
  if (name == "cnot" || name == "toffoli") {
    const int dim = name == "cnot" ? 4 : 8;
    need(dim);
    ComplexMatrix g = ComplexMatrix::Identity(dim, dim);
    g(dim - 2, dim - 2) = g(dim - 1, dim - 1) = 0.0;
    g(dim - 2, dim - 1) = g(dim - 1, dim - 2) = 1.0;
    return g;
  }
  throw PreconditionError("unknown gate '" + std::string(name) + "'");
}

}  // namespace qrobust::spin
