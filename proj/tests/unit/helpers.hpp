#pragma once

#include <vector>

#include "qrobust/qrobust.hpp"

namespace qrobust::testing {

inline ComplexMatrix random_hermitian(Rng& rng, int n, double frob) {
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
  ComplexMatrix h = a + a.adjoint();
  return h * (frob / h.norm());
}

inline ComplexMatrix random_general(Rng& rng, int n, double scale) {
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = scale * Complex(rng.normal(), rng.normal());
  return a;
}

inline ControlSystem random_system(Rng& rng, int n, int controls, int steps, double dt) {
  std::vector<ComplexMatrix> hs;
  for (int m = 0; m < controls; ++m) hs.push_back(random_hermitian(rng, n, 1.0));
  return ControlSystem(random_hermitian(rng, n, 2.0), std::move(hs), steps, dt);
}

inline PulseSequence random_pulse(Rng& rng, const ControlSystem& sys, double scale = 1.0) {
  RealMatrix f(sys.num_controls(), sys.steps());
  for (int m = 0; m < f.rows(); ++m)
    for (int k = 0; k < f.cols(); ++k) f(m, k) = rng.uniform(-scale, scale);
  return PulseSequence(f);
}

inline RealVector random_unit(Rng& rng, int n) {
  RealVector s(n);
  for (int i = 0; i < n; ++i) s(i) = rng.normal();
  return s / s.norm();
}

/// Central difference of a scalar function.
template <typename F>
double central_difference(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace qrobust::testing
