// Optimize a single-qubit Hadamard, then ask how far the drift can be off
// before the gate error crosses 1%.

#include <cstdio>

#include "qrobust/qrobust.hpp"

int main() {
  using namespace qrobust;
  const ControlSystem sys(spin::pauli('z'), {spin::pauli('x'), spin::pauli('y')}, 10, 0.2);
  const ComplexMatrix target = spin::named_gate("h", 2);

  SynthesisConfig cfg;
  cfg.restarts = 4;
  const auto best = synthesize(sys, target, cfg).front();
  std::printf("nominal error      %.3e\n", best.nominal_error);

  const auto basis = StructureBasis::principal(sys);
  const auto report = analyze(sys, best.pulse, target, basis);
  for (int m = 0; m < basis.size(); ++m) {
    std::printf("zeta[%s]           %+.3e   (B1 %.3f)\n", report.labels[m].c_str(), report.zeta(m), report.b1(m));
  }
  std::printf("B2 %.3e   B3 %.3e\n", report.b2(), report.b3());

  Algorithm1Options opt;
  opt.step = 1e-3;
  const auto cert = certify(sys, best.pulse, target, basis, 0.01, opt);
  std::printf("Lipschitz margin (H0)   %.4f\n", cert.theorem3[0].margin.delta_bar);
  std::printf("iterative margin        %.4f\n", cert.algorithm1.delta_bar);
  return 0;
}
