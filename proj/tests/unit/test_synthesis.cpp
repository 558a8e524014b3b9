#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "qrobust/qrobust.hpp"

using namespace qrobust;
using namespace qrobust::testing;

namespace {

ComplexMatrix x_rotation(double angle) { return expm_neg_i_hermitian(spin::pauli('x'), angle / 2); }

ControlSystem single_qubit(int steps = 10) {
  return ControlSystem(spin::pauli('z'), {spin::pauli('x'), spin::pauli('y')}, steps, 0.2);
}

}  // namespace

TEST(FidelityGradient, MatchesCentralDifferences) {
  Rng rng(1);
  for (int n : {2, 4, 8}) {
    const auto sys = random_system(rng, n, 2, 6, 0.3);
    const auto pulse = random_pulse(rng, sys);
    const auto achieved = propagate(sys, pulse).total();
    const ComplexMatrix target = expm_neg_i_hermitian(random_hermitian(rng, n, 1.0), 1.0) * achieved;
    const auto g = fidelity_gradient(sys, pulse, target);
    const double h = 1e-6;
    double worst = 0.0;
    for (int m = 0; m < sys.num_controls(); ++m) {
      for (int k = 0; k < sys.steps(); ++k) {
        RealMatrix up = pulse.amplitudes(), down = pulse.amplitudes();
        up(m, k) += h;
        down(m, k) -= h;
        const double fd = (gate_fidelity(target, propagate(sys, PulseSequence(up))).error -
                           gate_fidelity(target, propagate(sys, PulseSequence(down))).error) / (2 * h);
        worst = std::max(worst, std::abs(g.gradient(m, k) - fd) / std::max(std::abs(fd), 1e-3));
      }
    }
    EXPECT_LE(worst, 1e-5) << "N = " << n;
  }
}

TEST(FidelityGradient, BlockAndSpectralAgree) {
  Rng rng(2);
  const auto sys = random_system(rng, 4, 2, 5, 0.3);
  const auto pulse = random_pulse(rng, sys);
  const auto target = haar_random_unitary(4, 3);
  const auto a = fidelity_gradient(sys, pulse, target, CouplingMethod::Block);
  const auto b = fidelity_gradient(sys, pulse, target, CouplingMethod::Spectral);
  EXPECT_LE((a.gradient - b.gradient).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FidelityGradient, TrivialSystemHasZeroGradient) {
  const ControlSystem sys(ComplexMatrix::Zero(2, 2), {ComplexMatrix::Zero(2, 2)}, 4, 0.5);
  const auto g = fidelity_gradient(sys, PulseSequence::zeros(sys), ComplexMatrix::Identity(2, 2));
  EXPECT_EQ(g.fidelity.error, 0.0);
  EXPECT_LE(g.gradient.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FidelityGradient, ZeroFidelityThrows) {
  const ControlSystem sys(ComplexMatrix::Zero(2, 2), {spin::pauli('x')}, 2, 0.1);
  EXPECT_THROW(fidelity_gradient(sys, PulseSequence::zeros(sys), spin::pauli('z')), UndefinedPhaseError);
}

TEST(Lbfgs, Rosenbrock) {
  const Objective f = [](const RealVector& x, RealVector& g) {
    g.resize(2);
    g(0) = -2 * (1 - x(0)) - 400 * x(0) * (x(1) - x(0) * x(0));
    g(1) = 200 * (x(1) - x(0) * x(0));
    return (1 - x(0)) * (1 - x(0)) + 100 * std::pow(x(1) - x(0) * x(0), 2);
  };
  RealVector x0(2);
  x0 << -1.2, 1.0;
  std::vector<double> values;
  LbfgsOptions opt;
  opt.on_accept = [&](int, double v) { values.push_back(v); };
  const auto r = lbfgs_minimize(f, x0, opt);
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
  EXPECT_NEAR(r.x(1), 1.0, 1e-6);
  for (std::size_t i = 1; i < values.size(); ++i) EXPECT_LE(values[i], values[i - 1]);
}

TEST(Lbfgs, BoxProjection) {
  // Unconstrained minimum at 3; the box pins it at the bound.
  const Objective f = [](const RealVector& x, RealVector& g) {
    g = 2 * (x.array() - 3.0).matrix();
    return (x.array() - 3.0).square().sum();
  };
  LbfgsOptions opt;
  opt.box = 1.0;
  const auto r = lbfgs_minimize(f, RealVector::Zero(3), opt);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(r.x(i), 1.0);
  EXPECT_EQ(r.status, LbfgsStatus::GradientConverged);
}

TEST(Synthesize, SingleQubitRotationReachesTarget) {
  SynthesisConfig cfg;
  cfg.restarts = 4;
  cfg.target_error = 1e-10;
  const auto out = synthesize(single_qubit(), x_rotation(std::numbers::pi / 2), cfg);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_LT(out.front().nominal_error, 1e-6);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_LE(out[i - 1].nominal_error, out[i].nominal_error);
}

TEST(Synthesize, NominalErrorIsRecomputable) {
  const auto sys = single_qubit();
  const auto target = x_rotation(1.0);
  SynthesisConfig cfg;
  cfg.restarts = 3;
  for (const auto& c : synthesize(sys, target, cfg)) {
    EXPECT_NEAR(gate_fidelity(target, propagate(sys, c.pulse)).error, c.nominal_error, 1e-12);
    EXPECT_EQ(c.seed, derive_seed(cfg.seed, static_cast<std::uint64_t>(c.restart)));
  }
}

TEST(Synthesize, OptimumSatisfiesFirstOrderCondition) {
  const auto sys = single_qubit(6);
  const auto target = haar_random_unitary(2, 44);
  SynthesisConfig cfg;
  cfg.restarts = 1;
  cfg.target_error = 1e-300;
  cfg.gradient_tolerance = 1e-7;
  const auto c = synthesize(sys, target, cfg).front();
  if (c.status == LbfgsStatus::GradientConverged) {
    EXPECT_LE(fidelity_gradient(sys, c.pulse, target).gradient.lpNorm<Eigen::Infinity>(), 1e-7);
  } else {
    EXPECT_LT(c.nominal_error, 1e-12);
  }
}

TEST(Synthesize, DeterministicAcrossRunsAndJobCounts) {
  const auto sys = single_qubit();
  const auto target = haar_random_unitary(2, 7);
  SynthesisConfig cfg;
  cfg.restarts = 6;
  cfg.max_iterations = 50;
  cfg.seed = 99;
  const auto a = synthesize(sys, target, cfg);
  cfg.jobs = 3;
  const auto b = synthesize(sys, target, cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].restart, b[i].restart);
    EXPECT_TRUE(a[i].pulse == b[i].pulse);
    EXPECT_EQ(a[i].nominal_error, b[i].nominal_error);
  }
}

TEST(Synthesize, EarlyStopIsIndependentOfJobs) {
  const auto sys = single_qubit();
  const auto target = x_rotation(2.0);
  SynthesisConfig cfg;
  cfg.restarts = 40;
  cfg.wanted = 3;
  cfg.batch = 4;
  cfg.accept_error = 1e-6;
  const auto a = synthesize(sys, target, cfg);
  cfg.jobs = 2;
  const auto b = synthesize(sys, target, cfg);
  EXPECT_EQ(a.size(), 4u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(a[i].pulse == b[i].pulse);
}

TEST(Synthesize, AmplitudeBoundIsRespected) {
  SynthesisConfig cfg;
  cfg.restarts = 2;
  cfg.amplitude_bound = 0.3;
  cfg.max_iterations = 200;
  for (const auto& c : synthesize(single_qubit(), x_rotation(std::numbers::pi), cfg)) {
    EXPECT_LE(c.pulse.amplitudes().cwiseAbs().maxCoeff(), 0.3);
  }
}

TEST(Synthesize, ConfigValidation) {
  SynthesisConfig cfg;
  cfg.restarts = 0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.target_error = 0.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg = {};
  EXPECT_THROW(synthesize(single_qubit(), ComplexMatrix::Identity(4, 4), cfg), DimensionError);
}

TEST(CaseStudy, Dimensions) {
  const auto cs = build_case_study();
  EXPECT_EQ(cs.system.dimension(), 8);
  EXPECT_EQ(cs.system.steps(), 32);
  EXPECT_DOUBLE_EQ(cs.system.step_length(), 0.46875);
  EXPECT_DOUBLE_EQ(cs.system.final_time(), 15.0);
  EXPECT_TRUE(is_hermitian(cs.system.drift()));
  for (const auto& h : cs.system.interactions()) {
    EXPECT_EQ(h.rows(), 8);
    EXPECT_TRUE(is_hermitian(h));
  }
  for (const auto& e : cs.basis.elements()) EXPECT_NEAR(e.matrix().norm(), 1.0, 1e-14);
  // Heisenberg pair terms have spectrum {1, 1, 1, -3} / 2 per pair; total trace is zero.
  EXPECT_NEAR(std::abs(cs.system.drift().trace()), 0.0, 1e-14);
}

TEST(HaarUnitary, UnitaryDeterministicDistinct) {
  for (int n : {1, 2, 5, 8}) {
    const auto u = haar_random_unitary(n, 17);
    EXPECT_LE((u.adjoint() * u - ComplexMatrix::Identity(n, n)).norm(), 1e-12 * n);
    EXPECT_TRUE(u == haar_random_unitary(n, 17));
  }
  const auto a = haar_random_unitary(4, 1);
  const auto b = haar_random_unitary(4, 2);
  EXPECT_GT((a - b).norm(), 1e-3);
  EXPECT_THROW(haar_random_unitary(0, 1), PreconditionError);
}

TEST(HaarUnitary, FirstMomentOfEntries) {
  // |U_ij|^2 is Beta(1, N-1): mean 1/N, variance (N-1)/(N^2 (N+1)).
  const int n = 4;
  const int samples = 1000;
  RealMatrix sum = RealMatrix::Zero(n, n);
  for (int s = 0; s < samples; ++s) sum += haar_random_unitary(n, 1000 + s).cwiseAbs2();
  const double mean = 1.0 / n;
  const double se = std::sqrt((n - 1.0) / (n * n * (n + 1.0)) / samples);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) EXPECT_NEAR(sum(i, j) / samples, mean, 3.0 * se) << i << "," << j;
}

TEST(DeriveSeed, StreamsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}
