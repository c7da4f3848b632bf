#include <cmath>

#include "doctest.h"
#include "qspa/linalg.hpp"
#include "test_support.hpp"

using namespace qspa;
using test::max_abs_diff;

namespace {

StateVector ket(std::initializer_list<Complex> amps) {
  Vec v(static_cast<int>(amps.size()));
  int i = 0;
  for (Complex a : amps) v(i++) = a;
  return StateVector(std::move(v));
}

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

TEST_CASE("kron of basis vectors follows qubit-1-most-significant ordering") {
  const Vec out = kron(StateVector::basis(2, 0).amplitudes(), StateVector::basis(2, 1).amplitudes());
  Vec expected(4);
  expected << 0, 1, 0, 0;
  CHECK(max_abs_diff(out, expected) == 0.0);
}

TEST_CASE("kron expands amplitude products") {
  Rng rng(7);
  const StateVector a = test::random_state(rng, 2);
  const StateVector b = test::random_state(rng, 2);
  const StateVector joint = kron(a, b);
  Vec expected(4);
  expected << a.amp(0) * b.amp(0), a.amp(0) * b.amp(1), a.amp(1) * b.amp(0),
      a.amp(1) * b.amp(1);
  CHECK(max_abs_diff(joint.amplitudes(), expected) < 1e-15);
}

TEST_CASE("kron of identities is the 4x4 identity") {
  CHECK(max_abs_diff(kron(identity(2), identity(2)), identity(4)) == 0.0);
}

TEST_CASE("kron rejects mismatched dimensions") {
  Vec v4(4);
  v4 << 1, 0, 0, 0;
  Vec v2(2);
  v2 << 1, 0;
  CHECK_THROWS_AS(kron(v4, v2), Error);
  CHECK_THROWS_AS(kron(identity(4), identity(2)), Error);
}

TEST_CASE("apply_unitary identity leaves the state untouched") {
  Rng rng(11);
  const StateVector s = test::random_state(rng, 4);
  CHECK(max_abs_diff(apply_unitary(identity(4), s).amplitudes(), s.amplitudes()) == 0.0);
}

TEST_CASE("apply_unitary flips qubit 1 under sigma_x x I") {
  const StateVector out = apply_unitary(kron(pauli_x(), identity(2)), StateVector::basis(4, 0));
  CHECK(max_abs_diff(out.amplitudes(), StateVector::basis(4, 2).amplitudes()) == 0.0);
}

TEST_CASE("apply_unitary Hadamard on qubit 1 makes an even superposition") {
  const StateVector out = apply_unitary(kron(hadamard(), identity(2)), StateVector::basis(4, 0));
  const StateVector expected = ket({kInvSqrt2, 0.0, kInvSqrt2, 0.0});
  CHECK(max_abs_diff(out.amplitudes(), expected.amplitudes()) < 1e-15);
}

TEST_CASE("apply_unitary rejects non-unitary operators and reports the deviation") {
  Mat not_unitary = identity(4);
  not_unitary(0, 0) = 1.5;
  CHECK_THROWS_WITH_AS(apply_unitary(not_unitary, StateVector::basis(4, 0)),
                       doctest::Contains("1.25"), Error);
}

TEST_CASE("partial_trace of a product projector keeps the marginal") {
  const DensityMatrix rho = DensityMatrix::pure(StateVector::basis(4, 1));  // |01><01|
  const DensityMatrix reduced = partial_trace(rho, 1);
  CHECK(max_abs_diff(reduced.entries(), DensityMatrix::pure(StateVector::basis(2, 0)).entries()) <
        1e-15);
}

TEST_CASE("partial_trace of a maximally entangled state is maximally mixed") {
  const StateVector bell = ket({0.0, kInvSqrt2, kInvSqrt2, 0.0});
  const DensityMatrix reduced = partial_trace(DensityMatrix::pure(bell), 1);
  CHECK(max_abs_diff(reduced.entries(), identity(2) / 2.0) < 1e-15);
}

TEST_CASE("partial_trace matches an independent index-contraction oracle") {
  // Condensation output for a1=1, b1=0, a2=cos15, b2=sin15 degrees.
  const double a2 = std::cos(15.0 * M_PI / 180.0);
  const double b2 = std::sin(15.0 * M_PI / 180.0);
  const Vec psi = test::closed_form_chc_output(1.0, 0.0, a2, b2);
  const DensityMatrix rho = DensityMatrix::pure(StateVector(psi));

  // Oracle: brute-force contraction over the discarded qubit.
  Mat oracle = Mat::Zero(2, 2);
  for (int j = 0; j < 2; ++j)
    for (int l = 0; l < 2; ++l)
      for (int i = 0; i < 2; ++i)
        oracle(j, l) += rho.entries()(2 * i + j, 2 * i + l);

  const DensityMatrix reduced = partial_trace(rho, 2);
  CHECK(max_abs_diff(reduced.entries(), oracle) < 1e-15);

  // Frozen values from the oracle: 1/2 on the diagonal, cos15*sin15 = 1/4
  // off the diagonal.
  Mat frozen(2, 2);
  frozen << 0.5, 0.25, 0.25, 0.5;
  CHECK(max_abs_diff(reduced.entries(), frozen) < 1e-12);
}

TEST_CASE("project_measure returns the forced branch with its true probability") {
  const StateVector state = ket({0.0, kInvSqrt2, kInvSqrt2, 0.0});
  const MeasurementRecord record = project_measure(state, 2, 0);
  CHECK(record.outcome == 0);
  CHECK(record.probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(max_abs_diff(record.collapsed.amplitudes(), StateVector::basis(4, 2).amplitudes()) <
        1e-15);
}

TEST_CASE("project_measure rejects zero-probability forced outcomes") {
  CHECK_THROWS_AS(project_measure(StateVector::basis(4, 0), 2, 1), Error);
}

TEST_CASE("project_measure probabilities follow the closed-form amplitudes") {
  // Inputs a1 = b1 = 1/sqrt2, a2 = 1, b2 = 0: both branches carry 1/2.
  const Vec psi = test::closed_form_chc_output(kInvSqrt2, kInvSqrt2, 1.0, 0.0);
  double p0_oracle = 0.0;
  for (int i : {0, 2}) p0_oracle += std::norm(psi(i));
  CHECK(p0_oracle == doctest::Approx(0.5).epsilon(1e-12));

  const StateVector state(psi);
  CHECK(project_measure(state, 2, 0).probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(project_measure(state, 2, 1).probability == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fidelity of a state with itself is one") {
  Rng rng(23);
  const DensityMatrix rho = test::random_density(rng, 4);
  CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("fidelity of orthogonal pure states vanishes") {
  const DensityMatrix zero = DensityMatrix::pure(StateVector::basis(2, 0));
  const DensityMatrix one = DensityMatrix::pure(StateVector::basis(2, 1));
  CHECK(fidelity(zero, one) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fidelity of the maximally mixed state against a pure state is one half") {
  const DensityMatrix mixed = DensityMatrix::physical(identity(2) / 2.0);
  const DensityMatrix pure = DensityMatrix::pure(StateVector::basis(2, 0));
  CHECK(fidelity(mixed, pure) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fidelity rejects deviation matrices") {
  const DensityMatrix dev = DensityMatrix::deviation(pauli_z());
  const DensityMatrix pure = DensityMatrix::pure(StateVector::basis(2, 0));
  CHECK_THROWS_AS(fidelity(dev, pure), Error);
}

TEST_CASE("unitary evolution preserves norm and trace") {
  Rng rng(31);
  for (int iter = 0; iter < 100; ++iter) {
    const Mat u = test::random_unitary(rng, 4);
    const StateVector s = test::random_state(rng, 4);
    CHECK(std::abs(apply_unitary(u, s).amplitudes().squaredNorm() - 1.0) < 1e-12);
    const DensityMatrix rho = test::random_density(rng, 4);
    CHECK(std::abs(apply_unitary(u, rho).trace_real() - 1.0) < 1e-12);
  }
}

TEST_CASE("partial_trace undoes kron for product density matrices") {
  Rng rng(37);
  for (int iter = 0; iter < 100; ++iter) {
    const DensityMatrix a = test::random_density(rng, 2);
    const DensityMatrix b = test::random_density(rng, 2);
    const DensityMatrix joint = DensityMatrix::physical(kron(a.entries(), b.entries()));
    CHECK(max_abs_diff(partial_trace(joint, 1).entries(), a.entries()) < 1e-12);
    CHECK(max_abs_diff(partial_trace(joint, 2).entries(), b.entries()) < 1e-12);
  }
}

TEST_CASE("branch probabilities sum to one and match the collapsed norms") {
  Rng rng(41);
  for (int iter = 0; iter < 100; ++iter) {
    const StateVector s = test::random_state(rng, 4);
    for (int qubit : {1, 2}) {
      double total = 0.0;
      for (int outcome : {0, 1}) {
        double branch = 0.0;
        for (int i = 0; i < 4; ++i) {
          if (qubit_bit(i, qubit, 4) == outcome) branch += std::norm(s.amp(i));
        }
        total += branch;
        if (branch > 1e-9) {
          const MeasurementRecord record = project_measure(s, qubit, outcome);
          CHECK(std::abs(record.probability - branch) < 1e-12);
          CHECK(std::abs(record.collapsed.amplitudes().squaredNorm() - 1.0) < 1e-12);
        }
      }
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("fidelity is symmetric and discriminates distinct states") {
  Rng rng(43);
  for (int iter = 0; iter < 50; ++iter) {
    const DensityMatrix rho = test::random_density(rng, 4);
    const DensityMatrix sigma = test::random_density(rng, 4);
    const double f1 = fidelity(rho, sigma);
    const double f2 = fidelity(sigma, rho);
    CHECK(std::abs(f1 - f2) < 1e-10);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-10));
    if (max_abs_diff(rho.entries(), sigma.entries()) > 1e-3) {
      CHECK(f1 < 1.0 - 1e-8);
    }
  }
}

TEST_CASE("sampled measurements follow the seeded stream deterministically") {
  const StateVector state = ket({kInvSqrt2, 0.0, 0.0, kInvSqrt2});
  Rng rng_a(99);
  Rng rng_b(99);
  for (int i = 0; i < 32; ++i) {
    const MeasurementRecord a = project_measure(state, 1, rng_a);
    const MeasurementRecord b = project_measure(state, 1, rng_b);
    CHECK(a.outcome == b.outcome);
    CHECK(a.probability == b.probability);
  }
}

TEST_CASE("state vectors reject bad inputs") {
  Vec unnormalized(2);
  unnormalized << 1.0, 1.0;
  CHECK_THROWS_AS(StateVector{unnormalized}, Error);

  Vec wrong_dim(3);
  wrong_dim << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(StateVector{wrong_dim}, Error);

  Vec with_nan(2);
  with_nan << std::numeric_limits<double>::quiet_NaN(), 0.0;
  CHECK_THROWS_AS(StateVector{with_nan}, Error);
}

TEST_CASE("density matrices enforce their flavor invariants") {
  Mat not_hermitian = Mat::Zero(2, 2);
  not_hermitian(0, 1) = 1.0;
  CHECK_THROWS_AS(DensityMatrix::physical(not_hermitian), Error);
  CHECK_THROWS_AS(DensityMatrix::deviation(not_hermitian), Error);

  Mat negative(2, 2);
  negative << 1.5, 0.0, 0.0, -0.5;
  CHECK_THROWS_AS(DensityMatrix::physical(negative), Error);
  // Estimates tolerate negative eigenvalues but keep Hermiticity and trace.
  CHECK(DensityMatrix::estimate(negative).kind() == DensityMatrix::Kind::Estimate);

  // Deviation matrices may be traceless.
  CHECK(DensityMatrix::deviation(pauli_z()).is_deviation());
  CHECK_THROWS_AS(DensityMatrix::physical(pauli_z()), Error);
}

TEST_CASE("partial_trace carries the deviation flavor through") {
  const DensityMatrix dev = DensityMatrix::deviation(kron(pauli_z(), identity(2)) / 2.0);
  const DensityMatrix reduced = partial_trace(dev, 1);
  CHECK(reduced.is_deviation());
  CHECK(max_abs_diff(reduced.entries(), pauli_z()) < 1e-15);  // Tr_2(Iz1 ⊗ I) = 2 * Iz
  CHECK_THROWS_AS(partial_trace(dev, 3), Error);
  CHECK_THROWS_AS(partial_trace(DensityMatrix::deviation(pauli_z()), 1), Error);
}

TEST_CASE("qubit_bit validates its arguments") {
  CHECK(qubit_bit(2, 1, 4) == 1);
  CHECK(qubit_bit(2, 2, 4) == 0);
  CHECK(qubit_bit(1, 1, 2) == 1);
  CHECK_THROWS_AS(qubit_bit(0, 2, 2), Error);
  CHECK_THROWS_AS(qubit_bit(0, 3, 4), Error);
}

TEST_CASE("pure_state_fidelity evaluates the overlap for estimates") {
  Mat slightly_negative(2, 2);
  slightly_negative << 1.02, 0.0, 0.0, -0.02;
  const DensityMatrix est = DensityMatrix::estimate(slightly_negative);
  CHECK(pure_state_fidelity(est, StateVector::basis(2, 0)) ==
        doctest::Approx(1.02).epsilon(1e-12));
  CHECK_THROWS_AS(fidelity(est, DensityMatrix::pure(StateVector::basis(2, 0))), Error);
}
