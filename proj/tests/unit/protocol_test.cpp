#include <cmath>

#include "doctest.h"
#include "qspa/protocol.hpp"
#include "test_support.hpp"

using namespace qspa;
using test::max_abs_diff;
using test::phase_aligned_diff;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Vec bell_01_10() {
  Vec v(4);
  v << 0.0, kInvSqrt2, kInvSqrt2, 0.0;
  return v;
}

}  // namespace

TEST_CASE("chc_unitary is unitary and built from its three factors") {
  const Mat u = chc_unitary();
  CHECK(unitarity_deviation(u) < 1e-12);

  // Independent oracle: multiply the factor matrices directly.
  const Mat oracle = cnot12() * kron(hadamard(), identity(2)) * cnot12();
  CHECK(max_abs_diff(u, oracle) == 0.0);

  // Applying the operation twice to |00> matches the squared oracle.
  const StateVector twice = apply_unitary(u, apply_unitary(u, StateVector::basis(4, 0)));
  const Vec expected = (oracle * oracle) * StateVector::basis(4, 0).amplitudes();
  CHECK(max_abs_diff(twice.amplitudes(), expected) < 1e-15);
}

TEST_CASE("chc output on a product input follows the closed form") {
  Rng rng(5);
  const PureQubitState phi1 = test::random_qubit(rng);
  const PureQubitState phi2 = test::random_qubit(rng);
  const StateVector out = apply_chc(phi1, phi2);
  const Vec expected =
      test::closed_form_chc_output(phi1.a(), phi1.b(), phi2.a(), phi2.b());
  CHECK(max_abs_diff(out.amplitudes(), expected) < 1e-15);
}

TEST_CASE("chc on |0>|1> yields the symmetric superposition of |01> and |10>") {
  const StateVector out = apply_chc(PureQubitState(1.0, 0.0), PureQubitState(0.0, 1.0));
  CHECK(max_abs_diff(out.amplitudes(), bell_01_10()) <= 1e-12);
}

TEST_CASE("chc general-input coefficients match the reference values") {
  const double c15 = std::cos(15.0 * M_PI / 180.0);
  const double s15 = std::sin(15.0 * M_PI / 180.0);
  const StateVector out =
      apply_chc(PureQubitState(std::sqrt(3.0) / 2.0, 0.5), PureQubitState(c15, s15));
  CHECK(std::abs(out.amp(0).real() - 0.6830) < 5e-4);
  CHECK(std::abs(out.amp(1).real() - 0.5000) < 5e-4);
  CHECK(std::abs(out.amp(2).real() - (-0.1830)) < 5e-4);
  CHECK(std::abs(out.amp(3).real() - 0.5000) < 5e-4);
}

TEST_CASE("chc on |0>|0> yields the even-parity superposition") {
  const StateVector out = apply_chc(PureQubitState(1.0, 0.0), PureQubitState(1.0, 0.0));
  Vec expected(4);
  expected << kInvSqrt2, 0.0, 0.0, kInvSqrt2;
  CHECK(max_abs_diff(out.amplitudes(), expected) < 1e-15);
}

TEST_CASE("condense keeps the control branch selected by the outcome") {
  const StateVector joint = StateVector(bell_01_10());

  const CondensationResult zero = condense(joint, 0);
  CHECK(zero.outcome == 0);
  CHECK(zero.probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(phase_aligned_diff(bb84_state(Bb84Label::MinusZ).to_state().amplitudes(),
                           zero.condensed.to_state().amplitudes()) < 1e-12);
  CHECK(zero.condensed_label == Bb84Label::MinusZ);

  const CondensationResult one = condense(joint, 1);
  CHECK(one.probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(one.condensed_label == Bb84Label::PlusZ);
}

TEST_CASE("condense labels the +x,+x outcome-0 branch as |0>") {
  const StateVector joint =
      apply_chc(bb84_state(Bb84Label::PlusX), bb84_state(Bb84Label::PlusX));
  const CondensationResult result = condense(joint, 0);
  CHECK(result.condensed_label == Bb84Label::PlusZ);
}

TEST_CASE("condense leaves the label empty off the signal set") {
  const StateVector joint = apply_chc(PureQubitState(std::cos(0.3), std::sin(0.3)),
                                      PureQubitState(1.0, 0.0));
  const CondensationResult result = condense(joint, 0);
  CHECK_FALSE(result.condensed_label.has_value());
}

TEST_CASE("truth_table holds the reference lookup entries") {
  CHECK(truth_table(Bb84Label::PlusZ, Bb84Label::MinusZ, 0) == Bb84Label::MinusZ);
  CHECK(truth_table(Bb84Label::MinusX, Bb84Label::MinusX, 1) == Bb84Label::PlusZ);
  CHECK(truth_table(Bb84Label::PlusX, Bb84Label::PlusZ, 0) == Bb84Label::MinusX);
  CHECK(truth_table(Bb84Label::PlusZ, Bb84Label::PlusZ, 0) == Bb84Label::PlusZ);
  CHECK(truth_table(Bb84Label::PlusZ, Bb84Label::PlusZ, 1) == Bb84Label::MinusZ);
}

TEST_CASE("x-basis targets condense independently of the outcome") {
  // Rows with +x or -x targets coincide across the two outcome tables; the
  // joint state factorizes, so the measurement cannot steer the control.
  for (Bb84Label phi1 : kAllBb84Labels) {
    for (Bb84Label phi2 : {Bb84Label::PlusX, Bb84Label::MinusX}) {
      CHECK(truth_table(phi1, phi2, 0) == truth_table(phi1, phi2, 1));
    }
    for (Bb84Label phi2 : {Bb84Label::PlusZ, Bb84Label::MinusZ}) {
      CHECK(truth_table(phi1, phi2, 0) != truth_table(phi1, phi2, 1));
    }
  }
}

TEST_CASE("verify_truth_tables finds no mismatches over all 32 cases") {
  const TruthTableAudit audit = verify_truth_tables();
  CHECK(audit.mismatches == 0);
  CHECK(audit.max_deviation < 1e-12);
}

TEST_CASE("closed-form output stays normalized and exact over random inputs") {
  Rng rng(17);
  for (int iter = 0; iter < 10000; ++iter) {
    const PureQubitState phi1 = test::random_qubit(rng);
    const PureQubitState phi2 = test::random_qubit(rng);
    const StateVector out = apply_chc(phi1, phi2);
    CHECK(std::abs(out.amplitudes().squaredNorm() - 1.0) < 1e-12);
    const Vec expected =
        test::closed_form_chc_output(phi1.a(), phi1.b(), phi2.a(), phi2.b());
    CHECK(max_abs_diff(out.amplitudes(), expected) < 1e-12);
  }
}

TEST_CASE("signal-state inputs always split the outcome odds evenly") {
  for (Bb84Label phi1 : kAllBb84Labels) {
    for (Bb84Label phi2 : kAllBb84Labels) {
      const StateVector joint = apply_chc(bb84_state(phi1), bb84_state(phi2));
      CHECK(std::abs(condense(joint, 0).probability - 0.5) < 1e-12);
      CHECK(std::abs(condense(joint, 1).probability - 0.5) < 1e-12);
    }
  }
}

TEST_CASE("condensation agrees with the measure-then-reduce path") {
  Rng rng(29);
  for (int iter = 0; iter < 200; ++iter) {
    const PureQubitState phi1 = test::random_qubit(rng);
    const PureQubitState phi2 = test::random_qubit(rng);
    const StateVector joint = apply_chc(phi1, phi2);
    for (int outcome : {0, 1}) {
      double p = 0.0;
      for (int i = 0; i < 4; ++i)
        if ((i & 1) == outcome) p += std::norm(joint.amp(i));
      if (p < 1e-9) continue;
      const CondensationResult direct = condense(joint, outcome);
      const MeasurementRecord record = project_measure(joint, 2, outcome);
      const DensityMatrix marginal =
          partial_trace(DensityMatrix::pure(record.collapsed), 1);
      const Mat projector = direct.condensed.to_state().amplitudes() *
                            direct.condensed.to_state().amplitudes().adjoint();
      CHECK(max_abs_diff(marginal.entries(), projector) < 1e-12);
      CHECK(std::abs(direct.probability - record.probability) < 1e-12);
    }
  }
}

TEST_CASE("recursive_qspa folds |0>,|1> with a forced zero into |1>") {
  const std::vector<PureQubitState> states = {PureQubitState(1.0, 0.0),
                                              PureQubitState(0.0, 1.0)};
  const QspaTranscript transcript = recursive_qspa(states, std::vector<int>{0});
  REQUIRE(transcript.rounds.size() == 1);
  CHECK(transcript.rounds[0].outcome == 0);
  CHECK(transcript.rounds[0].probability == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(phase_aligned_diff(bb84_state(Bb84Label::MinusZ).to_state().amplitudes(),
                           transcript.final_state.to_state().amplitudes()) < 1e-12);
}

TEST_CASE("recursive_qspa keeps |0> fixed under forced-zero folding") {
  const std::vector<PureQubitState> states(3, PureQubitState(1.0, 0.0));
  const QspaTranscript transcript = recursive_qspa(states, std::vector<int>{0, 0});
  CHECK(transcript.rounds.size() == 2);
  CHECK(phase_aligned_diff(bb84_state(Bb84Label::PlusZ).to_state().amplitudes(),
                           transcript.final_state.to_state().amplitudes()) < 1e-12);
}

TEST_CASE("recursive_qspa rejects degenerate inputs") {
  const std::vector<PureQubitState> single = {PureQubitState(1.0, 0.0)};
  CHECK_THROWS_AS(recursive_qspa(single, std::vector<int>{}), Error);
  Rng rng(1);
  CHECK_THROWS_AS(recursive_qspa(single, rng), Error);

  const std::vector<PureQubitState> pair = {PureQubitState(1.0, 0.0),
                                            PureQubitState(0.0, 1.0)};
  CHECK_THROWS_AS(recursive_qspa(pair, std::vector<int>{0, 1}), Error);
  CHECK_THROWS_AS(recursive_qspa(pair, std::vector<int>{}), Error);
}

TEST_CASE("recursive_qspa rejects forced branches of zero probability") {
  // Real-amplitude inputs split 1/2-1/2, so a dead branch needs complex
  // amplitudes: for both states (|0>+i|1>)/sqrt2 the outcome-0 amplitudes
  // a1a2+b1b2 and a1b2-b1a2 both cancel.
  const PureQubitState circular(Complex(kInvSqrt2, 0.0), Complex(0.0, kInvSqrt2));
  const std::vector<PureQubitState> states = {circular, circular};
  CHECK_THROWS_AS(recursive_qspa(states, std::vector<int>{0}), Error);
  CHECK(recursive_qspa(states, std::vector<int>{1}).rounds[0].probability ==
        doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(condense(StateVector::basis(4, 0), 1), Error);
}

TEST_CASE("identical seeds give identical transcripts") {
  Rng rng_states(77);
  std::vector<PureQubitState> states;
  for (int i = 0; i < 6; ++i) states.push_back(test::random_qubit(rng_states));

  Rng rng_a(123);
  Rng rng_b(123);
  const QspaTranscript a = recursive_qspa(states, rng_a);
  const QspaTranscript b = recursive_qspa(states, rng_b);
  REQUIRE(a.rounds.size() == b.rounds.size());
  double branch_product = 1.0;
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    CHECK(a.rounds[i].outcome == b.rounds[i].outcome);
    CHECK(a.rounds[i].probability == b.rounds[i].probability);
    branch_product *= a.rounds[i].probability;
  }
  CHECK(branch_product <= 1.0 + 1e-15);
  CHECK(a.final_state.a() == b.final_state.a());
  CHECK(a.final_state.b() == b.final_state.b());
}

TEST_CASE("signal-state parsing round-trips the four labels") {
  for (Bb84Label label : kAllBb84Labels) {
    CHECK(bb84_from_string(to_string(label)) == label);
    CHECK(match_bb84(bb84_state(label)) == label);
  }
  CHECK_FALSE(bb84_from_string("+y").has_value());
  CHECK_FALSE(match_bb84(PureQubitState(std::cos(0.4), std::sin(0.4))).has_value());
}
