#include "qspa/protocol.hpp"

#include <cmath>
#include <sstream>

namespace qspa {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

// Truth table indexed [outcome][target label][control label]; +z/-z stand
// for the |0>/|1> entries. For targets in the x basis the two outcome
// branches condense to the same label, so those rows coincide.
constexpr Bb84Label Z = Bb84Label::PlusZ;
constexpr Bb84Label z = Bb84Label::MinusZ;
constexpr Bb84Label X = Bb84Label::PlusX;
constexpr Bb84Label x = Bb84Label::MinusX;

constexpr Bb84Label kTruthTable[2][4][4] = {
    // outcome 0
    {
        {Z, z, x, X},  // target +z
        {z, Z, X, x},  // target -z
        {X, x, Z, z},  // target +x
        {x, X, z, Z},  // target -x
    },
    // outcome 1
    {
        {z, Z, X, x},  // target +z
        {Z, z, x, X},  // target -z
        {X, x, Z, z},  // target +x
        {x, X, z, Z},  // target -x
    },
};

}  // namespace

PureQubitState::PureQubitState(Complex a, Complex b) : a_(a), b_(b) {
  const double norm2 = std::norm(a_) + std::norm(b_);
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > tol::kUnitary) {
    std::ostringstream os;
    os << "PureQubitState: not normalized, |a|^2+|b|^2 = " << norm2;
    throw Error(os.str());
  }
}

StateVector PureQubitState::to_state() const {
  Vec v(2);
  v << a_, b_;
  return StateVector(std::move(v));
}

PureQubitState PureQubitState::from_state(const StateVector& s) {
  if (s.dim() != 2) throw Error("PureQubitState: expected a single-qubit state");
  return PureQubitState(s.amp(0), s.amp(1));
}

PureQubitState bb84_state(Bb84Label label) {
  switch (label) {
    case Bb84Label::PlusZ:
      return PureQubitState(1.0, 0.0);
    case Bb84Label::MinusZ:
      return PureQubitState(0.0, 1.0);
    case Bb84Label::PlusX:
      return PureQubitState(kInvSqrt2, kInvSqrt2);
    case Bb84Label::MinusX:
      return PureQubitState(kInvSqrt2, -kInvSqrt2);
  }
  throw Error("bb84_state: invalid label");
}

std::string to_string(Bb84Label label) {
  switch (label) {
    case Bb84Label::PlusZ:
      return "+z";
    case Bb84Label::MinusZ:
      return "-z";
    case Bb84Label::PlusX:
      return "+x";
    case Bb84Label::MinusX:
      return "-x";
  }
  throw Error("to_string: invalid label");
}

std::optional<Bb84Label> bb84_from_string(std::string_view text) {
  if (text == "+z") return Bb84Label::PlusZ;
  if (text == "-z") return Bb84Label::MinusZ;
  if (text == "+x") return Bb84Label::PlusX;
  if (text == "-x") return Bb84Label::MinusX;
  return std::nullopt;
}

double phase_aligned_deviation(const PureQubitState& a, const PureQubitState& b) {
  // Align b's global phase so that <a|b> is real nonnegative.
  const Complex overlap = std::conj(a.a()) * b.a() + std::conj(a.b()) * b.b();
  const double mag = std::abs(overlap);
  const Complex phase = mag > 0.0 ? std::conj(overlap) / mag : Complex(1.0, 0.0);
  const double da = std::abs(phase * b.a() - a.a());
  const double db = std::abs(phase * b.b() - a.b());
  return std::max(da, db);
}

std::optional<Bb84Label> match_bb84(const PureQubitState& s) {
  for (Bb84Label label : kAllBb84Labels) {
    if (phase_aligned_deviation(bb84_state(label), s) <= tol::kLabelMatch) return label;
  }
  return std::nullopt;
}

Mat chc_unitary() {
  const Mat cnot = cnot12();
  return cnot * kron(hadamard(), identity(2)) * cnot;
}

StateVector apply_chc(const PureQubitState& phi1, const PureQubitState& phi2) {
  const StateVector joint = kron(phi1.to_state(), phi2.to_state());
  return apply_unitary(chc_unitary(), joint);
}

namespace {

CondensationResult condense_record(const MeasurementRecord& record) {
  const StateVector& c = record.collapsed;
  // Surviving components are |0,o> and |1,o>; the control amplitudes are
  // already renormalized by the projection.
  PureQubitState condensed(c.amp(record.outcome), c.amp(2 + record.outcome));
  return CondensationResult{record.outcome, record.probability, condensed,
                            match_bb84(condensed)};
}

}  // namespace

CondensationResult condense(const StateVector& joint, int forced_outcome) {
  if (joint.dim() != 4) throw Error("condense: joint state must be two qubits");
  return condense_record(project_measure(joint, 2, forced_outcome));
}

CondensationResult condense(const StateVector& joint, Rng& rng) {
  if (joint.dim() != 4) throw Error("condense: joint state must be two qubits");
  return condense_record(project_measure(joint, 2, rng));
}

Bb84Label truth_table(Bb84Label phi1, Bb84Label phi2, int outcome) {
  if (outcome != 0 && outcome != 1) throw Error("truth_table: outcome must be 0 or 1");
  return kTruthTable[outcome][static_cast<int>(phi2)][static_cast<int>(phi1)];
}

TruthTableAudit verify_truth_tables() {
  TruthTableAudit audit{0, 0.0};
  for (Bb84Label phi1 : kAllBb84Labels) {
    for (Bb84Label phi2 : kAllBb84Labels) {
      const StateVector joint = apply_chc(bb84_state(phi1), bb84_state(phi2));
      for (int outcome = 0; outcome < 2; ++outcome) {
        const CondensationResult result = condense(joint, outcome);
        const Bb84Label expected = truth_table(phi1, phi2, outcome);
        const double dev = phase_aligned_deviation(bb84_state(expected), result.condensed);
        audit.max_deviation = std::max(audit.max_deviation, dev);
        if (dev > tol::kLabelMatch) ++audit.mismatches;
      }
    }
  }
  return audit;
}

namespace {

template <typename OutcomePolicy>
QspaTranscript recursive_qspa_impl(const std::vector<PureQubitState>& states,
                                   OutcomePolicy&& next_outcome) {
  if (states.size() < 2) throw Error("recursive_qspa: need at least two input states");
  PureQubitState control = states[0];
  QspaTranscript transcript{{}, control};
  for (std::size_t i = 1; i < states.size(); ++i) {
    const StateVector joint = apply_chc(control, states[i]);
    const CondensationResult result = next_outcome(joint, i - 1);
    transcript.rounds.push_back(QspaRound{states[i], result.outcome, result.probability});
    control = result.condensed;
  }
  transcript.final_state = control;
  return transcript;
}

}  // namespace

QspaTranscript recursive_qspa(const std::vector<PureQubitState>& states,
                              const std::vector<int>& forced_outcomes) {
  if (states.size() < 2) throw Error("recursive_qspa: need at least two input states");
  if (forced_outcomes.size() != states.size() - 1) {
    std::ostringstream os;
    os << "recursive_qspa: " << states.size() << " states need " << states.size() - 1
       << " forced outcomes, got " << forced_outcomes.size();
    throw Error(os.str());
  }
  return recursive_qspa_impl(states, [&](const StateVector& joint, std::size_t round) {
    return condense(joint, forced_outcomes[round]);
  });
}

QspaTranscript recursive_qspa(const std::vector<PureQubitState>& states, Rng& rng) {
  return recursive_qspa_impl(
      states, [&](const StateVector& joint, std::size_t) { return condense(joint, rng); });
}

}  // namespace qspa
