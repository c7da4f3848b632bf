#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qspa/linalg.hpp"

namespace qspa {

/// Normalized single-qubit amplitude pair (a, b) for a|0> + b|1>.
class PureQubitState {
 public:
  PureQubitState(Complex a, Complex b);

  Complex a() const { return a_; }
  Complex b() const { return b_; }
  StateVector to_state() const;
  static PureQubitState from_state(const StateVector& s);

 private:
  Complex a_, b_;
};

/// The four conjugate-basis signal states:
///   +z -> |0>, -z -> |1>, +x -> (|0>+|1>)/sqrt(2), -x -> (|0>-|1>)/sqrt(2).
enum class Bb84Label { PlusZ = 0, MinusZ = 1, PlusX = 2, MinusX = 3 };

inline constexpr int kNumBb84Labels = 4;
inline constexpr Bb84Label kAllBb84Labels[kNumBb84Labels] = {
    Bb84Label::PlusZ, Bb84Label::MinusZ, Bb84Label::PlusX, Bb84Label::MinusX};

PureQubitState bb84_state(Bb84Label label);
std::string to_string(Bb84Label label);
std::optional<Bb84Label> bb84_from_string(std::string_view text);

/// Global-phase-insensitive nearest-label match within tol::kLabelMatch;
/// empty when no label matches.
std::optional<Bb84Label> match_bb84(const PureQubitState& s);

/// Max amplitude deviation between two states after aligning global phase.
double phase_aligned_deviation(const PureQubitState& a, const PureQubitState& b);

struct CondensationResult {
  int outcome;
  double probability;
  PureQubitState condensed;
  std::optional<Bb84Label> condensed_label;
};

struct QspaRound {
  PureQubitState target_input;
  int outcome;
  double probability;
};

struct QspaTranscript {
  std::vector<QspaRound> rounds;
  PureQubitState final_state;
};

/// The condensation unitary CNOT12 · (H ⊗ I) · CNOT12, qubit 1 as control.
Mat chc_unitary();

/// Applies the condensation unitary to phi1 ⊗ phi2. The output amplitudes
/// are, in basis order, (a1a2+b1b2, a1b2+b1a2, a1b2-b1a2, a1a2-b1b2)/sqrt(2).
StateVector apply_chc(const PureQubitState& phi1, const PureQubitState& phi2);

/// Measures qubit 2 of the joint state in the sigma_z basis and returns the
/// renormalized control-qubit state, with the nearest signal-state label when
/// one matches.
CondensationResult condense(const StateVector& joint, int forced_outcome);
CondensationResult condense(const StateVector& joint, Rng& rng);

/// Lookup of the condensed label for signal-state inputs; outcome selects
/// between the two measurement branches.
Bb84Label truth_table(Bb84Label phi1, Bb84Label phi2, int outcome);

struct TruthTableAudit {
  int mismatches;        // entries where the algebraic path disagrees with the lookup
  double max_deviation;  // largest phase-aligned amplitude deviation over all 32 cases
};

/// Replays all 16 input pairs x 2 outcomes through apply_chc + condense and
/// compares each condensed state against the lookup table.
TruthTableAudit verify_truth_tables();

/// Left fold of condensation over the input list: the retained qubit of each
/// round is the control of the next. Forced outcomes must supply exactly
/// n-1 bits for n input states.
QspaTranscript recursive_qspa(const std::vector<PureQubitState>& states,
                              const std::vector<int>& forced_outcomes);
QspaTranscript recursive_qspa(const std::vector<PureQubitState>& states, Rng& rng);

}  // namespace qspa
