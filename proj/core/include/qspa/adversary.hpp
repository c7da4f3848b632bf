#pragma once

#include <array>
#include <string>
#include <vector>

#include "qspa/protocol.hpp"

namespace qspa::adversary {

/// Which protocol inputs the adversary has full state information about.
/// ControlOnly is the first (retained) qubit; TargetOnly covers every
/// condensation target in the sequence.
enum class InputKnowledge { None, ControlOnly, TargetOnly, All };

struct KnowledgeModel {
  InputKnowledge knows_inputs = InputKnowledge::None;
  bool knows_outcomes = false;
};

std::string to_string(InputKnowledge k);

struct LeakageReport {
  int rounds;
  double guess_probability;
  /// Marginal distribution of the final condensed label, indexed by Bb84Label.
  std::array<double, kNumBb84Labels> distribution;
  std::string method;  // "exhaustive-enumeration"
};

struct OutcomeEntry {
  int outcome;
  Bb84Label label;
  double probability;
};

/// Exact single-round distribution over (measurement outcome, condensed
/// label), with probabilities taken from the joint-state amplitudes.
std::vector<OutcomeEntry> outcome_distribution(Bb84Label phi1, Bb84Label phi2);

/// Ensemble-averaged success probability of the optimal (posterior-mode)
/// guess of the final condensed label, enumerated exactly over all
/// 4^(rounds+1) signal-state assignments and 2^rounds outcome strings.
/// Inputs are i.i.d. uniform over the four labels. Rejects rounds > 8.
LeakageReport guess_probability(const KnowledgeModel& model, int rounds);

/// guess_probability for every round count in 1..max_rounds.
std::vector<LeakageReport> leakage_curve(const KnowledgeModel& model, int max_rounds);

}  // namespace qspa::adversary
