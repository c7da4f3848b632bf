#include "qspa/adversary.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>

namespace qspa::adversary {

namespace {

constexpr int kMaxRounds = 8;  // 4^9 x 2^8 cases stay well under a second

// Every enumerated case has equal probability: inputs are uniform over the
// four labels and, for signal-state inputs, both measurement outcomes of
// every round occur with probability exactly 1/2. Counting cases is
// therefore exact; no floating-point accumulation is involved until the
// final division.
struct Enumeration {
  std::uint64_t success_numerator = 0;
  std::uint64_t total_cases = 0;
  std::array<std::uint64_t, kNumBb84Labels> label_counts{};
};

int fold_final_label(int control, const int* targets, int n_targets, std::uint32_t outcomes) {
  for (int i = 0; i < n_targets; ++i) {
    const int outcome = (outcomes >> i) & 1;
    control = static_cast<int>(
        truth_table(static_cast<Bb84Label>(control), static_cast<Bb84Label>(targets[i]), outcome));
  }
  return control;
}

}  // namespace

std::string to_string(InputKnowledge k) {
  switch (k) {
    case InputKnowledge::None:
      return "none";
    case InputKnowledge::ControlOnly:
      return "control-only";
    case InputKnowledge::TargetOnly:
      return "target-only";
    case InputKnowledge::All:
      return "all";
  }
  throw Error("to_string: invalid knowledge model");
}

std::vector<OutcomeEntry> outcome_distribution(Bb84Label phi1, Bb84Label phi2) {
  const StateVector joint = apply_chc(bb84_state(phi1), bb84_state(phi2));
  std::vector<OutcomeEntry> entries;
  for (int outcome = 0; outcome < 2; ++outcome) {
    const CondensationResult result = condense(joint, outcome);
    if (!result.condensed_label) {
      throw Error("outcome_distribution: condensed state left the signal-state set");
    }
    entries.push_back(OutcomeEntry{outcome, *result.condensed_label, result.probability});
  }
  return entries;
}

LeakageReport guess_probability(const KnowledgeModel& model, int rounds) {
  if (rounds < 1 || rounds > kMaxRounds) {
    std::ostringstream os;
    os << "guess_probability: rounds must be in 1.." << kMaxRounds << ", got " << rounds;
    throw Error(os.str());
  }

  const int n_inputs = rounds + 1;
  std::vector<int> known_slots;    // input positions visible to the adversary
  std::vector<int> hidden_slots;   // the rest
  for (int i = 0; i < n_inputs; ++i) {
    const bool known = model.knows_inputs == InputKnowledge::All ||
                       (model.knows_inputs == InputKnowledge::ControlOnly && i == 0) ||
                       (model.knows_inputs == InputKnowledge::TargetOnly && i > 0);
    (known ? known_slots : hidden_slots).push_back(i);
  }

  const std::uint64_t known_variants = std::uint64_t(1) << (2 * known_slots.size());
  const std::uint64_t hidden_variants = std::uint64_t(1) << (2 * hidden_slots.size());
  const std::uint32_t outcome_variants = std::uint32_t(1) << rounds;

  Enumeration e;
  std::vector<int> inputs(n_inputs);

  // Outer loops sweep what the adversary observes; the inner loops sweep
  // what she does not. Grouping this way keeps the per-group histogram in
  // O(1) memory for every knowledge model.
  for (std::uint64_t known_code = 0; known_code < known_variants; ++known_code) {
    for (std::size_t i = 0; i < known_slots.size(); ++i) {
      inputs[known_slots[i]] = static_cast<int>((known_code >> (2 * i)) & 3);
    }
    const std::uint32_t observed_outcome_variants = model.knows_outcomes ? outcome_variants : 1;
    for (std::uint32_t observed_outcomes = 0; observed_outcomes < observed_outcome_variants;
         ++observed_outcomes) {
      std::array<std::uint64_t, kNumBb84Labels> histogram{};
      for (std::uint64_t hidden_code = 0; hidden_code < hidden_variants; ++hidden_code) {
        for (std::size_t i = 0; i < hidden_slots.size(); ++i) {
          inputs[hidden_slots[i]] = static_cast<int>((hidden_code >> (2 * i)) & 3);
        }
        const std::uint32_t hidden_outcome_variants =
            model.knows_outcomes ? 1 : outcome_variants;
        for (std::uint32_t hidden_outcomes = 0; hidden_outcomes < hidden_outcome_variants;
             ++hidden_outcomes) {
          const std::uint32_t outcomes =
              model.knows_outcomes ? observed_outcomes : hidden_outcomes;
          const int final_label =
              fold_final_label(inputs[0], inputs.data() + 1, rounds, outcomes);
          ++histogram[final_label];
        }
      }
      // Optimal fixed strategy inside a knowledge class: guess the modal
      // label; ties break toward the first label in enum order.
      e.success_numerator += *std::max_element(histogram.begin(), histogram.end());
      for (int l = 0; l < kNumBb84Labels; ++l) e.label_counts[l] += histogram[l];
    }
  }
  e.total_cases = (std::uint64_t(1) << (2 * n_inputs)) * outcome_variants;

  LeakageReport report;
  report.rounds = rounds;
  report.guess_probability =
      static_cast<double>(e.success_numerator) / static_cast<double>(e.total_cases);
  for (int l = 0; l < kNumBb84Labels; ++l) {
    report.distribution[l] =
        static_cast<double>(e.label_counts[l]) / static_cast<double>(e.total_cases);
  }
  report.method = "exhaustive-enumeration";
  return report;
}

std::vector<LeakageReport> leakage_curve(const KnowledgeModel& model, int max_rounds) {
  if (max_rounds < 1 || max_rounds > kMaxRounds) {
    std::ostringstream os;
    os << "leakage_curve: max_rounds must be in 1.." << kMaxRounds << ", got " << max_rounds;
    throw Error(os.str());
  }
  std::vector<LeakageReport> curve;
  curve.reserve(max_rounds);
  for (int r = 1; r <= max_rounds; ++r) curve.push_back(guess_probability(model, r));
  return curve;
}

}  // namespace qspa::adversary
