#include <benchmark/benchmark.h>

#include <cmath>

#include "qspa/adversary.hpp"
#include "qspa/nmr.hpp"
#include "qspa/protocol.hpp"
#include "qspa/tomography.hpp"

using namespace qspa;

namespace {

void BM_ApplyChc(benchmark::State& state) {
  const PureQubitState phi1(std::sqrt(3.0) / 2.0, 0.5);
  const PureQubitState phi2(std::cos(0.3), std::sin(0.3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_chc(phi1, phi2));
  }
}
BENCHMARK(BM_ApplyChc);

void BM_TruthTableAudit(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(verify_truth_tables());
  }
}
BENCHMARK(BM_TruthTableAudit);

void BM_QspaSequenceUnitary(benchmark::State& state) {
  const nmr::SpinSystem sys;
  const nmr::PulseSequence seq = nmr::qspa_pulse_sequence(sys, nmr::QspaMode::Composed);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nmr::sequence_unitary(seq, sys));
  }
}
BENCHMARK(BM_QspaSequenceUnitary);

void BM_PulsePipeline(benchmark::State& state) {
  const nmr::SpinSystem sys;
  const PureQubitState in1(1.0, 0.0);
  const PureQubitState in2(0.0, 1.0);
  for (auto _ : state) {
    DensityMatrix dev = nmr::pseudopure_prep(sys).final_state;
    dev = nmr::run_sequence(nmr::prepare_input_state(in1, in2), dev, sys);
    dev = nmr::run_sequence(nmr::qspa_pulse_sequence(sys, nmr::QspaMode::Composed), dev, sys);
    benchmark::DoNotOptimize(dev);
  }
}
BENCHMARK(BM_PulsePipeline);

void BM_LeakageEnumeration(benchmark::State& state) {
  const adversary::KnowledgeModel model{adversary::InputKnowledge::All, false};
  const int rounds = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(adversary::guess_probability(model, rounds));
  }
}
BENCHMARK(BM_LeakageEnumeration)->DenseRange(1, 6);

void BM_TomographyRoundTrip(benchmark::State& state) {
  const DensityMatrix rho =
      DensityMatrix::pure(apply_chc(PureQubitState(1.0, 0.0), PureQubitState(0.0, 1.0)));
  for (auto _ : state) {
    std::vector<tomo::ObservableRecord> records;
    for (const auto& e : tomo::readout_set()) records.push_back(tomo::simulate_readout(rho, e));
    benchmark::DoNotOptimize(tomo::reconstruct(records));
  }
}
BENCHMARK(BM_TomographyRoundTrip);

}  // namespace

BENCHMARK_MAIN();
