// qspa: command-line front end for the state-condensation simulator.
//
// Subcommands: chc, truth-table, nmr-run, verify, leakage, tomo. Every run
// is deterministic given its arguments and seed; all emitted files are
// byte-reproducible.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qspa/adversary.hpp"
#include "qspa/io.hpp"
#include "qspa/nmr.hpp"
#include "qspa/protocol.hpp"
#include "qspa/tomography.hpp"
#include "qspa/version.hpp"

namespace fs = std::filesystem;
using namespace qspa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitVerification = 2;

struct RunConfig {
  std::uint64_t seed = 0;
  nmr::SpinSystem sys;
  std::string out_dir = ".";
  std::string format = "json";  // figure-data format: json or csv

  std::string canonical() const {
    std::ostringstream os;
    os << "format=" << format << "\n"
       << "gamma_c=" << io::format_double(sys.gamma_c) << "\n"
       << "gamma_h=" << io::format_double(sys.gamma_h) << "\n"
       << "j12=" << io::format_double(sys.j12_hz) << "\n"
       << "nu1=" << io::format_double(sys.nu1_hz) << "\n"
       << "nu2=" << io::format_double(sys.nu2_hz) << "\n"
       << "seed=" << seed << "\n";
    return os.str();
  }

  std::string hash() const { return io::fnv1a_hex(canonical()); }

  io::FileMetadata metadata(const std::string& source_op) const {
    return io::FileMetadata{source_op, hash(), kVersion};
  }
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (...) {
    used = 0;
  }
  if (used != text.size()) throw Error(what + ": cannot parse number '" + text + "'");
  return value;
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    const std::uint64_t value = std::stoull(text, &used);
    if (used == text.size()) return value;
  } catch (...) {
  }
  throw Error("config: cannot parse seed '" + text + "'");
}

// Flags beat config-file entries, which beat defaults.
void apply_config_file(RunConfig& config, const std::string& path,
                       const std::map<std::string, bool>& flag_given) {
  const auto entries = io::parse_config(io::read_file(path));
  const auto want = [&](const char* key) {
    const auto it = entries.find(key);
    return it != entries.end() && !flag_given.at(key) ? &it->second : nullptr;
  };
  if (const auto* v = want("seed")) config.seed = parse_seed(*v);
  if (const auto* v = want("j12")) config.sys.j12_hz = parse_number(*v, "config j12");
  if (const auto* v = want("nu1")) config.sys.nu1_hz = parse_number(*v, "config nu1");
  if (const auto* v = want("nu2")) config.sys.nu2_hz = parse_number(*v, "config nu2");
  if (const auto* v = want("gamma_c")) config.sys.gamma_c = parse_number(*v, "config gamma_c");
  if (const auto* v = want("gamma_h")) config.sys.gamma_h = parse_number(*v, "config gamma_h");
  if (const auto* v = want("out")) config.out_dir = *v;
  if (const auto* v = want("format")) {
    if (*v != "json" && *v != "csv") {
      throw Error("config: format must be json or csv, got '" + *v + "'");
    }
    config.format = *v;
  }
  for (const auto& [key, value] : entries) {
    static const std::set<std::string> kKnown = {"seed", "j12",     "nu1", "nu2",
                                                 "gamma_c", "gamma_h", "out", "format"};
    if (!kKnown.count(key)) throw Error("config: unknown key '" + key + "'");
  }
}

/// Accepts a signal-state label (+z, -z, +x, -x) or a comma-separated real
/// amplitude pair, normalized within 1e-6 and renormalized exactly.
PureQubitState parse_input_state(const std::string& text) {
  if (const auto label = bb84_from_string(text)) return bb84_state(*label);
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw Error("input state must be +z, -z, +x, -x or 'a,b' amplitudes, got '" + text + "'");
  }
  const double a = parse_number(text.substr(0, comma), "amplitude a");
  const double b = parse_number(text.substr(comma + 1), "amplitude b");
  const double norm = std::sqrt(a * a + b * b);
  if (std::abs(norm * norm - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "input state '" << text << "' is not normalized: |a|^2+|b|^2 = " << norm * norm;
    throw Error(os.str());
  }
  return PureQubitState(a / norm, b / norm);
}

struct Emitter {
  fs::path dir;
  std::string format;

  void write(const std::string& name, const std::string& contents) const {
    fs::create_directories(dir);
    io::write_file((dir / name).string(), contents);
    std::cout << "wrote " << name << "\n";
  }

  void write_figure(const std::string& stem, const tomo::FigureData& fig,
                    const io::FileMetadata& meta) const {
    if (format == "csv") {
      write(stem + ".csv", io::figure_csv(fig));
    } else {
      write(stem + ".json", io::figure_json(fig, meta));
    }
  }
};

std::string condensation_json(const CondensationResult& result, const io::FileMetadata& meta) {
  std::ostringstream os;
  os << "{\n"
     << "  \"outcome\": " << result.outcome << ",\n"
     << "  \"probability\": " << io::format_double(result.probability) << ",\n"
     << "  \"condensed\": {\"real\": [" << io::format_double(result.condensed.a().real())
     << ", " << io::format_double(result.condensed.b().real()) << "], \"imag\": ["
     << io::format_double(result.condensed.a().imag()) << ", "
     << io::format_double(result.condensed.b().imag()) << "]},\n"
     << "  \"condensed_label\": ";
  if (result.condensed_label) {
    os << "\"" << to_string(*result.condensed_label) << "\"";
  } else {
    os << "null";
  }
  os << ",\n  \"metadata\": {\"config_hash\": \"" << meta.config_hash
     << "\", \"source_op\": \"" << meta.source_op << "\", \"tool_version\": \""
     << meta.tool_version << "\"}\n}\n";
  return os.str();
}

std::string replay_json(const nmr::PrepResult& prep, double gamma_c,
                        const io::FileMetadata& meta) {
  std::ostringstream os;
  os << "{\n  \"units\": \"gamma_C\",\n  \"steps\": [\n";
  for (std::size_t s = 0; s < prep.steps.size(); ++s) {
    os << "    {\"step\": \"" << prep.steps[s].first << "\", \"coefficients\": {";
    const auto& labels = nmr::ProductOperatorExpansion::labels();
    bool first = true;
    for (int i = 0; i < nmr::ProductOperatorExpansion::kSize; ++i) {
      const double c = prep.steps[s].second.coefficients[i] / gamma_c;
      if (std::abs(c) < 1e-9) continue;
      os << (first ? "" : ", ") << "\"" << labels[i] << "\": " << io::format_double(c);
      first = false;
    }
    os << "}}" << (s + 1 < prep.steps.size() ? "," : "") << "\n";
  }
  os << "  ],\n  \"metadata\": {\"config_hash\": \"" << meta.config_hash
     << "\", \"source_op\": \"" << meta.source_op << "\", \"tool_version\": \""
     << meta.tool_version << "\"}\n}\n";
  return os.str();
}

// --- subcommand handlers ---

int run_chc(const RunConfig& config, const std::string& in1, const std::string& in2,
            std::optional<int> outcome) {
  const PureQubitState phi1 = parse_input_state(in1);
  const PureQubitState phi2 = parse_input_state(in2);
  const StateVector joint = apply_chc(phi1, phi2);

  CondensationResult result = [&] {
    if (outcome) {
      if (*outcome != 0 && *outcome != 1) throw Error("--outcome must be 0 or 1");
      return condense(joint, *outcome);
    }
    Rng rng(config.seed);
    return condense(joint, rng);
  }();

  const Emitter emit{config.out_dir, config.format};
  emit.write("chc_joint_state.json",
             io::state_vector_json(joint.amplitudes(), config.metadata("chc.apply")));
  emit.write("chc_condensation.json",
             condensation_json(result, config.metadata("chc.condense")));
  emit.write_figure("chc_joint_figure", tomo::figure_data(DensityMatrix::pure(joint)),
                    config.metadata("chc.figure"));

  std::cout << "outcome " << result.outcome << " probability "
            << io::format_double(result.probability) << "\n";
  if (result.condensed_label) {
    std::cout << "condensed label: " << to_string(*result.condensed_label) << "\n";
  } else {
    std::cout << "condensed state: [" << io::format_double(result.condensed.a().real()) << "+"
              << io::format_double(result.condensed.a().imag()) << "i, "
              << io::format_double(result.condensed.b().real()) << "+"
              << io::format_double(result.condensed.b().imag()) << "i]\n";
  }
  return kExitOk;
}

int run_truth_table(const RunConfig& config) {
  const Emitter emit{config.out_dir, config.format};
  emit.write("truth_table_outcome0.csv", io::truth_table_csv(0));
  emit.write("truth_table_outcome1.csv", io::truth_table_csv(1));
  return kExitOk;
}

nmr::QspaMode parse_mode(const std::string& mode) {
  if (mode == "paper-literal") return nmr::QspaMode::Literal;
  if (mode == "verified-default") return nmr::QspaMode::Composed;
  throw Error("--mode must be paper-literal or verified-default, got '" + mode + "'");
}

int run_nmr(const RunConfig& config, const std::string& in1, const std::string& in2,
            const std::string& mode, const std::string& sequence_path) {
  config.sys.validate();
  const PureQubitState phi1 = parse_input_state(in1);
  const PureQubitState phi2 = parse_input_state(in2);

  const nmr::PrepResult prep = nmr::pseudopure_prep(config.sys);
  DensityMatrix dev = prep.final_state;
  dev = nmr::run_sequence(nmr::prepare_input_state(phi1, phi2), dev, config.sys);
  const DensityMatrix input_state = nmr::deviation_to_state(dev, config.sys);

  nmr::PulseSequence seq;
  if (!sequence_path.empty()) {
    seq = nmr::parse_sequence_text(io::read_file(sequence_path), "imported");
  } else {
    seq = nmr::qspa_pulse_sequence(config.sys, parse_mode(mode));
  }
  dev = nmr::run_sequence(seq, dev, config.sys);
  const DensityMatrix output_state = nmr::deviation_to_state(dev, config.sys);

  const Emitter emit{config.out_dir, config.format};
  emit.write("nmr_input_state.json",
             io::density_matrix_json(input_state.entries(), config.metadata("nmr.input")));
  emit.write("nmr_output_state.json",
             io::density_matrix_json(output_state.entries(), config.metadata("nmr.output")));
  emit.write_figure("nmr_input_figure", tomo::figure_data(input_state),
                    config.metadata("nmr.input.figure"));
  emit.write_figure("nmr_output_figure", tomo::figure_data(output_state),
                    config.metadata("nmr.output.figure"));
  emit.write("nmr_prep_replay.json",
             replay_json(prep, config.sys.gamma_c, config.metadata("nmr.prep")));

  for (const auto& [step, expansion] : prep.steps) {
    std::cout << "prep " << step << ": " << expansion.pretty(config.sys.gamma_c) << "\n";
  }
  std::cout << "sequence: " << seq.label << " (" << seq.events.size() << " events)\n";
  return kExitOk;
}

nmr::PhaseFreedom parse_freedoms(const std::string& freedoms) {
  if (freedoms == "global-only") return nmr::PhaseFreedom::GlobalOnly;
  if (freedoms == "global-plus-z") return nmr::PhaseFreedom::GlobalPlusZ;
  throw Error("--freedoms must be global-only or global-plus-z, got '" + freedoms + "'");
}

void print_equivalence(const std::string& name, const nmr::PhaseEquivalence& eq) {
  std::cout << name << ": " << (eq.verdict ? "equivalent" : "NOT equivalent")
            << ", residual " << io::format_double(eq.max_deviation) << ", fitted phases [";
  for (std::size_t i = 0; i < eq.fitted_phases.size(); ++i) {
    std::cout << (i ? ", " : "") << io::format_double(eq.fitted_phases[i]);
  }
  std::cout << "]\n";
}

int run_verify(const RunConfig& config, const std::string& target, const std::string& mode,
               std::string freedoms, const std::string& sequence_path) {
  config.sys.validate();
  if (target == "cnot") {
    if (freedoms.empty()) freedoms = "global-only";
    const Mat u = nmr::sequence_unitary(nmr::cnot_pulse_sequence(config.sys), config.sys);
    const auto eq = nmr::equivalent_up_to_phase(u, cnot12(), parse_freedoms(freedoms));
    print_equivalence("cnot pulse sequence vs gate", eq);
    return eq.verdict ? kExitOk : kExitVerification;
  }
  if (target == "qspa") {
    if (freedoms.empty()) freedoms = "global-plus-z";
    const nmr::QspaMode parsed_mode = parse_mode(mode);
    const Mat u =
        nmr::sequence_unitary(nmr::qspa_pulse_sequence(config.sys, parsed_mode), config.sys);
    const auto eq = nmr::equivalent_up_to_phase(u, chc_unitary(), parse_freedoms(freedoms));
    print_equivalence("qspa pulse sequence (" + mode + ") vs gate", eq);
    if (parsed_mode == nmr::QspaMode::Literal) {
      // Diagnostic only: the literal listing's phase conventions are not a
      // contract, so the exit code stays 0 either way.
      return kExitOk;
    }
    return eq.verdict ? kExitOk : kExitVerification;
  }
  if (target == "sequence") {
    if (sequence_path.empty()) throw Error("verify sequence needs --sequence <path>");
    if (freedoms.empty()) freedoms = "global-plus-z";
    const bool against_cnot = mode == "cnot";
    if (!against_cnot && mode != "chc" && mode != "verified-default") {
      throw Error("verify sequence takes --mode cnot or chc, got '" + mode + "'");
    }
    const nmr::PulseSequence seq =
        nmr::parse_sequence_text(io::read_file(sequence_path), "imported");
    const Mat u = nmr::sequence_unitary(seq, config.sys);
    const Mat reference = against_cnot ? cnot12() : chc_unitary();
    const auto eq = nmr::equivalent_up_to_phase(u, reference, parse_freedoms(freedoms));
    print_equivalence(std::string("imported sequence vs ") + (against_cnot ? "cnot" : "chc"),
                      eq);
    return eq.verdict ? kExitOk : kExitVerification;
  }
  throw Error("verify target must be cnot, qspa or sequence, got '" + target + "'");
}

int run_leakage(const RunConfig& config, const std::string& model_text, bool knows_outcomes,
                int max_rounds) {
  adversary::KnowledgeModel model;
  if (model_text == "none") {
    model.knows_inputs = adversary::InputKnowledge::None;
  } else if (model_text == "control-only") {
    model.knows_inputs = adversary::InputKnowledge::ControlOnly;
  } else if (model_text == "target-only") {
    model.knows_inputs = adversary::InputKnowledge::TargetOnly;
  } else if (model_text == "all") {
    model.knows_inputs = adversary::InputKnowledge::All;
  } else {
    throw Error("--model must be none, control-only, target-only or all, got '" + model_text +
                "'");
  }
  model.knows_outcomes = knows_outcomes;

  const auto curve = adversary::leakage_curve(model, max_rounds);
  const Emitter emit{config.out_dir, config.format};
  emit.write("leakage_curve.csv", io::leakage_csv(curve));
  for (const auto& report : curve) {
    std::cout << "rounds " << report.rounds << ": guess probability "
              << io::format_double(report.guess_probability) << "\n";
  }
  return kExitOk;
}

DensityMatrix resolve_tomo_source(const std::string& source) {
  const double c15 = std::cos(15.0 * M_PI / 180.0);
  const double s15 = std::sin(15.0 * M_PI / 180.0);
  if (source == "basis01") {
    return DensityMatrix::pure(StateVector::basis(4, 1));
  }
  if (source == "bell-out") {
    return DensityMatrix::pure(
        apply_chc(PureQubitState(1.0, 0.0), PureQubitState(0.0, 1.0)));
  }
  if (source == "general-in") {
    return DensityMatrix::pure(kron(PureQubitState(std::sqrt(3.0) / 2.0, 0.5).to_state(),
                                    PureQubitState(c15, s15).to_state()));
  }
  if (source == "general-out") {
    return DensityMatrix::pure(
        apply_chc(PureQubitState(std::sqrt(3.0) / 2.0, 0.5), PureQubitState(c15, s15)));
  }
  // Anything else is a density-matrix JSON file.
  return DensityMatrix::estimate(io::parse_density_matrix_json(io::read_file(source)));
}

int run_tomo(const RunConfig& config, const std::string& source, double noise_sigma) {
  const DensityMatrix truth = resolve_tomo_source(source);

  std::vector<tomo::ObservableRecord> records;
  Rng rng(config.seed);
  for (const auto& e : tomo::readout_set()) {
    tomo::ObservableRecord record = tomo::simulate_readout(truth, e);
    if (noise_sigma > 0.0) {
      for (double& v : record.values) v += noise_sigma * rng.gaussian();
    }
    records.push_back(std::move(record));
  }

  const tomo::ReconstructionResult result = tomo::reconstruct(records);

  const Emitter emit{config.out_dir, config.format};
  emit.write("tomo_records.csv", io::records_csv(records));
  emit.write("tomo_reconstruction.json",
             io::density_matrix_json(result.rho.entries(), config.metadata("tomo.reconstruct")));
  emit.write_figure("tomo_figure", tomo::figure_data(result.rho),
                    config.metadata("tomo.figure"));

  std::ostringstream report;
  report << "{\n  \"residual\": " << io::format_double(result.residual)
         << ",\n  \"condition_number\": " << io::format_double(result.condition_number)
         << ",\n  \"post_processing_shift\": "
         << io::format_double(result.post_processing_shift) << ",\n  \"noise_sigma\": "
         << io::format_double(noise_sigma) << "\n}\n";
  emit.write("tomo_report.json", report.str());

  std::cout << "residual " << io::format_double(result.residual) << ", condition number "
            << io::format_double(result.condition_number) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact circuit-level and pulse-level simulator for two-qubit state condensation"};
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  std::string config_path;
  auto* seed_opt = app.add_option("--seed", config.seed, "RNG seed (default 0)");
  app.add_option("--config", config_path, "flat key=value config file");
  auto* out_opt = app.add_option("--out", config.out_dir, "output directory (default .)");
  auto* format_opt =
      app.add_option("--format", config.format, "figure-data format: json or csv")
          ->check(CLI::IsMember({"json", "csv"}));
  auto* j12_opt = app.add_option("--j12", config.sys.j12_hz, "scalar coupling in Hz");
  auto* nu1_opt = app.add_option("--nu1", config.sys.nu1_hz, "spin-1 offset in Hz");
  auto* nu2_opt = app.add_option("--nu2", config.sys.nu2_hz, "spin-2 offset in Hz");
  auto* gamma_c_opt = app.add_option("--gamma-c", config.sys.gamma_c, "gyromagnetic ratio C");
  auto* gamma_h_opt = app.add_option("--gamma-h", config.sys.gamma_h, "gyromagnetic ratio H");

  // chc
  auto* chc = app.add_subcommand("chc", "apply the condensation circuit and measure");
  std::string chc_in1 = "+z", chc_in2 = "+z";
  int chc_outcome = -1;
  chc->add_option("--in1", chc_in1, "control input: label or a,b")->required();
  chc->add_option("--in2", chc_in2, "target input: label or a,b")->required();
  auto* chc_outcome_opt =
      chc->add_option("--outcome", chc_outcome, "force the measurement outcome (0 or 1)");

  // truth-table
  auto* truth = app.add_subcommand("truth-table", "emit both condensation lookup tables");

  // nmr-run
  auto* nmr_cmd = app.add_subcommand("nmr-run", "pulse-level pipeline: prep, inputs, condensation");
  std::string nmr_in1 = "+z", nmr_in2 = "-z";
  std::string nmr_mode = "verified-default";
  std::string nmr_sequence;
  nmr_cmd->add_option("--in1", nmr_in1, "control input: label or real a,b")->required();
  nmr_cmd->add_option("--in2", nmr_in2, "target input: label or real a,b")->required();
  nmr_cmd->add_option("--mode", nmr_mode, "paper-literal or verified-default");
  nmr_cmd->add_option("--sequence", nmr_sequence,
                      "run this pulse-sequence file instead of the built-in program");

  // verify
  auto* verify = app.add_subcommand("verify", "gate vs pulse equivalence checks");
  std::string verify_target;
  std::string verify_mode = "verified-default";
  std::string verify_freedoms;
  std::string verify_sequence;
  verify->add_option("target", verify_target, "cnot, qspa or sequence")->required();
  verify->add_option("--mode", verify_mode,
                     "qspa: paper-literal|verified-default; sequence: cnot|chc reference");
  verify->add_option("--freedoms", verify_freedoms, "global-only or global-plus-z");
  verify->add_option("--sequence", verify_sequence, "pulse-sequence file for target 'sequence'");

  // leakage
  auto* leakage = app.add_subcommand("leakage", "adversary guess-probability curve");
  std::string leakage_model = "all";
  bool leakage_outcomes = false;
  int leakage_rounds = 1;
  leakage->add_option("--model", leakage_model, "none, control-only, target-only or all");
  leakage->add_flag("--knows-outcomes", leakage_outcomes,
                    "adversary also sees the measurement outcomes");
  leakage->add_option("--max-rounds", leakage_rounds, "curve length (1..8)")->required();

  // tomo
  auto* tomo_cmd = app.add_subcommand("tomo", "simulated tomography and reconstruction");
  std::string tomo_source;
  double tomo_sigma = 0.0;
  tomo_cmd
      ->add_option("--source", tomo_source,
                   "basis01, bell-out, general-in, general-out or a density-matrix JSON file")
      ->required();
  tomo_cmd->add_option("--noise-sigma", tomo_sigma, "additive gaussian noise on observables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (!config_path.empty()) {
      const std::map<std::string, bool> flag_given = {
          {"seed", seed_opt->count() > 0},       {"j12", j12_opt->count() > 0},
          {"nu1", nu1_opt->count() > 0},         {"nu2", nu2_opt->count() > 0},
          {"gamma_c", gamma_c_opt->count() > 0}, {"gamma_h", gamma_h_opt->count() > 0},
          {"out", out_opt->count() > 0},         {"format", format_opt->count() > 0},
      };
      apply_config_file(config, config_path, flag_given);
    }

    if (chc->parsed()) {
      std::optional<int> outcome;
      if (chc_outcome_opt->count() > 0) outcome = chc_outcome;
      return run_chc(config, chc_in1, chc_in2, outcome);
    }
    if (truth->parsed()) return run_truth_table(config);
    if (nmr_cmd->parsed()) return run_nmr(config, nmr_in1, nmr_in2, nmr_mode, nmr_sequence);
    if (verify->parsed()) {
      return run_verify(config, verify_target, verify_mode, verify_freedoms, verify_sequence);
    }
    if (leakage->parsed()) {
      return run_leakage(config, leakage_model, leakage_outcomes, leakage_rounds);
    }
    if (tomo_cmd->parsed()) return run_tomo(config, tomo_source, tomo_sigma);
    std::cerr << "error: no subcommand\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
