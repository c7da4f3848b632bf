#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "qspa/linalg.hpp"
#include "qspa/protocol.hpp"

namespace qspa::nmr {

/// Two-spin system parameters. Resonance offsets are in the rotating frame
/// (Hz), J is the scalar coupling (Hz), gyromagnetic ratios in rad s^-1 T^-1.
/// Defaults: on-resonance frame, J = 215 Hz, standard 13C / 1H ratios (only
/// their ratio enters the preparation angle).
struct SpinSystem {
  double nu1_hz = 0.0;
  double nu2_hz = 0.0;
  double j12_hz = 215.0;
  double gamma_c = 6.728284e7;
  double gamma_h = 2.6752218744e8;

  void validate() const;  // J > 0 and gamma_h > 2 gamma_c
};

enum class Axis { X, Y, Z, MinusX, MinusY, MinusZ };
enum class SpinSelect { Spin1 = 1, Spin2 = 2, Both = 3 };

/// Rotation of the selected spin(s) through `angle` about `axis`. The
/// propagator is exp(-i * angle * sum_k I_axis^k) with I = sigma/2, which
/// realizes the operator maps
///   [t]_x  : Iz -> cos t Iz - sin t Iy
///   [t]_-x : Iz -> cos t Iz + sin t Iy
///   [t]_y  : Iz -> cos t Iz + sin t Ix,  Ix -> cos t Ix - sin t Iz
///   [t]_z  : Ix -> cos t Ix + sin t Iy
struct Rotation {
  SpinSelect spins;
  Axis axis;
  double angle;
};

/// Free evolution. Duration is the literal `seconds` part plus the symbolic
/// `j_fraction / J12` part; shipped sequences use the symbolic form so that
/// one sequence serves every coupling constant.
struct Delay {
  double seconds = 0.0;
  double j_fraction = 0.0;

  double resolve(const SpinSystem& sys) const;
};

/// Ideal z-gradient crush: projects onto coherence order zero.
struct GradientZ {};

using PulseEvent = std::variant<Rotation, Delay, GradientZ>;

struct PulseSequence {
  std::vector<PulseEvent> events;
  std::string label;
};

/// Real coefficients of a Hermitian two-spin matrix over the 16-element
/// product-operator basis {E, Ix1..Iz1, Ix2..Iz2, 2Ix1Ix2..2Iz1Iz2}.
struct ProductOperatorExpansion {
  static constexpr int kSize = 16;

  static const std::array<std::string, kSize>& labels();
  static const std::array<Mat, kSize>& basis();
  static int index_of(std::string_view label);

  std::array<double, kSize> coefficients{};

  double coefficient(std::string_view label) const;
  Mat reconstruct() const;
  /// Human-readable form, e.g. "Iz1 + 2*Iz2"; coefficients are divided by
  /// `scale` before formatting and near-zero terms are dropped.
  std::string pretty(double scale = 1.0) const;
};

struct PrepConfig {
  double theta;  // radians, in (0, pi/2)
};

/// H = -pi nu1 sigma_z^1 - pi nu2 sigma_z^2 + (pi/2) J12 sigma_z^1 sigma_z^2
/// in angular-frequency units (hbar = 1); diagonal and real.
Mat hamiltonian(const SpinSystem& sys);

Mat rotation_propagator(const Rotation& e);

/// exp(-i H t) for the diagonal Hamiltonian above.
Mat delay_propagator(double seconds, const SpinSystem& sys);

/// Zeroes every element between basis states of different total
/// z-magnetization; keeps the diagonal plus the |01><10| zero-quantum block.
DensityMatrix gradient_crush(const DensityMatrix& rho);

/// Thermal-equilibrium deviation gamma_C Iz1 + gamma_H Iz2.
DensityMatrix thermal_state(const SpinSystem& sys);

/// First-pulse angle of the spatial-averaging preparation:
/// cos(theta) = 2 gamma_C / gamma_H. Rejects systems where the ratio
/// reaches 1.
PrepConfig prep_angle(const SpinSystem& sys);

struct PrepResult {
  DensityMatrix final_state;  // deviation, equals 2 gamma_C (|00><00| - E/4)
  /// Expansion after every step, starting with the thermal state.
  std::vector<std::pair<std::string, ProductOperatorExpansion>> steps;
};

/// Spatial-averaging preparation of the pseudopure |00> state:
/// [theta]_x^2 -> [grad]_z -> [pi/4]_-x^2 -> [1/(2J)] -> [pi/4]_y^2 ->
/// [grad]_z, with the coupling delay realized as a refocused block.
PrepResult pseudopure_prep(const SpinSystem& sys);

/// The physical state represented by a pseudopure deviation:
/// rho = dev / (2 gamma_C) + E/4. The identity offset commutes with every
/// pulse, delay and gradient, so this holds anywhere downstream of the
/// preparation.
DensityMatrix deviation_to_state(const DensityMatrix& dev, const SpinSystem& sys);
/// The same steps as a flat event list.
PulseSequence pseudopure_prep_sequence(const SpinSystem& sys);

/// y-rotations taking pseudopure |00> to the product of the two (real)
/// targets; angles are 2*atan2(b, a) per spin, zero-angle pulses omitted.
/// Rejects targets with complex amplitudes.
PulseSequence prepare_input_state(const PureQubitState& target1, const PureQubitState& target2);

/// Delay(1/4J) -> [pi]_x^{1,2} -> Delay(1/4J) -> [pi]_-x^{1,2}. The net
/// propagator equals pure J-coupling evolution for 1/(2J) regardless of the
/// resonance offsets.
PulseSequence refocused_j_block(const SpinSystem& sys);

/// CNOT (control spin 1) as pulses:
/// [pi/2]_y^2 -> [1/(2J)] -> [pi]_-y^2 -> [pi/2]_x^2 -> [pi/2]_z^{1,2};
/// equal to the CNOT matrix up to a global phase.
PulseSequence cnot_pulse_sequence(const SpinSystem& sys);

/// Literal: the spectrometer pulse listing for the condensation operation,
/// transcribed event for event. Composed: cnot_pulse_sequence + the
/// Hadamard block [pi/2]_y^1 -> [pi]_-x^1 + cnot_pulse_sequence. Both
/// realize every [1/(2J)] via refocused_j_block.
enum class QspaMode { Literal, Composed };

PulseSequence qspa_pulse_sequence(const SpinSystem& sys, QspaMode mode);

/// Ordered product of event propagators, leftmost event applied first.
/// Rejects sequences containing gradients (use run_sequence).
Mat sequence_unitary(const PulseSequence& seq, const SpinSystem& sys);

/// Applies each event in order; unitary events conjugate rho, gradients
/// apply gradient_crush.
DensityMatrix run_sequence(const PulseSequence& seq, const DensityMatrix& rho,
                           const SpinSystem& sys);

enum class PhaseFreedom { GlobalOnly, GlobalPlusZ };

struct PhaseEquivalence {
  bool verdict;
  /// GlobalOnly: {phi}. GlobalPlusZ: {phi, alpha_pre, beta_pre, alpha_post,
  /// beta_post} with V ~ e^{i phi} Rz1(a_post)Rz2(b_post) U Rz1(a_pre)Rz2(b_pre).
  std::vector<double> fitted_phases;
  double max_deviation;
};

/// Deterministic coordinate search for the phase freedoms minimizing the
/// max-norm residual between U and V; verdict is true when the residual
/// drops below 1e-8.
PhaseEquivalence equivalent_up_to_phase(const Mat& u, const Mat& v, PhaseFreedom freedom);

ProductOperatorExpansion product_operator_expand(const DensityMatrix& rho);

// --- line-oriented pulse-sequence text format ---
//
//   rot spins=<1|2|12> axis=<x|y|z|-x|-y|-z> angle=<radians or fraction like pi/2>
//   delay t=<seconds or 1/(2J)|1/(4J)>
//   grad z
//
// '#' starts a comment; unknown tokens are errors carrying line numbers.

std::string serialize_sequence(const PulseSequence& seq);
PulseSequence parse_sequence(std::istream& in, const std::string& label = "");
PulseSequence parse_sequence_text(const std::string& text, const std::string& label = "");

}  // namespace qspa::nmr
