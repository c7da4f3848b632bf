#pragma once

#include <array>
#include <string>
#include <vector>

#include "qspa/nmr.hpp"

namespace qspa::tomo {

enum class ReadoutPulse { None, X90, Y90 };

std::string to_string(ReadoutPulse p);

/// One tomography experiment: an optional 90-degree pulse per spin before
/// acquisition.
struct ReadoutExperiment {
  ReadoutPulse pulse1;
  ReadoutPulse pulse2;
  std::string id;  // "<pulse1>,<pulse2>", unique within the set
};

/// The eight doublet-line quadrature amplitudes of one experiment: for each
/// spin k (k first, then the other spin j),
///   <2Ix^k (1/2+Iz^j)>, <2Iy^k (1/2+Iz^j)>, <2Ix^k (1/2-Iz^j)>, <2Iy^k (1/2-Iz^j)>.
struct ObservableRecord {
  std::string experiment_id;
  std::array<double, 8> values;
};

struct ReconstructionResult {
  DensityMatrix rho;  // Hermitized, trace-normalized estimate
  double residual;    // max-norm of the least-squares fit residual
  double condition_number;
  /// Largest element moved by the Hermitization + trace-normalization step;
  /// stays below 1e-10 for noise-free records.
  double post_processing_shift;
};

/// The fixed nine-experiment set {none, x90, y90} x {none, x90, y90} in
/// deterministic order.
std::vector<ReadoutExperiment> readout_set();

/// Applies the experiment's pulses and evaluates the eight expectations
/// exactly.
ObservableRecord simulate_readout(const DensityMatrix& rho, const ReadoutExperiment& e);

/// Linear least-squares inversion of the full readout set (72 equations, 15
/// unknown deviation coefficients). Negative eigenvalues arising from noisy
/// records are reported, not clipped.
ReconstructionResult reconstruct(const std::vector<ObservableRecord>& records);

/// Bar-chart dataset: the real and imaginary parts of every matrix element,
/// row-major, with basis labels. Values are exactly the matrix entries.
struct FigureData {
  std::array<std::string, 4> basis_labels;
  Eigen::Matrix4d real_part;
  Eigen::Matrix4d imag_part;
};

FigureData figure_data(const DensityMatrix& rho);

}  // namespace qspa::tomo
