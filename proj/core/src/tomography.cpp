#include "qspa/tomography.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <set>
#include <sstream>

namespace qspa::tomo {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::string pulse_token(ReadoutPulse p) {
  switch (p) {
    case ReadoutPulse::None:
      return "none";
    case ReadoutPulse::X90:
      return "x90";
    case ReadoutPulse::Y90:
      return "y90";
  }
  throw Error("pulse_token: invalid readout pulse");
}

Mat pulse_propagator(ReadoutPulse p, nmr::SpinSelect spin) {
  switch (p) {
    case ReadoutPulse::None:
      return identity(4);
    case ReadoutPulse::X90:
      return nmr::rotation_propagator(nmr::Rotation{spin, nmr::Axis::X, kPi / 2.0});
    case ReadoutPulse::Y90:
      return nmr::rotation_propagator(nmr::Rotation{spin, nmr::Axis::Y, kPi / 2.0});
  }
  throw Error("pulse_propagator: invalid readout pulse");
}

// The eight detection operators, fixed across experiments: the x/y
// quadratures of each spin split by the |0>/|1> population of the other
// spin (the two lines of its doublet).
const std::array<Mat, 8>& detection_operators() {
  static const std::array<Mat, 8> kOps = [] {
    std::array<Mat, 8> ops;
    const Mat id = identity(2);
    const Mat proj0 = (id + pauli_z()) / 2.0;  // |0><0|
    const Mat proj1 = (id - pauli_z()) / 2.0;  // |1><1|
    ops[0] = kron(pauli_x(), proj0);
    ops[1] = kron(pauli_y(), proj0);
    ops[2] = kron(pauli_x(), proj1);
    ops[3] = kron(pauli_y(), proj1);
    ops[4] = kron(proj0, pauli_x());
    ops[5] = kron(proj0, pauli_y());
    ops[6] = kron(proj1, pauli_x());
    ops[7] = kron(proj1, pauli_y());
    return ops;
  }();
  return kOps;
}

Mat experiment_propagator(const ReadoutExperiment& e) {
  return pulse_propagator(e.pulse2, nmr::SpinSelect::Spin2) *
         pulse_propagator(e.pulse1, nmr::SpinSelect::Spin1);
}

}  // namespace

std::string to_string(ReadoutPulse p) { return pulse_token(p); }

std::vector<ReadoutExperiment> readout_set() {
  std::vector<ReadoutExperiment> set;
  const ReadoutPulse pulses[3] = {ReadoutPulse::None, ReadoutPulse::X90, ReadoutPulse::Y90};
  for (ReadoutPulse p1 : pulses) {
    for (ReadoutPulse p2 : pulses) {
      set.push_back(ReadoutExperiment{p1, p2, pulse_token(p1) + "-" + pulse_token(p2)});
    }
  }
  return set;
}

ObservableRecord simulate_readout(const DensityMatrix& rho, const ReadoutExperiment& e) {
  if (rho.dim() != 4) throw Error("simulate_readout: state must be a two-spin matrix");
  const Mat u = experiment_propagator(e);
  const Mat rotated = u * rho.entries() * u.adjoint();
  ObservableRecord record;
  record.experiment_id = e.id;
  const auto& ops = detection_operators();
  for (int i = 0; i < 8; ++i) {
    record.values[i] = (ops[i] * rotated).trace().real();
  }
  return record;
}

ReconstructionResult reconstruct(const std::vector<ObservableRecord>& records) {
  const std::vector<ReadoutExperiment> set = readout_set();
  if (records.size() != set.size()) {
    std::ostringstream os;
    os << "reconstruct: expected the full readout set of " << set.size() << " records, got "
       << records.size();
    throw Error(os.str());
  }
  // Order records by the canonical set; every id must appear exactly once.
  std::vector<const ObservableRecord*> ordered(set.size(), nullptr);
  for (const ObservableRecord& r : records) {
    bool placed = false;
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (set[i].id == r.experiment_id) {
        if (ordered[i]) throw Error("reconstruct: duplicate record '" + r.experiment_id + "'");
        ordered[i] = &r;
        placed = true;
        break;
      }
    }
    if (!placed) throw Error("reconstruct: unknown experiment id '" + r.experiment_id + "'");
  }

  // <O>_e = sum_b Tr(U_e† O U_e B_b) c_b for the 15 traceless basis
  // elements; the identity component contributes nothing since every
  // detection operator is traceless.
  const auto& basis = nmr::ProductOperatorExpansion::basis();
  const auto& ops = detection_operators();
  Eigen::MatrixXd design(8 * set.size(), 15);
  Eigen::VectorXd observed(8 * set.size());
  for (std::size_t e = 0; e < set.size(); ++e) {
    const Mat u = experiment_propagator(set[e]);
    for (int i = 0; i < 8; ++i) {
      const Mat back_rotated = u.adjoint() * ops[i] * u;
      for (int b = 0; b < 15; ++b) {
        design(8 * e + i, b) = (back_rotated * basis[b + 1]).trace().real();
      }
      observed(8 * e + i) = ordered[e]->values[i];
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(14);
  if (smin <= smax * 1e-10) {
    throw Error("reconstruct: rank-deficient design operator");
  }
  const Eigen::VectorXd coeffs = svd.solve(observed);
  const double residual = (design * coeffs - observed).cwiseAbs().maxCoeff();

  Mat raw = identity(4) / 4.0;
  for (int b = 0; b < 15; ++b) raw += coeffs(b) * basis[b + 1];

  Mat symmetrized = (raw + raw.adjoint().eval()) / 2.0;
  symmetrized /= symmetrized.trace().real();
  const double shift = (symmetrized - raw).cwiseAbs().maxCoeff();

  return ReconstructionResult{DensityMatrix::estimate(std::move(symmetrized)), residual,
                              smax / smin, shift};
}

FigureData figure_data(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw Error("figure_data: state must be a two-spin matrix");
  FigureData fig;
  fig.basis_labels = {"00", "01", "10", "11"};
  fig.real_part = rho.entries().real();
  fig.imag_part = rho.entries().imag();
  return fig;
}

}  // namespace qspa::tomo
