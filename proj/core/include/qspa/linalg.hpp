#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qspa/error.hpp"
#include "qspa/rng.hpp"
#include "qspa/tolerances.hpp"

namespace qspa {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Returns the bit of `index` belonging to `qubit` (1-based, qubit 1 is the
/// most significant bit). Basis order is |0>,|1> for one qubit and
/// |00>,|01>,|10>,|11> for two.
int qubit_bit(int index, int qubit, int dim);

Mat identity(int dim);
Mat pauli_x();
Mat pauli_y();
Mat pauli_z();
Mat hadamard();
/// CNOT with qubit 1 as control, qubit 2 as target.
Mat cnot12();

/// Max-norm deviation of U†U from the identity.
double unitarity_deviation(const Mat& u);
/// Max-norm deviation of M from M†.
double hermiticity_deviation(const Mat& m);

/// Normalized pure state on 1 or 2 qubits.
class StateVector {
 public:
  /// Validates dimension (2 or 4), finiteness and unit norm.
  explicit StateVector(Vec amplitudes);

  static StateVector basis(int dim, int index);

  int dim() const { return static_cast<int>(amps_.size()); }
  int qubits() const { return dim() == 2 ? 1 : 2; }
  const Vec& amplitudes() const { return amps_; }
  Complex amp(int i) const { return amps_(i); }

 private:
  Vec amps_;
};

/// Density matrix on 1 or 2 qubits.
///
/// Three flavors share the type:
///   - Physical: Hermitian, unit trace, spectrum >= tol::kPsdFloor.
///   - Deviation: Hermitian only (the traceless high-temperature NMR
///     objects; trace and positivity do not apply).
///   - Estimate: Hermitian with unit trace but no positivity gate
///     (linear-inversion tomography under noise may return slightly
///     negative eigenvalues, which are reported rather than clipped).
class DensityMatrix {
 public:
  enum class Kind { Physical, Deviation, Estimate };

  static DensityMatrix physical(Mat entries);
  static DensityMatrix deviation(Mat entries);
  static DensityMatrix estimate(Mat entries);
  static DensityMatrix pure(const StateVector& psi);

  int dim() const { return static_cast<int>(m_.rows()); }
  Kind kind() const { return kind_; }
  bool is_deviation() const { return kind_ == Kind::Deviation; }
  const Mat& entries() const { return m_; }
  double trace_real() const { return m_.trace().real(); }

 private:
  DensityMatrix(Mat m, Kind kind) : m_(std::move(m)), kind_(kind) {}
  Mat m_;
  Kind kind_;
};

struct MeasurementRecord {
  int qubit_index;     // 1 or 2
  int outcome;         // 0 or 1
  double probability;  // true probability of the reported branch
  StateVector collapsed;
};

/// Kronecker product restricted to single-qubit operands; qubit 1 supplies
/// the most significant bit of the result.
Vec kron(const Vec& a, const Vec& b);
Mat kron(const Mat& a, const Mat& b);
StateVector kron(const StateVector& a, const StateVector& b);

/// U·s for vectors, U·rho·U† for matrices. Rejects non-unitary U, reporting
/// the max deviation of U†U from the identity.
StateVector apply_unitary(const Mat& u, const StateVector& s);
DensityMatrix apply_unitary(const Mat& u, const DensityMatrix& rho);

/// Trace-preserving reduction of a two-qubit matrix to the kept qubit.
DensityMatrix partial_trace(const DensityMatrix& rho, int keep_qubit);

/// sigma_z measurement of one qubit. The forced overload returns the
/// requested branch with its true probability and rejects branches with
/// probability below tol::kZeroBranch; the Rng overload samples by branch
/// probability. The collapsed state is renormalized.
MeasurementRecord project_measure(const StateVector& s, int qubit, int forced_outcome);
MeasurementRecord project_measure(const StateVector& s, int qubit, Rng& rng);

/// Uhlmann fidelity F = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, computed as
/// <psi|rho|psi> when one argument is pure. Both arguments must be physical
/// within tolerance.
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// <psi|rho|psi> without a positivity gate on rho (Hermitian and unit trace
/// are still required). Intended for comparing noisy reconstructions against
/// pure references.
double pure_state_fidelity(const DensityMatrix& rho, const StateVector& psi);

}  // namespace qspa
