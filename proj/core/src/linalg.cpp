#include "qspa/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace qspa {

namespace {

constexpr Complex kI{0.0, 1.0};

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

bool all_finite(const Mat& m) { return m.allFinite(); }

void check_dim_2_or_4(int dim, const char* what) {
  if (dim != 2 && dim != 4) {
    std::ostringstream os;
    os << what << ": dimension must be 2 or 4, got " << dim;
    throw Error(os.str());
  }
}

}  // namespace

int qubit_bit(int index, int qubit, int dim) {
  if (dim == 2) {
    require(qubit == 1, "qubit_bit: single-qubit state has only qubit 1");
    return index & 1;
  }
  require(dim == 4, "qubit_bit: dimension must be 2 or 4");
  require(qubit == 1 || qubit == 2, "qubit_bit: qubit index must be 1 or 2");
  return qubit == 1 ? (index >> 1) & 1 : index & 1;
}

Mat identity(int dim) { return Mat::Identity(dim, dim); }

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Mat pauli_y() {
  Mat m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Mat hadamard() {
  const double s = 1.0 / std::sqrt(2.0);
  Mat m(2, 2);
  m << s, s, s, -s;
  return m;
}

Mat cnot12() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return m;
}

double unitarity_deviation(const Mat& u) {
  return (u.adjoint() * u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

double hermiticity_deviation(const Mat& m) {
  return (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
}

StateVector::StateVector(Vec amplitudes) : amps_(std::move(amplitudes)) {
  check_dim_2_or_4(static_cast<int>(amps_.size()), "StateVector");
  require(amps_.allFinite(), "StateVector: amplitudes must be finite");
  const double norm2 = amps_.squaredNorm();
  if (std::abs(norm2 - 1.0) > tol::kUnitary) {
    std::ostringstream os;
    os << "StateVector: not normalized, squared norm deviates by " << std::abs(norm2 - 1.0);
    throw Error(os.str());
  }
}

StateVector StateVector::basis(int dim, int index) {
  check_dim_2_or_4(dim, "StateVector::basis");
  require(index >= 0 && index < dim, "StateVector::basis: index out of range");
  Vec v = Vec::Zero(dim);
  v(index) = 1.0;
  return StateVector(std::move(v));
}

namespace {

// Deviation matrices carry physical gyromagnetic scales (~1e8), so the
// Hermiticity gate is relative to the largest entry.
void check_hermitian_relative(const Mat& entries) {
  check_dim_2_or_4(static_cast<int>(entries.rows()), "DensityMatrix");
  require(entries.rows() == entries.cols(), "DensityMatrix: must be square");
  require(all_finite(entries), "DensityMatrix: entries must be finite");
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  const double herm = hermiticity_deviation(entries) / scale;
  if (herm > tol::kUnitary) {
    std::ostringstream os;
    os << "DensityMatrix: not Hermitian, relative deviation " << herm;
    throw Error(os.str());
  }
}

}  // namespace

DensityMatrix DensityMatrix::physical(Mat entries) {
  check_hermitian_relative(entries);
  const double tr = entries.trace().real();
  if (std::abs(tr - 1.0) > tol::kUnitary) {
    std::ostringstream os;
    os << "DensityMatrix: physical state must have unit trace, got " << tr;
    throw Error(os.str());
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(entries, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < tol::kPsdFloor) {
    std::ostringstream os;
    os << "DensityMatrix: physical state must be positive semidefinite, min eigenvalue "
       << min_eig;
    throw Error(os.str());
  }
  return DensityMatrix(std::move(entries), Kind::Physical);
}

DensityMatrix DensityMatrix::deviation(Mat entries) {
  check_hermitian_relative(entries);
  return DensityMatrix(std::move(entries), Kind::Deviation);
}

DensityMatrix DensityMatrix::estimate(Mat entries) {
  check_hermitian_relative(entries);
  const double tr = entries.trace().real();
  if (std::abs(tr - 1.0) > tol::kUnitary) {
    std::ostringstream os;
    os << "DensityMatrix: estimate must have unit trace, got " << tr;
    throw Error(os.str());
  }
  return DensityMatrix(std::move(entries), Kind::Estimate);
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  Mat m = psi.amplitudes() * psi.amplitudes().adjoint();
  return physical(std::move(m));
}

Vec kron(const Vec& a, const Vec& b) {
  require(a.size() == 2 && b.size() == 2, "kron: operands must be single-qubit vectors");
  Vec out(4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(2 * i + j) = a(i) * b(j);
  return out;
}

Mat kron(const Mat& a, const Mat& b) {
  require(a.rows() == 2 && a.cols() == 2 && b.rows() == 2 && b.cols() == 2,
          "kron: operands must be 2x2 matrices");
  Mat out(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

StateVector kron(const StateVector& a, const StateVector& b) {
  require(a.dim() == 2 && b.dim() == 2, "kron: operands must be single-qubit states");
  return StateVector(kron(a.amplitudes(), b.amplitudes()));
}

namespace {

void check_unitary(const Mat& u, int dim) {
  require(u.rows() == u.cols(), "apply_unitary: U must be square");
  require(static_cast<int>(u.rows()) == dim, "apply_unitary: dimension mismatch");
  const double dev = unitarity_deviation(u);
  if (dev > tol::kUnitary) {
    std::ostringstream os;
    os << "apply_unitary: U is not unitary, max deviation of U†U from I is " << dev;
    throw Error(os.str());
  }
}

}  // namespace

StateVector apply_unitary(const Mat& u, const StateVector& s) {
  check_unitary(u, s.dim());
  return StateVector(u * s.amplitudes());
}

DensityMatrix apply_unitary(const Mat& u, const DensityMatrix& rho) {
  check_unitary(u, rho.dim());
  Mat out = u * rho.entries() * u.adjoint();
  switch (rho.kind()) {
    case DensityMatrix::Kind::Physical:
      return DensityMatrix::physical(std::move(out));
    case DensityMatrix::Kind::Estimate:
      return DensityMatrix::estimate(std::move(out));
    case DensityMatrix::Kind::Deviation:
      break;
  }
  return DensityMatrix::deviation(std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep_qubit) {
  require(rho.dim() == 4, "partial_trace: input must be a two-qubit matrix");
  require(keep_qubit == 1 || keep_qubit == 2, "partial_trace: keep qubit must be 1 or 2");
  const Mat& m = rho.entries();
  Mat out = Mat::Zero(2, 2);
  if (keep_qubit == 1) {
    for (int i = 0; i < 2; ++i)
      for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 2; ++j) out(i, k) += m(2 * i + j, 2 * k + j);
  } else {
    for (int j = 0; j < 2; ++j)
      for (int l = 0; l < 2; ++l)
        for (int i = 0; i < 2; ++i) out(j, l) += m(2 * i + j, 2 * i + l);
  }
  switch (rho.kind()) {
    case DensityMatrix::Kind::Physical:
      return DensityMatrix::physical(std::move(out));
    case DensityMatrix::Kind::Estimate:
      return DensityMatrix::estimate(std::move(out));
    case DensityMatrix::Kind::Deviation:
      break;
  }
  return DensityMatrix::deviation(std::move(out));
}

namespace {

MeasurementRecord measure_impl(const StateVector& s, int qubit, int outcome, double probability) {
  Vec collapsed = Vec::Zero(s.dim());
  for (int i = 0; i < s.dim(); ++i) {
    if (qubit_bit(i, qubit, s.dim()) == outcome) collapsed(i) = s.amp(i);
  }
  collapsed /= std::sqrt(probability);
  return MeasurementRecord{qubit, outcome, probability, StateVector(std::move(collapsed))};
}

double branch_probability(const StateVector& s, int qubit, int outcome) {
  double p = 0.0;
  for (int i = 0; i < s.dim(); ++i) {
    if (qubit_bit(i, qubit, s.dim()) == outcome) p += std::norm(s.amp(i));
  }
  return p;
}

}  // namespace

MeasurementRecord project_measure(const StateVector& s, int qubit, int forced_outcome) {
  require(forced_outcome == 0 || forced_outcome == 1, "project_measure: outcome must be 0 or 1");
  const double p = branch_probability(s, qubit, forced_outcome);
  if (p < tol::kZeroBranch) {
    std::ostringstream os;
    os << "project_measure: forced outcome " << forced_outcome
       << " has vanishing probability " << p;
    throw Error(os.str());
  }
  return measure_impl(s, qubit, forced_outcome, p);
}

MeasurementRecord project_measure(const StateVector& s, int qubit, Rng& rng) {
  const double p0 = branch_probability(s, qubit, 0);
  const int outcome = rng.uniform() < p0 ? 0 : 1;
  return measure_impl(s, qubit, outcome, outcome == 0 ? p0 : 1.0 - p0);
}

namespace {

// Hermitian square root via eigendecomposition; tiny negative eigenvalues
// (within the physicality floor) are clamped to zero.
Mat hermitian_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) lam(i) = lam(i) > 0.0 ? std::sqrt(lam(i)) : 0.0;
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

void check_physical_for_fidelity(const DensityMatrix& rho, const char* name) {
  if (rho.is_deviation()) {
    throw Error(std::string("fidelity: ") + name + " is a deviation matrix, not a physical state");
  }
  if (rho.kind() == DensityMatrix::Kind::Estimate) {
    Eigen::SelfAdjointEigenSolver<Mat> es(rho.entries(), Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < tol::kPsdFloor) {
      std::ostringstream os;
      os << "fidelity: " << name << " is not positive semidefinite (min eigenvalue " << min_eig
         << "); use pure_state_fidelity for noisy estimates";
      throw Error(os.str());
    }
  }
}

// Returns the eigenvector of the (within tolerance) unit eigenvalue if the
// state is pure, i.e. rank one.
bool pure_component(const DensityMatrix& rho, Vec* out) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.entries());
  const int last = static_cast<int>(es.eigenvalues().size()) - 1;
  if (es.eigenvalues()(last) >= 1.0 + tol::kPsdFloor) {
    *out = es.eigenvectors().col(last);
    return true;
  }
  return false;
}

}  // namespace

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  require(rho.dim() == sigma.dim(), "fidelity: dimension mismatch");
  check_physical_for_fidelity(rho, "rho");
  check_physical_for_fidelity(sigma, "sigma");

  Vec psi;
  if (pure_component(sigma, &psi)) {
    const double f = (psi.adjoint() * rho.entries() * psi).value().real();
    return std::clamp(f, 0.0, 1.0);
  }
  if (pure_component(rho, &psi)) {
    const double f = (psi.adjoint() * sigma.entries() * psi).value().real();
    return std::clamp(f, 0.0, 1.0);
  }

  const Mat root = hermitian_sqrt(rho.entries());
  const Mat inner = root * sigma.entries() * root;
  Eigen::SelfAdjointEigenSolver<Mat> es(inner, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 0.0) sum += std::sqrt(lam);
  }
  return std::clamp(sum * sum, 0.0, 1.0);
}

double pure_state_fidelity(const DensityMatrix& rho, const StateVector& psi) {
  require(rho.dim() == psi.dim(), "pure_state_fidelity: dimension mismatch");
  require(!rho.is_deviation(), "pure_state_fidelity: rho must have unit trace");
  const Vec& v = psi.amplitudes();
  return (v.adjoint() * rho.entries() * v).value().real();
}

}  // namespace qspa
