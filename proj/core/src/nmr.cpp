#include "qspa/nmr.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <sstream>

namespace qspa::nmr {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr Complex kI{0.0, 1.0};

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

Mat axis_pauli(Axis axis) {
  switch (axis) {
    case Axis::X:
      return pauli_x();
    case Axis::Y:
      return pauli_y();
    case Axis::Z:
      return pauli_z();
    case Axis::MinusX:
      return -pauli_x();
    case Axis::MinusY:
      return -pauli_y();
    case Axis::MinusZ:
      return -pauli_z();
  }
  throw Error("axis_pauli: invalid axis");
}

std::string axis_token(Axis axis) {
  switch (axis) {
    case Axis::X:
      return "x";
    case Axis::Y:
      return "y";
    case Axis::Z:
      return "z";
    case Axis::MinusX:
      return "-x";
    case Axis::MinusY:
      return "-y";
    case Axis::MinusZ:
      return "-z";
  }
  throw Error("axis_token: invalid axis");
}

// Total z-magnetization of a basis state in units of 1/2 (|0> counts +1).
int z_weight(int index) {
  const int b1 = (index >> 1) & 1;
  const int b2 = index & 1;
  return (b1 ? -1 : 1) + (b2 ? -1 : 1);
}

}  // namespace

void SpinSystem::validate() const {
  if (!(j12_hz > 0.0)) {
    std::ostringstream os;
    os << "SpinSystem: J12 must be positive, got " << j12_hz;
    throw Error(os.str());
  }
  if (!(gamma_h > 2.0 * gamma_c)) {
    std::ostringstream os;
    os << "SpinSystem: gamma_H must exceed 2*gamma_C (got ratio "
       << 2.0 * gamma_c / gamma_h << ")";
    throw Error(os.str());
  }
}

double Delay::resolve(const SpinSystem& sys) const {
  double t = seconds;
  if (j_fraction != 0.0) t += j_fraction / sys.j12_hz;
  if (!(t >= 0.0)) throw Error("Delay: duration must be nonnegative");
  return t;
}

Mat hamiltonian(const SpinSystem& sys) {
  Mat h = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) {
    const double s1 = ((i >> 1) & 1) ? -1.0 : 1.0;
    const double s2 = (i & 1) ? -1.0 : 1.0;
    h(i, i) = -kPi * sys.nu1_hz * s1 - kPi * sys.nu2_hz * s2 +
              0.5 * kPi * sys.j12_hz * s1 * s2;
  }
  return h;
}

Mat rotation_propagator(const Rotation& e) {
  require(std::isfinite(e.angle), "rotation_propagator: angle must be finite");
  const Mat sigma = axis_pauli(e.axis);
  const Mat single =
      std::cos(e.angle / 2.0) * identity(2) - kI * std::sin(e.angle / 2.0) * sigma;
  switch (e.spins) {
    case SpinSelect::Spin1:
      return kron(single, identity(2));
    case SpinSelect::Spin2:
      return kron(identity(2), single);
    case SpinSelect::Both:
      return kron(single, single);
  }
  throw Error("rotation_propagator: invalid spin selection");
}

Mat delay_propagator(double seconds, const SpinSystem& sys) {
  require(seconds >= 0.0, "delay_propagator: duration must be nonnegative");
  const Mat h = hamiltonian(sys);
  Mat u = Mat::Zero(4, 4);
  for (int i = 0; i < 4; ++i) u(i, i) = std::exp(-kI * h(i, i).real() * seconds);
  return u;
}

DensityMatrix gradient_crush(const DensityMatrix& rho) {
  require(rho.dim() == 4, "gradient_crush: input must be a two-spin matrix");
  Mat out = rho.entries();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (z_weight(i) != z_weight(j)) out(i, j) = 0.0;
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

DensityMatrix thermal_state(const SpinSystem& sys) {
  const Mat iz = 0.5 * pauli_z();
  Mat m = sys.gamma_c * kron(iz, identity(2)) + sys.gamma_h * kron(identity(2), iz);
  return DensityMatrix::deviation(std::move(m));
}

PrepConfig prep_angle(const SpinSystem& sys) {
  const double ratio = 2.0 * sys.gamma_c / sys.gamma_h;
  if (!(ratio > 0.0) || ratio >= 1.0) {
    std::ostringstream os;
    os << "prep_angle: 2*gamma_C/gamma_H must lie in (0,1), got " << ratio;
    throw Error(os.str());
  }
  return PrepConfig{std::acos(ratio)};
}

PulseSequence refocused_j_block(const SpinSystem& sys) {
  sys.validate();
  PulseSequence seq;
  seq.label = "refocused-j";
  seq.events = {
      Delay{0.0, 0.25},
      Rotation{SpinSelect::Both, Axis::X, kPi},
      Delay{0.0, 0.25},
      Rotation{SpinSelect::Both, Axis::MinusX, kPi},
  };
  return seq;
}

PulseSequence pseudopure_prep_sequence(const SpinSystem& sys) {
  const PrepConfig prep = prep_angle(sys);
  PulseSequence seq;
  seq.label = "pseudopure-prep";
  seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::X, prep.theta});
  seq.events.push_back(GradientZ{});
  seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::MinusX, kPi / 4.0});
  for (const PulseEvent& e : refocused_j_block(sys).events) seq.events.push_back(e);
  seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::Y, kPi / 4.0});
  seq.events.push_back(GradientZ{});
  return seq;
}

PrepResult pseudopure_prep(const SpinSystem& sys) {
  sys.validate();
  const PrepConfig prep = prep_angle(sys);

  DensityMatrix rho = thermal_state(sys);
  PrepResult result{rho, {}};
  result.steps.emplace_back("thermal", product_operator_expand(rho));

  auto rotate = [&](SpinSelect spins, Axis axis, double angle, const std::string& step) {
    rho = apply_unitary(rotation_propagator(Rotation{spins, axis, angle}), rho);
    result.steps.emplace_back(step, product_operator_expand(rho));
  };

  rotate(SpinSelect::Spin2, Axis::X, prep.theta, "[theta]_x^2");

  rho = gradient_crush(rho);
  result.steps.emplace_back("[grad]_z", product_operator_expand(rho));

  rotate(SpinSelect::Spin2, Axis::MinusX, kPi / 4.0, "[pi/4]_-x^2");

  rho = run_sequence(refocused_j_block(sys), rho, sys);
  result.steps.emplace_back("[1/(2J)]", product_operator_expand(rho));

  rotate(SpinSelect::Spin2, Axis::Y, kPi / 4.0, "[pi/4]_y^2");

  rho = gradient_crush(rho);
  result.steps.emplace_back("[grad]_z", product_operator_expand(rho));

  result.final_state = rho;
  return result;
}

DensityMatrix deviation_to_state(const DensityMatrix& dev, const SpinSystem& sys) {
  require(dev.dim() == 4, "deviation_to_state: expected a two-spin matrix");
  Mat rho = dev.entries() / (2.0 * sys.gamma_c) + identity(4) / 4.0;
  return DensityMatrix::physical(std::move(rho));
}

PulseSequence prepare_input_state(const PureQubitState& target1, const PureQubitState& target2) {
  PulseSequence seq;
  seq.label = "input-prep";
  const PureQubitState targets[2] = {target1, target2};
  const SpinSelect selects[2] = {SpinSelect::Spin1, SpinSelect::Spin2};
  for (int k = 0; k < 2; ++k) {
    const PureQubitState& t = targets[k];
    if (std::abs(t.a().imag()) > tol::kExact || std::abs(t.b().imag()) > tol::kExact) {
      throw Error("prepare_input_state: complex target amplitudes are not supported");
    }
    const double angle = 2.0 * std::atan2(t.b().real(), t.a().real());
    if (std::abs(angle) > 1e-15) {
      seq.events.push_back(Rotation{selects[k], Axis::Y, angle});
    }
  }
  return seq;
}

PulseSequence cnot_pulse_sequence(const SpinSystem& sys) {
  PulseSequence seq;
  seq.label = "cnot";
  seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::Y, kPi / 2.0});
  for (const PulseEvent& e : refocused_j_block(sys).events) seq.events.push_back(e);
  seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::MinusY, kPi});
  seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::X, kPi / 2.0});
  seq.events.push_back(Rotation{SpinSelect::Both, Axis::Z, kPi / 2.0});
  return seq;
}

PulseSequence qspa_pulse_sequence(const SpinSystem& sys, QspaMode mode) {
  PulseSequence seq;
  if (mode == QspaMode::Literal) {
    seq.label = "qspa-literal";
    auto coupling = [&] {
      for (const PulseEvent& e : refocused_j_block(sys).events) seq.events.push_back(e);
    };
    seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::Y, kPi / 2.0});
    coupling();
    seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::MinusY, kPi});
    seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::X, kPi / 2.0});
    seq.events.push_back(Rotation{SpinSelect::Both, Axis::Z, kPi / 2.0});
    seq.events.push_back(Rotation{SpinSelect::Spin1, Axis::Y, kPi / 2.0});
    seq.events.push_back(Rotation{SpinSelect::Spin1, Axis::MinusX, kPi});
    seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::Y, kPi / 2.0});
    coupling();
    seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::MinusY, kPi});
    seq.events.push_back(Rotation{SpinSelect::Spin2, Axis::X, kPi / 2.0});
    seq.events.push_back(Rotation{SpinSelect::Both, Axis::Z, kPi / 2.0});
    return seq;
  }
  if (mode == QspaMode::Composed) {
    seq.label = "qspa-composed";
    const PulseSequence cnot = cnot_pulse_sequence(sys);
    for (const PulseEvent& e : cnot.events) seq.events.push_back(e);
    seq.events.push_back(Rotation{SpinSelect::Spin1, Axis::Y, kPi / 2.0});
    seq.events.push_back(Rotation{SpinSelect::Spin1, Axis::MinusX, kPi});
    for (const PulseEvent& e : cnot.events) seq.events.push_back(e);
    return seq;
  }
  throw Error("qspa_pulse_sequence: unknown mode");
}

Mat sequence_unitary(const PulseSequence& seq, const SpinSystem& sys) {
  sys.validate();
  Mat u = identity(4);
  for (const PulseEvent& event : seq.events) {
    if (std::holds_alternative<GradientZ>(event)) {
      throw Error(
          "sequence_unitary: sequence contains a gradient, which is not unitary; "
          "use run_sequence");
    }
    if (const auto* rot = std::get_if<Rotation>(&event)) {
      u = rotation_propagator(*rot) * u;
    } else {
      const auto& delay = std::get<Delay>(event);
      u = delay_propagator(delay.resolve(sys), sys) * u;
    }
  }
  return u;
}

DensityMatrix run_sequence(const PulseSequence& seq, const DensityMatrix& rho,
                           const SpinSystem& sys) {
  sys.validate();
  require(rho.dim() == 4, "run_sequence: state must be a two-spin matrix");
  DensityMatrix out = rho;
  for (const PulseEvent& event : seq.events) {
    if (std::holds_alternative<GradientZ>(event)) {
      out = gradient_crush(out);
    } else if (const auto* rot = std::get_if<Rotation>(&event)) {
      out = apply_unitary(rotation_propagator(*rot), out);
    } else {
      const auto& delay = std::get<Delay>(event);
      out = apply_unitary(delay_propagator(delay.resolve(sys), sys), out);
    }
  }
  return out;
}

// --- product-operator basis ---

const std::array<std::string, ProductOperatorExpansion::kSize>&
ProductOperatorExpansion::labels() {
  static const std::array<std::string, kSize> kLabels = {
      "E",       "Ix1",     "Iy1",     "Iz1",     "Ix2",     "Iy2",
      "Iz2",     "2Ix1Ix2", "2Ix1Iy2", "2Ix1Iz2", "2Iy1Ix2", "2Iy1Iy2",
      "2Iy1Iz2", "2Iz1Ix2", "2Iz1Iy2", "2Iz1Iz2"};
  return kLabels;
}

const std::array<Mat, ProductOperatorExpansion::kSize>& ProductOperatorExpansion::basis() {
  static const std::array<Mat, kSize> kBasis = [] {
    std::array<Mat, kSize> b;
    const Mat half[3] = {0.5 * pauli_x(), 0.5 * pauli_y(), 0.5 * pauli_z()};
    const Mat id = identity(2);
    b[0] = identity(4);
    for (int a = 0; a < 3; ++a) {
      b[1 + a] = kron(half[a], id);
      b[4 + a] = kron(id, half[a]);
    }
    for (int a = 0; a < 3; ++a)
      for (int c = 0; c < 3; ++c) b[7 + 3 * a + c] = 2.0 * kron(half[a], half[c]);
    return b;
  }();
  return kBasis;
}

int ProductOperatorExpansion::index_of(std::string_view label) {
  const auto& names = labels();
  for (int i = 0; i < kSize; ++i) {
    if (names[i] == label) return i;
  }
  throw Error("ProductOperatorExpansion: unknown basis label '" + std::string(label) + "'");
}

double ProductOperatorExpansion::coefficient(std::string_view label) const {
  return coefficients[index_of(label)];
}

Mat ProductOperatorExpansion::reconstruct() const {
  Mat m = Mat::Zero(4, 4);
  const auto& b = basis();
  for (int i = 0; i < kSize; ++i) m += coefficients[i] * b[i];
  return m;
}

std::string ProductOperatorExpansion::pretty(double scale) const {
  std::ostringstream os;
  bool first = true;
  for (int i = 0; i < kSize; ++i) {
    const double c = coefficients[i] / scale;
    if (std::abs(c) < 1e-9) continue;
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    const double mag = std::abs(c);
    if (std::abs(mag - 1.0) > 1e-9) {
      os.precision(10);
      os << mag << "*";
    }
    os << labels()[i];
    first = false;
  }
  return first ? "0" : os.str();
}

ProductOperatorExpansion product_operator_expand(const DensityMatrix& rho) {
  require(rho.dim() == 4, "product_operator_expand: input must be a two-spin matrix");
  ProductOperatorExpansion expansion;
  const auto& b = ProductOperatorExpansion::basis();
  // Tr(B_i^2) = 4 for the identity and 1 for the 15 traceless elements.
  for (int i = 0; i < ProductOperatorExpansion::kSize; ++i) {
    const Complex c = (b[i] * rho.entries()).trace();
    expansion.coefficients[i] = c.real() / (i == 0 ? 4.0 : 1.0);
  }
  return expansion;
}

// --- phase-freedom fitting ---

namespace {

double residual_max(const Mat& u, const Mat& v) { return (u - v).cwiseAbs().maxCoeff(); }

// Frobenius-optimal global phase for e^{i phi} U ~ V.
double frobenius_phase(const Mat& u, const Mat& v) {
  const Complex s = (v.cwiseProduct(u.conjugate())).sum();
  return std::abs(s) > 0.0 ? std::arg(s) : 0.0;
}

double best_global_residual(const Mat& u, const Mat& v, double* phi_out) {
  double best_phi = frobenius_phase(u, v);
  double best = residual_max(std::polar(1.0, best_phi) * u, v);
  // Coarse scan plus golden-section refinement of the max-norm objective.
  constexpr int kScan = 1024;
  for (int i = 0; i < kScan; ++i) {
    const double phi = -kPi + 2.0 * kPi * i / kScan;
    const double r = residual_max(std::polar(1.0, phi) * u, v);
    if (r < best) {
      best = r;
      best_phi = phi;
    }
  }
  const double golden = 0.61803398874989484820;
  double lo = best_phi - 2.0 * kPi / kScan;
  double hi = best_phi + 2.0 * kPi / kScan;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = residual_max(std::polar(1.0, x1) * u, v);
  double f2 = residual_max(std::polar(1.0, x2) * u, v);
  for (int iter = 0; iter < 80; ++iter) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = residual_max(std::polar(1.0, x1) * u, v);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = residual_max(std::polar(1.0, x2) * u, v);
    }
  }
  const double phi = f1 < f2 ? x1 : x2;
  const double r = residual_max(std::polar(1.0, phi) * u, v);
  if (r < best) {
    best = r;
    best_phi = phi;
  }
  if (phi_out) *phi_out = best_phi;
  return best;
}

// Rz1(alpha) Rz2(beta) as elementwise phase factors on the four basis states.
std::array<Complex, 4> z_phases(double alpha, double beta) {
  std::array<Complex, 4> d;
  for (int i = 0; i < 4; ++i) {
    const double s1 = ((i >> 1) & 1) ? 1.0 : -1.0;
    const double s2 = (i & 1) ? 1.0 : -1.0;
    d[i] = std::polar(1.0, 0.5 * (s1 * alpha + s2 * beta));
  }
  return d;
}

Mat apply_z_freedom(const Mat& u, const std::array<double, 4>& p) {
  const std::array<Complex, 4> pre = z_phases(p[0], p[1]);
  const std::array<Complex, 4> post = z_phases(p[2], p[3]);
  Mat out(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = post[i] * u(i, j) * pre[j];
  return out;
}

// Residual with the global phase absorbed via the (cheap) Frobenius fit.
double z_objective(const Mat& u, const Mat& v, const std::array<double, 4>& p) {
  const Mat w = apply_z_freedom(u, p);
  return residual_max(std::polar(1.0, frobenius_phase(w, v)) * w, v);
}

}  // namespace

PhaseEquivalence equivalent_up_to_phase(const Mat& u, const Mat& v, PhaseFreedom freedom) {
  require(u.rows() == 4 && u.cols() == 4 && v.rows() == 4 && v.cols() == 4,
          "equivalent_up_to_phase: expected 4x4 matrices");
  const double du = unitarity_deviation(u);
  const double dv = unitarity_deviation(v);
  if (du > tol::kUnitary || dv > tol::kUnitary) {
    std::ostringstream os;
    os << "equivalent_up_to_phase: inputs must be unitary (deviations " << du << ", " << dv
       << ")";
    throw Error(os.str());
  }
  constexpr double kVerdictThreshold = 1e-8;

  if (freedom == PhaseFreedom::GlobalOnly) {
    double phi = 0.0;
    const double r = best_global_residual(u, v, &phi);
    return PhaseEquivalence{r < kVerdictThreshold, {phi}, r};
  }

  // Diagonal phase freedoms preserve element magnitudes, so a magnitude
  // mismatch settles the verdict before any fitting.
  std::array<double, 4> best_p{0.0, 0.0, 0.0, 0.0};
  double best = z_objective(u, v, best_p);

  const std::array<std::array<double, 4>, 9> starts = {{
      {0, 0, 0, 0},
      {kPi / 2, 0, 0, 0},
      {0, kPi / 2, 0, 0},
      {0, 0, kPi / 2, 0},
      {0, 0, 0, kPi / 2},
      {kPi / 2, kPi / 2, 0, 0},
      {0, 0, kPi / 2, kPi / 2},
      {-kPi / 2, -kPi / 2, -kPi / 2, -kPi / 2},
      {kPi, kPi, kPi, kPi},
  }};
  const double golden = 0.61803398874989484820;
  for (const auto& start : starts) {
    std::array<double, 4> p = start;
    double value = z_objective(u, v, p);
    for (int sweep = 0; sweep < 40 && value > 1e-14; ++sweep) {
      const double before = value;
      for (int coord = 0; coord < 4; ++coord) {
        // Coarse scan of the coordinate, then golden-section refinement.
        double best_x = p[coord];
        double best_f = value;
        constexpr int kScan = 64;
        for (int i = 0; i < kScan; ++i) {
          std::array<double, 4> q = p;
          q[coord] = -kPi + 2.0 * kPi * i / kScan;
          const double f = z_objective(u, v, q);
          if (f < best_f) {
            best_f = f;
            best_x = q[coord];
          }
        }
        double lo = best_x - 2.0 * kPi / kScan;
        double hi = best_x + 2.0 * kPi / kScan;
        for (int iter = 0; iter < 60; ++iter) {
          const double x1 = hi - golden * (hi - lo);
          const double x2 = lo + golden * (hi - lo);
          std::array<double, 4> q1 = p, q2 = p;
          q1[coord] = x1;
          q2[coord] = x2;
          if (z_objective(u, v, q1) < z_objective(u, v, q2)) {
            hi = x2;
          } else {
            lo = x1;
          }
        }
        std::array<double, 4> q = p;
        q[coord] = 0.5 * (lo + hi);
        const double f = z_objective(u, v, q);
        if (f < best_f) {
          best_f = f;
          best_x = q[coord];
        }
        p[coord] = best_x;
        value = best_f;
      }
      if (before - value < 1e-15) break;
    }
    if (value < best) {
      best = value;
      best_p = p;
    }
    if (best < 1e-14) break;
  }

  const Mat w = apply_z_freedom(u, best_p);
  double phi = 0.0;
  const double r = best_global_residual(w, v, &phi);
  return PhaseEquivalence{r < kVerdictThreshold,
                          {phi, best_p[0], best_p[1], best_p[2], best_p[3]},
                          std::min(r, best)};
}

// --- pulse-sequence text format ---

namespace {

// Angles that are small rational multiples of pi are written symbolically so
// shipped sequences read the way they are usually written.
std::string format_angle(double angle) {
  for (int den : {1, 2, 3, 4, 6, 12}) {
    const double scaled = angle * den / kPi;
    const double rounded = std::round(scaled);
    if (rounded != 0.0 && std::abs(scaled - rounded) < 1e-12 && std::abs(rounded) <= 24) {
      long num = static_cast<long>(rounded);
      const long g = std::gcd(std::labs(num), static_cast<long>(den));
      num /= g;
      const long d = den / g;
      std::ostringstream os;
      if (num < 0) os << "-";
      if (std::labs(num) != 1) os << std::labs(num);
      os << "pi";
      if (d != 1) os << "/" << d;
      // Only emit forms the parser reproduces bit-exactly.
      const double check = static_cast<double>(num) * kPi / static_cast<double>(d);
      if (check == angle) return os.str();
    }
  }
  std::ostringstream os;
  os.precision(17);
  os << angle;
  return os.str();
}

bool parse_angle(const std::string& text, double* out) {
  const auto pi_pos = text.find("pi");
  if (pi_pos != std::string::npos) {
    double sign = 1.0;
    std::string num_part = text.substr(0, pi_pos);
    if (!num_part.empty() && (num_part[0] == '+' || num_part[0] == '-')) {
      if (num_part[0] == '-') sign = -1.0;
      num_part = num_part.substr(1);
    }
    double num = 1.0;
    if (!num_part.empty()) {
      std::size_t used = 0;
      try {
        num = std::stod(num_part, &used);
      } catch (...) {
        return false;
      }
      if (used != num_part.size()) return false;
    }
    double den = 1.0;
    std::string rest = text.substr(pi_pos + 2);
    if (!rest.empty()) {
      if (rest[0] != '/') return false;
      rest = rest.substr(1);
      std::size_t used = 0;
      try {
        den = std::stod(rest, &used);
      } catch (...) {
        return false;
      }
      if (used != rest.size() || den == 0.0) return false;
    }
    *out = sign * num * kPi / den;
    return true;
  }
  std::size_t used = 0;
  try {
    *out = std::stod(text, &used);
  } catch (...) {
    return false;
  }
  return used == text.size();
}

std::string spins_token(SpinSelect spins) {
  switch (spins) {
    case SpinSelect::Spin1:
      return "1";
    case SpinSelect::Spin2:
      return "2";
    case SpinSelect::Both:
      return "12";
  }
  throw Error("spins_token: invalid spin selection");
}

[[noreturn]] void parse_fail(int line, const std::string& message) {
  std::ostringstream os;
  os << "sequence parse error at line " << line << ": " << message;
  throw Error(os.str());
}

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream is(line);
  std::string token;
  while (is >> token) tokens.push_back(token);
  return tokens;
}

std::map<std::string, std::string> keyed_tokens(const std::vector<std::string>& tokens,
                                                int line) {
  std::map<std::string, std::string> out;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const auto eq = tokens[i].find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= tokens[i].size()) {
      parse_fail(line, "expected key=value token, got '" + tokens[i] + "'");
    }
    const std::string key = tokens[i].substr(0, eq);
    if (out.count(key)) parse_fail(line, "duplicate key '" + key + "'");
    out[key] = tokens[i].substr(eq + 1);
  }
  return out;
}

}  // namespace

std::string serialize_sequence(const PulseSequence& seq) {
  std::ostringstream os;
  if (!seq.label.empty()) os << "# " << seq.label << "\n";
  for (const PulseEvent& event : seq.events) {
    if (const auto* rot = std::get_if<Rotation>(&event)) {
      os << "rot spins=" << spins_token(rot->spins) << " axis=" << axis_token(rot->axis)
         << " angle=" << format_angle(rot->angle) << "\n";
    } else if (const auto* delay = std::get_if<Delay>(&event)) {
      os << "delay t=";
      if (delay->j_fraction == 0.0) {
        std::ostringstream num;
        num.precision(17);
        num << delay->seconds;
        os << num.str();
      } else if (delay->seconds == 0.0 && delay->j_fraction == 0.5) {
        os << "1/(2J)";
      } else if (delay->seconds == 0.0 && delay->j_fraction == 0.25) {
        os << "1/(4J)";
      } else {
        throw Error("serialize_sequence: delay not representable in the text format");
      }
      os << "\n";
    } else {
      os << "grad z\n";
    }
  }
  return os.str();
}

PulseSequence parse_sequence(std::istream& in, const std::string& label) {
  PulseSequence seq;
  seq.label = label;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::vector<std::string> tokens = split_tokens(line);
    if (tokens.empty()) continue;
    const std::string& op = tokens[0];
    if (op == "rot") {
      auto kv = keyed_tokens(tokens, line_number);
      for (const auto& required : {"spins", "axis", "angle"}) {
        if (!kv.count(required)) parse_fail(line_number, std::string("rot needs ") + required);
      }
      if (kv.size() != 3) parse_fail(line_number, "rot takes exactly spins, axis, angle");
      Rotation rot{};
      if (kv["spins"] == "1") {
        rot.spins = SpinSelect::Spin1;
      } else if (kv["spins"] == "2") {
        rot.spins = SpinSelect::Spin2;
      } else if (kv["spins"] == "12") {
        rot.spins = SpinSelect::Both;
      } else {
        parse_fail(line_number, "spins must be 1, 2 or 12, got '" + kv["spins"] + "'");
      }
      static const std::map<std::string, Axis> kAxes = {
          {"x", Axis::X},       {"y", Axis::Y},       {"z", Axis::Z},
          {"-x", Axis::MinusX}, {"-y", Axis::MinusY}, {"-z", Axis::MinusZ}};
      const auto axis_it = kAxes.find(kv["axis"]);
      if (axis_it == kAxes.end()) {
        parse_fail(line_number, "unknown axis '" + kv["axis"] + "'");
      }
      rot.axis = axis_it->second;
      if (!parse_angle(kv["angle"], &rot.angle)) {
        parse_fail(line_number, "cannot parse angle '" + kv["angle"] + "'");
      }
      seq.events.push_back(rot);
    } else if (op == "delay") {
      auto kv = keyed_tokens(tokens, line_number);
      if (kv.size() != 1 || !kv.count("t")) parse_fail(line_number, "delay takes exactly t=");
      Delay delay{};
      if (kv["t"] == "1/(2J)") {
        delay.j_fraction = 0.5;
      } else if (kv["t"] == "1/(4J)") {
        delay.j_fraction = 0.25;
      } else {
        std::size_t used = 0;
        try {
          delay.seconds = std::stod(kv["t"], &used);
        } catch (...) {
          used = 0;
        }
        if (used != kv["t"].size()) {
          parse_fail(line_number, "cannot parse delay '" + kv["t"] + "'");
        }
        if (delay.seconds < 0.0) parse_fail(line_number, "delay must be nonnegative");
      }
      seq.events.push_back(delay);
    } else if (op == "grad") {
      if (tokens.size() != 2 || tokens[1] != "z") {
        parse_fail(line_number, "gradient must be written as 'grad z'");
      }
      seq.events.push_back(GradientZ{});
    } else {
      parse_fail(line_number, "unknown event '" + op + "'");
    }
  }
  return seq;
}

PulseSequence parse_sequence_text(const std::string& text, const std::string& label) {
  std::istringstream is(text);
  return parse_sequence(is, label);
}

}  // namespace qspa::nmr
