#include "afcsim/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "afcsim/error.hpp"

namespace afcsim::quantum {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kStateTol = 1e-10;
constexpr double kEigenFloor = -1e-8;

double max_abs(const Matrix4& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::SelfAdjointEigenSolver<Matrix4> eigen_hermitian(const Matrix4& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix4>(m);
}

const Matrix4& spin_flip() {
  static const Matrix4 yy = [] {
    Matrix4 m = Matrix4::Zero();
    m(0, 3) = -1.0;
    m(1, 2) = 1.0;
    m(2, 1) = 1.0;
    m(3, 0) = -1.0;
    return m;
  }();
  return yy;
}

}  // namespace

TimeBinKet::TimeBinKet(Complex early_amp, Complex late_amp) : amp_(early_amp, late_amp) {
  const double n = std::norm(early_amp) + std::norm(late_amp);
  if (std::abs(n - 1.0) > kNormTol) {
    throw InvalidArgument("TimeBinKet: |a|^2 + |b|^2 = " + std::to_string(n) + ", expected 1");
  }
}

TimeBinKet TimeBinKet::normalized(Complex early_amp, Complex late_amp) {
  Vector2 v(early_amp, late_amp);
  const double n = v.norm();
  if (n == 0.0) throw InvalidArgument("TimeBinKet: zero vector");
  return TimeBinKet(Vector2(v / n));
}

TimeBinKet TimeBinKet::energy_basis(double phase) {
  const double s = std::numbers::sqrt2 / 2.0;
  return TimeBinKet(Vector2(Complex(s, 0.0), s * std::polar(1.0, -phase)));
}

TimeBinKet TimeBinKet::right_circular() { return energy_basis(-std::numbers::pi / 2.0); }

TwoQubitKet::TwoQubitKet(const Vector4& amplitudes) : amp_(amplitudes) {
  const double n = amp_.squaredNorm();
  if (std::abs(n - 1.0) > kNormTol) {
    throw InvalidArgument("TwoQubitKet: squared norm " + std::to_string(n) + ", expected 1");
  }
}

TwoQubitKet TwoQubitKet::normalized(const Vector4& amplitudes) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw InvalidArgument("TwoQubitKet: zero vector");
  return TwoQubitKet(Vector4(amplitudes / n));
}

TwoQubitKet TwoQubitKet::product(const TimeBinKet& idler, const TimeBinKet& signal) {
  Vector4 v;
  for (int i = 0; i < 2; ++i) {
    for (int s = 0; s < 2; ++s) v(2 * i + s) = idler.vector()(i) * signal.vector()(s);
  }
  return TwoQubitKet::normalized(v);
}

TwoQubitKet TwoQubitKet::basis(Basis b) {
  Vector4 v = Vector4::Zero();
  v(static_cast<int>(b)) = 1.0;
  return TwoQubitKet(v);
}

TwoQubitState TwoQubitState::from_matrix(const Matrix4& m) {
  const double herm = max_abs(m - m.adjoint());
  if (herm > kStateTol) {
    throw DataError("TwoQubitState: not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  const Matrix4 h = 0.5 * (m + m.adjoint());
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > kStateTol) {
    throw DataError("TwoQubitState: trace " + std::to_string(tr) + ", expected 1");
  }
  const double min_eig = eigen_hermitian(h).eigenvalues().minCoeff();
  if (min_eig < kEigenFloor) {
    throw DataError("TwoQubitState: negative eigenvalue " + std::to_string(min_eig));
  }
  return TwoQubitState(h);
}

TwoQubitState TwoQubitState::pure(const TwoQubitKet& ket) {
  return TwoQubitState(ket.vector() * ket.vector().adjoint());
}

TwoQubitState TwoQubitState::maximally_mixed() { return TwoQubitState(Matrix4::Identity() / 4.0); }

double TwoQubitState::expectation(const TwoQubitKet& ket) const {
  return ket.vector().dot(rho_ * ket.vector()).real();
}

double TwoQubitState::expectation(const Matrix4& op) const { return (rho_ * op).trace().real(); }

TwoQubitState TwoQubitState::mixed_with(const TwoQubitState& other, double w) const {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("mixed_with: weight outside [0, 1]");
  return TwoQubitState((1.0 - w) * rho_ + w * other.rho_);
}

TwoQubitKet bell_psi_plus() {
  const double s = std::numbers::sqrt2 / 2.0;
  return TwoQubitKet(Vector4(s, 0.0, 0.0, s));
}

TwoQubitState projector(const TwoQubitKet& ket) { return TwoQubitState::pure(ket); }

TwoQubitState nearest_psd(const Matrix4& m) {
  const double herm = max_abs(m - m.adjoint());
  if (herm > 1e-6) {
    throw DataError("nearest_psd: input not Hermitian (deviation " + std::to_string(herm) + ")");
  }
  const Matrix4 h = 0.5 * (m + m.adjoint());
  const double tr = h.trace().real();
  if (std::abs(tr - 1.0) > 1e-2) {
    throw DataError("nearest_psd: trace " + std::to_string(tr) + " too far from 1");
  }
  const auto es = eigen_hermitian(h);
  Eigen::Vector4d lambda = es.eigenvalues();
  if (lambda.minCoeff() < -0.05) {
    throw DataError("nearest_psd: eigenvalue " + std::to_string(lambda.minCoeff()) +
                    " below -0.05, input looks corrupted");
  }
  lambda = lambda.cwiseMax(0.0);
  lambda /= lambda.sum();
  const Matrix4& v = es.eigenvectors();
  Matrix4 out = v * lambda.cast<Complex>().asDiagonal() * v.adjoint();
  out = 0.5 * (out + out.adjoint());
  return TwoQubitState::from_matrix(out);
}

Matrix4 psd_sqrt(const Matrix4& m) {
  const auto es = eigen_hermitian(0.5 * (m + m.adjoint()));
  const Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

double fidelity(const TwoQubitState& rho, const TwoQubitState& sigma) {
  const Matrix4 r = psd_sqrt(rho.matrix());
  const Matrix4 inner = r * sigma.matrix() * r;
  const Eigen::Vector4d ev = eigen_hermitian(0.5 * (inner + inner.adjoint())).eigenvalues();
  const double root_sum = ev.cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

double fidelity(const Matrix4& rho, const Matrix4& sigma) {
  return fidelity(nearest_psd(rho), nearest_psd(sigma));
}

double purity(const TwoQubitState& rho) { return rho.matrix().cwiseAbs2().sum(); }
double purity(const Matrix4& rho) { return purity(nearest_psd(rho)); }

double concurrence(const TwoQubitState& rho) {
  // sqrt(rho) rho~ sqrt(rho) is Hermitian PSD and shares its spectrum with rho rho~.
  const Matrix4 r = psd_sqrt(rho.matrix());
  const Matrix4 flipped = spin_flip() * rho.matrix().conjugate() * spin_flip();
  const Matrix4 h = r * flipped * r;
  Eigen::Vector4d lambda = eigen_hermitian(0.5 * (h + h.adjoint())).eigenvalues();
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  std::sort(lambda.data(), lambda.data() + 4, std::greater<>());
  return std::clamp(lambda(0) - lambda(1) - lambda(2) - lambda(3), 0.0, 1.0);
}

double concurrence(const Matrix4& rho) { return concurrence(nearest_psd(rho)); }

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double eof_from_concurrence(double c) {
  c = std::clamp(c, 0.0, 1.0);
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

double entanglement_of_formation(const TwoQubitState& rho) {
  return eof_from_concurrence(concurrence(rho));
}

double entanglement_of_formation(const Matrix4& rho) {
  return entanglement_of_formation(nearest_psd(rho));
}

double trace_distance(const TwoQubitState& rho, const TwoQubitState& sigma) {
  const Matrix4 d = rho.matrix() - sigma.matrix();
  return 0.5 * eigen_hermitian(0.5 * (d + d.adjoint())).eigenvalues().cwiseAbs().sum();
}

TwoQubitState random_state(Rng& rng, int rank) {
  if (rank < 1 || rank > 4) throw InvalidArgument("random_state: rank must be in 1..4");
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd g(4, rank);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < rank; ++k) g(i, k) = Complex(gauss(rng), gauss(rng));
  }
  Matrix4 m = g * g.adjoint();
  m /= m.trace().real();
  return TwoQubitState::from_matrix(0.5 * (m + m.adjoint()));
}

}  // namespace afcsim::quantum
