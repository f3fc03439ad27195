#pragma once

#include <Eigen/Dense>
#include <complex>

#include "afcsim/random.hpp"

namespace afcsim::quantum {

using Complex = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Matrix4 = Eigen::Matrix4cd;
using Vector2 = Eigen::Vector2cd;
using Vector4 = Eigen::Vector4cd;

/// Index of the two-qubit computational basis. The first qubit is the idler photon,
/// the second the signal photon; the order matches the printed density matrices.
enum class Basis : int { EE = 0, EL = 1, LE = 2, LL = 3 };

/// Single time-bin qubit a|e> + b|l>, |a|^2 + |b|^2 = 1.
class TimeBinKet {
 public:
  /// Throws InvalidArgument unless |a|^2 + |b|^2 = 1 within 1e-12.
  TimeBinKet(Complex early_amp, Complex late_amp);
  /// Rescales (a, b) to unit norm; throws on the zero vector.
  static TimeBinKet normalized(Complex early_amp, Complex late_amp);

  static TimeBinKet early() { return {1.0, 0.0}; }
  static TimeBinKet late() { return {0.0, 1.0}; }
  /// (|e> + e^{-i phase}|l>)/sqrt2, the middle-slot projection of a UMZI at `phase`.
  static TimeBinKet energy_basis(double phase);
  /// |D> = (|e> + |l>)/sqrt2.
  static TimeBinKet diagonal() { return energy_basis(0.0); }
  /// |R> = (|e> + i|l>)/sqrt2, the energy basis at phase -pi/2.
  static TimeBinKet right_circular();

  Complex early_amplitude() const { return amp_(0); }
  Complex late_amplitude() const { return amp_(1); }
  const Vector2& vector() const { return amp_; }
  Matrix2 projector() const { return amp_ * amp_.adjoint(); }

 private:
  explicit TimeBinKet(const Vector2& v) : amp_(v) {}
  Vector2 amp_;
};

/// Pure two-photon state over (ee, el, le, ll).
class TwoQubitKet {
 public:
  /// Throws InvalidArgument unless the squared norm is 1 within 1e-12.
  explicit TwoQubitKet(const Vector4& amplitudes);
  static TwoQubitKet normalized(const Vector4& amplitudes);
  static TwoQubitKet product(const TimeBinKet& idler, const TimeBinKet& signal);
  static TwoQubitKet basis(Basis b);

  const Vector4& vector() const { return amp_; }
  Complex operator[](Basis b) const { return amp_(static_cast<int>(b)); }
  Complex inner(const TwoQubitKet& other) const { return amp_.dot(other.amp_); }

 private:
  Vector4 amp_;
};

/// Valid two-qubit density matrix: Hermitian, unit trace, PSD up to a -1e-8 floor.
class TwoQubitState {
 public:
  /// Validates with tolerances 1e-10 (Hermiticity, trace) and -1e-8 (eigenvalues);
  /// throws DataError on violation. Stores the Hermitian part.
  static TwoQubitState from_matrix(const Matrix4& m);
  static TwoQubitState pure(const TwoQubitKet& ket);
  static TwoQubitState maximally_mixed();

  const Matrix4& matrix() const { return rho_; }
  Complex operator()(Basis row, Basis col) const {
    return rho_(static_cast<int>(row), static_cast<int>(col));
  }
  /// <psi|rho|psi>.
  double expectation(const TwoQubitKet& ket) const;
  /// tr(rho * op); op need not be Hermitian, the real part is returned.
  double expectation(const Matrix4& op) const;

  /// Convex combination (1-w)*this + w*other.
  TwoQubitState mixed_with(const TwoQubitState& other, double w) const;

 private:
  explicit TwoQubitState(const Matrix4& m) : rho_(m) {}
  Matrix4 rho_;
};

TwoQubitKet bell_psi_plus();
TwoQubitState projector(const TwoQubitKet& ket);

/// Clips negative eigenvalues and renormalises the trace.
/// Pre: Hermitian within 1e-6, trace within 1e-2 of 1; rejects (DataError) a smallest
/// eigenvalue below -0.05, which indicates corruption rather than rounding.
TwoQubitState nearest_psd(const Matrix4& m);

/// Matrix square root of a Hermitian PSD matrix via eigendecomposition, eigenvalues clipped at 0.
Matrix4 psd_sqrt(const Matrix4& m);

/// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const TwoQubitState& rho, const TwoQubitState& sigma);
double fidelity(const Matrix4& rho, const Matrix4& sigma);

double purity(const TwoQubitState& rho);
double purity(const Matrix4& rho);

/// Wootters concurrence.
double concurrence(const TwoQubitState& rho);
double concurrence(const Matrix4& rho);

double binary_entropy(double p);
double eof_from_concurrence(double c);
double entanglement_of_formation(const TwoQubitState& rho);
double entanglement_of_formation(const Matrix4& rho);

/// Trace distance 0.5 * ||rho - sigma||_1.
double trace_distance(const TwoQubitState& rho, const TwoQubitState& sigma);

/// Random state of the given rank (1..4) from the induced Ginibre ensemble.
TwoQubitState random_state(Rng& rng, int rank = 4);

}  // namespace afcsim::quantum
