#include "afcsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "afcsim/error.hpp"
#include "afcsim/parallel.hpp"
#include "afcsim/random.hpp"

namespace afcsim::tomography {

using quantum::Complex;

char to_char(Qubit q) { return "elDR"[static_cast<int>(q)]; }

quantum::TimeBinKet ket(Qubit q) {
  switch (q) {
    case Qubit::E: return quantum::TimeBinKet::early();
    case Qubit::L: return quantum::TimeBinKet::late();
    case Qubit::D: return quantum::TimeBinKet::diagonal();
    case Qubit::R: return quantum::TimeBinKet::right_circular();
  }
  throw InvalidArgument("ket: unknown qubit state");
}

const char* to_string(Setting s) {
  static constexpr const char* kNames[4] = {"DD", "DR", "RD", "RR"};
  return kNames[static_cast<int>(s)];
}

std::pair<double, double> setting_phases(Setting s) {
  const double r = -std::numbers::pi / 2.0;
  switch (s) {
    case Setting::DD: return {0.0, 0.0};
    case Setting::DR: return {0.0, r};
    case Setting::RD: return {r, 0.0};
    case Setting::RR: return {r, r};
  }
  throw InvalidArgument("setting_phases: unknown setting");
}

TomographyBasis basis(int v) {
  if (v < 1 || v > kBases) throw InvalidArgument("basis: index must lie in 1..16");
  return {v, static_cast<Qubit>((v - 1) / 4), static_cast<Qubit>((v - 1) % 4)};
}

Matrix4 basis_projector(int v) {
  const TomographyBasis b = basis(v);
  const auto k = quantum::TwoQubitKet::product(ket(b.photon1), ket(b.photon2));
  return k.vector() * k.vector().adjoint();
}

namespace {

Qubit middle_state(Setting s, bool idler) {
  const bool r = idler ? (s == Setting::RD || s == Setting::RR) : (s == Setting::DR || s == Setting::RR);
  return r ? Qubit::R : Qubit::D;
}

bool side_measures(Qubit q, Qubit middle) { return q == Qubit::E || q == Qubit::L || q == middle; }

double slot_weight(Qubit q) { return (q == Qubit::E || q == Qubit::L) ? 0.25 : 0.5; }

analyzer::Slot slot_of(Qubit q) {
  if (q == Qubit::E) return analyzer::Slot::Early;
  if (q == Qubit::L) return analyzer::Slot::Late;
  return analyzer::Slot::Middle;
}

const std::array<Matrix4, kBases>& projectors() {
  static const std::array<Matrix4, kBases> p = [] {
    std::array<Matrix4, kBases> out;
    for (int v = 1; v <= kBases; ++v) out[v - 1] = basis_projector(v);
    return out;
  }();
  return p;
}

// Orthonormal Hermitian basis sigma_a (x) sigma_b / 2.
const std::array<Matrix4, 16>& pauli_basis() {
  static const std::array<Matrix4, 16> b = [] {
    std::array<quantum::Matrix2, 4> s;
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    s[3] << 1, 0, 0, -1;
    std::array<Matrix4, 16> out;
    for (int a = 0; a < 4; ++a) {
      for (int c = 0; c < 4; ++c) {
        Matrix4 m;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
              for (int l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = s[a](i, j) * s[c](k, l) * 0.5;
        out[4 * a + c] = m;
      }
    }
    return out;
  }();
  return b;
}

Eigen::Matrix<double, kBases, 16> measurement_matrix() {
  Eigen::Matrix<double, kBases, 16> a;
  for (int v = 0; v < kBases; ++v) {
    for (int k = 0; k < 16; ++k) a(v, k) = (projectors()[v] * pauli_basis()[k]).trace().real();
  }
  return a;
}

double condition(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  return s(0) / s(s.size() - 1);
}

}  // namespace

bool setting_measures(Setting s, int v) {
  const TomographyBasis b = basis(v);
  return side_measures(b.photon1, middle_state(s, true)) && side_measures(b.photon2, middle_state(s, false));
}

double setting_weight(Setting s, int v) {
  if (!setting_measures(s, v)) return 0.0;
  const TomographyBasis b = basis(v);
  return slot_weight(b.photon1) * slot_weight(b.photon2);
}

Eigen::Matrix<double, kBases, kBases> gram_matrix() {
  Eigen::Matrix<double, kBases, kBases> g;
  for (int v = 0; v < kBases; ++v) {
    for (int w = 0; w < kBases; ++w) g(v, w) = (projectors()[v] * projectors()[w]).trace().real();
  }
  return g;
}

double gram_condition_number() { return condition(gram_matrix()); }

double measurement_condition_number() { return condition(measurement_matrix()); }

CountRecord CountRecord::empty() {
  CountRecord r;
  for (int v = 1; v <= kBases; ++v) {
    for (int s = 0; s < kSettings; ++s) r.present[v - 1][s] = setting_measures(static_cast<Setting>(s), v);
  }
  return r;
}

std::int64_t CountRecord::n(int v) const {
  basis(v);
  std::int64_t total = 0;
  for (int s = 0; s < kSettings; ++s) {
    if (present[v - 1][s]) total += sub[v - 1][s];
  }
  return total;
}

std::array<double, kBases> CountRecord::totals() const {
  std::array<double, kBases> t{};
  for (int v = 1; v <= kBases; ++v) t[v - 1] = static_cast<double>(n(v));
  return t;
}

std::int64_t CountRecord::setting_total(Setting s) const {
  std::int64_t total = 0;
  for (int v = 0; v < kBases; ++v) {
    if (present[v][static_cast<int>(s)]) total += sub[v][static_cast<int>(s)];
  }
  return total;
}

CountRecord assemble_counts(const std::array<analyzer::ThreefoldCounts, kSettings>& settings) {
  CountRecord r = CountRecord::empty();
  for (int s = 0; s < kSettings; ++s) {
    for (int v = 1; v <= kBases; ++v) {
      if (!r.present[v - 1][s]) continue;
      const TomographyBasis b = basis(v);
      r.sub[v - 1][s] = settings[s].at(1, slot_of(b.photon1), 1, slot_of(b.photon2));
    }
  }
  return r;
}

CountRecord read_count_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("v,", 0) != 0) {
    throw DataError("count CSV: missing 'v,photon1,photon2,DD,DR,RD,RR,n_v' header");
  }
  CountRecord r = CountRecord::empty();
  std::array<bool, kBases> seen{};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string c; std::getline(row, c, ',');) {
      c.erase(0, c.find_first_not_of(' '));
      c.erase(c.find_last_not_of(' ') + 1);
      cells.push_back(c);
    }
    if (cells.size() != 8) throw DataError("count CSV: expected eight columns in '" + line + "'");
    int v = 0;
    try {
      v = std::stoi(cells[0]);
    } catch (const std::exception&) {
      throw DataError("count CSV: bad basis index '" + cells[0] + "'");
    }
    if (v < 1 || v > kBases || seen[v - 1]) throw DataError("count CSV: basis index out of range or repeated");
    seen[v - 1] = true;
    const TomographyBasis b = basis(v);
    if (cells[1] != std::string(1, to_char(b.photon1)) || cells[2] != std::string(1, to_char(b.photon2))) {
      throw DataError("count CSV: row " + std::to_string(v) + " names the wrong basis states");
    }
    for (int s = 0; s < kSettings; ++s) {
      const std::string& c = cells[3 + s];
      const bool dash = (c == "-");
      if (dash == r.present[v - 1][s]) {
        throw DataError("count CSV: row " + std::to_string(v) + " column " + to_string(static_cast<Setting>(s)) +
                        (dash ? " is missing a required count" : " has a count where the setting cannot record one"));
      }
      if (!dash) {
        try {
          std::size_t used = 0;
          r.sub[v - 1][s] = std::stoll(c, &used);
          if (used != c.size() || r.sub[v - 1][s] < 0) throw std::invalid_argument(c);
        } catch (const std::exception&) {
          throw DataError("count CSV: bad count '" + c + "'");
        }
      }
    }
    if (std::to_string(r.n(v)) != cells[7]) {
      throw DataError("count CSV: row " + std::to_string(v) + " total " + cells[7] + " differs from the sum " +
                      std::to_string(r.n(v)));
    }
  }
  for (bool s : seen) {
    if (!s) throw DataError("count CSV: fewer than sixteen basis rows");
  }
  return r;
}

void write_count_csv(std::ostream& out, const CountRecord& r) {
  out << "v,photon1,photon2,DD,DR,RD,RR,n_v\n";
  for (int v = 1; v <= kBases; ++v) {
    const TomographyBasis b = basis(v);
    out << v << ',' << to_char(b.photon1) << ',' << to_char(b.photon2);
    for (int s = 0; s < kSettings; ++s) {
      out << ',';
      if (r.present[v - 1][s]) {
        out << r.sub[v - 1][s];
      } else {
        out << '-';
      }
    }
    out << ',' << r.n(v) << '\n';
  }
}

std::array<double, kBases> expected_counts(const TwoQubitState& rho, std::span<const double> exposure) {
  if (exposure.size() != kBases) throw InvalidArgument("expected_counts: need sixteen exposures");
  std::array<double, kBases> mu{};
  for (int v = 0; v < kBases; ++v) {
    if (!(exposure[v] > 0.0)) throw InvalidArgument("expected_counts: exposures must be positive");
    mu[v] = exposure[v] * std::max(0.0, rho.expectation(projectors()[v]));
  }
  return mu;
}

namespace {

constexpr int kOffDiag[6][2] = {{1, 0}, {2, 1}, {3, 2}, {2, 0}, {3, 1}, {3, 0}};

}  // namespace

Matrix4 lower_factor(const Params& t) {
  Matrix4 T = Matrix4::Zero();
  for (int d = 0; d < 4; ++d) T(d, d) = t(d);
  for (int k = 0; k < 6; ++k) T(kOffDiag[k][0], kOffDiag[k][1]) = Complex(t(4 + 2 * k), t(5 + 2 * k));
  return T;
}

Matrix4 rho_from_params(const Params& t) {
  const Matrix4 T = lower_factor(t);
  Matrix4 m = T.adjoint() * T;
  const double tr = m.trace().real();
  if (!(tr > 0.0)) throw InvalidArgument("rho_from_params: zero factor");
  m /= tr;
  return 0.5 * (m + m.adjoint());
}

Params params_from_state(const Matrix4& rho) {
  // rho = T^dagger T with T lower: Cholesky of the index-reversed matrix gives an upper factor.
  Eigen::PermutationMatrix<4> rev;
  rev.indices() << 3, 2, 1, 0;
  const Matrix4 flipped = rev * rho * rev.transpose();
  Eigen::LLT<Matrix4> llt(flipped);
  if (llt.info() != Eigen::Success) throw InvalidArgument("params_from_state: state is not positive definite");
  const Matrix4 L = llt.matrixL();
  const Matrix4 T = rev * Matrix4(L.adjoint()) * rev.transpose();
  Params t;
  for (int d = 0; d < 4; ++d) t(d) = T(d, d).real();
  for (int k = 0; k < 6; ++k) {
    const Complex z = T(kOffDiag[k][0], kOffDiag[k][1]);
    t(4 + 2 * k) = z.real();
    t(5 + 2 * k) = z.imag();
  }
  return t;
}

Likelihood::Likelihood(std::span<const double> counts, std::span<const double> exposure, bool free_scale)
    : pi_(projectors()), free_scale_(free_scale) {
  if (counts.size() != kBases || exposure.size() != kBases) throw InvalidArgument("Likelihood: need sixteen entries");
  for (int v = 0; v < kBases; ++v) {
    if (!(counts[v] >= 0.0)) throw DataError("Likelihood: negative count");
    if (!(exposure[v] > 0.0)) throw InvalidArgument("Likelihood: exposures must be positive");
    n_[v] = counts[v];
    e_[v] = exposure[v];
  }
}

double Likelihood::scale(const std::array<double, kBases>& p) const {
  if (!free_scale_) return 1.0;
  double n = 0.0, m = 0.0;
  for (int v = 0; v < kBases; ++v) {
    n += n_[v];
    m += e_[v] * p[v];
  }
  return m > 0.0 && n > 0.0 ? n / m : 1.0;
}

double Likelihood::value(const Params& t) const {
  Params g;
  return value_and_gradient(t, g);
}

double Likelihood::value_and_gradient(const Params& t, Params& grad) const {
  const Matrix4 T = lower_factor(t);
  const Matrix4 M = T.adjoint() * T;
  const double tr = M.trace().real();
  if (!(tr > 0.0)) throw InvalidArgument("Likelihood: zero factor");
  const Matrix4 rho = M / tr;

  std::array<double, kBases> p{};
  for (int v = 0; v < kBases; ++v) p[v] = std::max(0.0, (rho * pi_[v]).trace().real());
  const double kappa = scale(p);

  double ll = 0.0;
  Matrix4 G = Matrix4::Zero();
  for (int v = 0; v < kBases; ++v) {
    const double e = kappa * e_[v];
    const double mu = e * p[v];
    if (n_[v] > 0.0) {
      if (!(mu > 0.0)) {
        grad.setZero();
        return -std::numeric_limits<double>::infinity();
      }
      ll += n_[v] * std::log(mu) - mu;
      G += (n_[v] / mu - 1.0) * e * pi_[v];
    } else {
      ll -= mu;
      G -= e * pi_[v];
    }
  }
  const Complex g_rho = (G * rho).trace();
  const Matrix4 Gp = (G - g_rho * Matrix4::Identity()) / tr;
  const Matrix4 K = Gp * T.adjoint();
  for (int d = 0; d < 4; ++d) grad(d) = 2.0 * K(d, d).real();
  for (int k = 0; k < 6; ++k) {
    const int j = kOffDiag[k][0], c = kOffDiag[k][1];
    grad(4 + 2 * k) = 2.0 * K(c, j).real();
    grad(5 + 2 * k) = -2.0 * K(c, j).imag();
  }
  return ll;
}

namespace {

Matrix4 linear_inversion(std::span<const double> counts, std::span<const double> exposure) {
  Eigen::Matrix<double, kBases, 1> freq;
  for (int v = 0; v < kBases; ++v) freq(v) = counts[v] / exposure[v];
  const Eigen::Matrix<double, 16, 1> x = measurement_matrix().colPivHouseholderQr().solve(freq);
  Matrix4 m = Matrix4::Zero();
  for (int k = 0; k < 16; ++k) m += x(k) * pauli_basis()[k];
  m = 0.5 * (m + m.adjoint());

  Eigen::SelfAdjointEigenSolver<Matrix4> es(m);
  Eigen::Vector4d lam = es.eigenvalues().cwiseMax(0.0);
  if (!(lam.sum() > 0.0)) return Matrix4::Identity() / 4.0;
  lam /= lam.sum();
  Matrix4 rho = es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  // A little of the identity keeps the start strictly inside the state space.
  rho = 0.99 * rho + 0.01 * Matrix4::Identity() / 4.0;
  return 0.5 * (rho + rho.adjoint());
}

void check_informationally_complete() {
  static const double cond = measurement_condition_number();
  if (!(cond < 100.0)) throw DataError("mle_reconstruct: measurement set is not informationally complete");
}

}  // namespace

ReconstructionResult mle_reconstruct(std::span<const double> counts, std::span<const double> exposure,
                                     const MleOptions& opt) {
  check_informationally_complete();
  const Likelihood lik(counts, exposure, opt.free_scale);

  Params x = params_from_state(linear_inversion(counts, exposure));
  Params g;
  double f = -lik.value_and_gradient(x, g);
  g = -g;

  constexpr int kMemory = 10;
  std::deque<std::pair<Params, Params>> mem;  // (s, y) pairs
  ReconstructionResult res;
  int small_steps = 0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    // Two-loop recursion for the quasi-Newton direction.
    Params q = g;
    std::vector<double> alpha(mem.size());
    for (int k = static_cast<int>(mem.size()) - 1; k >= 0; --k) {
      const auto& [s, y] = mem[static_cast<std::size_t>(k)];
      alpha[static_cast<std::size_t>(k)] = s.dot(q) / y.dot(s);
      q -= alpha[static_cast<std::size_t>(k)] * y;
    }
    if (!mem.empty()) {
      const auto& [s, y] = mem.back();
      q *= s.dot(y) / y.dot(y);
    } else {
      q /= std::max(1.0, g.norm());
    }
    for (std::size_t k = 0; k < mem.size(); ++k) {
      const auto& [s, y] = mem[k];
      const double beta = y.dot(q) / y.dot(s);
      q += (alpha[k] - beta) * s;
    }
    Params d = -q;
    if (!(d.dot(g) < 0.0)) {
      mem.clear();
      d = -g / std::max(1.0, g.norm());
    }

    // Armijo backtracking.
    double step = 1.0;
    Params x_new, g_new;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * d;
      f_new = -lik.value_and_gradient(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * d.dot(g)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!mem.empty()) {
        mem.clear();
        continue;
      }
      // No decrease even along the gradient: numerically stationary.
      res.converged = true;
      break;
    }
    g_new = -g_new;
    const Params s = x_new - x;
    const Params y = g_new - g;
    const double improvement = f - f_new;
    x = x_new;
    g = g_new;
    f = f_new;
    if (opt.record_history) res.history.push_back(-f);
    if (s.dot(y) > 1e-12 * s.norm() * y.norm()) {
      mem.emplace_back(s, y);
      if (mem.size() > kMemory) mem.pop_front();
    }
    // The scale of T is free; keep it near unit trace so tolerances stay meaningful.
    const double tr = lower_factor(x).squaredNorm();
    if (tr > 1e3 || tr < 1e-3) {
      x /= std::sqrt(tr);
      mem.clear();
      f = -lik.value_and_gradient(x, g);
      g = -g;
    }
    if (s.norm() < opt.step_tolerance) {
      res.converged = true;
      ++it;
      break;
    }
    small_steps = improvement < opt.ll_tolerance ? small_steps + 1 : 0;
    if (small_steps >= 2) {
      res.converged = true;
      ++it;
      break;
    }
  }

  const Matrix4 rho = rho_from_params(x);
  res.rho = quantum::TwoQubitState::from_matrix(rho);
  res.log_likelihood = -f;
  res.iterations = it;
  std::copy(exposure.begin(), exposure.end(), res.exposure.begin());
  if (opt.free_scale) {
    std::array<double, kBases> p{};
    for (int v = 0; v < kBases; ++v) p[v] = std::max(0.0, (rho * projectors()[v]).trace().real());
    double n = 0.0, m = 0.0;
    for (int v = 0; v < kBases; ++v) {
      n += counts[v];
      m += exposure[v] * p[v];
    }
    const double kappa = (n > 0.0 && m > 0.0) ? n / m : 1.0;
    for (double& e : res.exposure) e *= kappa;
  }
  return res;
}

const char* to_string(ExposureModel m) {
  return m == ExposureModel::PerSettingTotals ? "per-setting-totals" : "equal-acquisition";
}

std::array<double, kBases> basis_exposure(const CountRecord& record, std::span<const double> tau) {
  if (tau.size() != kSettings) throw InvalidArgument("basis_exposure: need four setting exposures");
  std::array<double, kBases> e{};
  for (int v = 1; v <= kBases; ++v) {
    for (int s = 0; s < kSettings; ++s) {
      if (record.present[v - 1][s]) e[v - 1] += tau[s] * setting_weight(static_cast<Setting>(s), v);
    }
  }
  return e;
}

ReconstructionResult mle_reconstruct(const CountRecord& counts, ExposureModel model, const MleOptions& options) {
  const auto n = counts.totals();
  const std::array<double, kSettings> ones{1.0, 1.0, 1.0, 1.0};
  MleOptions equal = options;
  equal.free_scale = true;
  ReconstructionResult pre = mle_reconstruct(n, basis_exposure(counts, ones), equal);
  // basis exposure is linear in tau, so the profiled scale is the common per-setting exposure.
  const double kappa = pre.exposure[0] / basis_exposure(counts, ones)[0];
  pre.setting_exposure.fill(kappa);
  if (model == ExposureModel::EqualAcquisition) return pre;

  std::array<double, kSettings> tau{};
  for (int s = 0; s < kSettings; ++s) {
    double expected = 0.0;
    for (int v = 1; v <= kBases; ++v) {
      if (!counts.present[v - 1][s]) continue;
      expected += setting_weight(static_cast<Setting>(s), v) * pre.rho.expectation(projectors()[v - 1]);
    }
    const auto total = static_cast<double>(counts.setting_total(static_cast<Setting>(s)));
    tau[s] = total > 0.0 && expected > 0.0 ? total / expected : kappa;
  }
  MleOptions fixed = options;
  fixed.free_scale = false;
  ReconstructionResult out = mle_reconstruct(n, basis_exposure(counts, tau), fixed);
  out.setting_exposure = tau;
  out.iterations += pre.iterations;
  return out;
}

namespace {

MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sigma = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

}  // namespace

ReconstructionWithErrors reconstruct_with_errors(const CountRecord& counts, int n_trials, std::uint64_t seed,
                                                 ExposureModel model, const std::optional<TwoQubitState>& reference) {
  if (n_trials < 0) throw InvalidArgument("reconstruct_with_errors: negative trial count");
  ReconstructionWithErrors out;
  out.result = mle_reconstruct(counts, model);
  const auto psi = quantum::projector(quantum::bell_psi_plus());
  out.fidelity = quantum::fidelity(out.result.rho, psi);
  out.purity = quantum::purity(out.result.rho);
  out.eof = quantum::entanglement_of_formation(out.result.rho);
  if (reference) out.reference_fidelity = quantum::fidelity(out.result.rho, *reference);

  const auto n = static_cast<std::size_t>(n_trials);
  std::vector<double> fid(n), pur(n), eof(n), ref(n);
  parallel_for(n, [&](std::size_t t) {
    Rng rng = make_rng(seed, t);
    CountRecord sample = counts;
    for (int v = 0; v < kBases; ++v) {
      for (int s = 0; s < kSettings; ++s) {
        if (!counts.present[v][s]) continue;
        const auto mean = static_cast<double>(counts.sub[v][s]);
        sample.sub[v][s] = mean > 0.0 ? std::poisson_distribution<std::int64_t>(mean)(rng) : 0;
      }
    }
    const auto r = mle_reconstruct(sample, model);
    fid[t] = quantum::fidelity(r.rho, psi);
    pur[t] = quantum::purity(r.rho);
    eof[t] = quantum::entanglement_of_formation(r.rho);
    if (reference) ref[t] = quantum::fidelity(r.rho, *reference);
  });
  out.trials = n_trials;
  out.fidelity_mc = summarize(fid);
  out.purity_mc = summarize(pur);
  out.eof_mc = summarize(eof);
  if (reference) out.reference_fidelity_mc = summarize(ref);
  return out;
}

}  // namespace afcsim::tomography
