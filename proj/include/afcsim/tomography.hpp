#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afcsim/analyzer.hpp"
#include "afcsim/quantum_core.hpp"

namespace afcsim::tomography {

using quantum::Matrix4;
using quantum::TwoQubitState;

enum class Qubit : int { E = 0, L = 1, D = 2, R = 3 };
char to_char(Qubit q);
quantum::TimeBinKet ket(Qubit q);

/// Energy-basis settings: idler analyzer phase & signal analyzer phase, D = 0 and R = -pi/2.
enum class Setting : int { DD = 0, DR = 1, RD = 2, RR = 3 };
inline constexpr int kSettings = 4;
inline constexpr int kBases = 16;
const char* to_string(Setting s);
/// (alpha, beta) of the setting.
std::pair<double, double> setting_phases(Setting s);

/// Basis v = 1..16: photon1 (idler, first qubit) and photon2 (signal) states.
struct TomographyBasis {
  int index = 1;
  Qubit photon1 = Qubit::E;
  Qubit photon2 = Qubit::E;
};
TomographyBasis basis(int v);
/// |psi_1><psi_1| (x) |psi_2><psi_2|. Throws InvalidArgument outside 1..16.
Matrix4 basis_projector(int v);

/// Whether the setting records basis v, and the POVM weight it does so with (port 1 on both
/// sides: 1/4 for an e/l slot, 1/2 for the middle slot).
bool setting_measures(Setting s, int v);
double setting_weight(Setting s, int v);

/// Gram matrix tr(Pi_v Pi_w) and its condition number.
Eigen::Matrix<double, kBases, kBases> gram_matrix();
double gram_condition_number();
/// Condition number of the linear map rho -> (tr rho Pi_v)_v on an orthonormal Hermitian basis.
double measurement_condition_number();

struct CountRecord {
  /// sub[v-1][setting]; meaningful only where present[v-1][setting].
  std::array<std::array<std::int64_t, kSettings>, kBases> sub{};
  std::array<std::array<bool, kSettings>, kBases> present{};

  /// Record with the measurement pattern of the four settings and all counts zero.
  static CountRecord empty();
  std::int64_t n(int v) const;
  std::array<double, kBases> totals() const;
  std::int64_t setting_total(Setting s) const;
};

/// Maps the port-(1,1) cells of four threefold tables (order DD, DR, RD, RR) to the 16 bases.
CountRecord assemble_counts(const std::array<analyzer::ThreefoldCounts, kSettings>& settings);

/// CSV layout: v,photon1,photon2,DD,DR,RD,RR,n_v with "-" for absent cells. n_v is checked.
CountRecord read_count_csv(std::istream& in);
void write_count_csv(std::ostream& out, const CountRecord& counts);

/// mu_v = exposure_v tr(rho Pi_v).
std::array<double, kBases> expected_counts(const TwoQubitState& rho, std::span<const double> exposure);

/// rho(T) = T^dagger T / tr(T^dagger T) with T lower triangular. Parameter layout: the four
/// real diagonal entries, then (re, im) of T(1,0), T(2,1), T(3,2), T(2,0), T(3,1), T(3,0).
using Params = Eigen::Matrix<double, 16, 1>;
Matrix4 lower_factor(const Params& t);
Matrix4 rho_from_params(const Params& t);
/// Parameters whose rho equals the given (full-rank) state.
Params params_from_state(const Matrix4& rho);

/// Poisson log-likelihood sum n ln mu - mu, with 0 ln 0 = 0.
class Likelihood {
 public:
  /// With free_scale the exposures are known only up to a common factor, which is profiled out
  /// (kappa = sum n / sum e p); the gradient formula is unchanged at the profiled factor.
  Likelihood(std::span<const double> counts, std::span<const double> exposure, bool free_scale = false);
  double value(const Params& t) const;
  /// Value and analytic gradient.
  double value_and_gradient(const Params& t, Params& grad) const;

 private:
  std::array<double, kBases> n_{};
  std::array<double, kBases> e_{};
  std::array<Matrix4, kBases> pi_;
  bool free_scale_ = false;

  double scale(const std::array<double, kBases>& p) const;
};

struct MleOptions {
  int max_iterations = 10000;
  double ll_tolerance = 1e-9;
  double step_tolerance = 1e-9;
  bool free_scale = false;
  bool record_history = false;
};

struct ReconstructionResult {
  TwoQubitState rho = TwoQubitState::maximally_mixed();
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  std::array<double, kBases> exposure{};
  std::array<double, kSettings> setting_exposure{};
  /// Log-likelihood after every accepted step (only with MleOptions::record_history).
  std::vector<double> history;
};

/// L-BFGS ascent with Armijo backtracking from a linear-inversion start.
ReconstructionResult mle_reconstruct(std::span<const double> counts, std::span<const double> exposure,
                                     const MleOptions& options = {});

enum class ExposureModel {
  /// One scalar per setting from that setting's total, given a preliminary equal-exposure estimate.
  PerSettingTotals,
  /// Equal acquisition time for every setting.
  EqualAcquisition,
};
const char* to_string(ExposureModel m);

/// Per-basis exposure from per-setting scalars.
std::array<double, kBases> basis_exposure(const CountRecord& record, std::span<const double> setting_exposure);

ReconstructionResult mle_reconstruct(const CountRecord& counts, ExposureModel model = ExposureModel::PerSettingTotals,
                                     const MleOptions& options = {});

struct MetricSummary {
  double mean = 0.0;
  double sigma = 0.0;
};

struct ReconstructionWithErrors {
  ReconstructionResult result;
  double fidelity = 0.0;  // to |Psi+>
  double purity = 0.0;
  double eof = 0.0;
  std::optional<double> reference_fidelity;  // Uhlmann fidelity to a supplied reference
  MetricSummary fidelity_mc, purity_mc, eof_mc;
  std::optional<MetricSummary> reference_fidelity_mc;
  int trials = 0;
};

/// Reconstructs, then repeats on n_trials Poisson resamples of the sub-counts.
ReconstructionWithErrors reconstruct_with_errors(const CountRecord& counts, int n_trials = 100, std::uint64_t seed = 1,
                                                 ExposureModel model = ExposureModel::PerSettingTotals,
                                                 const std::optional<TwoQubitState>& reference = std::nullopt);

}  // namespace afcsim::tomography
