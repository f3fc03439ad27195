#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "afcsim/quantum_core.hpp"

namespace afcsim::bell {

/// Counts of the four port combinations A1B1, A1B2, A2B1, A2B2.
struct PortCounts {
  double c11 = 0.0;
  double c12 = 0.0;
  double c21 = 0.0;
  double c22 = 0.0;

  double total() const { return c11 + c12 + c21 + c22; }
  double& operator[](int combo);
  double operator[](int combo) const;
};

enum class Combo : int { A1B1 = 0, A1B2 = 1, A2B1 = 2, A2B2 = 3 };
const char* to_string(Combo c);
/// (-1)^(i+j) for the combination.
int combo_sign(Combo c);

/// (C11 - C12 - C21 + C22) / (C11 + C12 + C21 + C22). Throws DataError on an all-zero input.
double correlation_E(const PortCounts& counts);

/// |E(a,b) - E(a',b) + E(a,b') + E(a',b')|.
double chsh_S(double e_ab, double e_apb, double e_abp, double e_apbp);

struct ChshSettings {
  double alpha = 0.0;
  double alpha_prime = std::numbers::pi / 2.0;
  double beta = std::numbers::pi / 4.0;
  double beta_prime = -std::numbers::pi / 4.0;

  /// (alpha, beta) pairs in the order (a,b), (a',b), (a,b'), (a',b').
  std::array<std::pair<double, double>, 4> pairs() const;
};

struct ChshResult {
  double S = 0.0;
  double sigma_S = 0.0;
  ChshSettings settings;
  std::array<double, 4> E{};
  std::array<double, 4> sigma_E{};
};

/// S from four fixed-setting count quadruples (order as ChshSettings::pairs), with Poisson
/// Monte-Carlo error bars.
ChshResult chsh_from_counts(const std::array<PortCounts, 4>& counts, const ChshSettings& settings = {},
                            int n_trials = 100, std::uint64_t seed = 1);

/// Noise-free S of a state: E from the middle-middle cells of the joint projection table.
double analytic_S(const quantum::TwoQubitState& rho, const ChshSettings& settings = {});
double analytic_E(const quantum::TwoQubitState& rho, double alpha, double beta);

/// (S - 2) / sigma_S. Throws InvalidArgument unless sigma_S > 0.
double bell_violation_sigmas(const ChshResult& result);

struct FringeScan {
  double alpha = 0.0;
  std::vector<double> beta;
  std::vector<PortCounts> counts;
  double integration_time_s = 250.0;

  void validate() const;
};

struct VisibilityFit {
  double V = 0.0;
  double phase_offset = 0.0;
  double amplitude = 0.0;
  double sigma_V = 0.0;
  int evaluations = 0;
};

/// Least-squares fit of A (1 + s V cos(alpha + beta + phi0)), s = (-1)^(i+j), V clamped to
/// [0, 1], seeded from the first Fourier component. sigma_V from n_trials Poisson resamples
/// (0 disables). Bad input raises DataError, non-convergence FitError.
VisibilityFit fit_visibility(const FringeScan& scan, Combo combo, int n_trials = 100, std::uint64_t seed = 1);

/// Parametric Poisson bootstrap: resamples every count with mean equal to the observation,
/// evaluates `statistic` on each trial and returns the per-output sample standard deviation.
using Statistic = std::function<std::vector<double>(std::span<const double>)>;
std::vector<double> monte_carlo_errors(std::span<const double> counts, const Statistic& statistic,
                                       int n_trials = 100, std::uint64_t seed = 1);

/// CSV: beta_rad,c11,c12,c21,c22.
FringeScan read_fringe_csv(std::istream& in, double alpha);
void write_fringe_csv(std::ostream& out, const FringeScan& scan);

/// JSON object with the settings, the four E values and errors, S, sigma_S, violation sigmas.
std::string chsh_to_json(const ChshResult& result);

}  // namespace afcsim::bell
