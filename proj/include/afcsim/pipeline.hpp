#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "afcsim/entanglement_tests.hpp"
#include "afcsim/experiment.hpp"
#include "afcsim/simulation.hpp"
#include "afcsim/tomography.hpp"

namespace afcsim::pipeline {

using json = nlohmann::json;
using experiment::ExperimentConfig;
using sim::Stage;

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

/// Target value with the half-width that counts as agreement.
struct Check {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};
Check check_within(std::string name, double value, double target, double tolerance);
Check check_at_least(std::string name, double value, double bound);
bool all_pass(const std::vector<Check>& checks);

/// Values the reproduction is compared against (index 0 = channel 1).
namespace targets {
inline constexpr std::array<double, 5> S_in{2.518, 2.504, 2.473, 2.488, 2.576};
inline constexpr std::array<double, 5> S_in_sigma{0.003, 0.003, 0.003, 0.003, 0.002};
inline constexpr std::array<double, 5> S_out{2.549, 2.539, 2.547, 2.495, 2.521};
inline constexpr std::array<double, 5> S_out_sigma{0.020, 0.020, 0.013, 0.013, 0.018};
inline constexpr std::array<double, 5> fidelity_in{91.33, 90.81, 89.45, 89.63, 89.34};
inline constexpr std::array<double, 5> fidelity_in_sigma{0.32, 0.24, 0.33, 0.48, 0.44};
inline constexpr std::array<double, 5> fidelity_out{86.57, 84.91, 85.37, 85.10, 84.25};
inline constexpr std::array<double, 5> fidelity_out_sigma{1.31, 1.17, 1.74, 1.68, 0.91};
inline constexpr std::array<double, 5> fidelity_in_out{95.23, 94.14, 94.03, 96.27, 92.00};
inline constexpr std::array<double, 5> fidelity_in_out_sigma{2.08, 1.23, 1.81, 1.85, 0.93};
inline constexpr std::array<double, 5> purity_in{84.00, 83.19, 80.94, 82.44, 81.12};
inline constexpr std::array<double, 5> purity_in_sigma{0.55, 0.42, 0.55, 0.81, 0.78};
inline constexpr std::array<double, 5> purity_out{77.51, 75.06, 75.49, 74.83, 73.72};
inline constexpr std::array<double, 5> purity_out_sigma{2.39, 1.84, 2.68, 2.49, 1.69};
inline constexpr std::array<double, 5> eof_in{76.09, 74.78, 71.11, 73.68, 71.48};
inline constexpr std::array<double, 5> eof_in_sigma{0.80, 0.62, 0.81, 1.22, 1.15};
inline constexpr std::array<double, 5> eof_out{65.94, 65.36, 64.02, 63.29, 59.59};
inline constexpr std::array<double, 5> eof_out_sigma{2.94, 2.19, 3.32, 3.74, 2.71};
/// Channel-1 fringe visibilities (%) of A1B1, A1B2, A2B1, A2B2.
inline constexpr std::array<double, 4> visibility{88.79, 89.56, 86.54, 91.76};
inline constexpr std::array<double, 4> visibility_sigma{1.43, 1.15, 1.18, 1.42};
/// A1B1 coincidence rates after storage (Hz).
inline constexpr std::array<double, 5> rate_a1b1{2.00, 1.96, 2.68, 2.76, 2.10};
inline constexpr double g2_correlated = 20.0;
}  // namespace targets

// ---- fixtures

/// Directory of the shipped data tables: $AFCSIM_FIXTURES, else the source-tree default.
std::filesystem::path default_fixture_dir();
std::string sha256_hex(const std::string& bytes);
/// Checks every file listed in SHA256SUMS; throws DataError naming the first mismatch.
void verify_fixtures(const std::filesystem::path& dir);

// ---- simulated experiments (channel indices are zero-based)

/// Seed of one sub-run, derived from the config seed and a label.
std::uint64_t run_seed(std::uint64_t seed, const std::string& label, int channel = 0, int index = 0);

double acquisition_s(const ExperimentConfig& config, Stage stage);

struct ChshRun {
  Stage stage = Stage::AfterStorage;
  int channel = 0;
  double wall_s = 0.0;
  std::int64_t cycles = 0;
  std::array<bell::PortCounts, 4> counts;
  std::array<bell::PortCounts, 4> predicted;
  bell::ChshResult result;
  double predicted_S = 0.0;
  /// A1B1 coincidences per wall-clock second at the first setting.
  Estimate rate_a1b1_hz;
};
ChshRun run_chsh(const ExperimentConfig& config, int channel, Stage stage);

struct FringeRun {
  int channel = 0;
  std::vector<bell::FringeScan> scans;
  /// fits[scan][combo]
  std::vector<std::array<bell::VisibilityFit, 4>> fits;
  std::vector<std::array<double, 4>> predicted_V;
  /// S evaluated on the fitted fringes; needs the two CHSH idler phases among the scans.
  std::optional<double> S_from_fits;
};
FringeRun run_fringes(const ExperimentConfig& config, int channel);

struct TomographyRun {
  Stage stage = Stage::AfterStorage;
  int channel = 0;
  double wall_s = 0.0;
  tomography::CountRecord counts;
  tomography::ReconstructionWithErrors reconstruction;
};
/// Four energy-basis settings, MLE with Monte-Carlo errors. `reference` adds the Uhlmann
/// fidelity to it (input/output fidelity for the after-storage state).
TomographyRun run_tomography(const ExperimentConfig& config, int channel, Stage stage,
                             const std::optional<quantum::TwoQubitState>& reference = std::nullopt);

struct G2Entry {
  int idler_channel = 0;
  int signal_channel = 0;
  Estimate g2;
  double predicted = 0.0;
};
/// Idler filtered on the partner of each listed channel against the signal of each listed channel.
std::vector<G2Entry> run_g2_matrix(const ExperimentConfig& config, const std::vector<int>& channels, Stage stage);

/// Idler-signal time-difference histogram of a correlated run at (alpha, beta).
analyzer::Histogram run_histogram(const ExperimentConfig& config, int idler_channel, int signal_channel, Stage stage,
                                  double alpha, double beta, double span_ns, double wall_s);

// ---- reports

struct ChannelReport {
  int channel = 0;
  std::optional<ChshRun> chsh_in, chsh_out;
  std::optional<TomographyRun> tomo_in, tomo_out;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<ChannelReport> channels;
  std::vector<G2Entry> g2_in, g2_out;
  std::vector<Check> checks;
  double elapsed_s = 0.0;
};

/// Every stage of every listed channel, plus both g2 matrices.
RunReport run_full_report(const ExperimentConfig& config, const std::vector<int>& channels);
std::vector<Check> report_checks(const RunReport& report);

json to_json(const Estimate& e);
json to_json(const Check& c);
json to_json(const std::vector<Check>& checks);
json to_json(const ChshRun& run);
json to_json(const TomographyRun& run);
json to_json(const std::vector<G2Entry>& g2);
json to_json(const FringeRun& run);
/// Deterministic: elapsed time is excluded.
json to_json(const RunReport& report);
/// Run-level bookkeeping (sampling mode, time base, boosts).
json sampling_metadata(const ExperimentConfig& config);

// ---- golden-data analyses

struct GoldenResult {
  json report;
  std::vector<Check> checks;
};
GoldenResult analyze_table2(const std::filesystem::path& fixtures);
GoldenResult analyze_table3(const std::filesystem::path& fixtures, int n_trials, std::uint64_t seed);
GoldenResult analyze_table4(const std::filesystem::path& fixtures);

/// Sorted-key JSON text with a trailing newline.
std::string dump(const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace afcsim::pipeline
