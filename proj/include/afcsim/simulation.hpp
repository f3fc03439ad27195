#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "afcsim/analyzer.hpp"
#include "afcsim/entanglement_tests.hpp"
#include "afcsim/experiment.hpp"

namespace afcsim::sim {

enum class Stage { BeforeStorage, AfterStorage };
const char* to_string(Stage s);

/// One acquisition: idler filtered on the partner of `idler_channel`, signal taken from
/// `signal_channel` (recalled from the memory or bypassing it), analyzers at (alpha, beta).
struct Measurement {
  int idler_channel = 0;
  int signal_channel = 0;
  Stage stage = Stage::AfterStorage;
  /// Analyzer settings; the configured UMZI phases are added as fixed offsets.
  double alpha = 0.0;
  double beta = 0.0;
  std::int64_t cycles = 0;
  std::uint64_t seed = 1;
  experiment::SamplingMode mode = experiment::SamplingMode::Heralded;
  /// Heralded mode only: length of the fully sampled span for the idler singles estimate.
  std::int64_t idler_singles_cycles = 0;
  /// Idler-signal time-difference histogram over +-span (0 disables).
  double histogram_span_ns = 0.0;
  /// Keep the detection streams in the result (heralded mode: idler events near heralds only).
  bool keep_events = false;
};

/// Optical path of one measurement, in signal-offset coordinates (GHz from the reference channel).
struct PathModel {
  source::Band idler_band;
  source::Band signal_band;
  double idler_transmission = 1.0;
  /// Recall probability (after storage) or bypass transmission (before storage).
  double signal_survival = 1.0;
  double signal_delay_ps = 0.0;
  std::int64_t signal_offset_ps = 0;
  double noise_rate_hz = 0.0;
};
PathModel path_model(const experiment::ExperimentConfig& config, const Measurement& m);

struct MeasurementResult {
  analyzer::ThreefoldCounts counts;
  std::int64_t cycles = 0;
  /// Cycles with a classified idler detection over a fully sampled span of idler_singles_cycles.
  std::int64_t idler_singles = 0;
  std::int64_t idler_singles_cycles = 0;
  std::int64_t emissions = 0;
  std::int64_t idler_detections = 0;
  std::int64_t signal_detections = 0;
  std::optional<analyzer::Histogram> histogram;
  std::vector<analyzer::DetectionEvent> idler_events;
  std::vector<analyzer::DetectionEvent> signal_events;

  /// Middle-middle coincidences of the four port combinations.
  bell::PortCounts middle_counts() const;
  double idler_probability() const;
  double signal_probability() const;
  double joint_probability() const;
  /// P_si / (P_s P_i); throws DataError without singles.
  double g2() const;
  /// Poisson error of g2 from the joint and singles tallies.
  double g2_sigma() const;
};

/// Event-level run: source -> memory -> analyzers -> detectors -> threefold counting,
/// streamed in blocks of cycles. Deterministic per (config, measurement).
MeasurementResult simulate_measurement(const experiment::ExperimentConfig& config, const Measurement& m);

/// Cycles with a classified idler detection over `cycles` fully sampled cycles. Depends only on
/// the idler channel and the idler setting, so one estimate can serve several signal channels.
std::int64_t sample_idler_singles(const experiment::ExperimentConfig& config, int idler_channel, double alpha,
                                  std::int64_t cycles, std::uint64_t seed);

/// Infinite-statistics expectation of the same run from the analytic source state.
struct Prediction {
  /// Expected threefold counts, index idler_cell * 6 + signal_cell.
  std::array<double, analyzer::kCells * analyzer::kCells> cells{};
  double idler_probability = 0.0;
  double signal_probability = 0.0;
  double joint_probability = 0.0;
  double g2 = 0.0;

  bell::PortCounts middle_counts() const;
};
Prediction predict_measurement(const experiment::ExperimentConfig& config, const Measurement& m);

/// Probability that a photon of a pair lands inside its slot window, alone and jointly with its
/// partner (the pump timing spread is shared by both photons).
struct WindowAcceptance {
  double single = 1.0;
  double joint = 1.0;
};
WindowAcceptance window_acceptance(double pulse_sigma_ps, double jitter_sigma_ps, double window_ps);

}  // namespace afcsim::sim
