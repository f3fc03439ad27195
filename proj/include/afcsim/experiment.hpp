#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "afcsim/afc_memory.hpp"
#include "afcsim/analyzer.hpp"
#include "afcsim/entanglement_tests.hpp"
#include "afcsim/photon_source.hpp"

namespace afcsim::experiment {

/// AFC preparation / wait / measurement cycle of the memory. Photons are only measured in
/// the measure window.
struct DutyCycle {
  double prepare_ms = 200.0;
  double wait_ms = 20.0;
  double measure_ms = 280.0;
  double period_ms = 500.0;

  void validate() const;
  double measure_fraction() const { return measure_ms / period_ms; }
};

struct Filters {
  /// Idler FBG, centred on the frequency conjugate to the selected signal channel.
  double idler_fbg_bandwidth_ghz = 6.2;
  /// Idler path from source to detector (fibre, FBG, UMZI insertion loss).
  double idler_path_transmission = 0.029;
  /// Signal path when the memory is bypassed (the signal is band-limited to the channel passband).
  double signal_path_transmission_before_storage = 0.1;

  void validate() const;
};

/// Acquisition times in wall-clock seconds; simulated cycles cover only the measure windows.
struct Acquisition {
  double before_storage_s = 100.0;
  double fringe_point_s = 250.0;
  double g2_s = 500.0;
  /// Fully sampled span used to estimate idler singles for g2 in heralded mode.
  double idler_singles_s = 2.0;

  void validate() const;
};

enum class SamplingMode {
  /// Every pair in the filter bands is simulated.
  Full,
  /// Signal detections are simulated everywhere, the idler side only in the cycles around
  /// them. Exact for coincidence counts and signal singles, much faster at low recall rates.
  Heralded,
};
const char* to_string(SamplingMode m);

struct Analysis {
  bell::ChshSettings chsh;
  std::vector<double> fringe_alphas{0.0, 1.5707963267948966};
  int fringe_points = 12;
  int mc_trials = 100;
  bool run_tomography = true;
  bool run_before_storage = true;
  SamplingMode sampling = SamplingMode::Heralded;

  void validate() const;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  source::SourceModel source;
  memory::MemoryBank bank = memory::MemoryBank::nominal();
  analyzer::UmziConfig idler_analyzer;
  analyzer::UmziConfig signal_analyzer;
  analyzer::DetectorConfig detectors;
  analyzer::CoincidenceConfig coincidence;
  /// Arrival of the first time slot after the clock edge.
  double first_slot_ps = 2000.0;
  Filters filters;
  DutyCycle duty_cycle;
  /// Wall-clock acquisition per after-storage measurement setting (CHSH and tomography).
  double run_duration_s = 500.0;
  Acquisition acquisition;
  Analysis analysis;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  analyzer::SlotGrid grid() const;
  /// Pump cycles inside the measure windows of `wall_s` seconds of acquisition.
  std::int64_t measure_cycles(double wall_s) const;
};

/// Strict parse: unknown keys, wrong types and out-of-range values raise ConfigError with the
/// dotted path of the field. Missing keys take the defaults above.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Round-trippable JSON (sorted keys).
std::string config_to_json(const ExperimentConfig& config);

}  // namespace afcsim::experiment
