#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "afcsim/quantum_core.hpp"
#include "afcsim/random.hpp"

namespace afcsim::source {

/// Double-pulse pump of the cascaded SHG/SPDC source.
struct PumpConfig {
  double period_ns = 16.0;
  double pulse_interval_ns = 1.25;
  double pulse_width_fwhm_ps = 300.0;
  double extinction_ratio_db = 30.0;
  /// Late/early pump pulse power ratio.
  double intensity_imbalance = 1.0;
  /// Standard deviation of the early-late pump phase difference per shot (rad).
  double phase_jitter_sigma = 0.0;

  void validate() const;
  double pulse_sigma_ps() const;
};

struct SourceModel {
  PumpConfig pump;
  double pair_emission_probability_per_cycle = 0.01;
  double white_noise_fraction = 0.0;
  double signal_center_wavelength_nm = 1531.93;
  double idler_center_wavelength_nm = 1549.37;
  double pair_bandwidth_ghz = 100.0;

  void validate() const;
  /// Poisson mean of pairs per pump cycle, -ln(1 - p).
  double mean_pairs_per_cycle() const;
};

/// Weights of the mixture that defines the source state: the coherent
/// a|ee> + b e^{i theta}|ll> branch, each extinction-leakage branch (|el>, |le>),
/// and the white-noise branch (I/4).
struct MixtureWeights {
  double coherent = 1.0;
  double leakage_each = 0.0;
  double white = 0.0;
};
MixtureWeights mixture_weights(const SourceModel& model);

enum class TemporalMode : std::uint8_t { EE, EL, LE, LL, Coherent };
const char* to_string(TemporalMode mode);

/// One pair-creation event. The idler frequency offset is -signal_frequency_offset_ghz.
struct EmissionRecord {
  std::int64_t cycle_index = 0;
  TemporalMode mode = TemporalMode::Coherent;
  double signal_frequency_offset_ghz = 0.0;
  /// Pump phase difference for Coherent emissions (rad); 0 otherwise.
  double pair_phase = 0.0;
  /// Creation time relative to the nominal early pulse centre (ps), shared by both photons.
  double time_offset_ps = 0.0;

  bool operator==(const EmissionRecord&) const = default;
};

/// rho = (1-w) rho_coh + w I/4 with jitter-damped ee-ll coherence, amplitude imbalance, and
/// extinction leakage on el/le at relative weight 10^(-ER/10).
quantum::TwoQubitState analytic_state(const SourceModel& model);

/// Pure coherent branch a|ee> + b e^{i phase}|ll>.
quantum::TwoQubitKet coherent_ket(const SourceModel& model, double phase);

/// Pure two-photon state carried by one emission.
quantum::TwoQubitKet emission_ket(const SourceModel& model, const EmissionRecord& record);

/// Closed frequency interval of signal offsets (GHz).
struct Band {
  double lo_ghz = 0.0;
  double hi_ghz = 0.0;
  double width() const { return hi_ghz - lo_ghz; }
  bool contains(double f) const { return f >= lo_ghz && f <= hi_ghz; }
};

/// Sequential, seedable generator of pair emissions. Pair numbers per cycle are Poisson, so
/// restricting to sub-bands is an exact thinning of the full-band process.
class EmissionSampler {
 public:
  /// `bands` must be disjoint; they are clipped to the pair band. Empty = whole pair band.
  EmissionSampler(const SourceModel& model, std::uint64_t seed, std::vector<Band> bands = {});

  /// Appends emissions for cycles [cursor, cycle_end) in cycle order and advances the cursor.
  void sample_until(std::int64_t cycle_end, std::vector<EmissionRecord>& out);
  /// Draws the pairs of a single cycle without touching the sequential cursor, for sampling
  /// a chosen subset of cycles.
  void sample_cycle(std::int64_t cycle, std::vector<EmissionRecord>& out);
  std::int64_t cursor() const { return cursor_; }
  /// Poisson mean of pairs per cycle inside the bands.
  double band_mean() const { return band_mean_; }
  /// Probability that a cycle contains at least one pair inside the bands.
  double cycle_probability() const { return cycle_prob_; }

 private:
  void advance_next();
  EmissionRecord draw_pair(std::int64_t cycle);

  SourceModel model_;
  MixtureWeights weights_;
  std::vector<Band> bands_;
  double total_width_ = 0.0;
  double band_mean_ = 0.0;
  double cycle_prob_ = 0.0;
  double pulse_sigma_ps_ = 0.0;
  Rng rng_;
  std::int64_t cursor_ = 0;
  std::int64_t next_cycle_ = 0;
};

/// Full-band emissions for cycles [0, n_cycles). Deterministic per seed.
std::vector<EmissionRecord> sample_emissions(const SourceModel& model, std::int64_t n_cycles,
                                             std::uint64_t seed);

/// Columnar text: cycle mode offset_GHz phase (one record per line, '#' header).
void write_emissions(std::ostream& out, std::span<const EmissionRecord> records);

}  // namespace afcsim::source
