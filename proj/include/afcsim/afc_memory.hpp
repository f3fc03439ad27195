#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "afcsim/photon_source.hpp"
#include "afcsim/random.hpp"

namespace afcsim::memory {

/// Storage-time dependence of the comb contrast: d1(t) = d1_initial * exp(-t / decay_time).
struct CombDecay {
  double d1_initial = 0.0;
  double decay_time_ns = 0.0;

  bool enabled() const { return d1_initial > 0.0 && decay_time_ns > 0.0; }
  double d1_at(double storage_time_ns) const;
};

struct AfcChannel {
  /// Offset of the channel centre from the reference (channel 3) frequency, GHz.
  double center_offset_ghz = 0.0;
  double bandwidth_ghz = 4.0;
  double teeth_spacing_mhz = 6.58;
  /// Comb depth at the operating storage time.
  double d1 = 1.5;
  double finesse = 2.0;
  double d0 = 1.7;
  CombDecay decay;

  void validate() const;
  bool passes(double signal_offset_ghz) const {
    return signal_offset_ghz >= center_offset_ghz - 0.5 * bandwidth_ghz &&
           signal_offset_ghz <= center_offset_ghz + 0.5 * bandwidth_ghz;
  }
};

struct MemoryBank {
  std::vector<AfcChannel> channels;
  double channel_spacing_ghz = 15.0;
  /// End-to-end transmission of the memory chip and its fibre pigtails.
  double transmission_efficiency = 0.26;
  /// Noise photons added to each channel's recalled stream, per second of measure time.
  double noise_rate_hz = 0.0;
  /// Wavelength of the zero-offset channel.
  double reference_wavelength_nm = 1531.93;

  void validate() const;
  double center_wavelength_nm(int index) const;

  /// Five channels at +30, +15, 0, -15, -30 GHz with d1 = 1.5, F = 2, d0 = 1.7.
  static MemoryBank nominal();
};

/// 1/Delta in ns. Throws InvalidArgument for nonpositive spacing.
double storage_time_ns(double teeth_spacing_mhz);

double afc_efficiency(double d1, double finesse, double d0);
double afc_efficiency(const AfcChannel& channel);
/// Efficiency from the channel's decay model at an arbitrary storage time.
double afc_efficiency_at(const AfcChannel& channel, double storage_time_ns);

/// Upper bound 4 e^-2 e^(-7/F^2) e^(-d0), reached at d1 = 2F.
double afc_efficiency_bound(double finesse, double d0);

/// Zero-based index of the channel whose passband contains the signal offset.
/// Throws InvalidArgument when |offset| exceeds half the pair band.
std::optional<int> channel_for_offset(const MemoryBank& bank, double offset_ghz,
                                      double pair_bandwidth_ghz = 100.0);

/// Sum over channels of bandwidth (GHz) times storage time (ns).
double time_bandwidth_product(const MemoryBank& bank);

struct RecalledEvent {
  source::EmissionRecord emission;
  int channel = 0;
  double delay_ns = 0.0;
  /// Memory noise photon rather than a recalled signal photon. For noise the emission's
  /// cycle_index is the cycle it is recalled in (delay already removed) and
  /// noise_time_ps is its arrival time within that cycle.
  bool noise = false;
  double noise_time_ps = 0.0;
};

/// Sequential storage transformation; feeding consecutive cycle blocks is deterministic per seed.
class StorageStage {
 public:
  StorageStage(const MemoryBank& bank, std::uint64_t seed, double period_ns = 16.0);

  /// Stores the emissions of cycles [cycle_begin, cycle_end) and injects noise over that span.
  void process(std::span<const source::EmissionRecord> emissions, std::int64_t cycle_begin,
               std::int64_t cycle_end, std::vector<RecalledEvent>& out);

  double recall_probability(int channel) const { return recall_prob_.at(channel); }
  double delay_ns(int channel) const { return delay_ns_.at(channel); }

  /// Recall probabilities overridden, e.g. to model a transparent memory.
  void set_recall_probability(int channel, double p);

 private:
  MemoryBank bank_;
  double period_ns_;
  std::vector<double> recall_prob_;
  std::vector<double> delay_ns_;
  Rng rng_;
};

/// One-shot form. Noise is injected over [0, noise_cycles) when noise_cycles > 0.
std::vector<RecalledEvent> apply_storage(const MemoryBank& bank,
                                         std::span<const source::EmissionRecord> emissions,
                                         std::uint64_t seed, std::int64_t noise_cycles = 0,
                                         double period_ns = 16.0);

/// Efficiency grid in percent: rows follow storage_times_ns, columns the bank channels.
struct EfficiencyTable {
  std::vector<double> storage_times_ns;
  std::vector<std::vector<double>> percent;
};

/// Evaluates every channel's decay model at each storage time.
EfficiencyTable efficiency_table(const MemoryBank& bank, std::span<const double> storage_times_ns);

/// CSV header "storage_time_ns,ch1,..,chN".
void write_efficiency_csv(std::ostream& out, const EfficiencyTable& table);
EfficiencyTable read_efficiency_csv(std::istream& in);

/// Rows at which efficiency rises with storage time in any channel.
std::vector<bool> nonmonotone_rows(const EfficiencyTable& table);

struct DecayFit {
  CombDecay decay;
  /// Model minus data in percentage points, one entry per row (excluded rows included).
  std::vector<double> residuals_pp;
  std::vector<bool> used;
  double max_abs_residual_pp = 0.0;  // over used rows
  int evaluations = 0;
};

/// Least-squares fit of d1(0) and the decay time to one channel column (percent), with finesse
/// and d0 held fixed. Rows with use[i] == false are ignored. Throws FitError on failure.
DecayFit fit_decay(std::span<const double> storage_times_ns, std::span<const double> percent,
                   std::span<const bool> use, double finesse = 2.0, double d0 = 1.7);

}  // namespace afcsim::memory
