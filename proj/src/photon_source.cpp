#include "afcsim/photon_source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "afcsim/error.hpp"

namespace afcsim::source {

using quantum::Basis;
using quantum::Complex;
using quantum::Matrix4;
using quantum::TwoQubitKet;
using quantum::TwoQubitState;

void PumpConfig::validate() const {
  if (!(period_ns > 0.0)) throw InvalidArgument("pump.period_ns must be positive");
  if (!(pulse_interval_ns > 0.0 && pulse_interval_ns < period_ns)) {
    throw InvalidArgument("pump.pulse_interval_ns must lie in (0, period_ns)");
  }
  if (!(pulse_width_fwhm_ps >= 0.0 && pulse_width_fwhm_ps < pulse_interval_ns * 1000.0)) {
    throw InvalidArgument("pump.pulse_width_fwhm_ps must be below the pulse interval");
  }
  if (!(extinction_ratio_db > 0.0)) throw InvalidArgument("pump.extinction_ratio_db must be positive");
  if (!(intensity_imbalance > 0.0)) throw InvalidArgument("pump.intensity_imbalance must be positive");
  if (!(phase_jitter_sigma >= 0.0)) throw InvalidArgument("pump.phase_jitter_sigma must be >= 0");
}

double PumpConfig::pulse_sigma_ps() const {
  return pulse_width_fwhm_ps / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

void SourceModel::validate() const {
  pump.validate();
  if (!(pair_emission_probability_per_cycle >= 0.0 && pair_emission_probability_per_cycle < 1.0)) {
    throw InvalidArgument("pair_emission_probability_per_cycle must lie in [0, 1)");
  }
  if (!(white_noise_fraction >= 0.0 && white_noise_fraction <= 1.0)) {
    throw InvalidArgument("white_noise_fraction must lie in [0, 1]");
  }
  if (!(pair_bandwidth_ghz > 0.0)) throw InvalidArgument("pair_bandwidth_ghz must be positive");
  if (!(signal_center_wavelength_nm > 0.0 && idler_center_wavelength_nm > 0.0)) {
    throw InvalidArgument("centre wavelengths must be positive");
  }
}

double SourceModel::mean_pairs_per_cycle() const {
  return -std::log1p(-pair_emission_probability_per_cycle);
}

MixtureWeights mixture_weights(const SourceModel& model) {
  model.validate();
  const double leak = std::pow(10.0, -model.pump.extinction_ratio_db / 10.0);
  const double w = model.white_noise_fraction;
  MixtureWeights out;
  out.white = w;
  out.coherent = (1.0 - w) / (1.0 + 2.0 * leak);
  out.leakage_each = (1.0 - w) * leak / (1.0 + 2.0 * leak);
  return out;
}

const char* to_string(TemporalMode mode) {
  switch (mode) {
    case TemporalMode::EE: return "ee";
    case TemporalMode::EL: return "el";
    case TemporalMode::LE: return "le";
    case TemporalMode::LL: return "ll";
    case TemporalMode::Coherent: return "coherent";
  }
  return "?";
}

namespace {

// Pair rate scales with SH power, i.e. with the square of the pump pulse power.
std::pair<double, double> coherent_amplitudes(const SourceModel& model) {
  const double r = model.pump.intensity_imbalance;
  const double norm = std::sqrt(1.0 + r * r);
  return {1.0 / norm, r / norm};
}

}  // namespace

TwoQubitKet coherent_ket(const SourceModel& model, double phase) {
  const auto [a, b] = coherent_amplitudes(model);
  quantum::Vector4 v = quantum::Vector4::Zero();
  v(static_cast<int>(Basis::EE)) = a;
  v(static_cast<int>(Basis::LL)) = b * std::polar(1.0, phase);
  return TwoQubitKet::normalized(v);
}

TwoQubitKet emission_ket(const SourceModel& model, const EmissionRecord& record) {
  switch (record.mode) {
    case TemporalMode::EE: return TwoQubitKet::basis(Basis::EE);
    case TemporalMode::EL: return TwoQubitKet::basis(Basis::EL);
    case TemporalMode::LE: return TwoQubitKet::basis(Basis::LE);
    case TemporalMode::LL: return TwoQubitKet::basis(Basis::LL);
    case TemporalMode::Coherent: return coherent_ket(model, record.pair_phase);
  }
  throw InvalidArgument("emission_ket: unknown temporal mode");
}

TwoQubitState analytic_state(const SourceModel& model) {
  const MixtureWeights mw = mixture_weights(model);
  const auto [a, b] = coherent_amplitudes(model);
  const double damping = std::exp(-0.5 * model.pump.phase_jitter_sigma * model.pump.phase_jitter_sigma);
  Matrix4 rho = Matrix4::Zero();
  const int ee = static_cast<int>(Basis::EE);
  const int ll = static_cast<int>(Basis::LL);
  rho(ee, ee) = mw.coherent * a * a;
  rho(ll, ll) = mw.coherent * b * b;
  rho(ee, ll) = mw.coherent * a * b * damping;
  rho(ll, ee) = rho(ee, ll);
  rho(static_cast<int>(Basis::EL), static_cast<int>(Basis::EL)) = mw.leakage_each;
  rho(static_cast<int>(Basis::LE), static_cast<int>(Basis::LE)) = mw.leakage_each;
  rho += mw.white * Matrix4::Identity() / 4.0;
  return TwoQubitState::from_matrix(rho);
}

EmissionSampler::EmissionSampler(const SourceModel& model, std::uint64_t seed, std::vector<Band> bands)
    : model_(model), weights_(mixture_weights(model)), rng_(make_rng(seed, 0x50555243ULL)) {
  const double half = 0.5 * model.pair_bandwidth_ghz;
  if (bands.empty()) bands.push_back({-half, half});
  std::sort(bands.begin(), bands.end(), [](const Band& x, const Band& y) { return x.lo_ghz < y.lo_ghz; });
  for (const Band& b : bands) {
    if (b.hi_ghz < b.lo_ghz) throw InvalidArgument("EmissionSampler: band with hi < lo");
    Band clipped{std::max(b.lo_ghz, -half), std::min(b.hi_ghz, half)};
    if (clipped.width() <= 0.0) continue;
    if (!bands_.empty() && clipped.lo_ghz < bands_.back().hi_ghz) {
      throw InvalidArgument("EmissionSampler: bands overlap");
    }
    bands_.push_back(clipped);
    total_width_ += clipped.width();
  }
  band_mean_ = model.mean_pairs_per_cycle() * total_width_ / model.pair_bandwidth_ghz;
  cycle_prob_ = -std::expm1(-band_mean_);
  pulse_sigma_ps_ = model.pump.pulse_sigma_ps();
  next_cycle_ = -1;
  advance_next();
}

void EmissionSampler::advance_next() {
  if (band_mean_ <= 0.0) {
    next_cycle_ = std::numeric_limits<std::int64_t>::max();
    return;
  }
  // Gap to the next occupied cycle is geometric with success probability 1 - exp(-band_mean).
  std::exponential_distribution<double> expo(band_mean_);
  const double gap = std::floor(expo(rng_));
  if (gap > 9e18) {
    next_cycle_ = std::numeric_limits<std::int64_t>::max();
    return;
  }
  next_cycle_ = next_cycle_ + 1 + static_cast<std::int64_t>(gap);
}

EmissionRecord EmissionSampler::draw_pair(std::int64_t cycle) {
  EmissionRecord rec;
  rec.cycle_index = cycle;

  double u = uniform01(rng_) * total_width_;
  const Band* band = &bands_.back();
  for (const Band& b : bands_) {
    if (u < b.width()) {
      band = &b;
      break;
    }
    u -= b.width();
  }
  rec.signal_frequency_offset_ghz = band->lo_ghz + std::clamp(u, 0.0, band->width());

  const double c = uniform01(rng_);
  if (c < weights_.coherent) {
    rec.mode = TemporalMode::Coherent;
    if (model_.pump.phase_jitter_sigma > 0.0) {
      rec.pair_phase = std::normal_distribution<double>(0.0, model_.pump.phase_jitter_sigma)(rng_);
    }
  } else if (c < weights_.coherent + weights_.leakage_each) {
    rec.mode = TemporalMode::EL;
  } else if (c < weights_.coherent + 2.0 * weights_.leakage_each) {
    rec.mode = TemporalMode::LE;
  } else {
    static constexpr TemporalMode kWhite[4] = {TemporalMode::EE, TemporalMode::EL, TemporalMode::LE,
                                               TemporalMode::LL};
    rec.mode = kWhite[rng_() % 4];
  }
  if (pulse_sigma_ps_ > 0.0) {
    rec.time_offset_ps = std::normal_distribution<double>(0.0, pulse_sigma_ps_)(rng_);
  }
  return rec;
}

void EmissionSampler::sample_until(std::int64_t cycle_end, std::vector<EmissionRecord>& out) {
  if (cycle_end < cursor_) throw InvalidArgument("EmissionSampler: cycles must be requested in order");
  while (next_cycle_ < cycle_end) {
    // Zero-truncated Poisson pair count for an occupied cycle.
    const double p0 = std::exp(-band_mean_);
    double target = p0 + uniform01(rng_) * (1.0 - p0);
    double term = p0;
    double cdf = p0;
    int k = 0;
    do {
      ++k;
      term *= band_mean_ / k;
      cdf += term;
    } while (cdf < target && k < 64);
    for (int i = 0; i < k; ++i) out.push_back(draw_pair(next_cycle_));
    advance_next();
  }
  cursor_ = cycle_end;
}

void EmissionSampler::sample_cycle(std::int64_t cycle, std::vector<EmissionRecord>& out) {
  if (band_mean_ <= 0.0) return;
  const int k = std::poisson_distribution<int>(band_mean_)(rng_);
  for (int i = 0; i < k; ++i) out.push_back(draw_pair(cycle));
}

std::vector<EmissionRecord> sample_emissions(const SourceModel& model, std::int64_t n_cycles,
                                             std::uint64_t seed) {
  if (n_cycles < 1) throw InvalidArgument("sample_emissions: n_cycles must be >= 1");
  EmissionSampler sampler(model, seed);
  std::vector<EmissionRecord> out;
  sampler.sample_until(n_cycles, out);
  return out;
}

void write_emissions(std::ostream& out, std::span<const EmissionRecord> records) {
  out << "# cycle mode offset_GHz phase\n";
  for (const auto& r : records) {
    out << r.cycle_index << ' ' << to_string(r.mode) << ' ' << r.signal_frequency_offset_ghz << ' '
        << r.pair_phase << '\n';
  }
}

}  // namespace afcsim::source
