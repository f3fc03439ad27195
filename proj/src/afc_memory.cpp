#include "afcsim/afc_memory.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "afcsim/error.hpp"
#include "afcsim/units.hpp"

namespace afcsim::memory {

double CombDecay::d1_at(double storage_time_ns) const {
  if (!enabled()) throw InvalidArgument("CombDecay: decay model not configured");
  if (storage_time_ns < 0.0) throw InvalidArgument("CombDecay: negative storage time");
  return d1_initial * std::exp(-storage_time_ns / decay_time_ns);
}

void AfcChannel::validate() const {
  if (!(d1 >= 0.0)) throw InvalidArgument("AfcChannel: d1 must be >= 0");
  if (!(d0 >= 0.0)) throw InvalidArgument("AfcChannel: d0 must be >= 0");
  if (!(finesse >= 1.0)) throw InvalidArgument("AfcChannel: finesse must be >= 1");
  if (!(teeth_spacing_mhz > 0.0)) throw InvalidArgument("AfcChannel: teeth spacing must be positive");
  if (!(bandwidth_ghz > 0.0)) throw InvalidArgument("AfcChannel: bandwidth must be positive");
  if (decay.d1_initial < 0.0 || decay.decay_time_ns < 0.0) {
    throw InvalidArgument("AfcChannel: decay parameters must be >= 0");
  }
}

void MemoryBank::validate() const {
  if (channels.empty()) throw InvalidArgument("MemoryBank: no channels");
  if (!(channel_spacing_ghz > 0.0)) throw InvalidArgument("MemoryBank: channel spacing must be positive");
  if (!(transmission_efficiency >= 0.0 && transmission_efficiency <= 1.0)) {
    throw InvalidArgument("MemoryBank: transmission efficiency must lie in [0, 1]");
  }
  if (!(noise_rate_hz >= 0.0)) throw InvalidArgument("MemoryBank: noise rate must be >= 0");
  if (!(reference_wavelength_nm > 0.0)) throw InvalidArgument("MemoryBank: bad reference wavelength");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    channels[i].validate();
    if (channels[i].bandwidth_ghz >= channel_spacing_ghz) {
      throw InvalidArgument("MemoryBank: channel bandwidth must be below the channel spacing");
    }
    if (i > 0) {
      const double gap = std::abs(channels[i].center_offset_ghz - channels[i - 1].center_offset_ghz);
      if (std::abs(gap - channel_spacing_ghz) > 0.5) {
        throw InvalidArgument("MemoryBank: channels " + std::to_string(i) + " and " +
                              std::to_string(i + 1) + " are " + std::to_string(gap) +
                              " GHz apart, expected the channel spacing");
      }
    }
  }
}

double MemoryBank::center_wavelength_nm(int index) const {
  return units::wavelength_at_offset(reference_wavelength_nm, channels.at(index).center_offset_ghz);
}

MemoryBank MemoryBank::nominal() {
  // Decay constants from the least-squares fit of the tabulated efficiencies.
  static constexpr double kOffsets[5] = {30.0, 15.0, 0.0, -15.0, -30.0};
  static constexpr CombDecay kDecay[5] = {
      {2.8162, 185.03}, {2.6520, 188.0}, {3.0186, 159.6}, {2.6060, 210.0}, {2.7390, 218.6}};
  MemoryBank bank;
  for (int i = 0; i < 5; ++i) {
    AfcChannel ch;
    ch.center_offset_ghz = kOffsets[i];
    ch.decay = kDecay[i];
    bank.channels.push_back(ch);
  }
  return bank;
}

double storage_time_ns(double teeth_spacing_mhz) {
  if (!(teeth_spacing_mhz > 0.0)) throw InvalidArgument("storage_time_ns: teeth spacing must be positive");
  return 1000.0 / teeth_spacing_mhz;
}

double afc_efficiency(double d1, double finesse, double d0) {
  if (!(d1 >= 0.0 && d0 >= 0.0 && finesse >= 1.0)) {
    throw InvalidArgument("afc_efficiency: need d1 >= 0, d0 >= 0, F >= 1");
  }
  const double x = d1 / finesse;
  return x * x * std::exp(-x) * std::exp(-7.0 / (finesse * finesse)) * std::exp(-d0);
}

double afc_efficiency(const AfcChannel& channel) {
  channel.validate();
  return afc_efficiency(channel.d1, channel.finesse, channel.d0);
}

double afc_efficiency_at(const AfcChannel& channel, double storage_time) {
  channel.validate();
  return afc_efficiency(channel.decay.d1_at(storage_time), channel.finesse, channel.d0);
}

double afc_efficiency_bound(double finesse, double d0) {
  return 4.0 * std::exp(-2.0) * std::exp(-7.0 / (finesse * finesse)) * std::exp(-d0);
}

std::optional<int> channel_for_offset(const MemoryBank& bank, double offset_ghz, double pair_bandwidth_ghz) {
  if (!(std::abs(offset_ghz) <= 0.5 * pair_bandwidth_ghz)) {
    throw InvalidArgument("channel_for_offset: offset outside the pair band");
  }
  for (std::size_t i = 0; i < bank.channels.size(); ++i) {
    if (bank.channels[i].passes(offset_ghz)) return static_cast<int>(i);
  }
  return std::nullopt;
}

double time_bandwidth_product(const MemoryBank& bank) {
  double sum = 0.0;
  for (const auto& ch : bank.channels) sum += ch.bandwidth_ghz * storage_time_ns(ch.teeth_spacing_mhz);
  return sum;
}

StorageStage::StorageStage(const MemoryBank& bank, std::uint64_t seed, double period_ns)
    : bank_(bank), period_ns_(period_ns), rng_(make_rng(seed, 0x4d454d4fULL)) {
  bank_.validate();
  if (!(period_ns > 0.0)) throw InvalidArgument("StorageStage: period must be positive");
  for (const auto& ch : bank_.channels) {
    recall_prob_.push_back(afc_efficiency(ch) * bank_.transmission_efficiency);
    delay_ns_.push_back(storage_time_ns(ch.teeth_spacing_mhz));
  }
}

void StorageStage::set_recall_probability(int channel, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("set_recall_probability: p outside [0, 1]");
  recall_prob_.at(channel) = p;
}

void StorageStage::process(std::span<const source::EmissionRecord> emissions, std::int64_t cycle_begin,
                           std::int64_t cycle_end, std::vector<RecalledEvent>& out) {
  if (cycle_end < cycle_begin) throw InvalidArgument("StorageStage: empty cycle span");
  const int n_ch = static_cast<int>(bank_.channels.size());
  for (const auto& em : emissions) {
    int ch = -1;
    for (int i = 0; i < n_ch; ++i) {
      if (bank_.channels[i].passes(em.signal_frequency_offset_ghz)) {
        ch = i;
        break;
      }
    }
    if (ch < 0) continue;  // between passbands: absorbed by the background
    if (uniform01(rng_) >= recall_prob_[ch]) continue;
    RecalledEvent ev;
    ev.emission = em;
    ev.channel = ch;
    ev.delay_ns = delay_ns_[ch];
    out.push_back(ev);
  }

  if (bank_.noise_rate_hz <= 0.0 || cycle_end == cycle_begin) return;
  const double span_s = static_cast<double>(cycle_end - cycle_begin) * period_ns_ * 1e-9;
  const double period_ps = period_ns_ * units::kPsPerNs;
  for (int ch = 0; ch < n_ch; ++ch) {
    std::poisson_distribution<std::int64_t> count(bank_.noise_rate_hz * span_s);
    const std::int64_t n = count(rng_);
    for (std::int64_t k = 0; k < n; ++k) {
      const double t = uniform01(rng_) * static_cast<double>(cycle_end - cycle_begin);
      RecalledEvent ev;
      ev.noise = true;
      ev.channel = ch;
      ev.delay_ns = delay_ns_[ch];
      ev.emission.cycle_index = cycle_begin + static_cast<std::int64_t>(t);
      ev.emission.signal_frequency_offset_ghz = bank_.channels[ch].center_offset_ghz;
      ev.noise_time_ps = (t - std::floor(t)) * period_ps;
      out.push_back(ev);
    }
  }
}

std::vector<RecalledEvent> apply_storage(const MemoryBank& bank,
                                         std::span<const source::EmissionRecord> emissions,
                                         std::uint64_t seed, std::int64_t noise_cycles, double period_ns) {
  MemoryBank b = bank;
  if (noise_cycles <= 0) b.noise_rate_hz = 0.0;
  StorageStage stage(b, seed, period_ns);
  std::vector<RecalledEvent> out;
  stage.process(emissions, 0, std::max<std::int64_t>(noise_cycles, 0), out);
  return out;
}

EfficiencyTable efficiency_table(const MemoryBank& bank, std::span<const double> storage_times) {
  bank.validate();
  EfficiencyTable table;
  for (double t : storage_times) {
    if (!(t > 0.0)) throw InvalidArgument("efficiency_table: storage times must be positive");
    std::vector<double> row;
    for (const auto& ch : bank.channels) row.push_back(100.0 * afc_efficiency_at(ch, t));
    table.storage_times_ns.push_back(t);
    table.percent.push_back(std::move(row));
  }
  return table;
}

void write_efficiency_csv(std::ostream& out, const EfficiencyTable& table) {
  const std::size_t n_ch = table.percent.empty() ? 0 : table.percent.front().size();
  out << "storage_time_ns";
  for (std::size_t c = 0; c < n_ch; ++c) out << ",ch" << c + 1;
  out << '\n';
  for (std::size_t r = 0; r < table.storage_times_ns.size(); ++r) {
    out << table.storage_times_ns[r];
    for (double v : table.percent[r]) out << ',' << v;
    out << '\n';
  }
}

EfficiencyTable read_efficiency_csv(std::istream& in) {
  EfficiencyTable table;
  std::string line;
  if (!std::getline(in, line) || line.rfind("storage_time_ns", 0) != 0) {
    throw DataError("efficiency CSV: missing 'storage_time_ns,...' header");
  }
  const auto n_cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::vector<double> values;
    for (std::string cell; std::getline(row, cell, ',');) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DataError("efficiency CSV: bad number '" + cell + "'");
      }
    }
    if (values.size() != n_cols) throw DataError("efficiency CSV: ragged row '" + line + "'");
    table.storage_times_ns.push_back(values.front());
    table.percent.emplace_back(values.begin() + 1, values.end());
  }
  if (table.storage_times_ns.empty()) throw DataError("efficiency CSV: no data rows");
  return table;
}

std::vector<bool> nonmonotone_rows(const EfficiencyTable& table) {
  std::vector<bool> flagged(table.storage_times_ns.size(), false);
  for (std::size_t r = 1; r < flagged.size(); ++r) {
    for (std::size_t c = 0; c < table.percent[r].size(); ++c) {
      if (table.percent[r][c] > table.percent[r - 1][c]) flagged[r] = true;
    }
  }
  return flagged;
}

namespace {

struct DecayResidual : Eigen::DenseFunctor<double> {
  DecayResidual(std::vector<double> t, std::vector<double> y, double finesse, double d0)
      : Eigen::DenseFunctor<double>(2, static_cast<int>(t.size())),
        t_(std::move(t)), y_(std::move(y)), f_(finesse), d0_(d0) {}

  int operator()(const InputType& p, ValueType& r) const {
    for (std::size_t i = 0; i < t_.size(); ++i) r(i) = model(p, t_[i]) - y_[i];
    return 0;
  }

  int df(const InputType& p, JacobianType& j) const {
    const double scale = 100.0 * std::exp(-7.0 / (f_ * f_)) * std::exp(-d0_);
    for (std::size_t i = 0; i < t_.size(); ++i) {
      const double e = std::exp(-t_[i] / p(1));
      const double x = p(0) * e / f_;
      const double dx = scale * (2.0 * x - x * x) * std::exp(-x);  // d(eta)/dx
      j(i, 0) = dx * e / f_;
      j(i, 1) = dx * x * t_[i] / (p(1) * p(1));
    }
    return 0;
  }

  double model(const InputType& p, double t) const {
    return 100.0 * afc_efficiency(std::max(p(0), 0.0) * std::exp(-t / p(1)), f_, d0_);
  }

  std::vector<double> t_, y_;
  double f_, d0_;
};

}  // namespace

DecayFit fit_decay(std::span<const double> times, std::span<const double> percent, std::span<const bool> use,
                   double finesse, double d0) {
  if (times.size() != percent.size() || times.size() != use.size()) {
    throw InvalidArgument("fit_decay: length mismatch");
  }
  std::vector<double> t, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!use[i]) continue;
    if (!(times[i] > 0.0) || !(percent[i] > 0.0)) throw DataError("fit_decay: nonpositive entry");
    t.push_back(times[i]);
    y.push_back(percent[i]);
  }
  if (t.size() < 3) throw DataError("fit_decay: need at least three usable rows");

  // Start on the rising side of x^2 e^-x (x < 2) so the fit stays on the physical branch.
  const double peak = afc_efficiency_bound(finesse, d0) * 100.0;
  Eigen::VectorXd p(2);
  p << 2.0 * finesse * std::sqrt(std::min(y.front() / peak, 1.0)) * std::exp(t.front() / 200.0), 200.0;

  DecayResidual functor(t, y, finesse, d0);
  Eigen::LevenbergMarquardt<DecayResidual> lm(functor);
  lm.setMaxfev(2000);
  lm.setXtol(1e-12);
  lm.setFtol(1e-14);
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation || !(p(1) > 0.0) ||
      !(p(0) > 0.0) || !std::isfinite(p(0)) || !std::isfinite(p(1))) {
    throw FitError("fit_decay: Levenberg-Marquardt did not converge");
  }

  DecayFit fit;
  fit.decay = {p(0), p(1)};
  fit.evaluations = static_cast<int>(lm.nfev());
  fit.used.assign(use.begin(), use.end());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double r = functor.model(p, times[i]) - percent[i];
    fit.residuals_pp.push_back(r);
    if (use[i]) fit.max_abs_residual_pp = std::max(fit.max_abs_residual_pp, std::abs(r));
  }
  return fit;
}

}  // namespace afcsim::memory
