#include "afcsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "afcsim/afc_memory.hpp"
#include "afcsim/error.hpp"
#include "afcsim/units.hpp"

namespace afcsim::sim {

using analyzer::DetectionEvent;
using analyzer::DetectorId;
using analyzer::kCells;
using analyzer::PhotonArrival;
using experiment::ExperimentConfig;
using experiment::SamplingMode;
using source::Band;
using source::EmissionRecord;
using source::TemporalMode;

const char* to_string(Stage s) { return s == Stage::BeforeStorage ? "before_storage" : "after_storage"; }

PathModel path_model(const ExperimentConfig& config, const Measurement& m) {
  const auto& chans = config.bank.channels;
  const auto n = static_cast<int>(chans.size());
  if (m.idler_channel < 0 || m.idler_channel >= n || m.signal_channel < 0 || m.signal_channel >= n) {
    throw InvalidArgument("Measurement: channel index out of range");
  }
  const auto& ic = chans[static_cast<std::size_t>(m.idler_channel)];
  const auto& sc = chans[static_cast<std::size_t>(m.signal_channel)];
  PathModel p;
  const double half_fbg = 0.5 * config.filters.idler_fbg_bandwidth_ghz;
  p.idler_band = {ic.center_offset_ghz - half_fbg, ic.center_offset_ghz + half_fbg};
  p.signal_band = {sc.center_offset_ghz - 0.5 * sc.bandwidth_ghz, sc.center_offset_ghz + 0.5 * sc.bandwidth_ghz};
  p.idler_transmission = config.filters.idler_path_transmission;
  if (m.stage == Stage::AfterStorage) {
    p.signal_survival = memory::afc_efficiency(sc) * config.bank.transmission_efficiency;
    p.signal_delay_ps = memory::storage_time_ns(sc.teeth_spacing_mhz) * units::kPsPerNs;
    p.noise_rate_hz = config.bank.noise_rate_hz;
  } else {
    p.signal_survival = config.filters.signal_path_transmission_before_storage;
  }
  p.signal_offset_ps = std::llround(p.signal_delay_ps);
  return p;
}

namespace {

double overlap(const Band& a, const Band& b) { return std::max(0.0, std::min(a.hi_ghz, b.hi_ghz) - std::max(a.lo_ghz, b.lo_ghz)); }

// a minus b, as up to two intervals.
std::vector<Band> difference(const Band& a, const Band& b) {
  std::vector<Band> out;
  if (overlap(a, b) <= 0.0) {
    out.push_back(a);
    return out;
  }
  if (b.lo_ghz > a.lo_ghz) out.push_back({a.lo_ghz, b.lo_ghz});
  if (b.hi_ghz < a.hi_ghz) out.push_back({b.hi_ghz, a.hi_ghz});
  return out;
}

// Disjoint cover of a union b.
std::vector<Band> band_union(const Band& a, const Band& b) {
  if (overlap(a, b) <= 0.0) return {a, b};
  return {Band{std::min(a.lo_ghz, b.lo_ghz), std::max(a.hi_ghz, b.hi_ghz)}};
}

source::SourceModel with_mean(source::SourceModel model, double mean_pairs) {
  model.pair_emission_probability_per_cycle = -std::expm1(-mean_pairs);
  return model;
}

memory::MemoryBank single_channel_bank(const ExperimentConfig& config, int channel) {
  memory::MemoryBank b = config.bank;
  b.channels = {config.bank.channels[static_cast<std::size_t>(channel)]};
  return b;
}

template <std::size_t N>
int sample_index(const std::array<double, N>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf.begin(), N - 1));
}

template <std::size_t N>
std::array<double, N> cumulative(const std::array<double, N>& p) {
  std::array<double, N> c{};
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) c[i] = (s += p[i]);
  return c;
}

// Born-rule sampling of analyzer cells for one emission.
class CellSampler {
 public:
  CellSampler(const ExperimentConfig& config, const Measurement& m) : model_(config.source) {
    idler_ = analyzer::umzi_vectors(m.alpha + config.idler_analyzer.phase_rad, config.idler_analyzer.splitting_ratio);
    signal_ = analyzer::umzi_vectors(m.beta + config.signal_analyzer.phase_rad, config.signal_analyzer.splitting_ratio);
    const auto e = quantum::TimeBinKet::early().projector();
    const auto l = quantum::TimeBinKet::late().projector();
    const auto psi = source::coherent_ket(model_, 0.0).vector();
    quantum::Matrix2 coh = quantum::Matrix2::Zero();
    coh(0, 0) = std::norm(psi(0));
    coh(1, 1) = std::norm(psi(3));
    idler_marginal_ = {cumulative(analyzer::project_single(e, idler_)), cumulative(analyzer::project_single(l, idler_)),
                       cumulative(analyzer::project_single(coh, idler_))};
    signal_marginal_ = {cumulative(analyzer::project_single(e, signal_)),
                        cumulative(analyzer::project_single(l, signal_)),
                        cumulative(analyzer::project_single(coh, signal_))};
    for (int b = 0; b < 4; ++b) {
      basis_joint_[b] = cumulative(analyzer::project_pair(
          quantum::TwoQubitKet::basis(static_cast<quantum::Basis>(b)).vector(), idler_, signal_));
    }
  }

  std::pair<int, int> joint(const EmissionRecord& em, Rng& rng) const {
    const int k = em.mode == TemporalMode::Coherent
                      ? sample_index(cumulative(analyzer::project_pair(source::emission_ket(model_, em).vector(),
                                                                       idler_, signal_)),
                                     uniform01(rng))
                      : sample_index(basis_joint_[static_cast<int>(em.mode)], uniform01(rng));
    return {k / kCells, k % kCells};
  }
  int idler(const EmissionRecord& em, Rng& rng) const {
    const int which = em.mode == TemporalMode::Coherent ? 2 : (em.mode == TemporalMode::EE || em.mode == TemporalMode::EL) ? 0 : 1;
    return sample_index(idler_marginal_[which], uniform01(rng));
  }
  int signal(const EmissionRecord& em, Rng& rng) const {
    const int which = em.mode == TemporalMode::Coherent ? 2 : (em.mode == TemporalMode::EE || em.mode == TemporalMode::LE) ? 0 : 1;
    return sample_index(signal_marginal_[which], uniform01(rng));
  }

 private:
  source::SourceModel model_;
  analyzer::PovmVectors idler_, signal_;
  std::array<std::array<double, kCells>, 3> idler_marginal_, signal_marginal_;
  std::array<std::array<double, kCells * kCells>, 4> basis_joint_;
};

// Shared bookkeeping of one run.
class Run {
 public:
  Run(const ExperimentConfig& config, const Measurement& m)
      : config_(config),
        m_(m),
        path_(path_model(config, m)),
        cells_(config, m),
        grid_(config.grid()),
        period_ps_(config.source.pump.period_ns * units::kPsPerNs),
        rng_(make_rng(m.seed, 1)) {
    config.validate();
    if (m.cycles < 1) throw InvalidArgument("Measurement: cycles must be >= 1");
  }

  double arrival(std::int64_t cycle, int cell, double offset_ps) const {
    return static_cast<double>(cycle) * period_ps_ + grid_.first_slot_ps +
           static_cast<int>(analyzer::cell_slot(cell)) * grid_.slot_spacing_ps + offset_ps;
  }
  static DetectorId idler_detector(int cell) { return analyzer::cell_port(cell) == 1 ? DetectorId::A1 : DetectorId::A2; }
  static DetectorId signal_detector(int cell) { return analyzer::cell_port(cell) == 1 ? DetectorId::B1 : DetectorId::B2; }

  // Arrivals for one emission given which photons survive the optics.
  void emit(const EmissionRecord& em, bool idler_ok, bool signal_ok, std::vector<PhotonArrival>& idler,
            std::vector<PhotonArrival>& signal) {
    if (idler_ok && signal_ok) {
      const auto [ci, cs] = cells_.joint(em, rng_);
      idler.push_back({idler_detector(ci), arrival(em.cycle_index, ci, em.time_offset_ps)});
      signal.push_back({signal_detector(cs), arrival(em.cycle_index, cs, em.time_offset_ps + path_.signal_delay_ps)});
    } else if (idler_ok) {
      const int ci = cells_.idler(em, rng_);
      idler.push_back({idler_detector(ci), arrival(em.cycle_index, ci, em.time_offset_ps)});
    } else if (signal_ok) {
      const int cs = cells_.signal(em, rng_);
      signal.push_back({signal_detector(cs), arrival(em.cycle_index, cs, em.time_offset_ps + path_.signal_delay_ps)});
    }
  }

  void noise(const memory::RecalledEvent& ev, std::vector<PhotonArrival>& signal) {
    const DetectorId id = (rng_() & 1U) ? DetectorId::B2 : DetectorId::B1;
    signal.push_back({id, static_cast<double>(ev.emission.cycle_index) * period_ps_ + ev.noise_time_ps + path_.signal_delay_ps});
  }

  bool idler_passes(const EmissionRecord& em) {
    return path_.idler_band.contains(em.signal_frequency_offset_ghz) && uniform01(rng_) < path_.idler_transmission;
  }

  void count(const std::vector<DetectionEvent>& idler, const std::vector<DetectionEvent>& signal, MeasurementResult& r) {
    r.counts.merge(analyzer::threefold_counts(idler, signal, grid_, 0, path_.signal_offset_ps));
    r.idler_detections += static_cast<std::int64_t>(idler.size());
    r.signal_detections += static_cast<std::int64_t>(signal.size());
    if (m_.keep_events) {
      r.idler_events.insert(r.idler_events.end(), idler.begin(), idler.end());
      r.signal_events.insert(r.signal_events.end(), signal.begin(), signal.end());
    }
    if (m_.histogram_span_ns > 0.0) {
      auto h = analyzer::coincidence_histogram(idler, signal, config_.coincidence, m_.histogram_span_ns, path_.signal_offset_ps);
      if (r.histogram) {
        r.histogram->merge(h);
      } else {
        r.histogram = std::move(h);
      }
    }
  }

  const ExperimentConfig& config_;
  const Measurement& m_;
  PathModel path_;
  CellSampler cells_;
  analyzer::SlotGrid grid_;
  double period_ps_;
  Rng rng_;
};

constexpr std::int64_t kFullBlock = std::int64_t{1} << 22;
constexpr std::int64_t kHeraldedBlock = std::int64_t{1} << 28;

// Every pair in the filter bands is followed. With `with_signal` false only idlers are kept.
void run_full(Run& run, std::int64_t cycles, bool with_signal, std::uint64_t seed, MeasurementResult& r) {
  const auto& cfg = run.config_;
  const auto& path = run.path_;
  const bool after = run.m_.stage == Stage::AfterStorage;
  source::EmissionSampler sampler(cfg.source, derive_seed(seed, 10),
                                  with_signal ? band_union(path.idler_band, path.signal_band)
                                              : std::vector<Band>{path.idler_band});
  std::optional<memory::StorageStage> storage;
  if (with_signal && after) {
    storage.emplace(single_channel_bank(cfg, run.m_.signal_channel), derive_seed(seed, 11), cfg.source.pump.period_ns);
  }
  analyzer::DetectorStage idler_det(cfg.detectors, {DetectorId::A1, DetectorId::A2}, derive_seed(seed, 12));
  analyzer::DetectorStage signal_det(cfg.detectors, {DetectorId::B1, DetectorId::B2}, derive_seed(seed, 13));

  std::vector<EmissionRecord> em;
  std::vector<memory::RecalledEvent> recalled;
  std::vector<PhotonArrival> ia, sa;
  std::vector<DetectionEvent> id, sd;
  for (std::int64_t b0 = 0; b0 < cycles; b0 += kFullBlock) {
    const std::int64_t b1 = std::min(cycles, b0 + kFullBlock);
    em.clear();
    recalled.clear();
    ia.clear();
    sa.clear();
    id.clear();
    sd.clear();
    sampler.sample_until(b1, em);
    r.emissions += static_cast<std::int64_t>(em.size());
    if (storage) storage->process(em, b0, b1, recalled);

    std::size_t next = 0;
    for (const auto& e : em) {
      bool signal_ok = false;
      if (with_signal) {
        if (after) {
          // Recalled events come out in emission order, noise after them.
          if (next < recalled.size() && !recalled[next].noise && recalled[next].emission == e) {
            signal_ok = true;
            ++next;
          }
        } else {
          signal_ok = path.signal_band.contains(e.signal_frequency_offset_ghz) &&
                      uniform01(run.rng_) < path.signal_survival;
        }
      }
      run.emit(e, run.idler_passes(e), signal_ok, ia, sa);
    }
    for (; next < recalled.size(); ++next) {
      if (recalled[next].noise) run.noise(recalled[next], sa);
    }

    const double t0 = static_cast<double>(b0) * run.period_ps_;
    const double t1 = static_cast<double>(b1) * run.period_ps_;
    idler_det.process(ia, t0, t1, id);
    if (with_signal) {
      std::sort(sa.begin(), sa.end(), [](const PhotonArrival& x, const PhotonArrival& y) { return x.time_ps < y.time_ps; });
      const auto off = static_cast<double>(path.signal_offset_ps);
      signal_det.process(sa, t0 + off, t1 + off, sd);
    }
    run.count(id, sd, r);
  }
}

// Signal-side events everywhere; idler side only in cycles next to a signal detection.
void run_heralded(Run& run, std::uint64_t seed, MeasurementResult& r) {
  const auto& cfg = run.config_;
  const auto& path = run.path_;
  const bool after = run.m_.stage == Stage::AfterStorage;
  // Samplers scale a full-band mean by their own band width.
  const double mu = cfg.source.mean_pairs_per_cycle();
  const double q = path.signal_survival;

  // Pairs whose signal survives the memory / bypass form a thinned Poisson process.
  source::EmissionSampler survivors(with_mean(cfg.source, mu * q),
                                    derive_seed(seed, 20), {path.signal_band});
  // The rest only matter through their idlers.
  const Band shared{std::max(path.idler_band.lo_ghz, path.signal_band.lo_ghz),
                    std::min(path.idler_band.hi_ghz, path.signal_band.hi_ghz)};
  std::vector<source::EmissionSampler> idler_only;
  for (const Band& b : difference(path.idler_band, path.signal_band)) {
    idler_only.emplace_back(cfg.source, derive_seed(seed, 21 + idler_only.size()),
                            std::vector<Band>{b});
  }
  if (shared.width() > 0.0 && q < 1.0) {
    idler_only.emplace_back(with_mean(cfg.source, mu * (1.0 - q)), derive_seed(seed, 29),
                            std::vector<Band>{shared});
  }

  std::optional<memory::StorageStage> storage;
  if (after) {
    storage.emplace(single_channel_bank(cfg, run.m_.signal_channel), derive_seed(seed, 30), cfg.source.pump.period_ns);
    storage->set_recall_probability(0, 1.0);
  }
  analyzer::DetectorStage idler_det(cfg.detectors, {DetectorId::A1, DetectorId::A2}, derive_seed(seed, 31));
  analyzer::DetectorStage signal_det(cfg.detectors, {DetectorId::B1, DetectorId::B2}, derive_seed(seed, 32));

  std::vector<EmissionRecord> em, extra;
  std::vector<memory::RecalledEvent> recalled;
  std::vector<PhotonArrival> ia, sa, cycle_arrivals;
  std::vector<DetectionEvent> id, sd;
  std::vector<std::int64_t> heralds;
  const auto off = static_cast<double>(path.signal_offset_ps);
  for (std::int64_t b0 = 0; b0 < run.m_.cycles; b0 += kHeraldedBlock) {
    const std::int64_t b1 = std::min(run.m_.cycles, b0 + kHeraldedBlock);
    em.clear();
    recalled.clear();
    ia.clear();
    sa.clear();
    id.clear();
    sd.clear();
    heralds.clear();
    survivors.sample_until(b1, em);
    r.emissions += static_cast<std::int64_t>(em.size());
    if (storage) {
      storage->process(em, b0, b1, recalled);
      for (const auto& ev : recalled) {
        if (ev.noise) run.noise(ev, sa);
      }
    }
    for (const auto& e : em) run.emit(e, run.idler_passes(e), true, ia, sa);

    std::sort(sa.begin(), sa.end(), [](const PhotonArrival& x, const PhotonArrival& y) { return x.time_ps < y.time_ps; });
    const double t0 = static_cast<double>(b0) * run.period_ps_;
    const double t1 = static_cast<double>(b1) * run.period_ps_;
    signal_det.process(sa, t0 + off, t1 + off, sd);

    for (const auto& d : sd) {
      const auto n = static_cast<std::int64_t>(std::floor((static_cast<double>(d.timestamp_ps) - off) / run.period_ps_));
      for (std::int64_t k = n - 1; k <= n + 1; ++k) {
        if (k >= b0 && k < b1) heralds.push_back(k);
      }
    }
    std::sort(heralds.begin(), heralds.end());
    heralds.erase(std::unique(heralds.begin(), heralds.end()), heralds.end());

    // Idler arrivals are emitted in cycle order; walk them alongside the heralded cycles.
    std::size_t ai = 0;
    for (std::int64_t n : heralds) {
      const double c0 = static_cast<double>(n) * run.period_ps_;
      const double c1 = c0 + run.period_ps_;
      cycle_arrivals.clear();
      while (ai < ia.size() && ia[ai].time_ps < c0) ++ai;
      for (std::size_t k = ai; k < ia.size() && ia[k].time_ps < c1; ++k) cycle_arrivals.push_back(ia[k]);
      extra.clear();
      for (auto& s : idler_only) s.sample_cycle(n, extra);
      r.emissions += static_cast<std::int64_t>(extra.size());
      std::vector<PhotonArrival> unused;
      for (const auto& e : extra) {
        if (uniform01(run.rng_) < path.idler_transmission) run.emit(e, true, false, cycle_arrivals, unused);
      }
      std::sort(cycle_arrivals.begin(), cycle_arrivals.end(),
                [](const PhotonArrival& x, const PhotonArrival& y) { return x.time_ps < y.time_ps; });
      idler_det.process(cycle_arrivals, c0, c1, id);
    }
    run.count(id, sd, r);
  }
}

}  // namespace

MeasurementResult simulate_measurement(const ExperimentConfig& config, const Measurement& m) {
  Run run(config, m);
  MeasurementResult r;
  r.cycles = m.cycles;
  if (m.mode == SamplingMode::Full) {
    run_full(run, m.cycles, true, derive_seed(m.seed, 2), r);
    r.idler_singles = r.counts.idler_cycles;
    r.idler_singles_cycles = m.cycles;
  } else {
    run_heralded(run, derive_seed(m.seed, 3), r);
    if (m.idler_singles_cycles > 0) {
      r.idler_singles = sample_idler_singles(config, m.idler_channel, m.alpha, m.idler_singles_cycles, m.seed);
      r.idler_singles_cycles = m.idler_singles_cycles;
    }
  }
  return r;
}

std::int64_t sample_idler_singles(const ExperimentConfig& config, int idler_channel, double alpha,
                                  std::int64_t cycles, std::uint64_t seed) {
  Measurement m;
  m.idler_channel = idler_channel;
  m.signal_channel = idler_channel;
  m.alpha = alpha;
  m.cycles = cycles;
  m.seed = seed;
  Run run(config, m);
  MeasurementResult s;
  run_full(run, cycles, false, derive_seed(seed, 4), s);
  return s.counts.idler_cycles;
}

namespace {

bell::PortCounts middle_of(const auto& cells) {
  using analyzer::cell_index;
  using analyzer::Slot;
  auto at = [&](int pi, int ps) {
    return static_cast<double>(cells[cell_index(pi, Slot::Middle) * kCells + cell_index(ps, Slot::Middle)]);
  };
  return {at(1, 1), at(1, 2), at(2, 1), at(2, 2)};
}

}  // namespace

bell::PortCounts MeasurementResult::middle_counts() const { return middle_of(counts.cells); }
bell::PortCounts Prediction::middle_counts() const { return middle_of(cells); }

double MeasurementResult::idler_probability() const {
  if (idler_singles_cycles <= 0) throw DataError("idler singles were not sampled");
  return static_cast<double>(idler_singles) / static_cast<double>(idler_singles_cycles);
}

double MeasurementResult::signal_probability() const {
  return static_cast<double>(counts.signal_cycles) / static_cast<double>(cycles);
}

double MeasurementResult::joint_probability() const {
  return static_cast<double>(counts.joint_cycles) / static_cast<double>(cycles);
}

double MeasurementResult::g2() const {
  const double pi = idler_probability();
  const double ps = signal_probability();
  if (pi <= 0.0 || ps <= 0.0) throw DataError("g2: zero singles");
  return joint_probability() / (pi * ps);
}

double MeasurementResult::g2_sigma() const {
  const double g = g2();
  const auto rel2 = [](std::int64_t n) { return n > 0 ? 1.0 / static_cast<double>(n) : 0.0; };
  return g * std::sqrt(rel2(counts.joint_cycles) + rel2(counts.signal_cycles) + rel2(idler_singles));
}

WindowAcceptance window_acceptance(double sp, double sj, double window_ps) {
  const double h = 0.5 * window_ps;
  auto inside = [&](double tau) {
    if (sj <= 0.0) return std::abs(tau) <= h ? 1.0 : 0.0;
    return 0.5 * (std::erf((h - tau) / (std::sqrt(2.0) * sj)) + std::erf((h + tau) / (std::sqrt(2.0) * sj)));
  };
  WindowAcceptance a;
  if (sp <= 0.0) {
    a.single = inside(0.0);
    a.joint = a.single * a.single;
    if (sj <= 0.0) a.joint = a.single;
    return a;
  }
  a.single = std::erf(h / (std::sqrt(2.0) * std::hypot(sp, sj)));
  if (sj <= 0.0) {
    a.joint = a.single;
    return a;
  }
  // Simpson rule over the shared pump timing offset.
  constexpr int kSteps = 4000;
  const double lim = 10.0 * sp;
  const double dx = 2.0 * lim / kSteps;
  double sum = 0.0;
  for (int k = 0; k <= kSteps; ++k) {
    const double tau = -lim + k * dx;
    const double w = (k == 0 || k == kSteps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    const double pdf = std::exp(-0.5 * tau * tau / (sp * sp)) / (std::sqrt(2.0 * std::numbers::pi) * sp);
    const double in = inside(tau);
    sum += w * pdf * in * in;
  }
  a.joint = sum * dx / 3.0;
  return a;
}

Prediction predict_measurement(const ExperimentConfig& config, const Measurement& m) {
  config.validate();
  const PathModel path = path_model(config, m);
  const auto rho = source::analytic_state(config.source);
  const auto iv = analyzer::umzi_vectors(m.alpha + config.idler_analyzer.phase_rad, config.idler_analyzer.splitting_ratio);
  const auto sv = analyzer::umzi_vectors(m.beta + config.signal_analyzer.phase_rad, config.signal_analyzer.splitting_ratio);
  const auto table = analyzer::project_pair(rho.matrix(), iv, sv);

  // Reduced states: first qubit is the idler.
  quantum::Matrix2 ri = quantum::Matrix2::Zero(), rs = quantum::Matrix2::Zero();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < 2; ++k) {
        ri(a, b) += rho.matrix()(2 * a + k, 2 * b + k);
        rs(a, b) += rho.matrix()(2 * k + a, 2 * k + b);
      }
    }
  }
  const auto pi = analyzer::project_single(ri, iv);
  const auto ps = analyzer::project_single(rs, sv);

  const double per_ghz = config.source.mean_pairs_per_cycle() / config.source.pair_bandwidth_ghz;
  const double eff = config.detectors.efficiency;
  const auto acc = window_acceptance(config.source.pump.pulse_sigma_ps(), config.detectors.jitter_sigma_ps,
                                     config.coincidence.window_ps);
  const double window_s = config.coincidence.window_ps * 1e-12;
  const double dark = config.detectors.dark_count_rate_hz * window_s;
  const double noise = 0.5 * path.noise_rate_hz * window_s * eff;

  const double idler_rate = per_ghz * path.idler_band.width() * path.idler_transmission * eff * acc.single;
  const double signal_rate = per_ghz * path.signal_band.width() * path.signal_survival * eff * acc.single;
  const double joint_rate = per_ghz * overlap(path.idler_band, path.signal_band) * path.idler_transmission *
                            path.signal_survival * eff * eff * acc.joint;

  std::array<double, kCells> li{}, ls{};
  double sum_i = 0.0, sum_s = 0.0, sum_j = 0.0;
  for (int c = 0; c < kCells; ++c) {
    li[c] = idler_rate * pi[c] + dark;
    ls[c] = signal_rate * ps[c] + dark + noise;
    sum_i += li[c];
    sum_s += ls[c];
  }
  Prediction p;
  const auto n = static_cast<double>(m.cycles);
  for (int i = 0; i < kCells; ++i) {
    for (int s = 0; s < kCells; ++s) {
      const double lj = joint_rate * table[i * kCells + s];
      sum_j += lj;
      p.cells[i * kCells + s] = n * (lj + li[i] * ls[s]);
    }
  }
  p.idler_probability = -std::expm1(-sum_i);
  p.signal_probability = -std::expm1(-sum_s);
  p.joint_probability = 1.0 - std::exp(-sum_i) - std::exp(-sum_s) + std::exp(-(sum_i + sum_s - sum_j));
  p.g2 = p.joint_probability / (p.idler_probability * p.signal_probability);
  return p;
}

}  // namespace afcsim::sim
