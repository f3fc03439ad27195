#include "afcsim/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "afcsim/error.hpp"

namespace afcsim::analyzer {

using quantum::Complex;

PovmVectors umzi_vectors(double phase, double r) {
  if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("umzi: splitting ratio must lie in (0, 1)");
  const Complex ph = std::polar(1.0, -phase);
  const double cross = std::sqrt(r * (1.0 - r));
  PovmVectors v;
  v[cell_index(1, Slot::Early)] = Vector2(r, 0.0);
  v[cell_index(1, Slot::Middle)] = Vector2(1.0 - r, r * ph);
  v[cell_index(1, Slot::Late)] = Vector2(0.0, 1.0 - r);
  v[cell_index(2, Slot::Early)] = Vector2(cross, 0.0);
  v[cell_index(2, Slot::Middle)] = Vector2(cross, -cross * ph);
  v[cell_index(2, Slot::Late)] = Vector2(0.0, cross);
  return v;
}

Povm umzi_povm(double phase, double r) {
  const PovmVectors v = umzi_vectors(phase, r);
  Povm out;
  for (int c = 0; c < kCells; ++c) out[c] = v[c] * v[c].adjoint();
  return out;
}

void UmziConfig::validate(double pulse_interval_ns) const {
  if (!(splitting_ratio > 0.0 && splitting_ratio < 1.0)) {
    throw InvalidArgument("UmziConfig: splitting ratio must lie in (0, 1)");
  }
  if (!std::isfinite(phase_rad)) throw InvalidArgument("UmziConfig: phase must be finite");
  if (std::abs(arm_delay_ns - pulse_interval_ns) > 1e-3) {
    throw InvalidArgument("UmziConfig: arm delay differs from the pulse interval by more than 1 ps");
  }
}

void DetectorConfig::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) throw InvalidArgument("DetectorConfig: efficiency outside (0, 1]");
  if (!(dark_count_rate_hz >= 0.0)) throw InvalidArgument("DetectorConfig: dark count rate must be >= 0");
  if (!(jitter_sigma_ps >= 0.0)) throw InvalidArgument("DetectorConfig: jitter must be >= 0");
}

void CoincidenceConfig::validate() const {
  if (!(histogram_bin_ps > 0.0)) throw InvalidArgument("CoincidenceConfig: histogram bin must be positive");
  if (!(window_ps >= histogram_bin_ps)) throw InvalidArgument("CoincidenceConfig: window must be >= bin");
}

const char* to_string(DetectorId id) {
  static constexpr const char* kNames[4] = {"A1", "A2", "B1", "B2"};
  return kNames[static_cast<int>(id)];
}

DetectorId parse_detector(const std::string& name) {
  for (int i = 0; i < 4; ++i) {
    if (name == to_string(static_cast<DetectorId>(i))) return static_cast<DetectorId>(i);
  }
  throw DataError("unknown detector id '" + name + "'");
}

JointTable project_pair(const Matrix4& rho, const PovmVectors& idler, const PovmVectors& signal) {
  JointTable t{};
  for (int i = 0; i < kCells; ++i) {
    for (int s = 0; s < kCells; ++s) {
      quantum::Vector4 v;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) v(2 * a + b) = idler[i](a) * signal[s](b);
      }
      t[i * kCells + s] = std::max(0.0, v.dot(rho * v).real());
    }
  }
  return t;
}

JointTable project_pair(const quantum::TwoQubitState& rho, double alpha, double beta, double idler_ratio,
                        double signal_ratio) {
  return project_pair(rho.matrix(), umzi_vectors(alpha, idler_ratio), umzi_vectors(beta, signal_ratio));
}

JointTable project_pair(const quantum::Vector4& psi, const PovmVectors& idler, const PovmVectors& signal) {
  JointTable t{};
  for (int i = 0; i < kCells; ++i) {
    const Complex i0 = std::conj(idler[i](0));
    const Complex i1 = std::conj(idler[i](1));
    for (int s = 0; s < kCells; ++s) {
      const Complex s0 = std::conj(signal[s](0));
      const Complex s1 = std::conj(signal[s](1));
      const Complex amp = i0 * (s0 * psi(0) + s1 * psi(1)) + i1 * (s0 * psi(2) + s1 * psi(3));
      t[i * kCells + s] = std::norm(amp);
    }
  }
  return t;
}

std::array<double, kCells> project_single(const Matrix2& rho, const PovmVectors& povm) {
  std::array<double, kCells> p{};
  for (int c = 0; c < kCells; ++c) p[c] = std::max(0.0, povm[c].dot(rho * povm[c]).real());
  return p;
}

DetectorStage::DetectorStage(const DetectorConfig& cfg, std::vector<DetectorId> detectors, std::uint64_t seed)
    : cfg_(cfg), detectors_(std::move(detectors)), rng_(make_rng(seed, 0x44455443ULL)) {
  cfg_.validate();
}

void DetectorStage::process(std::span<const PhotonArrival> arrivals, double t_begin, double t_end,
                            std::vector<DetectionEvent>& out) {
  if (!(t_end >= t_begin)) throw InvalidArgument("DetectorStage: empty time span");
  const std::size_t first = out.size();
  std::normal_distribution<double> jitter(0.0, cfg_.jitter_sigma_ps);
  for (const auto& a : arrivals) {
    if (cfg_.efficiency < 1.0 && uniform01(rng_) >= cfg_.efficiency) continue;
    double t = a.time_ps;
    if (cfg_.jitter_sigma_ps > 0.0) t += jitter(rng_);
    out.push_back({a.detector, std::max<std::int64_t>(0, std::llround(t))});
  }
  if (cfg_.dark_count_rate_hz > 0.0 && t_end > t_begin) {
    const double mean = cfg_.dark_count_rate_hz * (t_end - t_begin) * 1e-12;
    for (DetectorId id : detectors_) {
      const std::int64_t n = std::poisson_distribution<std::int64_t>(mean)(rng_);
      for (std::int64_t k = 0; k < n; ++k) {
        const double t = t_begin + uniform01(rng_) * (t_end - t_begin);
        out.push_back({id, static_cast<std::int64_t>(std::floor(t))});
      }
    }
  }
  std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
                   [](const DetectionEvent& x, const DetectionEvent& y) { return x.timestamp_ps < y.timestamp_ps; });
}

std::vector<DetectionEvent> detect(std::span<const PhotonArrival> arrivals, const DetectorConfig& det,
                                   double duration_s, std::uint64_t seed, std::vector<DetectorId> detectors) {
  if (!(duration_s > 0.0)) throw InvalidArgument("detect: duration must be positive");
  DetectorStage stage(det, std::move(detectors), seed);
  std::vector<DetectionEvent> out;
  stage.process(arrivals, 0.0, duration_s * 1e12, out);
  return out;
}

void require_sorted(std::span<const DetectionEvent> stream, const char* what) {
  for (std::size_t i = 1; i < stream.size(); ++i) {
    if (stream[i].timestamp_ps < stream[i - 1].timestamp_ps) {
      throw DataError(std::string(what) + ": stream not time-sorted at index " + std::to_string(i));
    }
  }
}

std::int64_t Histogram::total() const {
  std::int64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

void Histogram::merge(const Histogram& other) {
  if (other.bin_ps != bin_ps || other.counts.size() != counts.size()) {
    throw InvalidArgument("Histogram::merge: binning differs");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
}

Histogram coincidence_histogram(std::span<const DetectionEvent> a, std::span<const DetectionEvent> b,
                                const CoincidenceConfig& cfg, double span_ns, std::int64_t offset_b_ps) {
  cfg.validate();
  if (!(span_ns > 0.0)) throw InvalidArgument("coincidence_histogram: span must be positive");
  require_sorted(a, "coincidence_histogram (stream a)");
  require_sorted(b, "coincidence_histogram (stream b)");

  const double bin = cfg.histogram_bin_ps;
  const auto half_bins = static_cast<std::int64_t>(std::floor(span_ns * 1000.0 / bin));
  Histogram h;
  h.bin_ps = bin;
  for (std::int64_t k = -half_bins; k <= half_bins; ++k) h.centers_ps.push_back(static_cast<double>(k) * bin);
  h.counts.assign(h.centers_ps.size(), 0);

  const double reach = (static_cast<double>(half_bins) + 0.5) * bin;
  std::size_t lo = 0;
  for (const auto& ea : a) {
    const double ta = static_cast<double>(ea.timestamp_ps);
    while (lo < b.size() && static_cast<double>(b[lo].timestamp_ps - offset_b_ps) - ta < -reach) ++lo;
    for (std::size_t j = lo; j < b.size(); ++j) {
      const double dt = static_cast<double>(b[j].timestamp_ps - offset_b_ps) - ta;
      if (dt >= reach) break;
      const auto k = static_cast<std::int64_t>(std::floor(dt / bin + 0.5));
      if (k >= -half_bins && k <= half_bins) ++h.counts[static_cast<std::size_t>(k + half_bins)];
    }
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin_center_ps,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) out << h.centers_ps[i] << ',' << h.counts[i] << '\n';
}

void SlotGrid::validate() const {
  if (!(clock_period_ns > 0.0)) throw InvalidArgument("SlotGrid: clock period must be positive");
  if (!(window_ps > 0.0 && window_ps <= slot_spacing_ps)) {
    throw InvalidArgument("SlotGrid: window must be positive and no wider than the slot spacing");
  }
  if (!(first_slot_ps >= 0.0 && first_slot_ps + 2.0 * slot_spacing_ps < clock_period_ns * 1000.0)) {
    throw InvalidArgument("SlotGrid: slots must fit inside one clock period");
  }
}

void ThreefoldCounts::merge(const ThreefoldCounts& o) {
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] += o.cells[i];
  unclassified_idler += o.unclassified_idler;
  unclassified_signal += o.unclassified_signal;
  idler_cycles += o.idler_cycles;
  signal_cycles += o.signal_cycles;
  joint_cycles += o.joint_cycles;
}

namespace {

struct Classified {
  std::int64_t cycle;
  int cell;
};

std::vector<Classified> classify(std::span<const DetectionEvent> stream, const SlotGrid& grid, std::int64_t offset,
                                 bool idler_side, std::int64_t& unclassified) {
  const double period = grid.clock_period_ns * 1000.0;
  std::vector<Classified> out;
  out.reserve(stream.size());
  for (const auto& ev : stream) {
    if (is_idler(ev.detector) != idler_side) {
      throw InvalidArgument(std::string("threefold_counts: detector ") + to_string(ev.detector) + " in the " +
                            (idler_side ? "idler" : "signal") + " stream");
    }
    const double t = static_cast<double>(ev.timestamp_ps - offset);
    const double cyc = std::floor(t / period);
    const double r = t - cyc * period - grid.first_slot_ps;
    const double k = std::round(r / grid.slot_spacing_ps);
    if (k < 0.0 || k > 2.0 || std::abs(r - k * grid.slot_spacing_ps) > 0.5 * grid.window_ps) {
      ++unclassified;
      continue;
    }
    out.push_back({static_cast<std::int64_t>(cyc), cell_index(detector_port(ev.detector), static_cast<Slot>(k))});
  }
  std::stable_sort(out.begin(), out.end(), [](const Classified& x, const Classified& y) { return x.cycle < y.cycle; });
  return out;
}

}  // namespace

ThreefoldCounts threefold_counts(std::span<const DetectionEvent> idler, std::span<const DetectionEvent> signal,
                                 const SlotGrid& grid, std::int64_t idler_offset_ps, std::int64_t signal_offset_ps) {
  grid.validate();
  require_sorted(idler, "threefold_counts (idler)");
  require_sorted(signal, "threefold_counts (signal)");
  ThreefoldCounts out;
  const auto ci = classify(idler, grid, idler_offset_ps, true, out.unclassified_idler);
  const auto cs = classify(signal, grid, signal_offset_ps, false, out.unclassified_signal);

  std::size_t i = 0, s = 0;
  while (i < ci.size() || s < cs.size()) {
    const std::int64_t cycle = std::min(i < ci.size() ? ci[i].cycle : INT64_MAX, s < cs.size() ? cs[s].cycle : INT64_MAX);
    std::size_t i_end = i, s_end = s;
    while (i_end < ci.size() && ci[i_end].cycle == cycle) ++i_end;
    while (s_end < cs.size() && cs[s_end].cycle == cycle) ++s_end;
    if (i_end > i) ++out.idler_cycles;
    if (s_end > s) ++out.signal_cycles;
    if (i_end > i && s_end > s) ++out.joint_cycles;
    for (std::size_t a = i; a < i_end; ++a) {
      for (std::size_t b = s; b < s_end; ++b) ++out.cells[ci[a].cell * kCells + cs[b].cell];
    }
    i = i_end;
    s = s_end;
  }
  return out;
}

double g2_cross(const CycleTallies& t) {
  if (t.cycles <= 0) throw DataError("g2_cross: no clock cycles");
  if (t.idler <= 0 || t.signal <= 0) throw DataError("g2_cross: zero singles");
  const double n = static_cast<double>(t.cycles);
  const double p_si = static_cast<double>(t.joint) / n;
  const double p_s = static_cast<double>(t.signal) / n;
  const double p_i = static_cast<double>(t.idler) / n;
  return p_si / (p_s * p_i);
}

void write_detection_stream(std::ostream& out, std::span<const DetectionEvent> events) {
  out << "# detector_id timestamp_ps\n";
  for (const auto& e : events) out << to_string(e.detector) << ' ' << e.timestamp_ps << '\n';
}

std::vector<DetectionEvent> read_detection_stream(std::istream& in) {
  std::vector<DetectionEvent> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string id;
    std::int64_t t = 0;
    if (!(row >> id >> t)) throw DataError("detection stream: bad line '" + line + "'");
    if (t < 0) throw DataError("detection stream: negative timestamp");
    out.push_back({parse_detector(id), t});
  }
  return out;
}

}  // namespace afcsim::analyzer
