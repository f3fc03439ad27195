#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "afcsim/quantum_core.hpp"
#include "afcsim/random.hpp"

namespace afcsim::analyzer {

using quantum::Matrix2;
using quantum::Matrix4;
using quantum::Vector2;

enum class Slot : int { Early = 0, Middle = 1, Late = 2 };

/// Outcome cell of one analyzer: index = (port - 1) * 3 + slot, ports 1 and 2.
inline constexpr int kCells = 6;
constexpr int cell_index(int port, Slot slot) { return (port - 1) * 3 + static_cast<int>(slot); }
constexpr int cell_port(int cell) { return cell / 3 + 1; }
constexpr Slot cell_slot(int cell) { return static_cast<Slot>(cell % 3); }

using Povm = std::array<Matrix2, kCells>;
/// Every element is rank one, E_c = v_c v_c^dagger.
using PovmVectors = std::array<Vector2, kCells>;

/// UMZI time-slot POVM. With the 50/50 default: early 1/4|e><e|, late 1/4|l><l| per port, and
/// middle 1/4|u_k><u_k| with u_k = |e> + s_k e^{-i phase}|l>, s_1 = +1, s_2 = -1.
/// `splitting_ratio` is the intensity fraction sent to the short arm by each coupler.
Povm umzi_povm(double phase, double splitting_ratio = 0.5);
PovmVectors umzi_vectors(double phase, double splitting_ratio = 0.5);

struct UmziConfig {
  double arm_delay_ns = 1.25;
  double phase_rad = 0.0;
  double splitting_ratio = 0.5;

  /// The arm delay must match the pump pulse interval within 1 ps.
  void validate(double pulse_interval_ns) const;
};

struct DetectorConfig {
  double efficiency = 0.70;
  double dark_count_rate_hz = 10.0;
  double jitter_sigma_ps = 0.0;

  void validate() const;
};

struct CoincidenceConfig {
  double window_ps = 600.0;
  double histogram_bin_ps = 100.0;

  void validate() const;
};

/// A1, A2: idler analyzer ports; B1, B2: signal analyzer ports.
enum class DetectorId : std::uint8_t { A1 = 0, A2 = 1, B1 = 2, B2 = 3 };
const char* to_string(DetectorId id);
DetectorId parse_detector(const std::string& name);
constexpr int detector_port(DetectorId id) { return static_cast<int>(id) % 2 + 1; }
constexpr bool is_idler(DetectorId id) { return id == DetectorId::A1 || id == DetectorId::A2; }

struct DetectionEvent {
  DetectorId detector = DetectorId::A1;
  std::int64_t timestamp_ps = 0;

  bool operator==(const DetectionEvent&) const = default;
};

/// Joint outcome probabilities, index idler_cell * 6 + signal_cell.
using JointTable = std::array<double, kCells * kCells>;

/// tr[rho (E_idler (x) E_signal)] over the 36 cell pairs; the first qubit of rho is the idler.
JointTable project_pair(const quantum::TwoQubitState& rho, double alpha, double beta,
                        double idler_ratio = 0.5, double signal_ratio = 0.5);
JointTable project_pair(const Matrix4& rho, const PovmVectors& idler, const PovmVectors& signal);
/// Same table for a pure two-photon state, via amplitudes.
JointTable project_pair(const quantum::Vector4& psi, const PovmVectors& idler, const PovmVectors& signal);

/// Single-photon cell probabilities for a one-qubit density matrix.
std::array<double, kCells> project_single(const Matrix2& rho, const PovmVectors& povm);

/// Photon reaching a detector, before efficiency, jitter and dark counts.
struct PhotonArrival {
  DetectorId detector = DetectorId::A1;
  double time_ps = 0.0;
};

/// Sequential detector model: efficiency thinning, Gaussian jitter, Poisson dark counts.
class DetectorStage {
 public:
  DetectorStage(const DetectorConfig& cfg, std::vector<DetectorId> detectors, std::uint64_t seed);

  /// Detects `arrivals` and adds dark counts uniformly on [t_begin_ps, t_end_ps).
  /// Appends events sorted by timestamp.
  void process(std::span<const PhotonArrival> arrivals, double t_begin_ps, double t_end_ps,
               std::vector<DetectionEvent>& out);

 private:
  DetectorConfig cfg_;
  std::vector<DetectorId> detectors_;
  Rng rng_;
};

/// One-shot detection over [0, duration_s). Dark counts are injected on `detectors`.
std::vector<DetectionEvent> detect(std::span<const PhotonArrival> arrivals, const DetectorConfig& det,
                                   double duration_s, std::uint64_t seed,
                                   std::vector<DetectorId> detectors = {DetectorId::A1, DetectorId::A2,
                                                                        DetectorId::B1, DetectorId::B2});

/// Throws DataError unless timestamps are nondecreasing.
void require_sorted(std::span<const DetectionEvent> stream, const char* what);

struct Histogram {
  double bin_ps = 100.0;
  std::vector<double> centers_ps;
  std::vector<std::int64_t> counts;

  std::int64_t total() const;
  /// Adds another histogram with identical binning (time-range sharding).
  void merge(const Histogram& other);
};

/// Histogram of t_b - offset_b - t_a over [-span, +span]; bins centred on multiples of the
/// bin width. Both streams must be time-sorted.
Histogram coincidence_histogram(std::span<const DetectionEvent> stream_a,
                                std::span<const DetectionEvent> stream_b, const CoincidenceConfig& cfg,
                                double span_ns, std::int64_t offset_b_ps = 0);

void write_histogram_csv(std::ostream& out, const Histogram& h);

/// Clock-referenced slot grid. Slot k of cycle n is centred at
/// n * clock_period + first_slot + k * slot_spacing (after removing a stream's offset).
struct SlotGrid {
  double clock_period_ns = 16.0;
  double first_slot_ps = 2000.0;
  double slot_spacing_ps = 1250.0;
  double window_ps = 600.0;

  void validate() const;
};

struct ThreefoldCounts {
  /// Index idler_cell * 6 + signal_cell.
  std::array<std::int64_t, kCells * kCells> cells{};
  std::int64_t unclassified_idler = 0;
  std::int64_t unclassified_signal = 0;
  /// Cycles with at least one classified idler / signal / both detection.
  std::int64_t idler_cycles = 0;
  std::int64_t signal_cycles = 0;
  std::int64_t joint_cycles = 0;

  std::int64_t at(int idler_port, Slot idler_slot, int signal_port, Slot signal_slot) const {
    return cells[cell_index(idler_port, idler_slot) * kCells + cell_index(signal_port, signal_slot)];
  }
  void merge(const ThreefoldCounts& other);
};

/// Each detection is placed in the cycle and slot nearest to its offset-corrected timestamp;
/// detections farther than window/2 from every slot centre are tallied as unclassified.
/// Every classified idler-signal pair sharing a cycle increments its cell.
ThreefoldCounts threefold_counts(std::span<const DetectionEvent> idler, std::span<const DetectionEvent> signal,
                                 const SlotGrid& grid, std::int64_t idler_offset_ps = 0,
                                 std::int64_t signal_offset_ps = 0);

struct CycleTallies {
  std::int64_t cycles = 0;
  std::int64_t idler = 0;
  std::int64_t signal = 0;
  std::int64_t joint = 0;
};

/// P_si / (P_s P_i) with per-cycle probabilities. Throws DataError on zero singles.
double g2_cross(const CycleTallies& t);

/// "detector_id timestamp_ps" per line.
void write_detection_stream(std::ostream& out, std::span<const DetectionEvent> events);
std::vector<DetectionEvent> read_detection_stream(std::istream& in);

}  // namespace afcsim::analyzer
