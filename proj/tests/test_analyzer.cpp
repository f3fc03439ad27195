#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

#include "afcsim/analyzer.hpp"
#include "afcsim/error.hpp"
#include "afcsim/photon_source.hpp"

using namespace afcsim;
using namespace afcsim::analyzer;
using quantum::Complex;

TEST_CASE("POVM completeness over random phases and ratios") {
  Rng rng = make_rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double phase = 2 * std::numbers::pi * uniform01(rng);
    const double ratio = i % 2 ? 0.5 : 0.05 + 0.9 * uniform01(rng);
    Matrix2 sum = Matrix2::Zero();
    for (const auto& e : umzi_povm(phase, ratio)) sum += e;
    CHECK((sum - Matrix2::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("slot probabilities of simple inputs") {
  auto e = quantum::TimeBinKet::early().projector();
  auto p = project_single(e, umzi_vectors(0.0));
  CHECK(p[cell_index(1, Slot::Early)] == doctest::Approx(0.25));
  CHECK(p[cell_index(1, Slot::Middle)] == doctest::Approx(0.25));
  CHECK(p[cell_index(2, Slot::Middle)] == doctest::Approx(0.25));
  CHECK(p[cell_index(1, Slot::Late)] == doctest::Approx(0.0));
  auto d = quantum::TimeBinKet::diagonal().projector();
  auto q = project_single(d, umzi_vectors(0.0));
  CHECK(q[cell_index(1, Slot::Middle)] == doctest::Approx(0.5));
  CHECK(q[cell_index(2, Slot::Middle)] == doctest::Approx(0.0));
  auto r = project_single(quantum::TimeBinKet::right_circular().projector(), umzi_vectors(-std::numbers::pi / 2));
  CHECK(r[cell_index(1, Slot::Middle)] == doctest::Approx(0.5));
}

TEST_CASE("joint tables against the numpy oracle") {
  auto bell = quantum::projector(quantum::bell_psi_plus());
  auto t = project_pair(bell, 0.3, 0.5);
  CHECK(t[1 * 6 + 1] == doctest::Approx(0.10604416933419782).epsilon(1e-12));
  CHECK(t[1 * 6 + 4] == doctest::Approx(0.018955830665802156).epsilon(1e-12));
  CHECK(t[0] == doctest::Approx(0.03125).epsilon(1e-12));
  CHECK(t[2] == doctest::Approx(0.0));

  source::SourceModel m;
  m.white_noise_fraction = 0.05;
  m.pump.phase_jitter_sigma = 0.4;
  m.pump.intensity_imbalance = 1.2;
  m.pump.extinction_ratio_db = 20.0;
  auto u = project_pair(source::analytic_state(m), 0.0, std::numbers::pi / 4);
  CHECK(u[1 * 6 + 1] == doctest::Approx(0.09987371847495378).epsilon(1e-12));
  CHECK(u[4 * 6 + 1] == doctest::Approx(0.025126281525046215).epsilon(1e-12));
  CHECK(u[2 * 6 + 5] == doctest::Approx(0.035135155496624874).epsilon(1e-12));
}

TEST_CASE("joint tables are distributions for random states") {
  Rng rng = make_rng(2);
  for (int i = 0; i < 1000; ++i) {
    auto rho = quantum::random_state(rng, 1 + i % 4);
    auto t = project_pair(rho, 6.0 * uniform01(rng), 6.0 * uniform01(rng));
    double sum = 0.0;
    double lo = 1.0;
    for (double x : t) {
      sum += x;
      lo = std::min(lo, x);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lo >= -1e-15);
  }
}

TEST_CASE("pure-state and density forms agree") {
  Rng rng = make_rng(4);
  quantum::Vector4 v;
  for (int i = 0; i < 4; ++i) v(i) = Complex(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
  auto ket = quantum::TwoQubitKet::normalized(v);
  auto a = project_pair(ket.vector(), umzi_vectors(0.7), umzi_vectors(-1.1));
  auto b = project_pair(quantum::TwoQubitState::pure(ket), 0.7, -1.1);
  for (int i = 0; i < 36; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("detector thinning and dark counts") {
  DetectorConfig cfg;
  cfg.efficiency = 0.7;
  cfg.dark_count_rate_hz = 0.0;
  std::vector<PhotonArrival> arrivals;
  for (int i = 0; i < 100000; ++i) arrivals.push_back({DetectorId::B1, i * 1000.0});
  auto ev = detect(arrivals, cfg, 1.0, 3);
  CHECK(static_cast<double>(ev.size()) == doctest::Approx(70000).epsilon(0.02));
  require_sorted(ev, "detected");

  cfg.efficiency = 1.0;
  cfg.dark_count_rate_hz = 1e5;
  auto dark = detect({}, cfg, 1.0, 3, {DetectorId::A1});
  CHECK(static_cast<double>(dark.size()) == doctest::Approx(1e5).epsilon(0.02));
  for (const auto& e : dark) CHECK(e.detector == DetectorId::A1);
  CHECK(detect(arrivals, cfg, 1.0, 3) == detect(arrivals, cfg, 1.0, 3));
}

TEST_CASE("unsorted streams are rejected") {
  std::vector<DetectionEvent> s{{DetectorId::A1, 10}, {DetectorId::A1, 5}};
  CHECK_THROWS_AS(require_sorted(s, "x"), DataError);
  CoincidenceConfig cfg;
  CHECK_THROWS_AS(coincidence_histogram(s, s, cfg, 5.0), DataError);
}

TEST_CASE("coincidence histogram") {
  std::vector<DetectionEvent> a{{DetectorId::A1, 1000}, {DetectorId::A1, 50000}};
  std::vector<DetectionEvent> b{{DetectorId::B1, 3500}, {DetectorId::B1, 50000}, {DetectorId::B1, 60000}};
  CoincidenceConfig cfg;
  auto h = coincidence_histogram(a, b, cfg, 5.0);
  CHECK(h.total() == 2);
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.centers_ps[i] == 0.0 || h.centers_ps[i] == 2500.0) CHECK(h.counts[i] == 1);
  }
  auto shifted = coincidence_histogram(a, b, cfg, 5.0, 2500);
  CHECK(shifted.total() == 2);
}

TEST_CASE("threefold counting") {
  SlotGrid g;
  g.validate();
  const std::int64_t period = 16000;
  // cycle 3: idler port 1 middle, signal port 2 late; cycle 5: idler only; one stray signal
  std::vector<DetectionEvent> idler{{DetectorId::A1, 3 * period + 2000 + 1250 + 100},
                                    {DetectorId::A2, 5 * period + 2000}};
  std::vector<DetectionEvent> signal{{DetectorId::B2, 3 * period + 2000 + 2500 - 200 + 7000},
                                     {DetectorId::B1, 9 * period + 2000 + 600 + 7000}};
  auto c = threefold_counts(idler, signal, g, 0, 7000);
  CHECK(c.at(1, Slot::Middle, 2, Slot::Late) == 1);
  CHECK(c.unclassified_signal == 1);
  CHECK(c.idler_cycles == 2);
  CHECK(c.signal_cycles == 1);
  CHECK(c.joint_cycles == 1);
  std::int64_t total = 0;
  for (auto x : c.cells) total += x;
  CHECK(total == 1);
}

TEST_CASE("g2 from cycle tallies") {
  CHECK(g2_cross({1000000, 1000, 100, 2}) == doctest::Approx(20.0));
  CHECK_THROWS_AS(g2_cross({1000, 0, 10, 0}), DataError);
}

TEST_CASE("detection stream text round trip") {
  std::vector<DetectionEvent> s{{DetectorId::A2, 12}, {DetectorId::B1, 99}};
  std::stringstream ss;
  write_detection_stream(ss, s);
  CHECK(read_detection_stream(ss) == s);
  std::istringstream bad("C7 10\n");
  CHECK_THROWS(read_detection_stream(bad));
  CHECK(parse_detector("B2") == DetectorId::B2);
}

TEST_CASE("umzi arm delay must match the pulse interval") {
  UmziConfig u;
  CHECK_NOTHROW(u.validate(1.25));
  CHECK_THROWS_AS(u.validate(1.30), InvalidArgument);
}
