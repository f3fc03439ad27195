#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "afcsim/entanglement_tests.hpp"
#include "afcsim/error.hpp"
#include "afcsim/photon_source.hpp"

using namespace afcsim;
using namespace afcsim::bell;

namespace {

constexpr double kPi = std::numbers::pi;

quantum::TwoQubitState werner(double v) {
  return quantum::projector(quantum::bell_psi_plus()).mixed_with(quantum::TwoQubitState::maximally_mixed(), 1.0 - v);
}

// Expected counts of an ideal fringe with visibility V.
FringeScan synthetic_scan(double alpha, double V, double amplitude, double phi0, int points) {
  FringeScan s;
  s.alpha = alpha;
  for (int k = 0; k < points; ++k) {
    const double beta = 2 * kPi * k / points;
    const double c = std::cos(alpha + beta + phi0);
    s.beta.push_back(beta);
    s.counts.push_back({amplitude * (1 + V * c), amplitude * (1 - V * c), amplitude * (1 - V * c), amplitude * (1 + V * c)});
  }
  return s;
}

}  // namespace

TEST_CASE("correlation and S") {
  CHECK(correlation_E({10, 0, 0, 10}) == doctest::Approx(1.0));
  CHECK(correlation_E({1, 3, 3, 1}) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(correlation_E({0, 0, 0, 0}), DataError);
  CHECK(chsh_S(0.7, -0.7, 0.7, 0.7) == doctest::Approx(2.8));
  CHECK(combo_sign(Combo::A1B2) == -1);
  CHECK(combo_sign(Combo::A2B2) == 1);
}

TEST_CASE("analytic ceiling") {
  CHECK(std::abs(analytic_S(quantum::projector(quantum::bell_psi_plus())) - 2 * std::numbers::sqrt2) < 1e-9);
  for (double v : {0.2, 0.5, 0.707, 0.9}) CHECK(std::abs(analytic_S(werner(v)) - 2 * std::numbers::sqrt2 * v) < 1e-9);
  CHECK(std::abs(analytic_E(quantum::projector(quantum::bell_psi_plus()), 0.2, 0.3) - std::cos(0.5)) < 1e-12);
}

TEST_CASE("analytic S of a noisy source state") {
  source::SourceModel m;
  m.white_noise_fraction = 0.05;
  m.pump.phase_jitter_sigma = 0.4;
  m.pump.intensity_imbalance = 1.2;
  m.pump.extinction_ratio_db = 20.0;
  auto rho = source::analytic_state(m);
  CHECK(analytic_S(rho) == doctest::Approx(2.391917982397042).epsilon(1e-12));
  CHECK(analytic_E(rho, 0.0, kPi / 4) == doctest::Approx(0.5979794955992606).epsilon(1e-12));
}

TEST_CASE("S from counts") {
  const double v = 0.9;
  std::array<PortCounts, 4> counts;
  const auto pairs = ChshSettings{}.pairs();
  for (int i = 0; i < 4; ++i) {
    const double c = v * std::cos(pairs[i].first + pairs[i].second);
    counts[i] = {2500 * (1 + c), 2500 * (1 - c), 2500 * (1 - c), 2500 * (1 + c)};
  }
  auto r = chsh_from_counts(counts, {}, 200, 5);
  CHECK(r.S == doctest::Approx(2 * std::numbers::sqrt2 * v).epsilon(1e-12));
  CHECK(r.sigma_S > 0.0);
  // binomial estimate of each E: sqrt((1 - E^2) / N)
  const double e = v / std::numbers::sqrt2;
  CHECK(r.sigma_S == doctest::Approx(2 * std::sqrt((1 - e * e) / 10000)).epsilon(0.15));
  CHECK(bell_violation_sigmas(r) == doctest::Approx((r.S - 2) / r.sigma_S));

  auto json = nlohmann::json::parse(chsh_to_json(r));
  CHECK(json.at("S").get<double>() == doctest::Approx(r.S));
  CHECK(chsh_from_counts(counts, {}, 200, 5).sigma_S == r.sigma_S);
  r.sigma_S = 0.0;
  CHECK_THROWS_AS(bell_violation_sigmas(r), InvalidArgument);
}

TEST_CASE("monte carlo error shrinks as 1/sqrt(N)") {
  std::array<PortCounts, 4> base;
  const auto pairs = ChshSettings{}.pairs();
  for (int i = 0; i < 4; ++i) {
    const double c = 0.89 * std::cos(pairs[i].first + pairs[i].second);
    base[i] = {700 * (1 + c), 700 * (1 - c), 700 * (1 - c), 700 * (1 + c)};
  }
  auto scaled = base;
  for (auto& p : scaled)
    for (int k = 0; k < 4; ++k) p[k] *= 4;
  const double ratio = chsh_from_counts(base, {}, 400, 1).sigma_S / chsh_from_counts(scaled, {}, 400, 2).sigma_S;
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("visibility fit on an exact fringe") {
  auto scan = synthetic_scan(0.0, 0.88, 100.0, 0.3, 12);
  for (int c = 0; c < 4; ++c) {
    auto fit = fit_visibility(scan, static_cast<Combo>(c), 0);
    CHECK(fit.V == doctest::Approx(0.88).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(std::remainder(fit.phase_offset - 0.3, 2 * kPi) == doctest::Approx(0.0).epsilon(1e-6));
  }
  auto with_errors = fit_visibility(scan, Combo::A1B1, 100, 3);
  CHECK(with_errors.sigma_V > 0.0);
  CHECK(with_errors.sigma_V < 0.1);
}

TEST_CASE("visibility is clamped") {
  auto scan = synthetic_scan(0.0, 1.0, 50.0, 0.0, 12);
  for (auto& c : scan.counts) c.c12 = c.c21 = 0.0;
  auto fit = fit_visibility(scan, Combo::A1B1, 0);
  CHECK(fit.V <= 1.0);
}

TEST_CASE("fringe scan validation and csv") {
  FringeScan bad;
  bad.beta = {0.0, 1.0};
  bad.counts = {{1, 1, 1, 1}};
  CHECK_THROWS_AS(bad.validate(), DataError);
  auto scan = synthetic_scan(kPi / 2, 0.9, 40.0, 0.0, 8);
  std::stringstream ss;
  write_fringe_csv(ss, scan);
  auto back = read_fringe_csv(ss, kPi / 2);
  REQUIRE(back.beta.size() == 8);
  CHECK(back.counts[3].c21 == doctest::Approx(scan.counts[3].c21).epsilon(1e-5));
}

TEST_CASE("generic bootstrap") {
  std::vector<double> counts{400.0};
  auto sd = monte_carlo_errors(counts, [](std::span<const double> c) { return std::vector<double>{c[0]}; }, 2000, 9);
  REQUIRE(sd.size() == 1);
  CHECK(sd[0] == doctest::Approx(20.0).epsilon(0.1));
}
