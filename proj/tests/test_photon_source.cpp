#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"

#include "afcsim/error.hpp"
#include "afcsim/photon_source.hpp"

using namespace afcsim;
using namespace afcsim::source;

namespace {

SourceModel model(double w, double sigma, double imbalance, double er_db) {
  SourceModel m;
  m.white_noise_fraction = w;
  m.pump.phase_jitter_sigma = sigma;
  m.pump.intensity_imbalance = imbalance;
  m.pump.extinction_ratio_db = er_db;
  return m;
}

}  // namespace

TEST_CASE("analytic state against the numpy oracle") {
  auto rho = analytic_state(model(0.05, 0.4, 1.2, 20.0)).matrix();
  CHECK(rho(0, 0).real() == doctest::Approx(0.3942100610736098).epsilon(1e-12));
  CHECK(rho(1, 1).real() == doctest::Approx(0.021813725490196077).epsilon(1e-12));
  CHECK(rho(2, 2).real() == doctest::Approx(0.021813725490196077).epsilon(1e-12));
  CHECK(rho(3, 3).real() == doctest::Approx(0.562162487945998).epsilon(1e-12));
  CHECK(rho(0, 3).real() == doctest::Approx(0.4228353563487483).epsilon(1e-12));
  CHECK(std::abs(rho(0, 3).imag()) < 1e-15);
  CHECK(std::abs(rho(0, 1)) < 1e-15);
}

TEST_CASE("ideal source gives psi+") {
  auto rho = analytic_state(model(0.0, 0.0, 1.0, 200.0));
  CHECK(rho.expectation(quantum::bell_psi_plus()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("calibration point for the before-storage metrics") {
  // (w, sigma) solved independently for F = 0.9133, P = 0.84 at 30 dB
  auto rho = analytic_state(model(0.016771758427946558, 0.5640582359377083, 1.0, 30.0));
  CHECK(rho.expectation(quantum::bell_psi_plus()) == doctest::Approx(0.9133).epsilon(1e-7));
  CHECK(quantum::purity(rho) == doctest::Approx(0.84).epsilon(1e-7));
}

TEST_CASE("mixture weights") {
  auto w = mixture_weights(model(0.1, 0.0, 1.0, 30.0));
  CHECK(w.white == doctest::Approx(0.1));
  CHECK(w.leakage_each == doctest::Approx(0.9 * 1e-3 / 1.002).epsilon(1e-12));
  CHECK(w.coherent + 2 * w.leakage_each + w.white == doctest::Approx(1.0));
}

TEST_CASE("validation") {
  SourceModel m;
  m.pair_emission_probability_per_cycle = 1.0;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  m = {};
  m.white_noise_fraction = -0.1;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  m = {};
  m.pump.pulse_width_fwhm_ps = 2000.0;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  CHECK(SourceModel{}.mean_pairs_per_cycle() == doctest::Approx(-std::log(0.99)));
  CHECK(PumpConfig{}.pulse_sigma_ps() == doctest::Approx(300.0 / 2.3548200450309493).epsilon(1e-12));
}

TEST_CASE("emission sampling is deterministic and Poisson") {
  SourceModel m;
  m.pair_emission_probability_per_cycle = 0.05;
  auto a = sample_emissions(m, 200000, 42);
  auto b = sample_emissions(m, 200000, 42);
  auto c = sample_emissions(m, 200000, 43);
  CHECK(a == b);
  CHECK(a != c);

  std::set<std::int64_t> cycles;
  for (const auto& e : a) {
    cycles.insert(e.cycle_index);
    CHECK(std::abs(e.signal_frequency_offset_ghz) <= 50.0);
  }
  const double p = static_cast<double>(cycles.size()) / 200000.0;
  CHECK(p == doctest::Approx(0.05).epsilon(0.05));
  const double mu = static_cast<double>(a.size()) / 200000.0;
  CHECK(mu == doctest::Approx(-std::log(0.95)).epsilon(0.05));
}

TEST_CASE("band thinning") {
  SourceModel m;
  m.pair_emission_probability_per_cycle = 0.2;
  EmissionSampler s(m, 5, {{-2.0, 2.0}, {10.0, 13.0}});
  CHECK(s.band_mean() == doctest::Approx(m.mean_pairs_per_cycle() * 7.0 / 100.0).epsilon(1e-12));
  CHECK(s.cycle_probability() == doctest::Approx(-std::expm1(-s.band_mean())).epsilon(1e-12));
  std::vector<EmissionRecord> out;
  s.sample_until(100000, out);
  CHECK(s.cursor() == 100000);
  for (const auto& e : out) {
    const double f = e.signal_frequency_offset_ghz;
    CHECK(((f >= -2.0 && f <= 2.0) || (f >= 10.0 && f <= 13.0)));
  }
  CHECK(static_cast<double>(out.size()) == doctest::Approx(100000 * s.band_mean()).epsilon(0.05));
}

TEST_CASE("sequential sampling matches one shot") {
  SourceModel m;
  m.pair_emission_probability_per_cycle = 0.1;
  EmissionSampler s(m, 9);
  std::vector<EmissionRecord> blocks;
  s.sample_until(3000, blocks);
  s.sample_until(10000, blocks);
  EmissionSampler t(m, 9);
  std::vector<EmissionRecord> once;
  t.sample_until(10000, once);
  CHECK(blocks == once);
}

TEST_CASE("emission kets") {
  SourceModel m;
  EmissionRecord r;
  r.mode = TemporalMode::EL;
  CHECK(std::abs(emission_ket(m, r)[quantum::Basis::EL] - 1.0) < 1e-15);
  r.mode = TemporalMode::Coherent;
  r.pair_phase = 0.3;
  auto k = emission_ket(m, r);
  CHECK(std::arg(k[quantum::Basis::LL]) == doctest::Approx(0.3));
}

TEST_CASE("emission text output") {
  SourceModel m;
  m.pair_emission_probability_per_cycle = 0.5;
  auto e = sample_emissions(m, 10, 1);
  std::ostringstream os;
  write_emissions(os, e);
  CHECK(os.str().rfind("#", 0) == 0);
}
