#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "afcsim/afc_memory.hpp"
#include "afcsim/error.hpp"
#include "fixtures.hpp"

using namespace afcsim;
using namespace afcsim::memory;

TEST_CASE("efficiency formula") {
  CHECK(afc_efficiency(1.5, 2.0, 1.7) == doctest::Approx(0.008435011961518711).epsilon(1e-12));
  CHECK(afc_efficiency_bound(2.0, 1.7) == doctest::Approx(0.017185218763009366).epsilon(1e-12));
  CHECK(afc_efficiency(4.0, 2.0, 1.7) == doctest::Approx(afc_efficiency_bound(2.0, 1.7)).epsilon(1e-12));
  CHECK(afc_efficiency(3.9, 2.0, 1.7) < afc_efficiency_bound(2.0, 1.7));
  CHECK(afc_efficiency(0.0, 2.0, 1.7) == 0.0);
}

TEST_CASE("storage time and multimode capacity") {
  CHECK(storage_time_ns(6.58) == doctest::Approx(151.9756838905775).epsilon(1e-12));
  CHECK_THROWS_AS(storage_time_ns(0.0), InvalidArgument);
  CHECK(time_bandwidth_product(MemoryBank::nominal()) == doctest::Approx(3039.51367781155).epsilon(1e-12));
}

TEST_CASE("channel lookup") {
  auto bank = MemoryBank::nominal();
  CHECK(channel_for_offset(bank, 30.5) == 0);
  CHECK(channel_for_offset(bank, -31.9) == 4);
  CHECK(!channel_for_offset(bank, 7.0).has_value());
  CHECK_THROWS_AS(channel_for_offset(bank, 60.0), InvalidArgument);
  CHECK(bank.center_wavelength_nm(2) == doctest::Approx(1531.93));
  CHECK(bank.center_wavelength_nm(0) < bank.center_wavelength_nm(4));
}

TEST_CASE("channel validation") {
  AfcChannel c;
  c.finesse = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  MemoryBank b = MemoryBank::nominal();
  b.channels[1].center_offset_ghz = 28.0;  // overlaps channel 1
  CHECK_THROWS_AS(b.validate(), InvalidArgument);
}

TEST_CASE("storage stage statistics") {
  MemoryBank bank = MemoryBank::nominal();
  source::SourceModel m;
  m.pair_emission_probability_per_cycle = 0.5;
  auto emissions = source::sample_emissions(m, 2000000, 3);
  auto recalled = apply_storage(bank, emissions, 4);
  std::int64_t in_band = 0;
  for (const auto& e : emissions) in_band += channel_for_offset(bank, e.signal_frequency_offset_ghz).has_value();
  CHECK(static_cast<double>(recalled.size()) ==
        doctest::Approx(in_band * afc_efficiency(1.5, 2.0, 1.7) * 0.26).epsilon(0.15));
  for (const auto& r : recalled) {
    CHECK(!r.noise);
    CHECK(r.delay_ns == doctest::Approx(storage_time_ns(6.58)));
  }
  CHECK(apply_storage(bank, emissions, 4).size() == recalled.size());
}

TEST_CASE("noise injection") {
  MemoryBank bank = MemoryBank::nominal();
  bank.noise_rate_hz = 1e6;
  const std::int64_t cycles = 10'000'000;  // 0.16 s
  auto out = apply_storage(bank, {}, 8, cycles);
  CHECK(static_cast<double>(out.size()) == doctest::Approx(5 * 1e6 * 0.16).epsilon(0.01));
  for (const auto& r : out) CHECK(r.noise);
}

TEST_CASE("decay model against the efficiency table") {
  std::ifstream in(testing::fixture("table2.csv"));
  auto table = read_efficiency_csv(in);
  auto flags = nonmonotone_rows(table);
  REQUIRE(flags.size() == table.storage_times_ns.size());
  for (std::size_t i = 0; i < flags.size(); ++i) CHECK(flags[i] == (table.storage_times_ns[i] == 170.0));

  struct Oracle {
    double d1, T, max_res;
  };
  const Oracle oracle[5] = {{2.816191869245914, 185.0282649585553, 0.09534849822575642},
                            {2.651978812072953, 188.0161578301412, 0.06373524068257153},
                            {3.018558351753413, 159.56909294748812, 0.08760291090305755},
                            {2.6060575275882285, 210.02523876787535, 0.07382307456945603},
                            {2.7392950220193764, 218.59004277208197, 0.09045732914005333}};
  REQUIRE(flags.size() <= 16);
  bool use[16] = {};
  for (std::size_t i = 0; i < flags.size(); ++i) use[i] = !flags[i];
  for (int c = 0; c < 5; ++c) {
    std::vector<double> col;
    for (const auto& row : table.percent) col.push_back(row[c]);
    auto fit = fit_decay(table.storage_times_ns, col, std::span<const bool>(use, flags.size()));
    CHECK(fit.decay.d1_initial == doctest::Approx(oracle[c].d1).epsilon(1e-4));
    CHECK(fit.decay.decay_time_ns == doctest::Approx(oracle[c].T).epsilon(1e-4));
    CHECK(fit.max_abs_residual_pp == doctest::Approx(oracle[c].max_res).epsilon(1e-3));
    CHECK(fit.max_abs_residual_pp <= 0.1);
  }
}

TEST_CASE("efficiency csv round trip") {
  auto bank = MemoryBank::nominal();
  for (auto& c : bank.channels) c.decay = {2.8, 185.0};
  const double times[] = {90.0, 152.0};
  auto t = efficiency_table(bank, times);
  std::stringstream ss;
  write_efficiency_csv(ss, t);
  auto back = read_efficiency_csv(ss);
  REQUIRE(back.percent.size() == 2);
  CHECK(back.percent[1][0] == doctest::Approx(100 * afc_efficiency(2.8 * std::exp(-152.0 / 185.0), 2.0, 1.7)).epsilon(1e-6));
  std::istringstream bad("storage_time_ns,ch1\n90,x\n");
  CHECK_THROWS_AS(read_efficiency_csv(bad), DataError);
}

TEST_CASE("operating comb depth reproduces the 152 ns efficiencies") {
  // smaller roots of 100 * eta(d1) = table value, solved independently
  const double d1[5] = {1.108147519513435, 1.0944562275446168, 1.108147519513435, 1.1628301418420623,
                        1.2448532980776565};
  const double pct[5] = {0.56, 0.55, 0.56, 0.60, 0.66};
  for (int c = 0; c < 5; ++c) CHECK(100 * afc_efficiency(d1[c], 2.0, 1.7) == doctest::Approx(pct[c]).epsilon(1e-9));
}
