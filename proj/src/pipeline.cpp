#include "afcsim/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include "afcsim/afc_memory.hpp"
#include "afcsim/density_io.hpp"
#include "afcsim/error.hpp"
#include "afcsim/quantum_core.hpp"

#ifndef AFCSIM_FIXTURE_DIR
#define AFCSIM_FIXTURE_DIR "data/fixtures"
#endif

namespace afcsim::pipeline {

using analyzer::ThreefoldCounts;
using experiment::SamplingMode;

Check check_within(std::string name, double value, double target, double tolerance) {
  return {std::move(name), value, target, tolerance, std::abs(value - target) <= tolerance};
}

Check check_at_least(std::string name, double value, double bound) {
  return {std::move(name), value, bound, 0.0, value >= bound};
}

bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

// ---- fixtures

std::filesystem::path default_fixture_dir() {
  if (const char* env = std::getenv("AFCSIM_FIXTURES"); env && *env) return env;
  return AFCSIM_FIXTURE_DIR;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 15];
  }
  return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream open_fixture(const std::filesystem::path& dir, const std::string& name) {
  std::ifstream in(dir / name);
  if (!in) throw DataError("missing fixture " + (dir / name).string());
  return in;
}

}  // namespace

void verify_fixtures(const std::filesystem::path& dir) {
  std::istringstream sums(read_file(dir / "SHA256SUMS"));
  std::string line;
  int n = 0;
  while (std::getline(sums, line)) {
    if (line.empty()) continue;
    const auto sep = line.find("  ");
    if (sep != 64) throw DataError("SHA256SUMS: malformed line '" + line + "'");
    const std::string name = line.substr(sep + 2);
    if (sha256_hex(read_file(dir / name)) != line.substr(0, 64)) {
      throw DataError("fixture " + name + " does not match its checksum");
    }
    ++n;
  }
  if (n == 0) throw DataError("SHA256SUMS lists no files");
}

// ---- simulated experiments

std::uint64_t run_seed(std::uint64_t seed, const std::string& label, int channel, int index) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a of the label
  for (unsigned char c : label) h = (h ^ c) * 1099511628211ULL;
  return derive_seed(derive_seed(derive_seed(seed, h), static_cast<std::uint64_t>(channel)),
                     static_cast<std::uint64_t>(index));
}

double acquisition_s(const ExperimentConfig& config, Stage stage) {
  return stage == Stage::AfterStorage ? config.run_duration_s : config.acquisition.before_storage_s;
}

namespace {

int stage_index(Stage s) { return s == Stage::AfterStorage ? 1 : 0; }

sim::Measurement measurement(const ExperimentConfig& config, int idler_ch, int signal_ch, Stage stage, double alpha,
                             double beta, double wall_s, std::uint64_t seed) {
  sim::Measurement m;
  m.idler_channel = idler_ch;
  m.signal_channel = signal_ch;
  m.stage = stage;
  m.alpha = alpha;
  m.beta = beta;
  m.cycles = config.measure_cycles(wall_s);
  m.seed = seed;
  m.mode = config.analysis.sampling;
  return m;
}

double correlation(const bell::PortCounts& c) { return bell::correlation_E(c); }

}  // namespace

ChshRun run_chsh(const ExperimentConfig& config, int channel, Stage stage) {
  ChshRun run;
  run.stage = stage;
  run.channel = channel;
  run.wall_s = acquisition_s(config, stage);
  run.cycles = config.measure_cycles(run.wall_s);
  const auto pairs = config.analysis.chsh.pairs();
  for (int k = 0; k < 4; ++k) {
    const auto m = measurement(config, channel, channel, stage, pairs[k].first, pairs[k].second, run.wall_s,
                               run_seed(config.seed, "chsh", channel, 4 * stage_index(stage) + k));
    run.counts[k] = sim::simulate_measurement(config, m).middle_counts();
    run.predicted[k] = sim::predict_measurement(config, m).middle_counts();
  }
  run.result = bell::chsh_from_counts(run.counts, config.analysis.chsh, config.analysis.mc_trials,
                                      run_seed(config.seed, "chsh-mc", channel, stage_index(stage)));
  run.predicted_S = bell::chsh_S(correlation(run.predicted[0]), correlation(run.predicted[1]),
                                 correlation(run.predicted[2]), correlation(run.predicted[3]));
  run.rate_a1b1_hz = {run.counts[0].c11 / run.wall_s, std::sqrt(run.counts[0].c11) / run.wall_s};
  return run;
}

FringeRun run_fringes(const ExperimentConfig& config, int channel) {
  FringeRun run;
  run.channel = channel;
  const auto& an = config.analysis;
  const double wall = config.acquisition.fringe_point_s;
  for (std::size_t a = 0; a < an.fringe_alphas.size(); ++a) {
    bell::FringeScan scan;
    scan.alpha = an.fringe_alphas[a];
    scan.integration_time_s = wall;
    for (int j = 0; j < an.fringe_points; ++j) {
      const double beta = 2.0 * std::numbers::pi * j / an.fringe_points;
      const auto m = measurement(config, channel, channel, Stage::AfterStorage, scan.alpha, beta, wall,
                                 run_seed(config.seed, "fringe", channel, static_cast<int>(a) * 1000 + j));
      scan.beta.push_back(beta);
      scan.counts.push_back(sim::simulate_measurement(config, m).middle_counts());
    }
    std::array<bell::VisibilityFit, 4> fits;
    for (int c = 0; c < 4; ++c) {
      fits[c] = bell::fit_visibility(scan, static_cast<bell::Combo>(c), an.mc_trials,
                                     run_seed(config.seed, "fringe-mc", channel, static_cast<int>(a) * 4 + c));
    }
    // Infinite-statistics visibility from the fringe extremes.
    const auto hi = sim::predict_measurement(
        config, measurement(config, channel, channel, Stage::AfterStorage, scan.alpha, -scan.alpha, wall, 1));
    const auto lo = sim::predict_measurement(config, measurement(config, channel, channel, Stage::AfterStorage,
                                                                 scan.alpha, std::numbers::pi - scan.alpha, wall, 1));
    std::array<double, 4> pv{};
    for (int c = 0; c < 4; ++c) {
      const double x = hi.middle_counts()[c], y = lo.middle_counts()[c];
      pv[c] = std::abs(x - y) / (x + y);
    }
    run.scans.push_back(std::move(scan));
    run.fits.push_back(fits);
    run.predicted_V.push_back(pv);
  }

  // E(alpha, beta) from the fitted curves of the scans taken at the CHSH idler phases.
  const auto& st = an.chsh;
  auto curve_E = [&](double alpha, double beta) -> std::optional<double> {
    for (std::size_t a = 0; a < run.scans.size(); ++a) {
      if (std::abs(run.scans[a].alpha - alpha) > 1e-9) continue;
      double num = 0.0, den = 0.0;
      for (int c = 0; c < 4; ++c) {
        const auto& f = run.fits[a][c];
        const double s = bell::combo_sign(static_cast<bell::Combo>(c));
        const double v = f.amplitude * (1.0 + s * f.V * std::cos(alpha + beta + f.phase_offset));
        num += s * v;
        den += v;
      }
      return num / den;
    }
    return std::nullopt;
  };
  const auto e1 = curve_E(st.alpha, st.beta), e2 = curve_E(st.alpha_prime, st.beta);
  const auto e3 = curve_E(st.alpha, st.beta_prime), e4 = curve_E(st.alpha_prime, st.beta_prime);
  if (e1 && e2 && e3 && e4) run.S_from_fits = bell::chsh_S(*e1, *e2, *e3, *e4);
  return run;
}

TomographyRun run_tomography(const ExperimentConfig& config, int channel, Stage stage,
                             const std::optional<quantum::TwoQubitState>& reference) {
  TomographyRun run;
  run.stage = stage;
  run.channel = channel;
  run.wall_s = acquisition_s(config, stage);
  std::array<ThreefoldCounts, tomography::kSettings> raw;
  for (int s = 0; s < tomography::kSettings; ++s) {
    const auto [alpha, beta] = tomography::setting_phases(static_cast<tomography::Setting>(s));
    const auto m = measurement(config, channel, channel, stage, alpha, beta, run.wall_s,
                               run_seed(config.seed, "tomography", channel, 4 * stage_index(stage) + s));
    raw[s] = sim::simulate_measurement(config, m).counts;
  }
  run.counts = tomography::assemble_counts(raw);
  run.reconstruction = tomography::reconstruct_with_errors(
      run.counts, config.analysis.mc_trials, run_seed(config.seed, "tomography-mc", channel, stage_index(stage)),
      tomography::ExposureModel::PerSettingTotals, reference);
  return run;
}

std::vector<G2Entry> run_g2_matrix(const ExperimentConfig& config, const std::vector<int>& channels, Stage stage) {
  const double wall = stage == Stage::AfterStorage ? config.acquisition.g2_s : config.acquisition.before_storage_s;
  const std::int64_t singles_cycles = config.measure_cycles(config.acquisition.idler_singles_s);
  std::vector<G2Entry> out;
  for (int i : channels) {
    // The idler path does not depend on the signal channel or the memory.
    const std::int64_t singles =
        sim::sample_idler_singles(config, i, 0.0, singles_cycles, run_seed(config.seed, "idler-singles", i));
    for (int j : channels) {
      const auto m = measurement(config, i, j, stage, 0.0, 0.0, wall,
                                 run_seed(config.seed, "g2", i, 8 * j + stage_index(stage)));
      auto r = sim::simulate_measurement(config, m);
      r.idler_singles = singles;
      r.idler_singles_cycles = singles_cycles;
      G2Entry e;
      e.idler_channel = i;
      e.signal_channel = j;
      e.g2 = {r.g2(), r.g2_sigma()};
      e.predicted = sim::predict_measurement(config, m).g2;
      out.push_back(e);
    }
  }
  return out;
}

analyzer::Histogram run_histogram(const ExperimentConfig& config, int idler_channel, int signal_channel, Stage stage,
                                  double alpha, double beta, double span_ns, double wall_s) {
  auto m = measurement(config, idler_channel, signal_channel, stage, alpha, beta, wall_s,
                       run_seed(config.seed, "histogram", idler_channel, 8 * signal_channel + stage_index(stage)));
  m.histogram_span_ns = span_ns;
  auto r = sim::simulate_measurement(config, m);
  if (!r.histogram) throw Error("histogram was not recorded");
  return *r.histogram;
}

// ---- reports

RunReport run_full_report(const ExperimentConfig& config, const std::vector<int>& channels) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  rep.config = config;
  for (int ch : channels) {
    ChannelReport c;
    c.channel = ch;
    c.chsh_out = run_chsh(config, ch, Stage::AfterStorage);
    if (config.analysis.run_before_storage) c.chsh_in = run_chsh(config, ch, Stage::BeforeStorage);
    if (config.analysis.run_tomography) {
      std::optional<quantum::TwoQubitState> in_state;
      if (config.analysis.run_before_storage) {
        c.tomo_in = run_tomography(config, ch, Stage::BeforeStorage);
        in_state = c.tomo_in->reconstruction.result.rho;
      }
      c.tomo_out = run_tomography(config, ch, Stage::AfterStorage, in_state);
    }
    rep.channels.push_back(std::move(c));
  }
  rep.g2_out = run_g2_matrix(config, channels, Stage::AfterStorage);
  if (config.analysis.run_before_storage) rep.g2_in = run_g2_matrix(config, channels, Stage::BeforeStorage);
  rep.checks = report_checks(rep);
  rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

namespace {

std::string channel_name(int ch) { return "ch" + std::to_string(ch + 1); }

void g2_checks(const std::vector<G2Entry>& g2, const char* stage, std::vector<Check>& out) {
  for (const auto& e : g2) {
    const std::string name =
        std::string("g2_") + stage + "_" + channel_name(e.idler_channel) + "_" + channel_name(e.signal_channel);
    if (e.idler_channel == e.signal_channel) {
      out.push_back(check_within(name, e.g2.value, 20.0, 6.0));
    } else {
      out.push_back(check_within(name, e.g2.value, 1.0, 0.2));
    }
    out.push_back(check_within(name + "_vs_prediction", e.g2.value, e.predicted, 5.0 * e.g2.sigma));
  }
}

}  // namespace

std::vector<Check> report_checks(const RunReport& report) {
  std::vector<Check> out;
  for (const auto& c : report.channels) {
    const std::string ch = channel_name(c.channel);
    // The measured S targets apply to channel 1; every channel is checked against its own prediction.
    if (c.chsh_out) {
      if (c.channel == 0) out.push_back(check_within("S_out_" + ch, c.chsh_out->result.S, targets::S_out[0], 0.06));
      out.push_back(check_within("S_out_" + ch + "_vs_prediction", c.chsh_out->result.S, c.chsh_out->predicted_S,
                                 5.0 * c.chsh_out->result.sigma_S));
    }
    if (c.chsh_in) {
      if (c.channel == 0) out.push_back(check_within("S_in_" + ch, c.chsh_in->result.S, targets::S_in[0], 0.06));
      out.push_back(check_within("S_in_" + ch + "_vs_prediction", c.chsh_in->result.S, c.chsh_in->predicted_S,
                                 5.0 * c.chsh_in->result.sigma_S));
    }
  }
  g2_checks(report.g2_out, "out", out);
  g2_checks(report.g2_in, "in", out);
  return out;
}

json to_json(const Estimate& e) { return {{"value", e.value}, {"sigma", e.sigma}}; }

json to_json(const Check& c) {
  return {{"name", c.name}, {"value", c.value}, {"target", c.target}, {"tolerance", c.tolerance}, {"pass", c.pass}};
}

json to_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks) a.push_back(to_json(c));
  return a;
}

namespace {

json port_counts(const bell::PortCounts& c) { return {c.c11, c.c12, c.c21, c.c22}; }

json metric(const tomography::MetricSummary& mc, double value) { return {{"value", value}, {"sigma", mc.sigma}, {"mc_mean", mc.mean}}; }

json matrix_json(const quantum::Matrix4& m) {
  json re = json::array(), im = json::array();
  for (int r = 0; r < 4; ++r) {
    json rr = json::array(), ii = json::array();
    for (int c = 0; c < 4; ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return {{"real", re}, {"imag", im}};
}

}  // namespace

json to_json(const ChshRun& run) {
  json counts = json::array(), pred = json::array();
  for (int k = 0; k < 4; ++k) {
    counts.push_back(port_counts(run.counts[k]));
    pred.push_back(port_counts(run.predicted[k]));
  }
  json e = json::array();
  for (int k = 0; k < 4; ++k) e.push_back({{"value", run.result.E[k]}, {"sigma", run.result.sigma_E[k]}});
  const auto& st = run.result.settings;
  return {{"stage", sim::to_string(run.stage)},
          {"channel", run.channel + 1},
          {"wall_s", run.wall_s},
          {"measure_cycles", run.cycles},
          {"settings_rad", {st.alpha, st.alpha_prime, st.beta, st.beta_prime}},
          {"counts_a1b1_a1b2_a2b1_a2b2", counts},
          {"predicted_counts", pred},
          {"E", e},
          {"S", {{"value", run.result.S}, {"sigma", run.result.sigma_S}}},
          {"predicted_S", run.predicted_S},
          {"violation_sigmas", run.result.sigma_S > 0.0 ? bell::bell_violation_sigmas(run.result) : 0.0},
          {"coincidence_rate_a1b1_hz", to_json(run.rate_a1b1_hz)}};
}

json to_json(const TomographyRun& run) {
  const auto& r = run.reconstruction;
  json j = {{"stage", sim::to_string(run.stage)},
            {"channel", run.channel + 1},
            {"wall_s", run.wall_s},
            {"exposure_model", tomography::to_string(tomography::ExposureModel::PerSettingTotals)},
            {"n_v", run.counts.totals()},
            {"fidelity", metric(r.fidelity_mc, r.fidelity)},
            {"purity", metric(r.purity_mc, r.purity)},
            {"eof", metric(r.eof_mc, r.eof)},
            {"concurrence", quantum::concurrence(r.result.rho)},
            {"converged", r.result.converged},
            {"iterations", r.result.iterations},
            {"mc_trials", r.trials},
            {"rho", matrix_json(r.result.rho.matrix())}};
  if (r.reference_fidelity) j["input_output_fidelity"] = metric(*r.reference_fidelity_mc, *r.reference_fidelity);
  return j;
}

json to_json(const std::vector<G2Entry>& g2) {
  json a = json::array();
  for (const auto& e : g2) {
    a.push_back({{"idler_channel", e.idler_channel + 1},
                 {"signal_channel", e.signal_channel + 1},
                 {"g2", to_json(e.g2)},
                 {"predicted", e.predicted}});
  }
  return a;
}

json to_json(const FringeRun& run) {
  json scans = json::array();
  for (std::size_t a = 0; a < run.scans.size(); ++a) {
    json fits = json::array();
    for (int c = 0; c < 4; ++c) {
      const auto& f = run.fits[a][c];
      fits.push_back({{"combo", bell::to_string(static_cast<bell::Combo>(c))},
                      {"V", {{"value", f.V}, {"sigma", f.sigma_V}}},
                      {"phase_offset", f.phase_offset},
                      {"amplitude", f.amplitude},
                      {"predicted_V", run.predicted_V[a][c]}});
    }
    json counts = json::array();
    for (const auto& c : run.scans[a].counts) counts.push_back(port_counts(c));
    scans.push_back({{"alpha", run.scans[a].alpha},
                     {"beta", run.scans[a].beta},
                     {"counts", counts},
                     {"point_wall_s", run.scans[a].integration_time_s},
                     {"fits", fits}});
  }
  json j = {{"channel", run.channel + 1}, {"scans", scans}};
  j["S_from_fits"] = run.S_from_fits ? json(*run.S_from_fits) : json();
  return j;
}

json sampling_metadata(const ExperimentConfig& config) {
  return {{"mode", experiment::to_string(config.analysis.sampling)},
          {"rate_boost", 1.0},
          {"time_base", "wall_clock"},
          {"measure_fraction", config.duty_cycle.measure_fraction()},
          {"measure_cycles_per_wall_s", config.measure_cycles(1.0)},
          {"wall_s",
           {{"after_storage", config.run_duration_s},
            {"before_storage", config.acquisition.before_storage_s},
            {"fringe_point", config.acquisition.fringe_point_s},
            {"g2_after_storage", config.acquisition.g2_s},
            {"g2_before_storage", config.acquisition.before_storage_s},
            {"idler_singles", config.acquisition.idler_singles_s}}}};
}

json to_json(const RunReport& report) {
  json channels = json::array();
  for (const auto& c : report.channels) {
    json j = {{"channel", c.channel + 1}};
    if (c.chsh_in) j["chsh_in"] = to_json(*c.chsh_in);
    if (c.chsh_out) j["chsh_out"] = to_json(*c.chsh_out);
    if (c.tomo_in) j["tomography_in"] = to_json(*c.tomo_in);
    if (c.tomo_out) j["tomography_out"] = to_json(*c.tomo_out);
    channels.push_back(j);
  }
  return {{"config", json::parse(experiment::config_to_json(report.config))},
          {"sampling", sampling_metadata(report.config)},
          {"channels", channels},
          {"g2_after_storage", to_json(report.g2_out)},
          {"g2_before_storage", to_json(report.g2_in)},
          {"checks", to_json(report.checks)},
          {"pass", all_pass(report.checks)}};
}

// ---- golden-data analyses

GoldenResult analyze_table4(const std::filesystem::path& fixtures) {
  verify_fixtures(fixtures);
  const auto before = quantum::nearest_psd(quantum::load_density_matrix(fixtures / "table4_before.txt"));
  const auto after = quantum::nearest_psd(quantum::load_density_matrix(fixtures / "table4_after.txt"));
  const auto psi = quantum::projector(quantum::bell_psi_plus());
  auto metrics = [&](const quantum::TwoQubitState& rho) {
    return json{{"fidelity", quantum::fidelity(rho, psi)},
                {"purity", quantum::purity(rho)},
                {"concurrence", quantum::concurrence(rho)},
                {"eof", quantum::entanglement_of_formation(rho)},
                {"analytic_S", bell::analytic_S(rho)}};
  };
  GoldenResult g;
  const double f_io = quantum::fidelity(before, after);
  g.report = {{"dataset", "table4"},
              {"before_storage", metrics(before)},
              {"after_storage", metrics(after)},
              {"input_output_fidelity", f_io}};
  const auto& b = g.report["before_storage"];
  g.checks = {
      check_within("fidelity_in_pct", 100.0 * b["fidelity"].get<double>(), targets::fidelity_in[0],
                   3.0 * targets::fidelity_in_sigma[0]),
      check_within("purity_in_pct", 100.0 * b["purity"].get<double>(), targets::purity_in[0],
                   3.0 * targets::purity_in_sigma[0]),
      check_within("eof_in_pct", 100.0 * b["eof"].get<double>(), targets::eof_in[0], 3.0 * targets::eof_in_sigma[0]),
      check_within("input_output_fidelity_pct", 100.0 * f_io, targets::fidelity_in_out[0],
                   3.0 * targets::fidelity_in_out_sigma[0]),
  };
  g.report["checks"] = to_json(g.checks);
  return g;
}

GoldenResult analyze_table3(const std::filesystem::path& fixtures, int n_trials, std::uint64_t seed) {
  verify_fixtures(fixtures);
  auto in = open_fixture(fixtures, "table3.csv");
  const auto counts = tomography::read_count_csv(in);
  const auto after = quantum::nearest_psd(quantum::load_density_matrix(fixtures / "table4_after.txt"));
  const auto before = quantum::nearest_psd(quantum::load_density_matrix(fixtures / "table4_before.txt"));
  const auto rec = tomography::reconstruct_with_errors(counts, n_trials, seed,
                                                       tomography::ExposureModel::PerSettingTotals, after);
  const auto equal = tomography::mle_reconstruct(counts, tomography::ExposureModel::EqualAcquisition);
  TomographyRun view;
  view.channel = 0;
  view.counts = counts;
  view.reconstruction = rec;
  GoldenResult g;
  g.report = to_json(view);
  g.report.erase("stage");
  g.report.erase("wall_s");
  g.report.erase("input_output_fidelity");
  g.report["dataset"] = "table3";
  g.report["fidelity_to_table4_after"] = metric(*rec.reference_fidelity_mc, *rec.reference_fidelity);
  g.report["input_output_fidelity"] = quantum::fidelity(rec.result.rho, before);
  g.report["equal_acquisition"] = {{"fidelity_to_table4_after", quantum::fidelity(equal.rho, after)},
                                   {"fidelity", quantum::fidelity(equal.rho, quantum::projector(quantum::bell_psi_plus()))},
                                   {"rho", matrix_json(equal.rho.matrix())}};
  g.checks = {
      check_at_least("fidelity_to_table4_after", *rec.reference_fidelity, 0.97),
      check_within("fidelity_out_pct", 100.0 * rec.fidelity, targets::fidelity_out[0],
                   3.0 * targets::fidelity_out_sigma[0]),
      check_within("purity_out_pct", 100.0 * rec.purity, targets::purity_out[0], 3.0 * targets::purity_out_sigma[0]),
      check_within("eof_out_pct", 100.0 * rec.eof, targets::eof_out[0], 3.0 * targets::eof_out_sigma[0]),
  };
  g.report["checks"] = to_json(g.checks);
  return g;
}

GoldenResult analyze_table2(const std::filesystem::path& fixtures) {
  verify_fixtures(fixtures);
  auto in = open_fixture(fixtures, "table2.csv");
  const auto table = memory::read_efficiency_csv(in);
  const auto flagged = memory::nonmonotone_rows(table);
  const std::size_t rows = table.storage_times_ns.size();
  std::unique_ptr<bool[]> use(new bool[rows]);
  json flagged_times = json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    use[r] = !flagged[r];
    if (flagged[r]) flagged_times.push_back(table.storage_times_ns[r]);
  }
  const std::size_t n_ch = table.percent.empty() ? 0 : table.percent.front().size();
  json fits = json::array();
  GoldenResult g;
  for (std::size_t c = 0; c < n_ch; ++c) {
    std::vector<double> col;
    for (std::size_t r = 0; r < rows; ++r) col.push_back(table.percent[r][c]);
    const auto fit = memory::fit_decay(table.storage_times_ns, col, std::span<const bool>(use.get(), rows));
    json res = json::array();
    for (std::size_t r = 0; r < rows; ++r) {
      res.push_back({{"storage_time_ns", table.storage_times_ns[r]},
                     {"measured_pct", col[r]},
                     {"model_pct", col[r] + fit.residuals_pp[r]},
                     {"residual_pp", fit.residuals_pp[r]},
                     {"used", static_cast<bool>(fit.used[r])}});
    }
    fits.push_back({{"channel", c + 1},
                    {"d1_initial", fit.decay.d1_initial},
                    {"decay_time_ns", fit.decay.decay_time_ns},
                    {"max_abs_residual_pp", fit.max_abs_residual_pp},
                    {"rows", res}});
    if (c == 0) {
      g.checks.push_back(check_within("ch1_max_abs_residual_pp", fit.max_abs_residual_pp, 0.0, 0.1));
    }
  }
  bool has_170 = false;
  for (const auto& t : flagged_times) has_170 = has_170 || std::abs(t.get<double>() - 170.0) < 1e-9;
  g.checks.push_back(check_within("row_170ns_flagged", has_170 ? 1.0 : 0.0, 1.0, 0.0));
  g.report = {{"dataset", "table2"},
              {"model", "eta(t) = (d1/F)^2 exp(-d1/F) exp(-7/F^2) exp(-d0), d1 = d1(0) exp(-t/T), F = 2, d0 = 1.7"},
              {"flagged_storage_times_ns", flagged_times},
              {"fits", fits},
              {"checks", to_json(g.checks)}};
  return g;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace afcsim::pipeline
