// afcsim: simulate, analyze-golden, reproduce.
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "afcsim/afc_memory.hpp"
#include "afcsim/density_io.hpp"
#include "afcsim/error.hpp"
#include "afcsim/pipeline.hpp"

#ifndef AFCSIM_DEFAULT_CONFIG
#define AFCSIM_DEFAULT_CONFIG "configs/calibrated.json"
#endif

namespace fs = std::filesystem;
using namespace afcsim;
using pipeline::Check;
using pipeline::json;
using sim::Stage;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitTolerance = 1;
constexpr int kExitInput = 2;

struct Options {
  std::string config = AFCSIM_DEFAULT_CONFIG;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string channels = "1,2,3,4,5";
  std::optional<int> trials;
  std::string fixtures;
};

std::vector<int> parse_channels(const std::string& text, int n_channels) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int ch = 0;
    try {
      std::size_t used = 0;
      ch = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--channels", "not a channel number: '" + item + "'");
    }
    if (ch < 1 || ch > n_channels) throw ConfigError("--channels", "channel " + item + " out of range");
    if (std::find(out.begin(), out.end(), ch - 1) == out.end()) out.push_back(ch - 1);
  }
  if (out.empty()) throw ConfigError("--channels", "no channels given");
  return out;
}

experiment::ExperimentConfig load(const Options& o) {
  auto cfg = experiment::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) {
    if (*o.trials < 2) throw ConfigError("--trials", "need at least 2 Monte-Carlo trials");
    cfg.analysis.mc_trials = *o.trials;
  }
  cfg.validate();
  return cfg;
}

fs::path fixture_dir(const Options& o) { return o.fixtures.empty() ? pipeline::default_fixture_dir() : fs::path(o.fixtures); }

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

void print_checks(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    std::cout << (c.pass ? "  ok    " : "  FAIL  ") << c.name << " = " << num(c.value) << " (target " << num(c.target);
    if (c.tolerance > 0.0) std::cout << " +- " << num(c.tolerance);
    std::cout << ")\n";
  }
}

int finish(const fs::path& out, const std::string& name, json summary, const std::vector<Check>& checks) {
  const bool pass = pipeline::all_pass(checks);
  summary["checks"] = pipeline::to_json(checks);
  summary["pass"] = pass;
  pipeline::write_text(out / (name + "_summary.json"), pipeline::dump(summary));
  print_checks(checks);
  std::cout << name << ": " << (pass ? "PASS" : "FAIL") << "  (" << (out / (name + "_summary.json")).string() << ")\n";
  return pass ? kExitPass : kExitTolerance;
}

std::string stage_tag(Stage s) { return s == Stage::AfterStorage ? "out" : "in"; }

void write_density(const fs::path& path, const quantum::Matrix4& m, const std::string& comment) {
  std::ostringstream s;
  quantum::write_density_matrix(s, m, comment);
  pipeline::write_text(path, s.str());
}

void write_counts(const fs::path& path, const tomography::CountRecord& c) {
  std::ostringstream s;
  tomography::write_count_csv(s, c);
  pipeline::write_text(path, s.str());
}

void write_g2_csv(const fs::path& path, const std::vector<pipeline::G2Entry>& g2) {
  std::ostringstream s;
  s << "idler_channel,signal_channel,g2,sigma,predicted\n";
  for (const auto& e : g2) {
    s << e.idler_channel + 1 << ',' << e.signal_channel + 1 << ',' << num(e.g2.value) << ',' << num(e.g2.sigma) << ','
      << num(e.predicted) << '\n';
  }
  pipeline::write_text(path, s.str());
}

void write_histogram(const fs::path& path, const analyzer::Histogram& h) {
  std::ostringstream s;
  analyzer::write_histogram_csv(s, h);
  pipeline::write_text(path, s.str());
}

// ---- simulate

int cmd_simulate(const Options& o) {
  const auto cfg = load(o);
  const auto channels = parse_channels(o.channels, static_cast<int>(cfg.bank.channels.size()));
  const fs::path out = o.out;
  const auto report = pipeline::run_full_report(cfg, channels);
  for (const auto& c : report.channels) {
    const std::string ch = "ch" + std::to_string(c.channel + 1);
    for (const auto* t : {c.tomo_in ? &*c.tomo_in : nullptr, c.tomo_out ? &*c.tomo_out : nullptr}) {
      if (!t) continue;
      write_counts(out / ("counts_" + ch + "_" + stage_tag(t->stage) + ".csv"), t->counts);
      write_density(out / ("rho_" + ch + "_" + stage_tag(t->stage) + ".txt"), t->reconstruction.result.rho.matrix(),
                    std::string("reconstructed two-photon state, ") + sim::to_string(t->stage) + ", " + ch);
    }
  }
  write_g2_csv(out / "g2_after_storage.csv", report.g2_out);
  if (!report.g2_in.empty()) write_g2_csv(out / "g2_before_storage.csv", report.g2_in);

  // Raw artifacts of the first channel: a short fully sampled event stream and a histogram.
  const int ch0 = channels.front();
  sim::Measurement m;
  m.idler_channel = m.signal_channel = ch0;
  m.stage = Stage::AfterStorage;
  m.cycles = cfg.measure_cycles(1.0);
  m.seed = pipeline::run_seed(cfg.seed, "events", ch0);
  m.mode = experiment::SamplingMode::Full;
  m.keep_events = true;
  m.histogram_span_ns = 5.0;
  const auto events = sim::simulate_measurement(cfg, m);
  {
    std::ostringstream s;
    analyzer::write_detection_stream(s, events.idler_events);
    analyzer::write_detection_stream(s, events.signal_events);
    pipeline::write_text(out / ("events_ch" + std::to_string(ch0 + 1) + "_after_storage.txt"), s.str());
  }
  write_histogram(out / ("histogram_ch" + std::to_string(ch0 + 1) + "_after_storage.csv"), *events.histogram);

  auto j = pipeline::to_json(report);
  j["event_sample"] = {{"channel", ch0 + 1},
                       {"sampling", "full"},
                       {"wall_s", 1.0},
                       {"idler_detections", events.idler_detections},
                       {"signal_detections", events.signal_detections},
                       {"note", "signal stream offset by the storage delay; timestamps in ps"}};
  pipeline::write_text(out / "report.json", pipeline::dump(j));
  print_checks(report.checks);
  const bool pass = pipeline::all_pass(report.checks);
  std::cout << "simulate: " << (pass ? "PASS" : "FAIL") << " in " << num(report.elapsed_s) << " s  ("
            << (out / "report.json").string() << ")\n";
  return pass ? kExitPass : kExitTolerance;
}

// ---- analyze-golden

int cmd_golden(const Options& o, const std::string& dataset) {
  const fs::path dir = fixture_dir(o);
  const fs::path out = o.out;
  const int trials = o.trials.value_or(100);
  const std::uint64_t seed = o.seed.value_or(1);
  pipeline::GoldenResult g;
  if (dataset == "table2") {
    g = pipeline::analyze_table2(dir);
    std::ostringstream s;
    s << "channel,storage_time_ns,measured_pct,model_pct,residual_pp,used\n";
    for (const auto& f : g.report["fits"]) {
      for (const auto& r : f["rows"]) {
        s << f["channel"].get<int>() << ',' << num(r["storage_time_ns"].get<double>()) << ','
          << num(r["measured_pct"].get<double>()) << ',' << num(r["model_pct"].get<double>()) << ','
          << num(r["residual_pp"].get<double>()) << ',' << (r["used"].get<bool>() ? 1 : 0) << '\n';
      }
    }
    pipeline::write_text(out / "table2_residuals.csv", s.str());
  } else if (dataset == "table3") {
    g = pipeline::analyze_table3(dir, trials, seed);
  } else {
    g = pipeline::analyze_table4(dir);
  }
  pipeline::write_text(out / (dataset + "_report.json"), pipeline::dump(g.report));
  print_checks(g.checks);
  const bool pass = pipeline::all_pass(g.checks);
  std::cout << dataset << ": " << (pass ? "PASS" : "FAIL") << "  (" << (out / (dataset + "_report.json")).string()
            << ")\n";
  return pass ? kExitPass : kExitTolerance;
}

// ---- reproduce

int reproduce_fig3(const experiment::ExperimentConfig& cfg, const std::vector<int>& channels, const fs::path& out) {
  const auto g2_out = pipeline::run_g2_matrix(cfg, channels, Stage::AfterStorage);
  const auto g2_in = pipeline::run_g2_matrix(cfg, channels, Stage::BeforeStorage);
  write_g2_csv(out / "fig3_g2_after_storage.csv", g2_out);
  write_g2_csv(out / "fig3_g2_before_storage.csv", g2_in);
  for (int ch : channels) {
    const auto h = pipeline::run_histogram(cfg, ch, ch, Stage::AfterStorage, 0.0, 0.0, 5.0, cfg.acquisition.g2_s);
    write_histogram(out / ("fig3_histogram_ch" + std::to_string(ch + 1) + ".csv"), h);
  }
  pipeline::RunReport rep;
  rep.g2_out = g2_out;
  rep.g2_in = g2_in;
  const auto checks = pipeline::report_checks(rep);
  return finish(out, "fig3",
                {{"sampling", pipeline::sampling_metadata(cfg)},
                 {"g2_after_storage", pipeline::to_json(g2_out)},
                 {"g2_before_storage", pipeline::to_json(g2_in)}},
                checks);
}

int reproduce_fig4(const experiment::ExperimentConfig& cfg, int ch, const fs::path& out) {
  const auto run = pipeline::run_fringes(cfg, ch);
  std::ostringstream fits, corr;
  fits << "alpha_rad,combo,V,sigma_V,phase_offset_rad,amplitude,predicted_V\n";
  corr << "alpha_rad,beta_rad,E\n";
  for (std::size_t a = 0; a < run.scans.size(); ++a) {
    std::ostringstream s;
    bell::write_fringe_csv(s, run.scans[a]);
    pipeline::write_text(out / ("fig4_fringe_alpha" + std::to_string(a) + ".csv"), s.str());
    for (int c = 0; c < 4; ++c) {
      const auto& f = run.fits[a][c];
      fits << num(run.scans[a].alpha) << ',' << bell::to_string(static_cast<bell::Combo>(c)) << ',' << num(f.V) << ','
           << num(f.sigma_V) << ',' << num(f.phase_offset) << ',' << num(f.amplitude) << ','
           << num(run.predicted_V[a][c]) << '\n';
    }
    for (std::size_t j = 0; j < run.scans[a].beta.size(); ++j) {
      corr << num(run.scans[a].alpha) << ',' << num(run.scans[a].beta[j]) << ','
           << num(bell::correlation_E(run.scans[a].counts[j])) << '\n';
    }
  }
  pipeline::write_text(out / "fig4_fits.csv", fits.str());
  pipeline::write_text(out / "fig4_correlation.csv", corr.str());
  std::vector<Check> checks;
  if (!run.fits.empty()) {
    for (int c = 0; c < 4; ++c) {
      checks.push_back(pipeline::check_within(std::string("V_") + bell::to_string(static_cast<bell::Combo>(c)) + "_pct",
                                              100.0 * run.fits[0][c].V, pipeline::targets::visibility[c], 5.0));
    }
  }
  return finish(out, "fig4", {{"sampling", pipeline::sampling_metadata(cfg)}, {"fringes", pipeline::to_json(run)}},
                checks);
}

int reproduce_fig5(const experiment::ExperimentConfig& cfg, int ch, const fs::path& out) {
  const auto in = pipeline::run_tomography(cfg, ch, Stage::BeforeStorage);
  const auto after = pipeline::run_tomography(cfg, ch, Stage::AfterStorage, in.reconstruction.result.rho);
  std::ostringstream bars;
  bars << "stage,row,col,real,imag\n";
  static constexpr const char* kBasis[4] = {"ee", "el", "le", "ll"};
  for (const auto* t : {&in, &after}) {
    const auto& m = t->reconstruction.result.rho.matrix();
    write_density(out / ("fig5_rho_" + stage_tag(t->stage) + ".txt"), m,
                  std::string("reconstructed two-photon state, ") + sim::to_string(t->stage));
    write_counts(out / ("fig5_counts_" + stage_tag(t->stage) + ".csv"), t->counts);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        bars << sim::to_string(t->stage) << ',' << kBasis[r] << ',' << kBasis[c] << ',' << num(m(r, c).real()) << ','
             << num(m(r, c).imag()) << '\n';
      }
    }
  }
  pipeline::write_text(out / "fig5_bars.csv", bars.str());
  const double fio = 100.0 * *after.reconstruction.reference_fidelity;
  std::vector<Check> checks = {
      pipeline::check_within("input_output_fidelity_pct", fio, pipeline::targets::fidelity_in_out[ch],
                             3.0 * pipeline::targets::fidelity_in_out_sigma[ch]),
      pipeline::check_at_least("converged_in", in.reconstruction.result.converged ? 1.0 : 0.0, 1.0),
      pipeline::check_at_least("converged_out", after.reconstruction.result.converged ? 1.0 : 0.0, 1.0)};
  return finish(out, "fig5",
                {{"sampling", pipeline::sampling_metadata(cfg)},
                 {"tomography_in", pipeline::to_json(in)},
                 {"tomography_out", pipeline::to_json(after)}},
                checks);
}

int reproduce_fig7(const experiment::ExperimentConfig& cfg, int ch, const fs::path& out) {
  // DD setting after storage: two-fold histogram and the threefold cell table.
  sim::Measurement m;
  m.idler_channel = m.signal_channel = ch;
  m.stage = Stage::AfterStorage;
  m.cycles = cfg.measure_cycles(cfg.run_duration_s);
  m.seed = pipeline::run_seed(cfg.seed, "fig7", ch);
  m.mode = cfg.analysis.sampling;
  m.histogram_span_ns = 5.0;
  const auto r = sim::simulate_measurement(cfg, m);
  write_histogram(out / "fig7_histogram.csv", *r.histogram);
  std::ostringstream cells;
  cells << "idler_port,idler_slot,signal_port,signal_slot,count\n";
  static constexpr const char* kSlot[3] = {"early", "middle", "late"};
  for (int i = 0; i < analyzer::kCells; ++i) {
    for (int s = 0; s < analyzer::kCells; ++s) {
      cells << analyzer::cell_port(i) << ',' << kSlot[i % 3] << ',' << analyzer::cell_port(s) << ',' << kSlot[s % 3]
            << ',' << r.counts.cells[i * analyzer::kCells + s] << '\n';
    }
  }
  pipeline::write_text(out / "fig7_threefold.csv", cells.str());

  // Peaks at 0, +-1.25 and +-2.5 ns against the valleys between them.
  const auto& h = *r.histogram;
  auto near = [&](double t_ps) {
    std::int64_t n = 0;
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      if (std::abs(h.centers_ps[k] - t_ps) <= 300.0) n += h.counts[k];
    }
    return static_cast<double>(n);
  };
  std::vector<Check> checks;
  double valley = 0.0;
  for (double t : {-1875.0, -625.0, 625.0, 1875.0}) valley = std::max(valley, near(t));
  for (double t : {-2500.0, -1250.0, 0.0, 1250.0, 2500.0}) {
    checks.push_back(pipeline::check_at_least("peak_" + num(t) + "ps_over_valley", near(t) / std::max(valley, 1.0), 3.0));
  }
  int populated = 0;
  for (int i = 0; i < 3; ++i) {
    for (int s = 0; s < 3; ++s) populated += r.counts.cells[i * analyzer::kCells + s] > 0 ? 1 : 0;
  }
  checks.push_back(pipeline::check_within("populated_port11_bases", populated, 9.0, 0.0));
  const double ee = static_cast<double>(r.counts.at(1, analyzer::Slot::Early, 1, analyzer::Slot::Early));
  const double el = static_cast<double>(r.counts.at(1, analyzer::Slot::Early, 1, analyzer::Slot::Late));
  return finish(out, "fig7",
                {{"sampling", pipeline::sampling_metadata(cfg)},
                 {"channel", ch + 1},
                 {"ee_over_el", el > 0 ? json(ee / el) : json()},
                 {"histogram_total", h.total()}},
                checks);
}

int reproduce_table1(const experiment::ExperimentConfig& cfg, const std::vector<int>& channels, const fs::path& out) {
  const auto report = pipeline::run_full_report(cfg, channels);
  namespace t = pipeline::targets;
  std::ostringstream s;
  s << "quantity,stage,channel,value,sigma,target,target_sigma\n";
  auto row = [&](const char* q, const char* stage, int ch, double v, double sig, double target, double tsig) {
    s << q << ',' << stage << ',' << ch + 1 << ',' << num(v) << ',' << num(sig) << ',' << num(target) << ','
      << num(tsig) << '\n';
  };
  for (const auto& c : report.channels) {
    const int ch = c.channel;
    if (c.chsh_in) row("S", "in", ch, c.chsh_in->result.S, c.chsh_in->result.sigma_S, t::S_in[ch], t::S_in_sigma[ch]);
    if (c.chsh_out) {
      row("S", "out", ch, c.chsh_out->result.S, c.chsh_out->result.sigma_S, t::S_out[ch], t::S_out_sigma[ch]);
      row("rate_a1b1_hz", "out", ch, c.chsh_out->rate_a1b1_hz.value, c.chsh_out->rate_a1b1_hz.sigma, t::rate_a1b1[ch], 0.1);
    }
    auto tomo = [&](const pipeline::TomographyRun& r, const char* stage, const auto& f, const auto& fs_,
                    const auto& p, const auto& ps, const auto& e, const auto& es) {
      const auto& x = r.reconstruction;
      row("fidelity_pct", stage, ch, 100 * x.fidelity, 100 * x.fidelity_mc.sigma, f[ch], fs_[ch]);
      row("purity_pct", stage, ch, 100 * x.purity, 100 * x.purity_mc.sigma, p[ch], ps[ch]);
      row("eof_pct", stage, ch, 100 * x.eof, 100 * x.eof_mc.sigma, e[ch], es[ch]);
    };
    if (c.tomo_in) tomo(*c.tomo_in, "in", t::fidelity_in, t::fidelity_in_sigma, t::purity_in, t::purity_in_sigma, t::eof_in, t::eof_in_sigma);
    if (c.tomo_out) {
      tomo(*c.tomo_out, "out", t::fidelity_out, t::fidelity_out_sigma, t::purity_out, t::purity_out_sigma, t::eof_out,
           t::eof_out_sigma);
      const auto& x = c.tomo_out->reconstruction;
      if (x.reference_fidelity) {
        row("input_output_fidelity_pct", "out", ch, 100 * *x.reference_fidelity, 100 * x.reference_fidelity_mc->sigma,
            t::fidelity_in_out[ch], t::fidelity_in_out_sigma[ch]);
      }
    }
  }
  pipeline::write_text(out / "table1.csv", s.str());
  write_g2_csv(out / "table1_g2_after_storage.csv", report.g2_out);
  if (!report.g2_in.empty()) write_g2_csv(out / "table1_g2_before_storage.csv", report.g2_in);
  auto checks = report.checks;
  for (const auto& c : report.channels) {
    if (c.tomo_out && c.tomo_out->reconstruction.reference_fidelity) {
      checks.push_back(pipeline::check_at_least("input_output_fidelity_ch" + std::to_string(c.channel + 1),
                                                *c.tomo_out->reconstruction.reference_fidelity, 0.92));
    }
  }
  return finish(out, "table1", pipeline::to_json(report), checks);
}

int reproduce_table2(const experiment::ExperimentConfig& cfg, const Options& o, const fs::path& out) {
  const auto golden = pipeline::analyze_table2(fixture_dir(o));
  std::vector<double> times;
  for (const auto& r : golden.report["fits"][0]["rows"]) times.push_back(r["storage_time_ns"].get<double>());
  const auto table = memory::efficiency_table(cfg.bank, times);
  std::ostringstream s;
  memory::write_efficiency_csv(s, table);
  pipeline::write_text(out / "table2_model.csv", s.str());

  // Configured decay models against the measured table.
  std::vector<Check> checks = golden.checks;
  std::ostringstream cmp;
  cmp << "channel,storage_time_ns,measured_pct,config_model_pct,residual_pp,used\n";
  for (const auto& f : golden.report["fits"]) {
    const int ch = f["channel"].get<int>() - 1;
    double worst = 0.0;
    for (std::size_t r = 0; r < times.size(); ++r) {
      const auto& row = f["rows"][r];
      const double model = table.percent[r][static_cast<std::size_t>(ch)];
      const double resid = model - row["measured_pct"].get<double>();
      if (row["used"].get<bool>()) worst = std::max(worst, std::abs(resid));
      cmp << ch + 1 << ',' << num(times[r]) << ',' << num(row["measured_pct"].get<double>()) << ',' << num(model) << ','
          << num(resid) << ',' << (row["used"].get<bool>() ? 1 : 0) << '\n';
    }
    if (ch == 0) checks.push_back(pipeline::check_within("config_ch1_max_abs_residual_pp", worst, 0.0, 0.1));
  }
  pipeline::write_text(out / "table2_comparison.csv", cmp.str());
  return finish(out, "table2", golden.report, checks);
}

int cmd_reproduce(const Options& o, const std::string& target) {
  const auto cfg = load(o);
  const auto channels = parse_channels(o.channels, static_cast<int>(cfg.bank.channels.size()));
  const fs::path out = o.out;
  if (target == "fig3") return reproduce_fig3(cfg, channels, out);
  if (target == "fig4") return reproduce_fig4(cfg, channels.front(), out);
  if (target == "fig5") return reproduce_fig5(cfg, channels.front(), out);
  if (target == "fig7") return reproduce_fig7(cfg, channels.front(), out);
  if (target == "table1") return reproduce_table1(cfg, channels, out);
  return reproduce_table2(cfg, o, out);
}

void add_common(CLI::App* app, Options& o, bool with_config) {
  if (with_config) app->add_option("--config", o.config, "experiment config (JSON)");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--seed", o.seed, "override the config seed");
  app->add_option("--trials", o.trials, "Monte-Carlo trials for error bars");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"afcsim: spectrally multiplexed AFC memory entanglement simulator"};
  app.require_subcommand(1);
  Options o;
  std::string dataset, target;

  auto* sim_cmd = app.add_subcommand("simulate", "end-to-end simulated run of every stage and channel");
  add_common(sim_cmd, o, true);
  sim_cmd->add_option("--channels", o.channels, "comma-separated channel numbers (1-5)");

  auto* golden = app.add_subcommand("analyze-golden", "analyse a shipped data table");
  golden->add_option("dataset", dataset)->required()->check(CLI::IsMember({"table2", "table3", "table4"}));
  add_common(golden, o, false);
  golden->add_option("--fixtures", o.fixtures, "fixture directory");

  auto* repro = app.add_subcommand("reproduce", "regenerate a figure or table");
  repro->add_option("target", target)
      ->required()
      ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig7", "table1", "table2"}));
  add_common(repro, o, true);
  repro->add_option("--channels", o.channels, "comma-separated channel numbers (1-5); figures use the first");
  repro->add_option("--fixtures", o.fixtures, "fixture directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitInput;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(o);
    if (golden->parsed()) return cmd_golden(o, dataset);
    return cmd_reproduce(o, target);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
}
