#include "afcsim/experiment.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "afcsim/error.hpp"
#include "afcsim/units.hpp"

namespace afcsim::experiment {

using nlohmann::json;

void DutyCycle::validate() const {
  if (!(prepare_ms >= 0.0 && wait_ms >= 0.0 && measure_ms > 0.0 && period_ms > 0.0)) {
    throw InvalidArgument("durations must be positive");
  }
  if (std::abs(prepare_ms + wait_ms + measure_ms - period_ms) > 1e-9 * period_ms) {
    throw InvalidArgument("prepare_ms + wait_ms + measure_ms must equal period_ms");
  }
}

void Filters::validate() const {
  if (!(idler_fbg_bandwidth_ghz > 0.0)) throw InvalidArgument("idler FBG bandwidth must be positive");
  if (!(idler_path_transmission > 0.0 && idler_path_transmission <= 1.0)) {
    throw InvalidArgument("idler path transmission must lie in (0, 1]");
  }
  if (!(signal_path_transmission_before_storage > 0.0 && signal_path_transmission_before_storage <= 1.0)) {
    throw InvalidArgument("signal path transmission must lie in (0, 1]");
  }
}

void Acquisition::validate() const {
  if (!(before_storage_s > 0.0 && fringe_point_s > 0.0 && g2_s > 0.0 && idler_singles_s > 0.0)) {
    throw InvalidArgument("acquisition times must be positive");
  }
}

const char* to_string(SamplingMode m) { return m == SamplingMode::Full ? "full" : "heralded"; }

void Analysis::validate() const {
  if (fringe_points < 5) throw InvalidArgument("fringe_points must be at least 5");
  if (mc_trials < 2) throw InvalidArgument("mc_trials must be at least 2");
  if (fringe_alphas.empty()) throw InvalidArgument("fringe_alphas is empty");
}

namespace {

template <class Fn>
void field(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

// Walks one JSON object, rejecting unknown keys and wrongly typed values.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }
  ~Section() = default;

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(at(key), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(at(key), "must be finite");
    }
  }
  template <class Int>
  void integer(const std::string& key, Int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(at(key), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned()) {
          out = v->get<Int>();
        } else if (v->get<std::int64_t>() >= 0) {
          out = static_cast<Int>(v->get<std::int64_t>());
        } else {
          throw ConfigError(at(key), "must be nonnegative");
        }
      } else {
        out = v->get<Int>();
      }
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(at(key), "expected an array of numbers");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*v)[i].get<double>());
      }
    }
  }
  const json* object(const std::string& key) {
    const json* v = take(key);
    if (v && !v->is_object()) throw ConfigError(at(key), "expected an object");
    return v;
  }
  const json* array(const std::string& key) {
    const json* v = take(key);
    if (v && !v->is_array()) throw ConfigError(at(key), "expected an array");
    return v;
  }
  bool has(const std::string& key) const { return j_.contains(key); }

  // Call after every known key was read.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown key");
    }
  }

 private:
  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_pump(const json& j, const std::string& path, source::PumpConfig& p) {
  Section s(j, path);
  s.number("period_ns", p.period_ns);
  s.number("pulse_interval_ns", p.pulse_interval_ns);
  s.number("pulse_width_fwhm_ps", p.pulse_width_fwhm_ps);
  s.number("extinction_ratio_db", p.extinction_ratio_db);
  s.number("intensity_imbalance", p.intensity_imbalance);
  s.number("phase_jitter_sigma", p.phase_jitter_sigma);
  s.finish();
}

void read_source(const json& j, const std::string& path, source::SourceModel& m) {
  Section s(j, path);
  if (const json* p = s.object("pump")) read_pump(*p, s.at("pump"), m.pump);
  s.number("pair_emission_probability_per_cycle", m.pair_emission_probability_per_cycle);
  s.number("white_noise_fraction", m.white_noise_fraction);
  s.number("signal_center_wavelength_nm", m.signal_center_wavelength_nm);
  s.number("idler_center_wavelength_nm", m.idler_center_wavelength_nm);
  s.number("pair_bandwidth_ghz", m.pair_bandwidth_ghz);
  s.finish();
  field(path, [&] { m.validate(); });
}

void read_channel(const json& j, const std::string& path, double reference_nm, memory::AfcChannel& c) {
  Section s(j, path);
  if (s.has("center_wavelength_nm") == s.has("center_offset_ghz")) {
    throw ConfigError(path, "give exactly one of center_wavelength_nm and center_offset_ghz");
  }
  const bool by_wavelength = s.has("center_wavelength_nm");
  double wavelength = 0.0;
  s.number("center_wavelength_nm", wavelength);
  s.number("center_offset_ghz", c.center_offset_ghz);
  if (by_wavelength) {
    if (!(wavelength > 0.0)) throw ConfigError(s.at("center_wavelength_nm"), "must be positive");
    c.center_offset_ghz = units::offset_ghz(wavelength, reference_nm);
  }
  s.number("bandwidth_ghz", c.bandwidth_ghz);
  s.number("teeth_spacing_mhz", c.teeth_spacing_mhz);
  s.number("d1", c.d1);
  s.number("finesse", c.finesse);
  s.number("d0", c.d0);
  if (const json* d = s.object("decay")) {
    Section ds(*d, s.at("decay"));
    ds.number("d1_initial", c.decay.d1_initial);
    ds.number("decay_time_ns", c.decay.decay_time_ns);
    ds.finish();
  }
  s.finish();
  field(path, [&] { c.validate(); });
}

void read_bank(const json& j, const std::string& path, memory::MemoryBank& b) {
  Section s(j, path);
  s.number("channel_spacing_ghz", b.channel_spacing_ghz);
  s.number("transmission_efficiency", b.transmission_efficiency);
  s.number("noise_rate_hz", b.noise_rate_hz);
  s.number("reference_wavelength_nm", b.reference_wavelength_nm);
  if (const json* chs = s.array("channels")) {
    b.channels.clear();
    for (std::size_t i = 0; i < chs->size(); ++i) {
      memory::AfcChannel c;
      read_channel((*chs)[i], s.at("channels") + "[" + std::to_string(i) + "]", b.reference_wavelength_nm, c);
      b.channels.push_back(c);
    }
  }
  s.finish();
  field(path, [&] { b.validate(); });
}

void read_umzi(const json& j, const std::string& path, analyzer::UmziConfig& u) {
  Section s(j, path);
  s.number("arm_delay_ns", u.arm_delay_ns);
  s.number("phase_rad", u.phase_rad);
  s.number("splitting_ratio", u.splitting_ratio);
  s.finish();
}

void read_analysis(const json& j, const std::string& path, Analysis& a) {
  Section s(j, path);
  std::vector<double> chsh{a.chsh.alpha, a.chsh.alpha_prime, a.chsh.beta, a.chsh.beta_prime};
  s.numbers("chsh_settings_rad", chsh);
  if (chsh.size() != 4) throw ConfigError(s.at("chsh_settings_rad"), "expected four phases (alpha, alpha', beta, beta')");
  a.chsh = {chsh[0], chsh[1], chsh[2], chsh[3]};
  s.numbers("fringe_alphas_rad", a.fringe_alphas);
  s.integer("fringe_points", a.fringe_points);
  s.integer("mc_trials", a.mc_trials);
  s.boolean("run_tomography", a.run_tomography);
  s.boolean("run_before_storage", a.run_before_storage);
  std::string mode = to_string(a.sampling);
  s.string("sampling", mode);
  if (mode == "full") {
    a.sampling = SamplingMode::Full;
  } else if (mode == "heralded") {
    a.sampling = SamplingMode::Heralded;
  } else {
    throw ConfigError(s.at("sampling"), "expected \"full\" or \"heralded\"");
  }
  s.finish();
  field(path, [&] { a.validate(); });
}

}  // namespace

void ExperimentConfig::validate() const {
  field("source", [&] { source.validate(); });
  field("bank", [&] { bank.validate(); });
  field("analyzers.idler", [&] { idler_analyzer.validate(source.pump.pulse_interval_ns); });
  field("analyzers.signal", [&] { signal_analyzer.validate(source.pump.pulse_interval_ns); });
  field("detectors", [&] { detectors.validate(); });
  field("coincidence", [&] { coincidence.validate(); });
  field("coincidence", [&] { grid().validate(); });
  field("filters", [&] { filters.validate(); });
  field("duty_cycle", [&] { duty_cycle.validate(); });
  field("acquisition", [&] { acquisition.validate(); });
  field("analysis", [&] { analysis.validate(); });
  if (!(run_duration_s > 0.0)) throw ConfigError("run_duration_s", "must be positive");
  for (std::size_t i = 0; i < bank.channels.size(); ++i) {
    const auto& c = bank.channels[i];
    if (filters.idler_fbg_bandwidth_ghz < c.bandwidth_ghz) {
      throw ConfigError("filters.idler_fbg_bandwidth_ghz", "narrower than the channel passband");
    }
    if (std::abs(c.center_offset_ghz) + 0.5 * filters.idler_fbg_bandwidth_ghz > 0.5 * source.pair_bandwidth_ghz) {
      throw ConfigError("bank.channels[" + std::to_string(i) + "]", "filter band leaves the pair spectrum");
    }
  }
}

analyzer::SlotGrid ExperimentConfig::grid() const {
  analyzer::SlotGrid g;
  g.clock_period_ns = source.pump.period_ns;
  g.first_slot_ps = first_slot_ps;
  g.slot_spacing_ps = source.pump.pulse_interval_ns * units::kPsPerNs;
  g.window_ps = coincidence.window_ps;
  return g;
}

std::int64_t ExperimentConfig::measure_cycles(double wall_s) const {
  const double cycles = wall_s * duty_cycle.measure_fraction() * 1e9 / source.pump.period_ns;
  return static_cast<std::int64_t>(std::llround(cycles));
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section s(j, "");
  s.integer("seed", c.seed);
  if (const json* v = s.object("source")) read_source(*v, "source", c.source);
  if (const json* v = s.object("bank")) read_bank(*v, "bank", c.bank);
  if (const json* v = s.object("analyzers")) {
    Section a(*v, "analyzers");
    if (const json* u = a.object("idler")) read_umzi(*u, "analyzers.idler", c.idler_analyzer);
    if (const json* u = a.object("signal")) read_umzi(*u, "analyzers.signal", c.signal_analyzer);
    a.finish();
  }
  if (const json* v = s.object("detectors")) {
    Section d(*v, "detectors");
    d.number("efficiency", c.detectors.efficiency);
    d.number("dark_count_rate_hz", c.detectors.dark_count_rate_hz);
    d.number("jitter_sigma_ps", c.detectors.jitter_sigma_ps);
    d.finish();
  }
  if (const json* v = s.object("coincidence")) {
    Section d(*v, "coincidence");
    d.number("window_ps", c.coincidence.window_ps);
    d.number("histogram_bin_ps", c.coincidence.histogram_bin_ps);
    d.number("first_slot_ps", c.first_slot_ps);
    d.finish();
  }
  if (const json* v = s.object("filters")) {
    Section d(*v, "filters");
    d.number("idler_fbg_bandwidth_ghz", c.filters.idler_fbg_bandwidth_ghz);
    d.number("idler_path_transmission", c.filters.idler_path_transmission);
    d.number("signal_path_transmission_before_storage", c.filters.signal_path_transmission_before_storage);
    d.finish();
  }
  if (const json* v = s.object("duty_cycle")) {
    Section d(*v, "duty_cycle");
    d.number("prepare_ms", c.duty_cycle.prepare_ms);
    d.number("wait_ms", c.duty_cycle.wait_ms);
    d.number("measure_ms", c.duty_cycle.measure_ms);
    d.number("period_ms", c.duty_cycle.period_ms);
    d.finish();
  }
  s.number("run_duration_s", c.run_duration_s);
  if (const json* v = s.object("acquisition")) {
    Section d(*v, "acquisition");
    d.number("before_storage_s", c.acquisition.before_storage_s);
    d.number("fringe_point_s", c.acquisition.fringe_point_s);
    d.number("g2_s", c.acquisition.g2_s);
    d.number("idler_singles_s", c.acquisition.idler_singles_s);
    d.finish();
  }
  if (const json* v = s.object("analysis")) read_analysis(*v, "analysis", c.analysis);
  s.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  const auto& p = c.source.pump;
  j["source"] = {{"pump",
                  {{"period_ns", p.period_ns},
                   {"pulse_interval_ns", p.pulse_interval_ns},
                   {"pulse_width_fwhm_ps", p.pulse_width_fwhm_ps},
                   {"extinction_ratio_db", p.extinction_ratio_db},
                   {"intensity_imbalance", p.intensity_imbalance},
                   {"phase_jitter_sigma", p.phase_jitter_sigma}}},
                 {"pair_emission_probability_per_cycle", c.source.pair_emission_probability_per_cycle},
                 {"white_noise_fraction", c.source.white_noise_fraction},
                 {"signal_center_wavelength_nm", c.source.signal_center_wavelength_nm},
                 {"idler_center_wavelength_nm", c.source.idler_center_wavelength_nm},
                 {"pair_bandwidth_ghz", c.source.pair_bandwidth_ghz}};
  json chans = json::array();
  for (const auto& ch : c.bank.channels) {
    chans.push_back({{"center_offset_ghz", ch.center_offset_ghz},
                     {"bandwidth_ghz", ch.bandwidth_ghz},
                     {"teeth_spacing_mhz", ch.teeth_spacing_mhz},
                     {"d1", ch.d1},
                     {"finesse", ch.finesse},
                     {"d0", ch.d0},
                     {"decay", {{"d1_initial", ch.decay.d1_initial}, {"decay_time_ns", ch.decay.decay_time_ns}}}});
  }
  j["bank"] = {{"channel_spacing_ghz", c.bank.channel_spacing_ghz},
               {"transmission_efficiency", c.bank.transmission_efficiency},
               {"noise_rate_hz", c.bank.noise_rate_hz},
               {"reference_wavelength_nm", c.bank.reference_wavelength_nm},
               {"channels", chans}};
  auto umzi = [](const analyzer::UmziConfig& u) {
    return json{{"arm_delay_ns", u.arm_delay_ns}, {"phase_rad", u.phase_rad}, {"splitting_ratio", u.splitting_ratio}};
  };
  j["analyzers"] = {{"idler", umzi(c.idler_analyzer)}, {"signal", umzi(c.signal_analyzer)}};
  j["detectors"] = {{"efficiency", c.detectors.efficiency},
                    {"dark_count_rate_hz", c.detectors.dark_count_rate_hz},
                    {"jitter_sigma_ps", c.detectors.jitter_sigma_ps}};
  j["coincidence"] = {{"window_ps", c.coincidence.window_ps},
                      {"histogram_bin_ps", c.coincidence.histogram_bin_ps},
                      {"first_slot_ps", c.first_slot_ps}};
  j["filters"] = {{"idler_fbg_bandwidth_ghz", c.filters.idler_fbg_bandwidth_ghz},
                  {"idler_path_transmission", c.filters.idler_path_transmission},
                  {"signal_path_transmission_before_storage", c.filters.signal_path_transmission_before_storage}};
  j["duty_cycle"] = {{"prepare_ms", c.duty_cycle.prepare_ms},
                     {"wait_ms", c.duty_cycle.wait_ms},
                     {"measure_ms", c.duty_cycle.measure_ms},
                     {"period_ms", c.duty_cycle.period_ms}};
  j["run_duration_s"] = c.run_duration_s;
  j["acquisition"] = {{"before_storage_s", c.acquisition.before_storage_s},
                      {"fringe_point_s", c.acquisition.fringe_point_s},
                      {"g2_s", c.acquisition.g2_s},
                      {"idler_singles_s", c.acquisition.idler_singles_s}};
  const auto& a = c.analysis;
  j["analysis"] = {{"chsh_settings_rad", {a.chsh.alpha, a.chsh.alpha_prime, a.chsh.beta, a.chsh.beta_prime}},
                   {"fringe_alphas_rad", a.fringe_alphas},
                   {"fringe_points", a.fringe_points},
                   {"mc_trials", a.mc_trials},
                   {"run_tomography", a.run_tomography},
                   {"run_before_storage", a.run_before_storage},
                   {"sampling", to_string(a.sampling)}};
  return j.dump(2) + "\n";
}

}  // namespace afcsim::experiment
