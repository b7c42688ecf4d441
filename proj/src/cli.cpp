// SPDX-License-Identifier: Apache-2.0

#include "mi_isac/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "mi_isac/analysis.hpp"
#include "mi_isac/error.hpp"
#include "mi_isac/estimation.hpp"

namespace mi_isac::cli {
namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) parts.push_back(trim(part));
  return parts;
}

double parse_double(const std::string& key, const std::string& text, bool allow_inf = false) {
  const std::string s = trim(text);
  if (allow_inf && (s == "inf" || s == "+inf")) return std::numeric_limits<double>::infinity();
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(value)) {
    config_error(key + ": expected a finite number, got '" + text + "'");
  }
  return value;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  errno = 0;
  char* end = nullptr;
  const long long value = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    config_error(key + ": expected an integer, got '" + text + "'");
  }
  return value;
}

std::vector<double> parse_list(const std::string& key, const std::string& text,
                               bool allow_inf = false) {
  std::vector<double> values;
  for (const std::string& part : split(text, ',')) {
    if (!part.empty()) values.push_back(parse_double(key, part, allow_inf));
  }
  return values;
}

Vector3<double> parse_vec3(const std::string& key, const std::string& text) {
  const std::vector<double> v = parse_list(key, text);
  if (v.size() != 3) config_error(key + ": expected three comma-separated numbers");
  return {v[0], v[1], v[2]};
}

std::string number(double v) { return fmt::format("{:.17g}", v); }

Cell num(double v) {
  if (std::isfinite(v)) return {number(v), v};
  return {number(v), number(v)};
}
Cell num_fixed(double v, int digits) {
  if (std::isfinite(v)) return {fmt::format("{:.{}f}", v, digits), v};
  return {number(v), number(v)};
}
Cell integer(long long v) { return {std::to_string(v), v}; }
Cell text(const std::string& s) { return {s, s}; }

/// Wraps validation failures of the physical types as configuration errors.
template <typename F>
void checked(const std::string& what, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    config_error(what + ": " + e.what());
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"coil.radius", "radius", "0.15", "coil radius a [m]"},
      {"coil.turns", "turns", "20", "turns per coil N_t"},
      {"coil.axes", "axes", "tri", "tri | single"},
      {"coil.normal", "normal", "0,0,1", "single-axis coil normal in the local frame"},
      {"carrier.frequency", "frequency", "10000", "carrier frequency f0 [Hz]"},
      {"carrier.bandwidth", "bandwidth", "1000", "signal and noise bandwidth B [Hz]"},
      {"medium.conductivity", "conductivity", "0", "medium conductivity [S/m]"},
      {"geometry.range", "range", "10", "link range r [m]"},
      {"geometry.theta", "theta", "0", "polar angle of the Rx as seen from the Tx [rad]"},
      {"geometry.phi", "phi", "0", "azimuth [rad]"},
      {"geometry.tx_rotation", "tx-rotation", "0,0,0", "Tx frame yaw,pitch,roll (Z-Y-X) [rad]"},
      {"geometry.rx_rotation", "rx-rotation", "0,0,0", "Rx frame yaw,pitch,roll (Z-Y-X) [rad]"},
      {"noise.temperature", "temperature", "290", "noise temperature [K]"},
      {"noise.nf_db", "nf", "6", "practical front-end noise figure [dB]"},
      {"noise.il_db", "il", "3", "practical finite-Q insertion loss [dB]"},
      {"frame.symbols", "symbols", "100", "observed symbols N"},
      {"frame.power", "power", "1", "transmit power P [W]"},
      {"sweep.ranges", "ranges", "1,2,5,10,20,30", "range grid [m]"},
      {"sweep.trials", "trials", "500", "Monte Carlo trials per cell (>= 500)"},
      {"sweep.seed", "seed", "1", "base seed"},
      {"sweep.threads", "threads", "0", "worker threads (0 = auto)"},
      {"sweep.theta", "mc-theta", "0.78539816339744828", "Monte Carlo polar angle [rad]"},
      {"sweep.phi", "mc-phi", "1.0471975511965976", "Monte Carlo azimuth [rad]"},
      {"sweep.alphas", "alphas", "0.1,0.2,0.25,0.3,0.4,0.5", "pilot fractions"},
      {"sweep.snrs_db", "snrs", "0,5,10,20,30,inf", "per-symbol SNR grid [dB]; inf allowed"},
      {"sweep.geometries", "geometries",
       "10:0.78539816339744828:1.0471975511965976;5:1.2:4;20:2.5:0.3;10:0:0",
       "r:theta:phi list separated by ';'"},
  };
  return keys;
}

// ---------------------------------------------------------------------------
// ExperimentConfig

ExperimentConfig::ExperimentConfig() {
  for (const ConfigKey& k : config_keys()) values_[k.key] = k.default_value;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) config_error("unknown configuration key '" + key + "'");
  it->second = trim(value);
}

void ExperimentConfig::load_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error(fmt::format("line {}: malformed section header", line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(fmt::format("line {}: expected key = value", line_no));
    std::string key = trim(line.substr(0, eq));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    set(key, line.substr(eq + 1));
  }
}

void ExperimentConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  load_text(buffer.str());
}

ResolvedConfig ExperimentConfig::resolve() const {
  const auto& v = values_;
  ResolvedConfig c;

  const std::string axes = v.at("coil.axes");
  if (axes != "tri" && axes != "single") config_error("coil.axes: expected 'tri' or 'single'");
  c.coil.radius_m = parse_double("coil.radius", v.at("coil.radius"));
  const long long turns = parse_integer("coil.turns", v.at("coil.turns"));
  if (turns < 1 || turns > 1000000) config_error("coil.turns: must be a positive integer");
  c.coil.turns = int(turns);
  c.coil.axes = axes == "tri" ? AxisKind::TriAxial : AxisKind::SingleAxis;
  c.coil.normal = parse_vec3("coil.normal", v.at("coil.normal"));
  if (c.coil.axes == AxisKind::SingleAxis && c.coil.normal.norm() > 0.0) {
    c.coil.normal.normalize();
  }
  checked("coil", [&] { validate(c.coil); });

  c.carrier.frequency_hz = parse_double("carrier.frequency", v.at("carrier.frequency"));
  c.carrier.bandwidth_hz = parse_double("carrier.bandwidth", v.at("carrier.bandwidth"));
  checked("carrier", [&] { validate(c.carrier); });

  c.medium.conductivity_s_per_m = parse_double("medium.conductivity", v.at("medium.conductivity"));
  checked("medium", [&] { validate(c.medium); });

  c.geometry.range_m = parse_double("geometry.range", v.at("geometry.range"));
  c.geometry.theta_rad = parse_double("geometry.theta", v.at("geometry.theta"));
  c.geometry.phi_rad = parse_double("geometry.phi", v.at("geometry.phi"));
  const Vector3<double> tx = parse_vec3("geometry.tx_rotation", v.at("geometry.tx_rotation"));
  const Vector3<double> rx = parse_vec3("geometry.rx_rotation", v.at("geometry.rx_rotation"));
  c.geometry.tx_orientation = rotation_zyx(tx(0), tx(1), tx(2));
  c.geometry.rx_orientation = rotation_zyx(rx(0), rx(1), rx(2));
  checked("geometry", [&] { validate(c.geometry); });

  c.temperature_k = parse_double("noise.temperature", v.at("noise.temperature"));
  c.noise_figure_db = parse_double("noise.nf_db", v.at("noise.nf_db"));
  c.insertion_loss_db = parse_double("noise.il_db", v.at("noise.il_db"));
  checked("noise", [&] {
    validate(NoiseModel<double>{c.temperature_k, c.noise_figure_db, c.insertion_loss_db,
                                c.carrier.bandwidth_hz});
  });

  const long long symbols = parse_integer("frame.symbols", v.at("frame.symbols"));
  if (symbols < 3 || symbols > 100000000) config_error("frame.symbols: must be >= 3");
  c.frame.n_symbols = int(symbols);
  c.frame.tx_power_w = parse_double("frame.power", v.at("frame.power"));
  checked("frame", [&] { validate(c.frame); });

  c.ranges = parse_list("sweep.ranges", v.at("sweep.ranges"));
  if (c.ranges.empty()) config_error("sweep.ranges: grid is empty");
  for (const double r : c.ranges) {
    if (!(r > 0.0)) config_error("sweep.ranges: ranges must be positive");
  }
  const long long trials = parse_integer("sweep.trials", v.at("sweep.trials"));
  if (trials < 500 || trials > 100000000) config_error("sweep.trials: must be >= 500");
  c.trials = int(trials);
  const long long seed = parse_integer("sweep.seed", v.at("sweep.seed"));
  if (seed < 0) config_error("sweep.seed: must be non-negative");
  c.seed = std::uint64_t(seed);
  const long long threads = parse_integer("sweep.threads", v.at("sweep.threads"));
  if (threads < 0 || threads > 4096) config_error("sweep.threads: must be in [0, 4096]");
  c.threads = unsigned(threads);
  c.sweep_theta = parse_double("sweep.theta", v.at("sweep.theta"));
  c.sweep_phi = parse_double("sweep.phi", v.at("sweep.phi"));
  checked("sweep direction", [&] {
    validate(LinkGeometry<double>{1.0, c.sweep_theta, c.sweep_phi});
  });
  if (std::abs(std::sin(c.sweep_theta)) < 1e-6) {
    config_error("sweep.theta: Monte Carlo direction must not sit on a pole");
  }

  c.alphas = parse_list("sweep.alphas", v.at("sweep.alphas"));
  if (c.alphas.empty()) config_error("sweep.alphas: grid is empty");
  for (const double a : c.alphas) {
    if (!(a > 0.0 && a < 1.0)) config_error("sweep.alphas: fractions must lie in (0, 1)");
  }
  c.snrs_db = parse_list("sweep.snrs_db", v.at("sweep.snrs_db"), true);
  if (c.snrs_db.empty()) config_error("sweep.snrs_db: grid is empty");

  for (const std::string& item : split(v.at("sweep.geometries"), ';')) {
    if (item.empty()) continue;
    const std::vector<std::string> parts = split(item, ':');
    if (parts.size() != 3) config_error("sweep.geometries: expected r:theta:phi entries");
    const Vector3<double> g(parse_double("sweep.geometries", parts[0]),
                            parse_double("sweep.geometries", parts[1]),
                            parse_double("sweep.geometries", parts[2]));
    checked("sweep.geometries", [&] { validate(LinkGeometry<double>{g(0), g(1), g(2)}); });
    c.geometries.push_back(g);
  }
  return c;
}

analysis::Scenario ResolvedConfig::scenario() const {
  analysis::Scenario s;
  s.coil = coil;
  s.carrier = carrier;
  s.medium = medium;
  s.frame = frame;
  s.temperature_k = temperature_k;
  s.noise_figure_db = noise_figure_db;
  s.insertion_loss_db = insertion_loss_db;
  s.theta_rad = sweep_theta;
  s.phi_rad = sweep_phi;
  s.tx_orientation = geometry.tx_orientation;
  s.rx_orientation = geometry.rx_orientation;
  return s;
}

// ---------------------------------------------------------------------------
// Commands

Table cmd_channel(const ResolvedConfig& config) {
  const ChannelMatrix<double> channel =
      channel_matrix(config.geometry, config.coil, config.carrier, config.medium);
  const Eigenmodes<double> modes = eigenmodes(coupling_tensor(config.geometry.direction()));

  Table table;
  std::vector<Cell> row;
  for (Eigen::Index i = 0; i < channel.rows(); ++i) {
    for (Eigen::Index j = 0; j < channel.cols(); ++j) {
      table.columns.push_back(fmt::format("re_{}{}", i + 1, j + 1));
      table.columns.push_back(fmt::format("im_{}{}", i + 1, j + 1));
      row.push_back(num(channel.entries(i, j).real()));
      row.push_back(num(channel.entries(i, j).imag()));
    }
  }
  const auto add = [&](const char* column, Cell cell) {
    table.columns.emplace_back(column);
    row.push_back(std::move(cell));
  };
  add("coil_constant", num(channel.coil_constant));
  add("frobenius_norm", num(channel.frobenius_norm()));
  add("attenuation_abs", num(std::abs(channel.attenuation)));
  add("attenuation_phase_rad", num(std::arg(channel.attenuation)));
  add("lambda_1", num(modes.eigenvalues(0)));
  add("lambda_2", num(modes.eigenvalues(1)));
  add("lambda_3", num(modes.eigenvalues(2)));
  add("kappa", num_fixed(modes.condition_number, 6));
  table.rows.push_back(std::move(row));

  table.notes.push_back(fmt::format("channel shape: {}x{} (rx axes x tx axes), row-major",
                                    channel.rows(), channel.cols()));
  table.notes.push_back("skin_depth_m = " + number(config.medium.skin_depth(config.carrier)));
  if (channel.outside_dipole_regime) {
    table.notes.push_back("warning: range < 5 coil radii; dipole approximation is marginal");
  }
  return table;
}

Table cmd_crb_curve(const ResolvedConfig& config) {
  analysis::SweepConfig sweep;
  sweep.scenario = config.scenario();
  sweep.ranges = config.ranges;
  sweep.trials = config.trials;
  sweep.threads = config.threads;
  const analysis::MonteCarloSweep result = analysis::run_crb_validation(sweep, config.seed);

  Table table;
  table.columns = {"r_m",           "sqrt_crb_ideal_m",     "sqrt_crb_practical_m",
                   "rmse_mle_ideal_m", "rmse_mle_practical_m", "trials",
                   "nonconverged"};
  for (std::size_t i = 0; i < config.ranges.size(); ++i) {
    const auto& ideal = result.cell(i, analysis::NoiseProfile::Ideal);
    const auto& practical = result.cell(i, analysis::NoiseProfile::Practical);
    table.rows.push_back({num(config.ranges[i]), num(ideal.sqrt_crb_m), num(practical.sqrt_crb_m),
                          num(ideal.rmse_m), num(practical.rmse_m), integer(ideal.trials),
                          integer(ideal.nonconverged + practical.nonconverged)});
  }
  table.notes.push_back("generator: " + result.generator);
  table.notes.push_back("nonconverged counts both noise profiles; excluded from the RMSE");
  return table;
}

Table cmd_fim_rank(const ResolvedConfig& config) {
  if (config.geometries.empty()) config_error("sweep.geometries: geometry list is empty");
  CoilSpec<double> single = config.coil;
  single.axes = AxisKind::SingleAxis;
  CoilSpec<double> tri = config.coil;
  tri.axes = AxisKind::TriAxial;
  const NoiseModel<double> noise{config.temperature_k, 0.0, 0.0, config.carrier.bandwidth_hz};

  Table table;
  table.columns = {"geometry_id", "axes",    "range_m", "theta_rad", "phi_rad",
                   "numeric_rank", "sv_min", "sv_max",  "note"};
  for (std::size_t g = 0; g < config.geometries.size(); ++g) {
    const Vector3<double>& p = config.geometries[g];
    LinkGeometry<double> geometry = config.geometry;
    geometry.range_m = p(0);
    geometry.theta_rad = p(1);
    geometry.phi_rad = p(2);
    for (const auto& [name, coil] : {std::pair{"single", single}, std::pair{"tri", tri}}) {
      const FisherInfo<double> fim =
          fim_numeric(geometry, coil, coil, config.carrier, config.frame, noise, config.medium);
      std::string note;
      if (fim.pole_degenerate) note = "pole: phi unobservable";
      table.rows.push_back({integer(static_cast<long long>(g)), text(name), num(p(0)), num(p(1)), num(p(2)),
                            integer(fim.numeric_rank), num(fim.singular_values(2)),
                            num(fim.singular_values(0)), text(note)});
    }
  }
  table.notes.push_back("rank tolerance: 1e-8 * largest singular value");
  return table;
}

Table cmd_resolution(const ResolvedConfig& config) {
  const analysis::Scenario scenario = config.scenario();
  const std::vector<analysis::ResolutionRecord> records =
      analysis::resolution_sweep(config.ranges, scenario, analysis::kUwbBandwidthHz);
  const double tof_1khz = analysis::tof_resolution(1e3);

  Table table;
  table.columns = {"r_m", "mi_res_m", "tof_1khz_m", "tof_500mhz_m"};
  for (const auto& r : records) {
    table.rows.push_back(
        {num(r.range_m), num(r.mi_resolution_m), num(tof_1khz), num(r.tof_reference_m)});
  }
  table.notes.push_back("crossover_500mhz_m = " + number(records.front().crossover_m));
  try {
    table.notes.push_back("crossover_1khz_m = " +
                          number(analysis::crossover_range(scenario, 1e3)));
  } catch (const Error&) {
    table.notes.push_back("crossover_1khz_m = none (MI finer than 1 kHz ToF over [0.1, 1000] m)");
  }
  table.notes.push_back(
      "crossover is computed from the closed-form bound at these parameters, not fitted");
  return table;
}

Table cmd_isac_gain(const ResolvedConfig& config) {
  Table table;
  table.columns = {"alpha", "snr_db", "time_mux_db", "structural_db", "total_db"};
  int outside = 0;
  for (const double alpha : config.alphas) {
    for (const double snr : config.snrs_db) {
      const analysis::GainRecord g = analysis::isac_gain(alpha, snr, config.coil.axes);
      table.rows.push_back({num(alpha), num(snr), num_fixed(g.time_mux_gain_db, 6),
                            num_fixed(g.structural_gain_db, 6), num_fixed(g.total_gain_db, 6)});
      if (snr >= 20.0 && (g.total_gain_db < 4.0 || g.total_gain_db > 13.0)) ++outside;
    }
  }
  table.notes.push_back(fmt::format("axes: {}; structural term uses D = {}",
                                    config.coil.axes == AxisKind::TriAxial ? "tri" : "single",
                                    analysis::independent_observations(config.coil.axes)));
  table.notes.push_back(
      fmt::format("envelope [4, 13] dB at SNR >= 20 dB: {} row(s) outside", outside));
  return table;
}

// ---------------------------------------------------------------------------
// Rendering

std::string render_csv(const Table& table, const std::string& command,
                       const ExperimentConfig& config) {
  std::string out = fmt::format("# mi_isac {}\n# command: {}\n", kVersion, command);
  for (const auto& [key, value] : config.values()) out += fmt::format("# {} = {}\n", key, value);
  for (const std::string& note : table.notes) out += "# " + note + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out += (i ? "," : "") + table.columns[i];
  }
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i].text;
    out += "\n";
  }
  return out;
}

std::string render_json(const Table& table) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json record = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) record[table.columns[i]] = row[i].json;
    records.push_back(std::move(record));
  }
  return records.dump(2) + "\n";
}

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot open '" + tmp.string() + "' for writing");
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::ConfigError, "failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Entry point

namespace {

struct Command {
  const char* name;
  const char* description;
  Table (*fn)(const ResolvedConfig&);
};

constexpr Command kCommands[] = {
    {"channel", "dump the MI channel matrix, coil constant and tensor eigenvalues", cmd_channel},
    {"crb-curve", "Monte Carlo range RMSE vs sqrt(CRB) over the range grid", cmd_crb_curve},
    {"fim-rank", "numeric FIM rank for single-axis and tri-axial links", cmd_fim_rank},
    {"resolution", "MI coupling-gradient vs ToF ranging resolution", cmd_resolution},
    {"isac-gain", "ISAC sensing gain over a TDMA baseline", cmd_isac_gain},
};

unsigned thread_cap_from_env(unsigned requested) {
  const char* env = std::getenv("MI_ISAC_THREADS");
  if (env == nullptr) return requested;
  char* end = nullptr;
  const long cap = std::strtol(env, &end, 10);
  if (end == env || cap <= 0) return requested;
  return requested == 0 ? unsigned(cap) : std::min(requested, unsigned(cap));
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidParameter:
    case ErrorCode::NonFiniteGeometry:
    case ErrorCode::NonUnitDirection:
    case ErrorCode::NotIdentifiable:
      return kConfigError;
    default:
      return kNumericalFailure;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Magneto-inductive ISAC link analysis"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string output_path;
  bool json = false;
  std::map<std::string, std::string> flag_values;
  std::vector<std::pair<std::string, CLI::Option*>> key_options;

  for (const Command& command : kCommands) {
    CLI::App* sub = app.add_subcommand(command.name, command.description);
    sub->add_option("-c,--config", config_path, "key = value config file");
    sub->add_option("-o,--output", output_path, "output file (default: stdout)");
    sub->add_flag("--json", json, "emit records as a JSON array");
    for (const ConfigKey& k : config_keys()) {
      CLI::Option* opt = sub->add_option(fmt::format("--{},--{}", k.key, k.alias),
                                         flag_values[k.key], k.help);
      key_options.emplace_back(k.key, opt);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigError;
  }

  const Command* selected = nullptr;
  for (const Command& command : kCommands) {
    if (app.got_subcommand(command.name)) selected = &command;
  }

  try {
    ExperimentConfig config;
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& [key, opt] : key_options) {
      if (opt->count() > 0) config.set(key, flag_values[key]);
    }
    ResolvedConfig resolved = config.resolve();
    resolved.threads = thread_cap_from_env(resolved.threads);

    const Table table = selected->fn(resolved);
    const std::string rendered =
        json ? render_json(table) : render_csv(table, selected->name, config);
    if (output_path.empty()) {
      out << rendered;
    } else {
      write_atomically(output_path, rendered);
    }
  } catch (const Error& e) {
    err << "mi_isac: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "mi_isac: " << e.what() << "\n";
    return kNumericalFailure;
  }
  return kSuccess;
}

}  // namespace mi_isac::cli
