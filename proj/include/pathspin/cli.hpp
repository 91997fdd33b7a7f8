// cli.hpp
// Command-line front end: argument/config parsing, command execution and
// deterministic CSV / JSON / markdown report rendering.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathspin/elements.hpp"
#include "pathspin/experiments.hpp"
#include "pathspin/noncontextual.hpp"

namespace pathspin::cli {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { pan_home, de_zela, compare, chsh, hv_check, feasibility };
enum class Format { csv, json, markdown };
enum class StateChoice { pan_home, de_zela, product };

inline const std::map<std::string, Command>& command_names() {
  static const std::map<std::string, Command> m{{"pan-home", Command::pan_home}, {"de-zela", Command::de_zela},
                                                {"compare", Command::compare},   {"chsh", Command::chsh},
                                                {"hv-check", Command::hv_check}, {"feasibility", Command::feasibility}};
  return m;
}

inline const std::map<std::string, Format>& format_names() {
  static const std::map<std::string, Format> m{{"csv", Format::csv}, {"json", Format::json}, {"markdown", Format::markdown}};
  return m;
}

inline const std::map<std::string, StateChoice>& state_names() {
  static const std::map<std::string, StateChoice> m{
      {"pan-home", StateChoice::pan_home}, {"de-zela", StateChoice::de_zela}, {"product", StateChoice::product}};
  return m;
}

struct RunConfig {
  Command command = Command::pan_home;
  std::string command_name = "pan-home";
  SweepGrid grid;  // angles in radians
  std::size_t samples = 1000000;
  std::uint64_t seed = 1;
  std::size_t grid_density = 32;
  StateChoice state = StateChoice::pan_home;
  Format format = Format::csv;
  std::optional<std::string> output_path;
  unsigned threads = 1;
  bool help = false;
  std::string help_text;
};

// ---------------------------------------------------------------------------
// Numbers

/// Shortest round-trip representation (at most 17 significant digits), no
/// locale, negative zero printed as 0.
inline std::string format_real(double v) {
  if (v == 0.0) return "0";
  if (!std::isfinite(v)) throw InvariantViolation("non-finite value in report");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_real(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: " + s);
  return v;
}

// ---------------------------------------------------------------------------
// Report tables

using Cell = std::variant<double, std::int64_t, bool, std::string>;

struct Table {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

inline std::string render(const Table& t, Format f) {
  std::ostringstream os;
  switch (f) {
    case Format::csv: {
      for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
      os << '\n';
      for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
        os << '\n';
      }
      break;
    }
    case Format::markdown: {
      os << '|';
      for (const auto& c : t.columns) os << ' ' << c << " |";
      os << "\n|";
      for (std::size_t i = 0; i < t.columns.size(); ++i) os << "---|";
      os << '\n';
      for (const auto& row : t.rows) {
        os << '|';
        for (const auto& c : row) os << ' ' << cell_text(c) << " |";
        os << '\n';
      }
      break;
    }
    case Format::json: {
      nlohmann::ordered_json doc;
      doc["command"] = t.command;
      doc["columns"] = t.columns;
      auto rows = nlohmann::ordered_json::array();
      for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
          std::visit(
              [&](const auto& v) {
                using V = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<V, double>)
                  obj[t.columns[i]] = v == 0.0 ? 0.0 : v;
                else
                  obj[t.columns[i]] = v;
              },
              row[i]);
        }
        rows.push_back(std::move(obj));
      }
      doc["rows"] = std::move(rows);
      os << doc.dump(2) << '\n';
      break;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

struct RawOptions {
  std::string command;
  std::vector<double> gamma, theta, vartheta;
  std::size_t samples = 1000000;
  std::uint64_t seed = 1;
  std::size_t grid_density = 32;
  std::string state = "pan-home";
  std::string format = "csv";
  std::string out;
  std::string config;
  unsigned threads = 1;
  bool degrees = false;
};

inline std::vector<double> json_reals(const nlohmann::json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_number()) {
    out.push_back(v.get<double>());
  } else if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) throw UsageError("config key '" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
  } else {
    throw UsageError("config key '" + key + "' must be a number or an array of numbers");
  }
  return out;
}

// Fills options not given on the command line from a flat JSON object.
inline void apply_config_file(const std::string& path, CLI::App& app, RawOptions& o) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("--config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("--config: expected a flat JSON object");
  auto unset = [&](const std::string& flag) { return app.get_option(flag)->count() == 0; };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "command") {
        if (o.command.empty()) o.command = value.get<std::string>();
      } else if (key == "gamma") {
        if (unset("--gamma")) o.gamma = json_reals(value, key);
      } else if (key == "theta") {
        if (unset("--theta")) o.theta = json_reals(value, key);
      } else if (key == "vartheta") {
        if (unset("--vartheta")) o.vartheta = json_reals(value, key);
      } else if (key == "samples") {
        if (unset("--samples")) o.samples = value.get<std::size_t>();
      } else if (key == "seed") {
        if (unset("--seed")) o.seed = value.get<std::uint64_t>();
      } else if (key == "grid-density") {
        if (unset("--grid-density")) o.grid_density = value.get<std::size_t>();
      } else if (key == "state") {
        if (unset("--state")) o.state = value.get<std::string>();
      } else if (key == "format") {
        if (unset("--format")) o.format = value.get<std::string>();
      } else if (key == "out") {
        if (unset("--out")) o.out = value.get<std::string>();
      } else if (key == "threads") {
        if (unset("--threads")) o.threads = value.get<unsigned>();
      } else if (key == "degrees") {
        if (unset("--degrees")) o.degrees = value.get<bool>();
      } else {
        throw UsageError("--config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("--config: wrong value type: ") + e.what());
  }
}

}  // namespace detail

inline constexpr const char* kFooter = R"(Commands:
  pan-home     three-stage sweep over --gamma x --theta (default gamma 0,0.5,1/sqrt2,1; theta pi/8)
  de-zela      two-stage sweep over --vartheta x --theta (default vartheta pi/4; theta pi/8)
  compare      two-stage channel means vs mapped three-stage closed forms, --vartheta x --theta
  chsh         maximal CHSH value of --state over a --grid-density grid (default 32)
  hv-check     Bell qubit model vs quantum channel means, --vartheta x --theta, --samples, --seed
  feasibility  noncontextual LP for path settings --gamma and spin settings --theta on --state
               (default gamma 1,1/sqrt2; theta 3pi/8,pi/8)
Angles are radians unless --degrees is given. Exit codes: 0 ok, 1 invariant violation, 2 usage error.)";

/// Parses argv (without the program name). Throws UsageError.
inline RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Path-spin interferometry simulator and noncontextuality analyses", "pathspin"};
  app.footer(kFooter);
  app.set_help_flag();
  detail::RawOptions o;
  bool help = false;
  app.add_flag("-h,--help", help, "Print this help message and exit");
  app.add_option("command", o.command, "pan-home | de-zela | compare | chsh | hv-check | feasibility");
  app.add_option("--gamma", o.gamma, "Beam splitter amplitude gamma in [0,1] (repeatable)");
  app.add_option("--theta", o.theta, "Spin analyzer angle theta (repeatable)");
  app.add_option("--vartheta", o.vartheta, "Input polarization angle vartheta (repeatable)");
  app.add_option("--samples", o.samples, "Monte Carlo samples (default 1000000)");
  app.add_option("--seed", o.seed, "Root RNG seed (default 1)");
  app.add_option("--grid-density", o.grid_density, "CHSH search grid points per axis (default 32, min 8)");
  app.add_option("--state", o.state, "pan-home | de-zela (first --vartheta) | product (|psi1>|up>_z)");
  app.add_option("--format", o.format, "csv | json | markdown (default csv)");
  app.add_option("--out", o.out, "Write the report to PATH instead of stdout");
  app.add_option("--config", o.config, "Flat JSON object of flag values; flags win on conflict");
  app.add_option("--threads", o.threads, "Worker threads for Monte Carlo (results do not depend on it)");
  app.add_flag("--degrees", o.degrees, "Interpret theta/vartheta in degrees");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig cfg;
  if (help) {
    cfg.help = true;
    cfg.help_text = app.help();
    return cfg;
  }
  if (!o.config.empty()) detail::apply_config_file(o.config, app, o);

  if (o.command.empty()) throw UsageError("missing command (see --help)");
  const auto cmd = command_names().find(o.command);
  if (cmd == command_names().end()) throw UsageError("unknown command '" + o.command + "'");
  cfg.command = cmd->second;
  cfg.command_name = o.command;

  const auto fmt = format_names().find(o.format);
  if (fmt == format_names().end()) throw UsageError("--format: expected csv, json or markdown, got '" + o.format + "'");
  cfg.format = fmt->second;
  const auto st = state_names().find(o.state);
  if (st == state_names().end()) throw UsageError("--state: unknown state '" + o.state + "'");
  cfg.state = st->second;

  const double angle_unit = o.degrees ? std::numbers::pi / 180.0 : 1.0;
  for (double g : o.gamma) {
    if (!std::isfinite(g) || g < 0.0 || g > 1.0) throw UsageError("--gamma: value " + format_real(g) + " outside [0,1]");
  }
  for (const auto* list : {&o.theta, &o.vartheta})
    for (double a : *list)
      if (!std::isfinite(a)) throw UsageError("--theta/--vartheta: non-finite angle");

  const double r2 = std::numbers::sqrt2 / 2.0;
  const double pi = std::numbers::pi;
  cfg.grid.gamma_values = o.gamma;
  for (double t : o.theta) cfg.grid.theta_values.push_back(t * angle_unit);
  for (double v : o.vartheta) cfg.grid.vartheta_values.push_back(v * angle_unit);
  if (cfg.grid.gamma_values.empty())
    cfg.grid.gamma_values = cfg.command == Command::feasibility ? std::vector<double>{1.0, r2}
                                                                 : std::vector<double>{0.0, 0.5, r2, 1.0};
  if (cfg.grid.theta_values.empty())
    cfg.grid.theta_values = cfg.command == Command::feasibility ? std::vector<double>{3.0 * pi / 8.0, pi / 8.0}
                                                                 : std::vector<double>{pi / 8.0};
  if (cfg.grid.vartheta_values.empty()) cfg.grid.vartheta_values = {pi / 4.0};

  if (o.samples == 0) throw UsageError("--samples must be at least 1");
  if (cfg.command == Command::hv_check && o.samples < 10000) throw UsageError("--samples must be at least 10000 for hv-check");
  if (o.grid_density < 8) throw UsageError("--grid-density must be at least 8");
  if (cfg.command == Command::feasibility && cfg.grid.gamma_values.size() + cfg.grid.theta_values.size() > kMaxSettings)
    throw UsageError("--gamma/--theta: at most 20 settings in total for feasibility");
  cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.grid_density = o.grid_density;
  cfg.threads = std::max(1u, o.threads);
  if (!o.out.empty()) cfg.output_path = o.out;
  return cfg;
}

// ---------------------------------------------------------------------------
// Execution

namespace detail {

inline void require(bool ok, const std::string& invariant) {
  if (!ok) throw InvariantViolation("invariant violated: " + invariant);
}

inline PathSpinState chosen_state(const RunConfig& c) {
  switch (c.state) {
    case StateChoice::pan_home: return prepare_pan_home();
    case StateChoice::de_zela: return prepare_de_zela(ThetaPolarization(c.grid.vartheta_values.front()));
    case StateChoice::product: return PathSpinState::basis(0);
  }
  return prepare_pan_home();
}

inline Cell optional_cell(const std::optional<double>& v) {
  if (v) return *v;
  return std::string("undefined");
}

inline Table sweep_table(const RunConfig& c, Pipeline pipeline) {
  Table t;
  t.command = c.command_name;
  if (pipeline == Pipeline::de_zela) t.columns.push_back("vartheta");
  for (const char* col : {"gamma", "delta", "theta", "p3", "p4", "cond_mean_sg1", "cond_mean_sg2", "weighted_mean_sg1",
                          "weighted_mean_sg2", "total_expectation", "correlator"})
    t.columns.emplace_back(col);
  for (const SweepRow& row : sweep(c.grid, pipeline)) {
    const auto& r = row.report;
    const std::string bad = r.violated_invariant();
    require(bad.empty(), bad);
    require(std::abs(row.correlator - (r.weighted_mean3 - r.weighted_mean4)) < kExactTol,
            "correlator = weighted_mean_sg1 - weighted_mean_sg2");
    std::vector<Cell> cells;
    if (pipeline == Pipeline::de_zela) cells.emplace_back(*row.vartheta);
    cells.insert(cells.end(), {row.gamma, row.delta, row.theta, r.p3, r.p4, optional_cell(r.cond_mean3),
                               optional_cell(r.cond_mean4), r.weighted_mean3, r.weighted_mean4, r.total_expectation,
                               row.correlator});
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline Table compare_table(const RunConfig& c) {
  Table t;
  t.command = c.command_name;
  t.columns = {"vartheta", "theta", "dz_ch1", "dz_ch2", "ph_sg1_mapped", "ph_sg2_mapped", "residual_ch1", "residual_ch2"};
  for (double vt : c.grid.vartheta_values)
    for (double th : c.grid.theta_values) {
      const DeZelaComparison r = compare_de_zela(ThetaPolarization(vt), SpinSetting(th));
      require(r.residual_ch1 < kExactTol && r.residual_ch2 < kExactTol,
              "two-stage channel means equal mapped closed forms within 1e-12");
      t.rows.push_back({r.vartheta, r.theta, r.dz_ch1, r.dz_ch2, r.ph_sg1_mapped, r.ph_sg2_mapped, r.residual_ch1,
                        r.residual_ch2});
    }
  return t;
}

inline Table chsh_table(const RunConfig& c) {
  Table t;
  t.command = c.command_name;
  t.columns = {"gamma1", "delta1", "gamma2", "delta2", "theta1", "theta2", "chsh_value", "tsirelson_gap"};
  const ChshSearchResult r = chsh_search(chosen_state(c), c.grid_density);
  require(r.value <= 2.0 * std::numbers::sqrt2 + 1e-9, "CHSH value <= 2 sqrt 2");
  const auto p1 = r.path(0);
  const auto p2 = r.path(1);
  t.rows.push_back({p1.gamma(), p1.delta(), p2.gamma(), p2.delta(), r.theta[0], r.theta[1], r.value,
                    2.0 * std::numbers::sqrt2 - r.value});
  return t;
}

inline Table hv_table(const RunConfig& c) {
  Table t;
  t.command = c.command_name;
  t.columns = {"vartheta", "theta", "channel", "quantum_mean", "mc_mean", "abs_error", "tolerance", "pass"};
  for (double vt : c.grid.vartheta_values)
    for (double th : c.grid.theta_values) {
      const SpinSetting s(th);
      for (const auto& ch : reproduce_de_zela_channels(ThetaPolarization(vt), s, c.samples, c.seed, c.threads)) {
        require(std::abs(ch.mc_mean) <= 1.0 && std::abs(ch.quantum_mean) <= 1.0 + kExactTol, "|mean| <= 1");
        t.rows.push_back({vt, s.theta(), static_cast<std::int64_t>(ch.channel), ch.quantum_mean, ch.mc_mean,
                          ch.abs_error, ch.tolerance, ch.pass});
      }
    }
  return t;
}

inline Table feasibility_table(const RunConfig& c) {
  Table t;
  t.command = c.command_name;
  t.columns = {"verdict",       "m",             "n",           "max_residual", "witness_value", "witness_path1",
               "witness_path2", "witness_spin1", "witness_spin2", "phase1_objective", "support_size", "iterations"};
  std::vector<BeamSplitterParams> paths;
  std::vector<SpinSetting> spins;
  for (double g : c.grid.gamma_values) paths.push_back(BeamSplitterParams::from_gamma(g));
  for (double th : c.grid.theta_values) spins.emplace_back(th);
  const FeasibilityResult r = feasibility_lp(paths, spins, chosen_state(c));
  if (r.feasible()) require(r.max_residual < kMomentTol, "feasible weights reproduce every moment within 1e-9");
  std::int64_t support = 0;
  for (double w : r.weights) support += w > 0.0 ? 1 : 0;
  std::vector<Cell> row{std::string(to_string(r.verdict)), static_cast<std::int64_t>(paths.size()),
                        static_cast<std::int64_t>(spins.size()), r.max_residual};
  if (r.witness) {
    row.insert(row.end(), {r.witness->value, static_cast<std::int64_t>(r.witness->path1 + 1),
                           static_cast<std::int64_t>(r.witness->path2 + 1),
                           static_cast<std::int64_t>(r.witness->spin1 + 1),
                           static_cast<std::int64_t>(r.witness->spin2 + 1)});
  } else {
    for (int i = 0; i < 5; ++i) row.emplace_back(std::string("none"));
  }
  row.insert(row.end(), {r.phase1_objective, support, static_cast<std::int64_t>(r.iterations)});
  t.rows.push_back(std::move(row));
  return t;
}

}  // namespace detail

inline Table build_report(const RunConfig& c) {
  switch (c.command) {
    case Command::pan_home: return detail::sweep_table(c, Pipeline::pan_home);
    case Command::de_zela: return detail::sweep_table(c, Pipeline::de_zela);
    case Command::compare: return detail::compare_table(c);
    case Command::chsh: return detail::chsh_table(c);
    case Command::hv_check: return detail::hv_table(c);
    case Command::feasibility: return detail::feasibility_table(c);
  }
  throw UsageError("unknown command");
}

/// Runs a parsed config. Returns the process exit code.
inline int execute(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.help) {
    out << c.help_text;
    return 0;
  }
  std::string report;
  try {
    report = render(build_report(c), c.format);
  } catch (const InvariantViolation& e) {
    err << "pathspin: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "pathspin: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "pathspin: internal error: " << e.what() << '\n';
    return 1;
  }
  if (c.output_path) {
    std::ofstream f(*c.output_path, std::ios::binary);
    if (!f) {
      err << "pathspin: cannot write '" << *c.output_path << "'\n";
      return 2;
    }
    f << report;
  } else {
    out << report;
  }
  return 0;
}

/// parse_config + execute with usage errors mapped to exit code 2.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const UsageError& e) {
    err << "pathspin: usage error: " << e.what() << '\n';
    return 2;
  }
  return execute(cfg, out, err);
}

}  // namespace pathspin::cli
