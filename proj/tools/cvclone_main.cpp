// Command-line front end: exact machine runs, Monte Carlo campaigns,
// benchmark tables, published-run reproduction, and parameter sweeps.
#include <CLI11.hpp>

#include "cvclone/experiment.hpp"
#include "cvclone/report_io.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using cvclone::CloningConfig;
using cvclone::ExperimentPlan;
using nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

// Everything a subcommand may need; which flags are registered varies.
struct FlagSet {
  int n = 1;
  int m = 2;
  double t = 0.0;
  double g1 = 0.0;
  double g2x = 0.0;
  double g2p = 0.0;
  double eta = 1.0;
  double electronic_noise = 0.0;
  double epr_r = 0.0;
  double alphabet_variance = 0.0;
  long shots = 100000;
  std::uint64_t seed = 1;
  std::string format = "table";
  std::string out;
  std::string config_path;
  bool dump_states = false;
  std::vector<double> verification_efficiencies;  // config file only
  unsigned threads = 0;                           // config file only

  bool has_t = false;
  bool has_g1 = false;
  bool has_g2x = false;
  bool has_g2p = false;
  bool has_epr_r = false;
  bool has_alphabet = false;
  bool has_m = false;
  bool seed_fixed = false;  // by flag or config file
};

bool flag_given(const CLI::App& cmd, const std::string& name) {
  try {
    return cmd.count(name) > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;  // not registered on this subcommand
  }
}

void add_machine_flags(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--n", f.n, "input copies per group");
  cmd->add_option("--m", f.m, "clones to produce");
  cmd->add_option("--t", f.t, "amplifier transmission (default: optimal)");
  cmd->add_option("--g1", f.g1, "feedforward gain override");
  cmd->add_option("--g2x", f.g2x, "anticlone x feedforward gain override");
  cmd->add_option("--g2p", f.g2p, "anticlone p feedforward gain override");
  cmd->add_option("--eta", f.eta, "feedforward detector efficiency");
  cmd->add_option("--electronic-noise", f.electronic_noise,
                  "detector electronic noise (shot-noise units)");
  cmd->add_option("--epr-r", f.epr_r,
                  "ancilla squeezing; enables the unitary extension");
}

void add_output_flags(CLI::App* cmd, FlagSet& f) {
  cmd->add_option("--format", f.format, "output format: table, json or csv");
  cmd->add_option("--out", f.out, "write output to this file");
  cmd->add_option("--config", f.config_path,
                  "JSON file with defaults (flags take precedence)");
}

// Flat JSON config: same names as the flags. Flags win; unknown keys are
// rejected so typos fail fast.
void merge_config_file(const CLI::App& cmd, FlagSet& f) {
  if (f.config_path.empty()) return;
  std::ifstream in(f.config_path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + f.config_path);
  }
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config file is not valid JSON: ") +
                                e.what());
  }
  if (!j.is_object()) {
    throw std::invalid_argument("config file must hold a JSON object");
  }
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n") {
        if (!flag_given(cmd, "--n")) f.n = value.get<int>();
      } else if (key == "m") {
        if (!flag_given(cmd, "--m")) f.m = value.get<int>();
        f.has_m = true;
      } else if (key == "t") {
        if (!flag_given(cmd, "--t")) {
          f.t = value.get<double>();
          f.has_t = true;
        }
      } else if (key == "g1") {
        if (!flag_given(cmd, "--g1")) {
          f.g1 = value.get<double>();
          f.has_g1 = true;
        }
      } else if (key == "g2x") {
        if (!flag_given(cmd, "--g2x")) {
          f.g2x = value.get<double>();
          f.has_g2x = true;
        }
      } else if (key == "g2p") {
        if (!flag_given(cmd, "--g2p")) {
          f.g2p = value.get<double>();
          f.has_g2p = true;
        }
      } else if (key == "eta") {
        if (!flag_given(cmd, "--eta")) f.eta = value.get<double>();
      } else if (key == "electronic_noise") {
        if (!flag_given(cmd, "--electronic-noise")) {
          f.electronic_noise = value.get<double>();
        }
      } else if (key == "epr_r") {
        if (!flag_given(cmd, "--epr-r")) {
          f.epr_r = value.get<double>();
          f.has_epr_r = true;
        }
      } else if (key == "shots") {
        if (!flag_given(cmd, "--shots")) f.shots = value.get<long>();
      } else if (key == "seed") {
        if (!flag_given(cmd, "--seed")) {
          f.seed = value.get<std::uint64_t>();
          f.seed_fixed = true;
        }
      } else if (key == "alphabet_variance") {
        if (!flag_given(cmd, "--alphabet-variance")) {
          f.alphabet_variance = value.get<double>();
          f.has_alphabet = true;
        }
      } else if (key == "format") {
        if (!flag_given(cmd, "--format")) f.format = value.get<std::string>();
      } else if (key == "out") {
        if (!flag_given(cmd, "--out")) f.out = value.get<std::string>();
      } else if (key == "verification_efficiencies") {
        f.verification_efficiencies = value.get<std::vector<double>>();
      } else if (key == "threads") {
        f.threads = value.get<unsigned>();
      } else {
        throw std::invalid_argument("unknown config key: " + key);
      }
    }
  } catch (const ordered_json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
}

// Seed precedence: --seed flag, config file, CVCLONE_SEED, built-in default.
void resolve_seed(const CLI::App& cmd, FlagSet& f) {
  if (flag_given(cmd, "--seed") || f.seed_fixed) return;
  const char* env = std::getenv("CVCLONE_SEED");
  if (env == nullptr || *env == '\0') return;
  std::uint64_t value = 0;
  const char* end = env + std::string_view(env).size();
  const auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument(
        "CVCLONE_SEED must be an unsigned integer, got: " + std::string(env));
  }
  f.seed = value;
}

void finalize(const CLI::App& cmd, FlagSet& f) {
  f.has_t = f.has_t || flag_given(cmd, "--t");
  f.has_g1 = f.has_g1 || flag_given(cmd, "--g1");
  f.has_g2x = f.has_g2x || flag_given(cmd, "--g2x");
  f.has_g2p = f.has_g2p || flag_given(cmd, "--g2p");
  f.has_epr_r = f.has_epr_r || flag_given(cmd, "--epr-r");
  f.has_alphabet = f.has_alphabet || flag_given(cmd, "--alphabet-variance");
  f.has_m = f.has_m || flag_given(cmd, "--m");
  f.seed_fixed = f.seed_fixed || flag_given(cmd, "--seed");
  merge_config_file(cmd, f);
  resolve_seed(cmd, f);
  if (f.format != "table" && f.format != "json" && f.format != "csv") {
    throw std::invalid_argument("format must be table, json or csv, got: " +
                                f.format);
  }
}

CloningConfig make_config(const FlagSet& f) {
  CloningConfig config;
  config.n = f.n;
  config.m = f.m;
  if (f.has_t) config.transmission = f.t;
  if (f.has_g1) config.gains.g1 = f.g1;
  if (f.has_g2x) config.gains.g2x = f.g2x;
  if (f.has_g2p) config.gains.g2p = f.g2p;
  config.detector.efficiency = f.eta;
  config.detector.electronic_noise = f.electronic_noise;
  if (f.has_epr_r) config.epr_r = f.epr_r;
  return config;
}

ExperimentPlan make_plan(const FlagSet& f) {
  ExperimentPlan plan;
  plan.config = make_config(f);
  plan.shots = f.shots;
  plan.seed = f.seed;
  plan.verification_efficiencies = f.verification_efficiencies;
  plan.threads = f.threads;
  return plan;
}

void emit(const std::string& text, const std::string& out_path) {
  const bool needs_newline = text.empty() || text.back() != '\n';
  if (out_path.empty()) {
    std::cout << text;
    if (needs_newline) std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open output file: " + out_path);
  }
  out << text;
  if (needs_newline) out << '\n';
  if (!out) {
    throw std::invalid_argument("failed writing output file: " + out_path);
  }
}

std::string json_text(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---- subcommands ----------------------------------------------------------

int cmd_limits(const FlagSet& f) {
  const int m_max = f.has_m ? f.m : 8;  // here --m is the largest clone number
  const std::vector<cvclone::LimitsRow> rows =
      cvclone::fidelity_gap_sweep(f.n, m_max);
  if (f.format == "json") {
    emit(json_text(cvclone::limits_to_json(rows, f.n)), f.out);
  } else if (f.format == "csv") {
    emit(cvclone::limits_to_csv(rows), f.out);
  } else {
    emit(cvclone::limits_to_table(rows, f.n), f.out);
  }
  return 0;
}

std::string format_alphabet_line(double variance,
                                 const std::vector<double>& values) {
  std::ostringstream out;
  out << "alphabet fidelity (variance=" << cvclone::detail::format_double(variance)
      << "):";
  for (double v : values) out << ' ' << cvclone::detail::format_fixed(v, 3);
  out << '\n';
  return out.str();
}

int cmd_run(const FlagSet& f) {
  const CloningConfig config = make_config(f);
  config.validate();
  const cvclone::MachineOutput output = config.epr_r
                                            ? cvclone::run_machine_unitary(config)
                                            : cvclone::run_machine_exact(config);
  std::vector<double> alphabet;
  if (f.has_alphabet) {
    alphabet =
        cvclone::alphabet_average_fidelities(output.report, f.alphabet_variance);
  }
  if (f.format == "json") {
    ordered_json j = cvclone::report_to_json(output.report);
    if (f.has_alphabet) {
      j["alphabet"] = ordered_json{{"variance", f.alphabet_variance},
                                   {"fidelities", alphabet}};
    }
    if (f.dump_states) {
      j["clone_states"] = ordered_json::array();
      for (const auto& state : output.clone_states) {
        j["clone_states"].push_back(cvclone::state_to_json(state));
      }
      if (!output.anticlone_states.empty()) {
        j["anticlone_states"] = ordered_json::array();
        for (const auto& state : output.anticlone_states) {
          j["anticlone_states"].push_back(cvclone::state_to_json(state));
        }
      }
    }
    emit(json_text(j), f.out);
  } else if (f.format == "csv") {
    emit(cvclone::report_to_csv(output.report), f.out);
  } else {
    std::string text = cvclone::report_to_table(output.report);
    if (f.has_alphabet) {
      text += format_alphabet_line(f.alphabet_variance, alphabet);
    }
    emit(text, f.out);
  }
  return 0;
}

int cmd_montecarlo(const FlagSet& f) {
  const ExperimentPlan plan = make_plan(f);
  plan.validate();
  const cvclone::ExperimentResult result = cvclone::run_full_experiment(plan);
  std::vector<double> alphabet;
  if (f.has_alphabet) {
    alphabet =
        cvclone::alphabet_average_fidelities(result.report, f.alphabet_variance);
  }
  if (f.format == "json") {
    ordered_json j;
    j["report"] = cvclone::report_to_json(result.report);
    j["record"] = cvclone::record_to_json(result.record, false);
    if (f.has_alphabet) {
      j["alphabet"] = ordered_json{{"variance", f.alphabet_variance},
                                   {"fidelities", alphabet}};
    }
    emit(json_text(j), f.out);
  } else if (f.format == "csv") {
    emit(cvclone::record_to_csv(result.record), f.out);
  } else {
    std::ostringstream text;
    text << cvclone::report_to_table(result.report);
    text << "shots=" << result.record.shots << " seed=" << result.record.seed
         << '\n';
    if (f.has_alphabet) {
      text << format_alphabet_line(f.alphabet_variance, alphabet);
    }
    emit(text.str(), f.out);
  }
  return 0;
}

int cmd_experiment(const FlagSet& f, const std::string& id) {
  cvclone::PublishedRunReport rep = cvclone::reproduce_published_run(id);
  const double variance =
      f.has_alphabet ? f.alphabet_variance : rep.data.alphabet_variance;
  if (f.has_alphabet) {
    rep.alphabet_fidelities =
        cvclone::alphabet_average_fidelities(rep.report, variance);
  }
  if (f.format == "json") {
    ordered_json j;
    j["id"] = id;
    j["report"] = cvclone::report_to_json(rep.report);
    j["alphabet"] = ordered_json{{"variance", variance},
                                 {"fidelities", rep.alphabet_fidelities}};
    j["quoted"] =
        ordered_json{{"fidelities", rep.data.quoted_fidelities},
                     {"alphabet_fidelities", rep.data.quoted_alphabet_fidelities},
                     {"fidelity_uncertainty", rep.data.quoted_fidelity_uncertainty},
                     {"verification_efficiencies",
                      rep.data.verification_efficiencies}};
    emit(json_text(j), f.out);
  } else if (f.format == "csv") {
    emit(cvclone::report_to_csv(rep.report), f.out);
  } else {
    std::ostringstream text;
    text << "run " << id << '\n' << cvclone::report_to_table(rep.report);
    text << "quoted fidelity:";
    for (double v : rep.data.quoted_fidelities) {
      text << ' ' << cvclone::detail::format_fixed(v, 3);
    }
    text << "  (within " << cvclone::detail::format_fixed(
                                 rep.data.quoted_fidelity_uncertainty, 3)
         << ")\n";
    text << format_alphabet_line(variance, rep.alphabet_fidelities);
    text << "quoted alphabet: ";
    for (double v : rep.data.quoted_alphabet_fidelities) {
      text << ' ' << cvclone::detail::format_fixed(v, 2);
    }
    text << '\n';
    emit(text.str(), f.out);
  }
  return 0;
}

struct SweepRow {
  double value = 0.0;
  cvclone::CloneStats clone;
};

int cmd_sweep(const FlagSet& f, const std::string& param, double from,
              double to, int steps) {
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (param != "t" && param != "eta" && param != "electronic-noise" &&
      param != "epr-r") {
    throw std::invalid_argument(
        "param must be one of: t, eta, electronic-noise, epr-r");
  }
  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double value =
        steps == 1 ? from : from + (to - from) * double(i) / double(steps - 1);
    FlagSet point = f;
    if (param == "t") {
      point.t = value;
      point.has_t = true;
    } else if (param == "eta") {
      point.eta = value;
    } else if (param == "electronic-noise") {
      point.electronic_noise = value;
    } else {
      point.epr_r = value;
      point.has_epr_r = true;
    }
    CloningConfig config = make_config(point);
    // Sweeping t off the optimum changes the output gain; hold the clones at
    // unity gain so variance (and the fidelity derived from it) stays the
    // figure of merit.
    if (param == "t" && !point.has_g1) {
      config.gains.g1 = cvclone::unity_gain_g1(config.n, config.m, value);
    }
    config.validate();
    const cvclone::MachineOutput output =
        config.epr_r ? cvclone::run_machine_unitary(config)
                     : cvclone::run_machine_exact(config);
    rows.push_back(SweepRow{value, output.report.clones.at(0)});
  }

  if (f.format == "json") {
    ordered_json j;
    j["param"] = param;
    j["n"] = f.n;
    j["m"] = f.m;
    j["rows"] = ordered_json::array();
    for (const SweepRow& row : rows) {
      ordered_json entry;
      entry["value"] = row.value;
      entry.update(cvclone::clone_stats_to_json(row.clone));
      j["rows"].push_back(entry);
    }
    emit(json_text(j), f.out);
  } else if (f.format == "csv") {
    std::ostringstream out;
    out << param << ",gx,gp,var_x,var_p,db_x,db_p,fidelity\n";
    for (const SweepRow& row : rows) {
      const cvclone::CloneStats& c = row.clone;
      out << cvclone::detail::format_double(row.value) << ','
          << cvclone::detail::format_double(c.gx) << ','
          << cvclone::detail::format_double(c.gp) << ','
          << cvclone::detail::format_double(c.var_x) << ','
          << cvclone::detail::format_double(c.var_p) << ','
          << cvclone::detail::format_double(c.db_x) << ','
          << cvclone::detail::format_double(c.db_p) << ','
          << cvclone::detail::format_double(c.fidelity) << '\n';
    }
    emit(out.str(), f.out);
  } else {
    std::ostringstream out;
    out << "sweep " << param << " n=" << f.n << " m=" << f.m << '\n';
    out << "  " << param << "     gx     gp  var_x  var_p  fidelity\n";
    for (const SweepRow& row : rows) {
      const cvclone::CloneStats& c = row.clone;
      out << "  " << cvclone::detail::format_fixed(row.value, 4) << "  "
          << cvclone::detail::format_fixed(c.gx, 3) << "  "
          << cvclone::detail::format_fixed(c.gp, 3) << "  "
          << cvclone::detail::format_fixed(c.var_x, 3) << "  "
          << cvclone::detail::format_fixed(c.var_p, 3) << "     "
          << cvclone::detail::format_fixed(c.fidelity, 3) << '\n';
    }
    emit(out.str(), f.out);
  }
  return 0;
}

int report_error(const char* type, const std::string& message, int code) {
  ordered_json j;
  j["error"] = ordered_json{{"type", type}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear-optics cloning machine for phase-conjugate inputs"};
  app.require_subcommand(1);

  FlagSet flags;
  std::string experiment_id;
  std::string sweep_param = "t";
  double sweep_from = 0.0;
  double sweep_to = 1.0;
  int sweep_steps = 2;

  CLI::App* limits = app.add_subcommand(
      "limits", "fidelity bounds and optimal settings for m = 1..M");
  limits->add_option("--n", flags.n, "input copies per group");
  limits->add_option("--m", flags.m, "largest clone number (default 8)");
  add_output_flags(limits, flags);

  CLI::App* run =
      app.add_subcommand("run", "exact covariance run of the machine");
  add_machine_flags(run, flags);
  run->add_option("--alphabet-variance", flags.alphabet_variance,
                  "also report fidelity averaged over a Gaussian alphabet");
  run->add_flag("--dump-states", flags.dump_states,
                "include output-state dumps in JSON output");
  add_output_flags(run, flags);

  CLI::App* montecarlo = app.add_subcommand(
      "montecarlo", "sampled emulation: calibration plus noise campaign");
  add_machine_flags(montecarlo, flags);
  montecarlo->add_option("--shots", flags.shots, "samples per quadrature");
  montecarlo->add_option("--seed", flags.seed, "RNG seed");
  montecarlo->add_option("--alphabet-variance", flags.alphabet_variance,
                         "also report alphabet-averaged fidelity");
  add_output_flags(montecarlo, flags);

  CLI::App* experiment = app.add_subcommand(
      "experiment", "reproduce an embedded published run (two_clones, three_clones)");
  experiment->add_option("id", experiment_id, "published run id")->required();
  experiment->add_option("--alphabet-variance", flags.alphabet_variance,
                         "recompute alphabet averages at this variance");
  add_output_flags(experiment, flags);

  CLI::App* sweep =
      app.add_subcommand("sweep", "exact pipeline over a parameter grid");
  add_machine_flags(sweep, flags);
  sweep->add_option("--param", sweep_param,
                    "swept parameter: t, eta, electronic-noise, epr-r");
  sweep->add_option("--from", sweep_from, "first value")->required();
  sweep->add_option("--to", sweep_to, "last value")->required();
  sweep->add_option("--steps", sweep_steps, "grid points");
  add_output_flags(sweep, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  }

  try {
    CLI::App* cmd = app.get_subcommands().front();
    finalize(*cmd, flags);
    if (cmd == limits) return cmd_limits(flags);
    if (cmd == run) return cmd_run(flags);
    if (cmd == montecarlo) return cmd_montecarlo(flags);
    if (cmd == experiment) return cmd_experiment(flags, experiment_id);
    return cmd_sweep(flags, sweep_param, sweep_from, sweep_to, sweep_steps);
  } catch (const std::invalid_argument& e) {
    return report_error("usage", e.what(), kExitUsage);
  } catch (const cvclone::NumericalError& e) {
    return report_error("numerical", e.what(), kExitNumerical);
  } catch (const std::exception& e) {
    return report_error("numerical", e.what(), kExitNumerical);
  }
}
