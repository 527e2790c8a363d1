#include "polalign/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "polalign/experiments.hpp"
#include "polalign/oracles.hpp"
#include "polalign/version.hpp"

namespace polalign {

namespace {

constexpr std::uint64_t kCliTargetStream = 1001;
constexpr double kPi = 3.14159265358979323846;

// Mean great-circle displacement of the random walk after one hour equals
// the configured rate (Rayleigh mean / RMS for a 2D tangent walk).
constexpr double kWalkMeanToRms = 0.8862269254527580;  // sqrt(pi)/2

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string fmt_grid(const std::vector<double>& grid) {
  std::string s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) s += " ";
    s += fmt(grid[i]);
  }
  return s;
}

StokesVector resolve_target(const RunConfig& config) {
  if (config.target == "plus-s1") return {1.0, 0.0, 0.0};
  if (config.target == "minus-s1") return {-1.0, 0.0, 0.0};
  if (config.target == "plus-s2") return {0.0, 1.0, 0.0};
  if (config.target == "minus-s2") return {0.0, -1.0, 0.0};
  if (config.target == "plus-s3") return {0.0, 0.0, 1.0};
  if (config.target == "minus-s3") return {0.0, 0.0, -1.0};
  RandomSource rng(derive_seed(config.seed, kCliTargetStream));
  return sample_uniform_basis(rng);
}

DriftModel resolve_drift(const RunConfig& config) {
  if (config.drift == "static") return StaticDrift{};
  if (config.drift == "walk") {
    RandomWalkDrift walk;
    walk.step_scale_deg_per_sqrt_hour =
        config.drift_rate_deg_per_hour / kWalkMeanToRms;
    walk.step_seconds = config.T;
    return walk;
  }
  SawtoothGreatCircleDrift saw;
  saw.actuator = ActuatorSpec::four_stage(config.vpi);
  saw.axis_setup_v = Eigen::Vector3d(0.0, config.vpi / 2.0, config.vpi / 2.0);
  saw.rate_deg_per_hour = config.drift_rate_deg_per_hour;
  saw.amplitude_v = config.vpi;
  return saw;
}

AlignmentScenario scenario_from(const RunConfig& config) {
  AlignmentScenario s = AlignmentScenario::make_default(config.vpi);
  s.state.gamma = config.gamma;
  s.model.pair_rate = config.rp;
  s.model.accidental_rate = config.ra;
  s.model.integration_s = config.T;
  s.model.singles_rate_a = config.singles_a;
  s.model.singles_rate_b = config.singles_b;
  s.seed = config.seed;
  s.evaluations = config.evals;
  s.zero_noise = config.zero_noise;
  if (config.initial_scale > 0.0) s.optimizer.initial_scale = config.initial_scale;
  return s;
}

/// Output sink with removal of partial files on failure. "-" writes stdout.
class OutputFile {
 public:
  explicit OutputFile(const std::string& path) : path_(path), to_stdout_(path == "-") {
    if (!to_stdout_) {
      file_.open(path_, std::ios::binary | std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot open output file: " + path_);
    }
  }

  ~OutputFile() {
    if (!to_stdout_ && !committed_) {
      file_.close();
      std::remove(path_.c_str());
    }
  }

  std::ostream& stream() { return to_stdout_ ? std::cout : file_; }

  void commit() {
    stream().flush();
    if (!stream()) throw std::runtime_error("write failed: " + path_);
    committed_ = true;
  }

 private:
  std::string path_;
  bool to_stdout_ = false;
  bool committed_ = false;
  std::ofstream file_;
};

/// Resolved-config key/value pairs, fixed order, echoed into every output.
std::vector<std::pair<std::string, std::string>> header_entries(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("version", kVersion);
  kv.emplace_back("command", c.command);
  kv.emplace_back("rp", fmt(c.rp));
  kv.emplace_back("ra", fmt(c.ra));
  kv.emplace_back("T", fmt(c.T));
  kv.emplace_back("gamma", fmt(c.gamma));
  kv.emplace_back("vpi", fmt(c.vpi));
  kv.emplace_back("singles-a", fmt(c.singles_a));
  kv.emplace_back("singles-b", fmt(c.singles_b));
  kv.emplace_back("seed", std::to_string(c.seed));
  kv.emplace_back("target", c.target);
  kv.emplace_back("drift", c.drift);
  kv.emplace_back("drift-rate-deg-per-hour", fmt(c.drift_rate_deg_per_hour));
  kv.emplace_back("evals", std::to_string(c.evals));
  kv.emplace_back("workers", std::to_string(c.workers));
  kv.emplace_back("format", c.format);
  kv.emplace_back("zero-noise", c.zero_noise ? "true" : "false");
  kv.emplace_back("initial-scale",
                  fmt(c.initial_scale > 0.0 ? c.initial_scale : 0.3 * c.vpi));
  kv.emplace_back("t-grid", fmt_grid(c.t_grid));
  kv.emplace_back("rpt-grid", fmt_grid(c.rpt_grid));
  kv.emplace_back("rat-grid", fmt_grid(c.rat_grid));
  kv.emplace_back("targets-per-point", std::to_string(c.targets_per_point));
  kv.emplace_back("repeats-per-target", std::to_string(c.repeats_per_target));
  return kv;
}

void write_header(std::ostream& os, const RunConfig& c, bool jsonl) {
  const auto kv = header_entries(c);
  if (jsonl) {
    nlohmann::json header;
    for (const auto& [key, value] : kv) header[key] = value;
    os << nlohmann::json{{"header", header}}.dump() << "\n";
  } else {
    for (const auto& [key, value] : kv) os << "# " << key << " = " << value << "\n";
  }
}

void write_trace(std::ostream& os, const RunTrace& trace, bool jsonl) {
  constexpr double kRadToDeg = 180.0 / kPi;
  if (!jsonl) {
    os << "eval_index,sim_time_s,v1,v2,v3,c_hh,c_hv,singles_a,singles_b,"
          "theta_ab_deg\n";
  }
  for (const auto& r : trace.records) {
    if (jsonl) {
      nlohmann::json row{{"eval_index", r.index},
                         {"sim_time_s", r.time_s},
                         {"v1", r.voltages(0)},
                         {"v2", r.voltages(1)},
                         {"v3", r.voltages(2)},
                         {"c_hh", r.c_hh},
                         {"c_hv", r.c_hv},
                         {"singles_a", r.singles_a},
                         {"singles_b", r.singles_b},
                         {"theta_ab_deg", r.theta_ab_rad * kRadToDeg}};
      os << row.dump() << "\n";
    } else {
      os << r.index << "," << fmt(r.time_s) << "," << fmt(r.voltages(0)) << ","
         << fmt(r.voltages(1)) << "," << fmt(r.voltages(2)) << "," << fmt(r.c_hh)
         << "," << fmt(r.c_hv) << "," << fmt(r.singles_a) << "," << fmt(r.singles_b)
         << "," << fmt(r.theta_ab_rad * kRadToDeg) << "\n";
    }
  }
}

void write_sweep(std::ostream& os, const SweepResult& sweep, bool rate_grid,
                 bool jsonl) {
  constexpr double kRadToDeg = 180.0 / kPi;
  if (!jsonl) {
    os << (rate_grid ? "rp_T,ra_T,car,mean_theta_error_deg,stddev_theta_error_deg,"
                       "n_runs\n"
                     : "T_s,mean_theta_error_deg,stddev_theta_error_deg,n_runs\n");
  }
  for (const auto& p : sweep.points) {
    if (jsonl) {
      nlohmann::json row;
      if (rate_grid) {
        row["rp_T"] = p.coord1;
        row["ra_T"] = p.coord2;
        row["car"] = p.car;
      } else {
        row["T_s"] = p.coord1;
      }
      row["mean_theta_error_deg"] = p.mean_theta_error_rad * kRadToDeg;
      row["stddev_theta_error_deg"] = p.stddev_theta_error_rad * kRadToDeg;
      row["n_runs"] = p.runs;
      os << row.dump() << "\n";
    } else {
      if (rate_grid)
        os << fmt(p.coord1) << "," << fmt(p.coord2) << "," << fmt(p.car) << ",";
      else
        os << fmt(p.coord1) << ",";
      os << fmt(p.mean_theta_error_rad * kRadToDeg) << ","
         << fmt(p.stddev_theta_error_rad * kRadToDeg) << "," << p.runs << "\n";
    }
  }
}

int run_oracle_check(const RunConfig& config, std::ostream& os) {
  bool all_passed = true;
  auto report = [&](const std::vector<OracleCheck>& checks) {
    for (const auto& check : checks) {
      all_passed = all_passed && check.passed;
      os << (check.passed ? "[PASS] " : "[FAIL] ") << check.name
         << " (max error " << fmt(check.max_error) << ", tolerance "
         << fmt(check.tolerance) << ")\n";
    }
  };
  report(run_identity_suite(10000, config.seed));
  report(run_coincidence_suite(2000, derive_seed(config.seed, 1)));
  return all_passed ? 0 : 2;
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig config;
  CLI::App app{"Non-local polarization alignment and tracking simulator"};
  app.set_config("--config", "", "Read options from a flat key=value file");
  app.allow_config_extras(false);

  app.add_option("command", config.command,
                 "One of: align, track, sweep-t, sweep-grid, oracle-check")
      ->required()
      ->check(CLI::IsMember(
          {"align", "track", "sweep-t", "sweep-grid", "oracle-check"}));

  app.add_option("--rp", config.rp, "Pair-detection rate scale, pairs/s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--ra", config.ra, "Accidental coincidence rate, pairs/s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--T", config.T, "Integration period, seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--gamma", config.gamma, "Indistinguishability weight")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--vpi", config.vpi, "Half-wave voltage per stage, volts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--singles-a", config.singles_a, "Alice singles rate, counts/s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--singles-b", config.singles_b, "Bob singles rate, counts/s")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--seed", config.seed, "Root random seed")->capture_default_str();
  app.add_option("--target", config.target, "Bob's basis for align")
      ->check(CLI::IsMember({"plus-s1", "minus-s1", "plus-s2", "minus-s2", "plus-s3",
                             "minus-s3", "random"}))
      ->capture_default_str();
  app.add_option("--drift", config.drift, "Bob's drift model for track")
      ->check(CLI::IsMember({"static", "sawtooth", "walk"}))
      ->capture_default_str();
  app.add_option("--drift-rate-deg-per-hour", config.drift_rate_deg_per_hour,
                 "Drift speed (sawtooth sweep rate / walk mean drift per hour)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--evals", config.evals, "Objective evaluation budget per run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", config.out, "Output path ('-' for stdout)")
      ->capture_default_str();
  app.add_option("--workers", config.workers, "Worker threads for sweeps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--format", config.format, "Output format")
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();
  app.add_flag("--zero-noise", config.zero_noise,
               "Use exact expected counts instead of Poisson sampling");
  app.add_option("--initial-scale", config.initial_scale,
                 "Initial simplex scale, volts (default 0.3 vpi)");
  app.add_option("--t-grid", config.t_grid, "Integration times for sweep-t, seconds")
      ->capture_default_str();
  app.add_option("--rpt-grid", config.rpt_grid, "r_p*T grid for sweep-grid")
      ->capture_default_str();
  app.add_option("--rat-grid", config.rat_grid, "r_a*T grid for sweep-grid")
      ->capture_default_str();
  app.add_option("--targets-per-point", config.targets_per_point,
                 "Random targets per sweep point")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--repeats-per-target", config.repeats_per_target,
                 "Fresh-noise runs averaged per target")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  return config;
}

int execute(const RunConfig& config) {
  const bool jsonl = config.format == "jsonl";
  try {
    OutputFile out(config.out);

    if (config.command == "oracle-check") {
      const int status = run_oracle_check(config, out.stream());
      out.commit();
      return status;
    }

    write_header(out.stream(), config, jsonl);

    if (config.command == "align") {
      AlignmentScenario scenario = scenario_from(config);
      scenario.bob_basis = resolve_target(config);
      write_trace(out.stream(), run_alignment(scenario), jsonl);
    } else if (config.command == "track") {
      AlignmentScenario scenario = scenario_from(config);
      scenario.bob_drift = resolve_drift(config);
      write_trace(out.stream(), run_tracking(scenario), jsonl);
    } else if (config.command == "sweep-t") {
      const SweepResult sweep = sweep_integration_time(
          scenario_from(config), config.t_grid, config.targets_per_point,
          config.repeats_per_target, config.workers);
      write_sweep(out.stream(), sweep, /*rate_grid=*/false, jsonl);
    } else if (config.command == "sweep-grid") {
      const SweepResult sweep = sweep_rate_grid(
          scenario_from(config), config.rpt_grid, config.rat_grid,
          config.targets_per_point, config.repeats_per_target, config.workers);
      write_sweep(out.stream(), sweep, /*rate_grid=*/true, jsonl);
    } else {
      throw UsageError("unknown command: " + config.command);
    }

    out.commit();
    return 0;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error (" << config.out << "): " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.find(config.out) != std::string::npos) {
      std::cerr << "i/o error: " << what << "\n";
      return 3;
    }
    throw;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? argc - 1 : 0);
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    const RunConfig config = parse_config(args);
    return execute(config);
  } catch (const HelpRequested& help) {
    std::cout << help.text;
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace polalign
