#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace polalign {

/// Fully resolved CLI configuration. Flag values override config-file values,
/// which override the defaults below (the in-lab operating conditions).
struct RunConfig {
  std::string command;  // align | track | sweep-t | sweep-grid | oracle-check

  double rp = 800.0;     ///< pair-detection rate scale, pairs/s
  double ra = 60.0;      ///< accidental coincidence rate, pairs/s
  double T = 5.0;        ///< integration period, s
  double gamma = 1.0;    ///< indistinguishability weight
  double vpi = 100.0;    ///< half-wave voltage, V
  double singles_a = 1e5;
  double singles_b = 1e5;
  std::uint64_t seed = 1;
  std::string target = "random";  // plus-s1 ... minus-s3 | random
  std::string drift = "sawtooth";  // static | sawtooth | walk (track only)
  double drift_rate_deg_per_hour = 176.1;
  int evals = 100;
  std::string out = "-";  ///< output path; "-" = stdout
  int workers = 1;
  std::string format = "csv";  // csv | jsonl
  bool zero_noise = false;
  double initial_scale = -1.0;  ///< volts; < 0 means the default 0.3 vpi

  std::vector<double> t_grid = {0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<double> rpt_grid = {500.0, 1500.0, 4000.0, 6000.0};
  std::vector<double> rat_grid = {60.0, 300.0, 480.0, 2400.0};
  int targets_per_point = 100;
  int repeats_per_target = 1;
};

/// Raised for bad flags, bad config keys, or invalid values; the message
/// names the offending item. Maps to exit status 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when --help is requested; carries the help text.
struct HelpRequested {
  std::string text;
};

/// Parses argv-style arguments (without the program name). Unknown flags and
/// unknown config-file keys are rejected.
RunConfig parse_config(const std::vector<std::string>& args);

/// Runs the configured command and writes its output. Returns the process
/// exit status: 0 success, 2 oracle failure, 3 I/O error.
int execute(const RunConfig& config);

/// Complete CLI entry point: parse + execute + error reporting.
int run_cli(int argc, const char* const* argv);

}  // namespace polalign
