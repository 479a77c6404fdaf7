#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "semisep/numerics.hpp"
#include "semisep/schrodinger.hpp"

namespace semisep::cli {

enum class Command { det2, det1, tb2, tb3, bound_states, bargmann, converge };

const char* to_string(Command c);
Command parse_command(const std::string& s);  // ConfigError on unknown names

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInconsistent = 3;
inline constexpr int kExitIO = 4;

// Tolerances of the built-in checks. Each can be overridden through the
// environment as SEMISEP_TOL_<NAME>, e.g. SEMISEP_TOL_TB3=1e-8.
struct Tolerances {
  double consistency = 1e-6;  // cross-route spread of determinant routes
  double trace = 1e-8;        // int tr F1G1 vs int tr F2G2 (det1)
  double jost = 1e-7;         // spread of the three Jost function routes
  double tb2 = 1e-6;
  double tb3 = 1e-6;
  double converge_floor = 1e-11;  // errors below this count as converged

  double& at(const std::string& name);  // ConfigError on unknown names
  static std::vector<std::string> names();
};

struct JobConfig {
  Command command = Command::det2;
  std::optional<nlohmann::json> kernel;     // det2, det1
  std::optional<nlohmann::json> potential;  // all other commands
  std::vector<Complex> params;              // alpha or z
  GridSpec grid{};
  Tolerances tol{};
  std::string output = ".";
  bool timing = false;  // false: wall_time_ms is written as 0
  bool nystrom = false; // det2: add the Nystrom oracle column
  int converge_levels = 6;
  CountOptions count{};
};

// Validates structure and the command-specific invariants. Throws ConfigError.
JobConfig parse_config(const nlohmann::json& j);
JobConfig load_config(const std::filesystem::path& path);

// Reads SEMISEP_TOL_* from the environment.
void apply_env_overrides(Tolerances& tol);

// Built from the config specs; exposed for testing.
SemiSeparableKernel make_kernel(const nlohmann::json& spec);
Potential make_potential(const nlohmann::json& spec);

struct CheckResult {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct JobOutcome {
  int exit_code = kExitOk;
  std::filesystem::path csv_path, summary_path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<CheckResult> checks;
};

struct RunOptions {
  int threads = 1;
  std::optional<std::string> out_dir;  // overrides config.output
};

// Computes, writes <out>/<command>.csv and <out>/<command>_summary.json.
// Throws ConfigError for invalid specs detected while building inputs and
// std::ios_base::failure / std::filesystem::filesystem_error on I/O.
JobOutcome run_job(const JobConfig& cfg, const RunOptions& opt = {});

// Whole pipeline with the exit-status contract; messages go to stderr.
int run_cli(const std::string& command, const std::string& config_path, int threads,
            const std::optional<std::string>& out_dir);

// 17 significant digits, scientific notation.
std::string format_number(double x);

// Jost function of a scalar square well, V = -depth on [c - w/2, c + w/2],
// by transfer matrices. Oracle of the converge job.
Complex square_well_jost(double depth, double width, double center, Complex k);

}  // namespace semisep::cli
