#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stheat/pfasst.hpp"

namespace stheat {

/// Everything the driver needs for one run. Defaults give the desk-scale
/// configuration: 31^3 fine grid with the compact stencil on 5 nodes,
/// 15^3 coarse grid with the 7-point stencil on 3 nodes.
struct RunConfig {
  Mode mode = Mode::Pfasst;
  std::size_t nx = 31;
  std::size_t nx_coarse = 15;
  std::size_t nodes = 5;
  std::size_t nodes_coarse = 3;
  double dt = 0.1875;
  double t_end = 6.0;
  double nu = 0.1;
  double tol = 1e-10;
  int ranks = 1;
  int max_iter = 200;
  ForcingMode forcing = ForcingMode::Corrected;
  StencilKind stencil = StencilKind::FourthOrderCompact;
  StencilKind stencil_coarse = StencilKind::SecondOrder7pt;
  Backend backend = Backend::Sequential;
  std::filesystem::path out = "stheat_out";
  std::uint64_t seed = 0;  ///< reserved; the numerics are deterministic
  bool table_check = false;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int not_converged = 1;
inline constexpr int usage = 2;
inline constexpr int io_failure = 3;
}  // namespace exit_code

struct ParseResult {
  std::optional<RunConfig> config;  ///< empty when the process should exit with `code`
  int code = exit_code::ok;
  std::string message;
};

/// Throws InvalidArgument for inconsistent settings (grid sizes, step
/// count not divisible by the rank count, non-positive tolerances, ...).
void validate(const RunConfig& cfg);

/// Parses command-line flags. Unknown flags and invalid values give code 2.
ParseResult parse_args(std::span<const std::string> args);

SimulationConfig to_simulation(const RunConfig& cfg);

/// Summary row; empty optionals are written as empty CSV cells.
struct SummaryRow {
  std::string mode;
  int ranks = 1;
  int k = 0;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> total_seconds;
  std::optional<double> model_speedup;
};

inline constexpr const char* steps_header = "step,iterations,residual,rel_max_error";
inline constexpr const char* summary_header =
    "mode,ranks,K,alpha,beta,total_seconds,model_speedup";

/// Both return false on I/O failure.
bool write_steps_csv(const std::filesystem::path& file, std::span<const StepRecord> steps);
bool write_summary_csv(const std::filesystem::path& file, std::span<const SummaryRow> rows);

/// Rank counts for which model rows are emitted.
inline constexpr int model_ranks[] = {1, 2, 4, 8, 16, 32};

/// Runs the configured simulation, writes steps.csv and summary.csv into
/// cfg.out and returns the process exit code.
int run_and_report(const RunConfig& cfg, std::ostream& log);

/// Replays the published efficiency tables from their timing and speedup
/// columns and prints the recomputed values.
int run_table_check(std::ostream& log);

/// Full driver: parse, then run or table-check.
int cli_main(std::span<const std::string> args, std::ostream& log, std::ostream& err);

}  // namespace stheat
