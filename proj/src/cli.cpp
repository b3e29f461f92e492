#include "stheat/cli.hpp"

#include <fstream>
#include <map>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "stheat/errors.hpp"
#include "stheat/perfmodel.hpp"

namespace stheat {

namespace {

const std::map<std::string, Mode> mode_names{
    {"sdc", Mode::Sdc}, {"mlsdc", Mode::Mlsdc}, {"pfasst", Mode::Pfasst}};
const std::map<std::string, ForcingMode> forcing_names{
    {"corrected", ForcingMode::Corrected}, {"paper", ForcingMode::PaperLiteral}};
const std::map<std::string, StencilKind> stencil_names{
    {"compact4", StencilKind::FourthOrderCompact}, {"second2", StencilKind::SecondOrder7pt}};
const std::map<std::string, Backend> backend_names{
    {"sequential", Backend::Sequential}, {"concurrent", Backend::Concurrent}};

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Sdc:
      return "sdc";
    case Mode::Mlsdc:
      return "mlsdc";
    case Mode::Pfasst:
      return "pfasst";
  }
  return "?";
}

std::string cell(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : std::string{};
}

// Published strong-scaling runs: reference SDC time per step, PFASST time for
// 32 simultaneous steps, and the speedup column per rank count.
struct PublishedRun {
  const char* label;
  double serial_step_seconds;
  double parallel_seconds;
  std::vector<int> ranks;
  std::vector<double> speedups;
};

const std::vector<PublishedRun>& published_runs() {
  static const std::vector<PublishedRun> runs{
      {"BG/Q small (256 PMG cores)", 129.04, 247.61, {2, 4, 8, 16, 32},
       {1.82, 3.45, 6.18, 9.43, 16.68}},
      {"BG/Q large (2048 PMG cores)", 25.73, 74.44, {2, 4, 8, 16, 32},
       {1.23, 2.24, 4.11, 6.73, 11.06}},
      {"XE6 small (128 PMG cores)", 73.42, 132.09, {2, 4, 8, 16, 32},
       {1.79, 3.36, 6.28, 9.82, 17.72}},
      {"XE6 large (512 PMG cores)", 26.88, 76.64, {2, 4, 8, 16, 32},
       {1.13, 1.89, 3.68, 6.00, 11.22}},
  };
  return runs;
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (!is_power_of_two_minus_one(cfg.nx)) throw InvalidArgument("--nx must be 2^k - 1");
  if (cfg.mode != Mode::Sdc) {
    if (cfg.nx_coarse != cfg.nx && cfg.nx != 2 * cfg.nx_coarse + 1) {
      throw InvalidArgument("--nx-coarse must equal --nx or (nx - 1) / 2");
    }
    if (cfg.nodes_coarse < 2 || cfg.nodes_coarse > cfg.nodes) {
      throw InvalidArgument("--nodes-coarse must lie in [2, nodes]");
    }
  }
  if (cfg.nodes < 2) throw InvalidArgument("--nodes must be >= 2");
  if (!(cfg.nu > 0.0)) throw InvalidArgument("--nu must be positive");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("--tol must be positive");
  if (cfg.max_iter < 1) throw InvalidArgument("--max-iter must be >= 1");
  if (cfg.ranks < 1) throw InvalidArgument("--ranks must be >= 1");
  if (cfg.mode != Mode::Pfasst && cfg.ranks != 1) {
    throw InvalidArgument("--ranks applies to pfasst mode only");
  }
  const int steps = step_count(cfg.t_end, cfg.dt);
  if (steps % cfg.ranks != 0) {
    throw InvalidArgument(
        fmt::format("{} time steps are not divisible by --ranks {}", steps, cfg.ranks));
  }
}

ParseResult parse_args(std::span<const std::string> args) {
  RunConfig cfg;
  CLI::App app{"Space-time parallel heat equation solver"};
  app.name("stheat_cli");
  Mode mode = cfg.mode;
  ForcingMode forcing = cfg.forcing;
  StencilKind stencil = cfg.stencil;
  StencilKind stencil_coarse = cfg.stencil_coarse;
  Backend backend = cfg.backend;
  std::string out = cfg.out.string();

  app.add_option("--mode", mode, "sdc | mlsdc | pfasst")
      ->transform(CLI::CheckedTransformer(mode_names, CLI::ignore_case))
      ->option_text("sdc|mlsdc|pfasst");
  app.add_option("--nx", cfg.nx, "fine grid points per dimension (2^k - 1)");
  app.add_option("--nx-coarse", cfg.nx_coarse, "coarse grid points per dimension");
  app.add_option("--nodes", cfg.nodes, "fine Lobatto nodes");
  app.add_option("--nodes-coarse", cfg.nodes_coarse, "coarse Lobatto nodes");
  app.add_option("--dt", cfg.dt, "time step");
  app.add_option("--tend", cfg.t_end, "final time");
  app.add_option("--nu", cfg.nu, "diffusion coefficient");
  app.add_option("--tol", cfg.tol, "residual tolerance");
  app.add_option("--max-iter", cfg.max_iter, "iteration limit per step or block");
  app.add_option("--ranks", cfg.ranks, "time ranks per block");
  app.add_option("--forcing", forcing, "corrected | paper")
      ->transform(CLI::CheckedTransformer(forcing_names, CLI::ignore_case))
      ->option_text("corrected|paper");
  app.add_option("--stencil", stencil, "fine stencil: compact4 | second2")
      ->transform(CLI::CheckedTransformer(stencil_names, CLI::ignore_case))
      ->option_text("compact4|second2");
  app.add_option("--stencil-coarse", stencil_coarse, "coarse stencil: compact4 | second2")
      ->transform(CLI::CheckedTransformer(stencil_names, CLI::ignore_case))
      ->option_text("compact4|second2");
  app.add_option("--backend", backend, "sequential | concurrent")
      ->transform(CLI::CheckedTransformer(backend_names, CLI::ignore_case))
      ->option_text("sequential|concurrent");
  app.add_option("--out", out, "output directory for steps.csv and summary.csv");
  app.add_option("--seed", cfg.seed, "reserved");
  app.add_flag("--table-check", cfg.table_check, "recompute the published efficiency tables");

  std::vector<const char*> argv{"stheat_cli"};
  for (const auto& a : args) argv.push_back(a.c_str());
  ParseResult result;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    result.message = app.help();
    return result;
  } catch (const CLI::ParseError& e) {
    result.code = exit_code::usage;
    result.message = fmt::format("{}\n{}", e.what(), app.help());
    return result;
  }
  cfg.mode = mode;
  cfg.forcing = forcing;
  cfg.stencil = stencil;
  cfg.stencil_coarse = stencil_coarse;
  cfg.backend = backend;
  cfg.out = out;
  if (!cfg.table_check) {
    try {
      validate(cfg);
    } catch (const InvalidArgument& e) {
      result.code = exit_code::usage;
      result.message = e.what();
      return result;
    }
  }
  result.config = cfg;
  return result;
}

SimulationConfig to_simulation(const RunConfig& cfg) {
  SimulationConfig s;
  s.mode = cfg.mode;
  s.dt = cfg.dt;
  s.t_end = cfg.t_end;
  PfasstConfig& p = s.pfasst;
  p.problem = HeatProblem{cfg.nu, cfg.forcing};
  p.fine = LevelConfig{cfg.nx, cfg.stencil, cfg.nodes};
  p.coarse = LevelConfig{cfg.nx_coarse, cfg.stencil_coarse, cfg.nodes_coarse};
  p.ranks = cfg.ranks;
  p.tol = cfg.tol;
  p.max_iter = cfg.max_iter;
  p.backend = cfg.backend;
  return s;
}

bool write_steps_csv(const std::filesystem::path& file, std::span<const StepRecord> steps) {
  std::ofstream os(file);
  if (!os) return false;
  os << steps_header << '\n';
  for (const auto& s : steps) {
    fmt::print(os, "{},{},{:.17g},{:.17g}\n", s.step, s.iterations, s.residual, s.rel_max_error);
  }
  os.flush();
  return static_cast<bool>(os);
}

bool write_summary_csv(const std::filesystem::path& file, std::span<const SummaryRow> rows) {
  std::ofstream os(file);
  if (!os) return false;
  os << summary_header << '\n';
  for (const auto& r : rows) {
    fmt::print(os, "{},{},{},{},{},{},{}\n", r.mode, r.ranks, r.k, cell(r.alpha), cell(r.beta),
               cell(r.total_seconds), cell(r.model_speedup));
  }
  os.flush();
  return static_cast<bool>(os);
}

int run_and_report(const RunConfig& cfg, std::ostream& log) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec || !std::filesystem::is_directory(cfg.out)) {
    fmt::print(log, "cannot create output directory {}\n", cfg.out.string());
    return exit_code::io_failure;
  }

  const SimulationConfig sim = to_simulation(cfg);
  SimulationResult result;
  int k_serial = 0;
  try {
    result = run_simulation(sim);
    if (cfg.mode == Mode::Sdc) {
      k_serial = result.max_iterations;
    } else {
      // one serial SDC step on the fine level gives K_S for the model
      const PfasstConfig& p = sim.pfasst;
      HeatDiscretization disc(p.problem, p.fine.n, p.fine.kind, p.mg);
      k_serial = sdc_step(exact_solution(0.0, p.fine.n), 0.0, sim.dt, p.tol, p.max_iter, disc,
                          p.fine.num_nodes)
                     .iterations;
    }
  } catch (const SolverDiverged& e) {
    fmt::print(log, "solver diverged: {}\n", e.what());
    return exit_code::not_converged;
  }

  std::vector<SummaryRow> rows;
  SummaryRow run{mode_name(cfg.mode), cfg.ranks, result.max_iterations, {}, {},
                 result.total_seconds, {}};
  if (cfg.mode != Mode::Sdc) {
    const double alpha = measure_alpha(result.timing);
    const double beta = measure_beta(result.timing);
    SpeedupParams sp{static_cast<double>(k_serial), static_cast<double>(result.max_iterations),
                     alpha, beta, static_cast<double>(cfg.ranks)};
    run.alpha = alpha;
    run.beta = beta;
    run.model_speedup = model_speedup(sp);
    rows.push_back(run);
    for (int p : model_ranks) {
      sp.ranks = p;
      rows.push_back({"model", p, result.max_iterations, alpha, beta, {}, model_speedup(sp)});
    }
  } else {
    rows.push_back(run);
  }

  const bool ok = write_steps_csv(cfg.out / "steps.csv", result.steps) &&
                  write_summary_csv(cfg.out / "summary.csv", rows);
  if (!ok) {
    fmt::print(log, "failed to write CSV output to {}\n", cfg.out.string());
    return exit_code::io_failure;
  }

  const StepRecord& last = result.steps.back();
  fmt::print(log, "{} ranks={} steps={} K={} K_S={} rel_max_error(T={})={:.6e} time={:.2f}s{}\n",
             mode_name(cfg.mode), cfg.ranks, result.steps.size(), result.max_iterations, k_serial,
             cfg.t_end, last.rel_max_error, result.total_seconds,
             result.converged ? "" : " NOT CONVERGED");
  return result.converged ? exit_code::ok : exit_code::not_converged;
}

int run_table_check(std::ostream& log) {
  for (const auto& run : published_runs()) {
    const double observed = observed_speedup(run.serial_step_seconds, 32, run.parallel_seconds);
    fmt::print(log, "{}: {:.2f} s/step serial, {:.2f} s for 32 steps -> speedup {:.2f}\n",
               run.label, run.serial_step_seconds, run.parallel_seconds, observed);
    for (const auto& row : efficiency_table(run.speedups, run.ranks)) {
      fmt::print(log, "  {:>2} ranks  speedup {:>5.2f}  efficiency {}\n", row.ranks, row.speedup,
                 format_percent(row.efficiency));
    }
  }
  return exit_code::ok;
}

int cli_main(std::span<const std::string> args, std::ostream& log, std::ostream& err) {
  ParseResult parsed = parse_args(args);
  if (!parsed.config) {
    fmt::print(parsed.code == exit_code::ok ? log : err, "{}\n", parsed.message);
    return parsed.code;
  }
  if (parsed.config->table_check) return run_table_check(log);
  try {
    return run_and_report(*parsed.config, log);
  } catch (const InvalidArgument& e) {
    fmt::print(err, "{}\n", e.what());
    return exit_code::usage;
  }
}

}  // namespace stheat
