#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "stheat/cli.hpp"

using namespace stheat;
namespace fs = std::filesystem;

namespace {

ParseResult parse(std::vector<std::string> args) { return parse_args(args); }

int run_binary(const std::string& args, std::string* output = nullptr) {
  const fs::path log = fs::temp_directory_path() / ("stheat_cli_log_" + std::to_string(::getpid()));
  const std::string cmd = std::string(STHEAT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output != nullptr) {
    std::ifstream is(log);
    std::stringstream ss;
    ss << is.rdbuf();
    *output = ss.str();
  }
  fs::remove(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
  std::ifstream is(file);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(fs::temp_directory_path() / (name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

TEST(ParseArgs, ModeAndGridWithDefaults) {
  const ParseResult r = parse({"--mode", "sdc", "--nx", "31"});
  ASSERT_TRUE(r.config);
  EXPECT_EQ(r.config->mode, Mode::Sdc);
  EXPECT_EQ(r.config->nx, 31u);
  EXPECT_EQ(r.config->nodes, 5u);
  EXPECT_EQ(r.config->nodes_coarse, 3u);
  EXPECT_DOUBLE_EQ(r.config->dt, 0.1875);
  EXPECT_DOUBLE_EQ(r.config->t_end, 6.0);
  EXPECT_DOUBLE_EQ(r.config->nu, 0.1);
  EXPECT_DOUBLE_EQ(r.config->tol, 1e-10);
  EXPECT_EQ(r.config->forcing, ForcingMode::Corrected);
}

TEST(ParseArgs, PfasstConfiguration) {
  const ParseResult r =
      parse({"--mode", "pfasst", "--ranks", "4", "--nx", "31", "--nx-coarse", "15"});
  ASSERT_TRUE(r.config);
  EXPECT_EQ(r.config->ranks, 4);
  EXPECT_EQ(r.config->nx_coarse, 15u);
}

TEST(ParseArgs, ChoiceFlags) {
  const ParseResult r = parse({"--forcing", "paper", "--stencil", "second2", "--stencil-coarse",
                               "second2", "--backend", "concurrent"});
  ASSERT_TRUE(r.config);
  EXPECT_EQ(r.config->forcing, ForcingMode::PaperLiteral);
  EXPECT_EQ(r.config->stencil, StencilKind::SecondOrder7pt);
  EXPECT_EQ(r.config->backend, Backend::Concurrent);
}

TEST(ParseArgs, UsageErrors) {
  EXPECT_EQ(parse({"--ranks", "5"}).code, exit_code::usage);
  EXPECT_EQ(parse({"--bogus"}).code, exit_code::usage);
  EXPECT_EQ(parse({"--mode", "euler"}).code, exit_code::usage);
  EXPECT_EQ(parse({"--nx", "30"}).code, exit_code::usage);
  EXPECT_EQ(parse({"--nx", "31", "--nx-coarse", "7"}).code, exit_code::usage);
  EXPECT_EQ(parse({"--tol", "0"}).code, exit_code::usage);
  EXPECT_EQ(parse({"--dt", "0.25", "--tend", "1.1"}).code, exit_code::usage);
  EXPECT_FALSE(parse({"--ranks", "5"}).config);
}

TEST(ParseArgs, HelpIsNotAnError) {
  const ParseResult r = parse({"--help"});
  EXPECT_FALSE(r.config);
  EXPECT_EQ(r.code, exit_code::ok);
  EXPECT_NE(r.message.find("--mode"), std::string::npos);
}

TEST(CsvWriters, HeadersAndPrecision) {
  ScratchDir dir("stheat_csv");
  fs::create_directories(dir.path());
  const std::vector<StepRecord> steps{{0, 3, 1.0 / 3.0, 0.1}};
  ASSERT_TRUE(write_steps_csv(dir.path() / "steps.csv", steps));
  const auto rows = read_csv(dir.path() / "steps.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"step", "iterations", "residual", "rel_max_error"}));
  EXPECT_EQ(rows[1][2], "0.33333333333333331");
  EXPECT_EQ(std::stod(rows[1][2]), 1.0 / 3.0);

  const std::vector<SummaryRow> summary{{"sdc", 1, 8, {}, {}, 2.5, {}}};
  ASSERT_TRUE(write_summary_csv(dir.path() / "summary.csv", summary));
  const auto srows = read_csv(dir.path() / "summary.csv");
  ASSERT_EQ(srows.size(), 2u);
  EXPECT_EQ(srows[0].size(), 7u);
  EXPECT_EQ(srows[1], (std::vector<std::string>{"sdc", "1", "8", "", "", "2.5", ""}));
  EXPECT_FALSE(write_steps_csv(dir.path() / "missing" / "steps.csv", steps));
}

TEST(Binary, SdcRunWritesOneRowPerStep) {
  ScratchDir dir("stheat_sdc");
  const int code = run_binary("--mode sdc --nx 7 --out " + dir.path().string());
  EXPECT_EQ(code, exit_code::ok);
  const auto steps = read_csv(dir.path() / "steps.csv");
  ASSERT_EQ(steps.size(), 33u);
  EXPECT_EQ(steps[0][0], "step");
  EXPECT_EQ(steps[32][0], "31");
  const auto summary = read_csv(dir.path() / "summary.csv");
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0], (std::vector<std::string>{"mode", "ranks", "K", "alpha", "beta",
                                                  "total_seconds", "model_speedup"}));
  EXPECT_EQ(summary[1][0], "sdc");
}

TEST(Binary, PfasstSummaryHasModelCurve) {
  ScratchDir dir("stheat_pf");
  const int code = run_binary("--mode pfasst --nx 7 --nx-coarse 3 --ranks 4 --tend 1.5 --out " +
                              dir.path().string());
  EXPECT_EQ(code, exit_code::ok);
  const auto summary = read_csv(dir.path() / "summary.csv");
  ASSERT_EQ(summary.size(), 2u + std::size(model_ranks));
  EXPECT_EQ(summary[1][0], "pfasst");
  for (std::size_t i = 0; i < std::size(model_ranks); ++i) {
    EXPECT_EQ(summary[2 + i][0], "model");
    EXPECT_EQ(summary[2 + i][1], std::to_string(model_ranks[i]));
    EXPECT_GT(std::stod(summary[2 + i][6]), 0.0);
  }
}

TEST(Binary, SingleRankPfasstMatchesMlsdc) {
  ScratchDir a("stheat_pf1");
  ScratchDir b("stheat_ml");
  ASSERT_EQ(run_binary("--mode pfasst --nx 15 --nx-coarse 7 --tend 0.75 --out " + a.path().string()), 0);
  ASSERT_EQ(run_binary("--mode mlsdc --nx 15 --nx-coarse 7 --tend 0.75 --out " + b.path().string()), 0);
  const auto pa = read_csv(a.path() / "steps.csv");
  const auto pb = read_csv(b.path() / "steps.csv");
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t r = 1; r < pa.size(); ++r) {
    EXPECT_NEAR(std::stod(pa[r][3]), std::stod(pb[r][3]), 1e-14);
  }
}

TEST(Binary, NonConvergenceExitCode) {
  ScratchDir dir("stheat_nc");
  EXPECT_EQ(run_binary("--mode sdc --nx 7 --max-iter 1 --out " + dir.path().string()),
            exit_code::not_converged);
  EXPECT_TRUE(fs::exists(dir.path() / "steps.csv"));
}

TEST(Binary, UsageExitCode) {
  EXPECT_EQ(run_binary("--bogus"), exit_code::usage);
  EXPECT_EQ(run_binary("--ranks 5"), exit_code::usage);
}

TEST(Binary, IoFailureExitCode) {
  ScratchDir dir("stheat_io");
  fs::create_directories(dir.path());
  const fs::path blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  EXPECT_EQ(run_binary("--mode sdc --nx 7 --out " + (blocker / "sub").string()),
            exit_code::io_failure);
}

TEST(Binary, TableCheckPrintsSpeedups) {
  std::string out;
  EXPECT_EQ(run_binary("--table-check", &out), exit_code::ok);
  for (const char* s : {"1.82", "3.45", "6.18", "9.43", "16.68", "52.1%", "11.06", "34.6%"}) {
    EXPECT_NE(out.find(s), std::string::npos) << s;
  }
}
