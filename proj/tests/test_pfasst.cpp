#include <chrono>
#include <cmath>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "stheat/errors.hpp"
#include "stheat/pfasst.hpp"

using namespace stheat;

namespace {

PfasstConfig scalar_config(int ranks) {
  PfasstConfig cfg;
  cfg.fine = {1, StencilKind::SecondOrder7pt, 5};
  cfg.coarse = {1, StencilKind::SecondOrder7pt, 3};
  cfg.ranks = ranks;
  return cfg;
}

PfasstConfig small_config(int ranks) {
  PfasstConfig cfg;
  cfg.fine = {15, StencilKind::FourthOrderCompact, 5};
  cfg.coarse = {7, StencilKind::SecondOrder7pt, 3};
  cfg.ranks = ranks;
  return cfg;
}

SimulationConfig small_simulation(Mode mode, int ranks, int steps) {
  SimulationConfig sc;
  sc.mode = mode;
  sc.pfasst = small_config(ranks);
  sc.t_end = steps * sc.dt;
  return sc;
}

// Two-rank schedule written out by hand on bare hierarchies.
std::vector<Field> two_rank_reference(const PfasstConfig& cfg, const Field& u0, double t0, double dt) {
  Hierarchy h0(cfg.problem, cfg.fine, cfg.coarse, cfg.mg);
  Hierarchy h1(cfg.problem, cfg.fine, cfg.coarse, cfg.mg);
  h0.begin_step(t0, dt);
  h1.begin_step(t0 + dt, dt);
  h0.spread(u0);
  h1.spread(u0);

  // predictor stage 0
  h0.restrict_state();
  h0.fas_correction();
  h0.coarse_sweep();
  const Field coarse_from_0 = h0.coarse().state.end_value();
  h0.coarse_correction();
  Field fine_from_0 = h0.fine().state.end_value();
  h1.restrict_state();
  h1.fas_correction();
  h1.coarse_sweep();
  // predictor stage 1
  h1.set_coarse_initial(coarse_from_0);
  h1.coarse_sweep();
  h1.coarse_correction();

  for (int k = 1; k <= cfg.max_iter; ++k) {
    h0.fine_sweep();
    const Field fine_now = h0.fine().state.end_value();
    h0.restrict_state();
    h0.fas_correction();
    h0.coarse_sweep();
    const Field coarse_now = h0.coarse().state.end_value();
    h0.coarse_correction();
    const double r0 = h0.fine_residual();

    h1.set_fine_initial(fine_from_0);
    h1.fine_sweep();
    h1.restrict_state();
    h1.fas_correction();
    h1.set_coarse_initial(coarse_now);
    h1.coarse_sweep();
    h1.coarse_correction();
    const double r1 = h1.fine_residual();

    fine_from_0 = fine_now;
    if (std::max(r0, r1) <= cfg.tol) break;
  }
  return {h0.fine().state.end_value(), h1.fine().state.end_value()};
}

}  // namespace

TEST(Pfasst, SingleRankMatchesMlsdc) {
  for (const PfasstConfig& cfg : {scalar_config(1), small_config(1)}) {
    const Field u0 = exact_solution(0.0, cfg.fine.n);
    const BlockResult block = run_block(cfg, u0, 0.0, 0.1875);
    Hierarchy h(cfg.problem, cfg.fine, cfg.coarse, cfg.mg);
    const StepReport ml = mlsdc_step(h, u0, 0.0, 0.1875, cfg.tol, cfg.max_iter);
    EXPECT_LE(max_abs_diff(block.end_values[0], ml.u_end), 1e-14);
    EXPECT_EQ(block.iterations[0], ml.iterations);
  }
}

TEST(Pfasst, TwoRanksMatchHandWrittenSchedule) {
  const PfasstConfig cfg = scalar_config(2);
  const Field u0(1, 0.8);
  const auto ref = two_rank_reference(cfg, u0, 0.375, 0.1875);
  const BlockResult block = run_block(cfg, u0, 0.375, 0.1875);
  ASSERT_EQ(block.end_values.size(), 2u);
  EXPECT_EQ(block.end_values[0], ref[0]);
  EXPECT_EQ(block.end_values[1], ref[1]);
}

TEST(Pfasst, ZeroStaysZero) {
  PfasstConfig cfg = small_config(4);
  cfg.problem.forcing = ForcingMode::None;
  const BlockResult block = run_block(cfg, Field(15), 0.0, 0.1875);
  for (const Field& f : block.end_values) EXPECT_EQ(f.max_abs(), 0.0);
  EXPECT_TRUE(block.converged);
}

TEST(Pfasst, BackendsAreBitIdentical) {
  for (int ranks : {2, 4}) {
    PfasstConfig seq = scalar_config(ranks);
    PfasstConfig con = seq;
    con.backend = Backend::Concurrent;
    const Field u0(1, 1.0);
    const BlockResult a = run_block(seq, u0, 0.0, 0.25);
    for (int repeat = 0; repeat < 3; ++repeat) {
      const BlockResult b = run_block(con, u0, 0.0, 0.25);
      EXPECT_EQ(a.end_values, b.end_values);
      EXPECT_EQ(a.iterations, b.iterations);
      EXPECT_EQ(a.residuals, b.residuals);
      EXPECT_EQ(a.residual_history, b.residual_history);
    }
  }
}

TEST(Pfasst, BackendsAgreeOnHeatProblem) {
  PfasstConfig seq = small_config(4);
  PfasstConfig con = seq;
  con.backend = Backend::Concurrent;
  const Field u0 = exact_solution(0.0, 15);
  const BlockResult a = run_block(seq, u0, 0.0, 0.1875);
  const BlockResult b = run_block(con, u0, 0.0, 0.1875);
  EXPECT_EQ(a.end_values, b.end_values);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Pfasst, ReceivesRespectCausality) {
  for (Backend backend : {Backend::Sequential, Backend::Concurrent}) {
    PfasstConfig cfg = scalar_config(4);
    cfg.backend = backend;
    const BlockResult block = run_block(cfg, Field(1, 1.0), 0.0, 0.25);
    ASSERT_EQ(block.receive_log.size(), 4u);
    EXPECT_TRUE(block.receive_log[0].empty());
    for (int p = 1; p < 4; ++p) {
      const auto& log = block.receive_log[static_cast<std::size_t>(p)];
      int predictor_receives = 0;
      for (const ConsumedMessage& msg : log) {
        EXPECT_EQ(msg.tag.sender, p - 1);
        if (msg.in_predictor) {
          ++predictor_receives;
          EXPECT_EQ(msg.tag.channel, Channel::Predictor);
          EXPECT_EQ(msg.tag.stage, msg.at_stage - 1);
        } else if (msg.tag.channel == Channel::Coarse) {
          EXPECT_EQ(msg.tag.stage, msg.at_stage);
        } else {
          ASSERT_EQ(msg.tag.channel, Channel::Fine);
          EXPECT_EQ(msg.tag.stage, msg.at_stage - 1);
        }
      }
      EXPECT_EQ(predictor_receives, p);
      EXPECT_EQ(static_cast<int>(log.size()), p + 2 * block.iterations[static_cast<std::size_t>(p)]);
    }
  }
}

TEST(Pfasst, ConvergedBlockIsFixedPoint) {
  PfasstConfig cfg = small_config(2);
  const Field u0 = exact_solution(0.0, 15);
  const BlockResult done = run_block(cfg, u0, 0.0, 0.1875);
  ASSERT_TRUE(done.converged);
  cfg.tol = 0.0;
  cfg.max_iter = done.max_iterations() + 1;
  const BlockResult more = run_block(cfg, u0, 0.0, 0.1875);
  EXPECT_LE(more.residual_history.back(), 10 * 1e-10);
  for (std::size_t p = 0; p < 2; ++p) {
    EXPECT_LE(max_abs_diff(done.end_values[p], more.end_values[p]),
              10 * 1e-10 * done.end_values[p].max_abs());
  }
}

TEST(Pfasst, IterationsGrowWithRanksAndErrorsAgree) {
  const int steps = 8;
  const SimulationResult serial = run_simulation(small_simulation(Mode::Pfasst, 1, steps));
  ASSERT_TRUE(serial.converged);
  int previous = serial.max_iterations;
  for (int ranks : {2, 4, 8}) {
    const SimulationResult r = run_simulation(small_simulation(Mode::Pfasst, ranks, steps));
    ASSERT_TRUE(r.converged);
    EXPECT_GE(r.max_iterations, previous) << ranks;
    previous = r.max_iterations;
    EXPECT_NEAR(r.steps.back().rel_max_error, serial.steps.back().rel_max_error, 1e-9);
  }
}

TEST(Pfasst, SingleRankSimulationMatchesMlsdcMode) {
  const SimulationResult p = run_simulation(small_simulation(Mode::Pfasst, 1, 4));
  const SimulationResult m = run_simulation(small_simulation(Mode::Mlsdc, 1, 4));
  ASSERT_EQ(p.steps.size(), 4u);
  ASSERT_EQ(m.steps.size(), 4u);
  for (std::size_t s = 0; s < 4; ++s) {
    EXPECT_NEAR(p.steps[s].rel_max_error, m.steps[s].rel_max_error, 1e-14);
    EXPECT_EQ(p.steps[s].iterations, m.steps[s].iterations);
  }
}

TEST(Pfasst, OneBlockForAllSteps) {
  SimulationConfig sc;
  sc.mode = Mode::Pfasst;
  sc.pfasst = scalar_config(32);
  const SimulationResult r = run_simulation(sc);
  EXPECT_EQ(r.steps.size(), 32u);
  EXPECT_TRUE(r.converged);
}

TEST(Pfasst, StepCounts) {
  EXPECT_EQ(step_count(6.0, 0.1875), 32);
  EXPECT_THROW(step_count(1.0, 0.3), InvalidArgument);
  SimulationConfig sc;
  sc.pfasst = scalar_config(5);
  EXPECT_THROW(run_simulation(sc), InvalidArgument);
}

TEST(Pfasst, SolverFailureSurfacesFromEveryBackend) {
  for (Backend backend : {Backend::Sequential, Backend::Concurrent}) {
    PfasstConfig cfg = small_config(2);
    cfg.coarse.kind = StencilKind::FourthOrderCompact;
    cfg.mg.compact_smoother = CompactSmoother::WeightedJacobi;
    cfg.mg.jacobi_weight = 3.0;
    cfg.backend = backend;
    EXPECT_THROW(run_block(cfg, exact_solution(0.0, 15), 0.0, 0.1875), SolverDiverged);
  }
}

TEST(Mailbox, SequentialDetectsScheduleErrors) {
  SequentialMailbox box;
  EXPECT_THROW(box.receive({0, 1, Channel::Coarse}, nullptr), ProtocolViolation);
  box.send({0, 1, Channel::Coarse}, Field(1, 2.0));
  EXPECT_THROW(box.send({0, 1, Channel::Coarse}, Field(1, 3.0)), ProtocolViolation);
  EXPECT_EQ(box.pending(), 1u);
  EXPECT_EQ(box.receive({0, 1, Channel::Coarse}, nullptr)[0], 2.0);
  EXPECT_EQ(box.pending(), 0u);
}

TEST(Mailbox, ConcurrentDeliversByTagNotOrder) {
  ConcurrentMailbox box;
  box.send({0, 2, Channel::Fine}, Field(1, 2.0));
  box.send({0, 1, Channel::Fine}, Field(1, 1.0));
  double wait = 0.0;
  EXPECT_EQ(box.receive({0, 1, Channel::Fine}, &wait)[0], 1.0);
  EXPECT_EQ(box.receive({0, 2, Channel::Fine}, &wait)[0], 2.0);
  EXPECT_THROW(box.send({0, 2, Channel::Fine}, Field(1)), ProtocolViolation);
}

TEST(Mailbox, ConcurrentReceiveBlocksUntilSend) {
  ConcurrentMailbox box;
  std::thread sender([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    box.send({0, 0, Channel::Coarse}, Field(1, 5.0));
  });
  double wait = 0.0;
  EXPECT_EQ(box.receive({0, 0, Channel::Coarse}, &wait)[0], 5.0);
  sender.join();
  EXPECT_GT(wait, 0.0);
}

TEST(Mailbox, ConcurrentDetectsTerminatedSender) {
  ConcurrentMailbox box;
  box.send({0, 0, Channel::Coarse}, Field(1, 1.0));
  box.mark_terminated(0);
  // a message posted before termination is still delivered
  EXPECT_EQ(box.receive({0, 0, Channel::Coarse}, nullptr)[0], 1.0);
  EXPECT_THROW(box.receive({0, 1, Channel::Coarse}, nullptr), ProtocolViolation);

  ConcurrentMailbox waiting;
  std::thread finisher([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    waiting.mark_terminated(3);
  });
  EXPECT_THROW(waiting.receive({3, 4, Channel::Fine}, nullptr), ProtocolViolation);
  finisher.join();
}
