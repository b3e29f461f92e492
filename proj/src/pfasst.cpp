#include "stheat/pfasst.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "stheat/errors.hpp"

namespace stheat {

namespace {

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::Predictor:
      return "predictor";
    case Channel::Fine:
      return "fine";
    case Channel::Coarse:
      return "coarse";
  }
  return "?";
}

// Raised in workers that are woken because another worker failed.
struct Aborted : std::exception {
  const char* what() const noexcept override { return "pfasst block aborted"; }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Max-reduction of the per-rank residuals of one iteration.
class ConvergenceBoard {
 public:
  explicit ConvergenceBoard(int ranks) : ranks_(ranks) {}

  double reduce(int iteration, double value, double* wait_seconds) {
    const auto start = std::chrono::steady_clock::now();
    std::unique_lock lock(mutex_);
    auto& entry = rounds_[iteration];
    ++entry.count;
    entry.max = std::max(entry.max, value);
    if (entry.count == ranks_) cv_.notify_all();
    cv_.wait(lock, [&] { return aborted_ || entry.count == ranks_; });
    if (wait_seconds != nullptr) *wait_seconds += seconds_since(start);
    if (entry.count != ranks_) throw Aborted{};
    return entry.max;
  }

  void abort() {
    {
      std::lock_guard lock(mutex_);
      aborted_ = true;
    }
    cv_.notify_all();
  }

 private:
  struct Round {
    int count = 0;
    double max = 0.0;
  };
  int ranks_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::map<int, Round> rounds_;
  bool aborted_ = false;
};

class RankWorker {
 public:
  RankWorker(const PfasstConfig& cfg, int rank, Mailbox& box, const Field& u0, double t0,
             double dt)
      : rank_(rank),
        last_(rank == cfg.ranks - 1),
        box_(box),
        h_(cfg.problem, cfg.fine, cfg.coarse, cfg.mg, cfg.coarse_sweeps) {
    h_.begin_step(t0 + static_cast<double>(rank) * dt, dt);
    h_.spread(u0);
  }

  int rank() const { return rank_; }
  Hierarchy& hierarchy() { return h_; }
  const std::vector<ConsumedMessage>& log() const { return log_; }

  // Stage j of the coarse burn-in; rank p takes part in stages 0..p.
  void predictor_stage(int j) {
    if (j == 0) {
      h_.restrict_state();
      h_.fas_correction();
    } else {
      h_.set_coarse_initial(take({rank_ - 1, j - 1, Channel::Predictor}, j, true));
    }
    for (int s = 0; s < h_.coarse_sweeps(); ++s) h_.coarse_sweep();
    if (!last_) box_.send({rank_, j, Channel::Predictor}, h_.coarse().state.end_value());
    if (j == rank_) {
      h_.coarse_correction();
      if (!last_) box_.send({rank_, 0, Channel::Fine}, h_.fine().state.end_value());
    }
  }

  double iterate(int k) {
    if (rank_ > 0) h_.set_fine_initial(take({rank_ - 1, k - 1, Channel::Fine}, k, false));
    h_.fine_sweep();
    if (!last_) box_.send({rank_, k, Channel::Fine}, h_.fine().state.end_value());
    h_.restrict_state();
    h_.fas_correction();
    if (rank_ > 0) h_.set_coarse_initial(take({rank_ - 1, k, Channel::Coarse}, k, false));
    for (int s = 0; s < h_.coarse_sweeps(); ++s) h_.coarse_sweep();
    if (!last_) box_.send({rank_, k, Channel::Coarse}, h_.coarse().state.end_value());
    h_.coarse_correction();
    return h_.fine_residual();
  }

 private:
  Field take(const MessageTag& tag, int stage, bool predictor) {
    Field v = box_.receive(tag, &h_.timing().comm_wait);
    log_.push_back({stage, predictor, tag});
    return v;
  }

  int rank_;
  bool last_;
  Mailbox& box_;
  Hierarchy h_;
  std::vector<ConsumedMessage> log_;
};

BlockResult collect(std::vector<std::unique_ptr<RankWorker>>& workers, std::vector<int> iterations,
                    std::vector<double> residuals, std::vector<double> history, double tol) {
  BlockResult r;
  for (auto& w : workers) {
    r.end_values.push_back(w->hierarchy().fine().state.end_value());
    r.timing.push_back(w->hierarchy().timing());
    r.receive_log.push_back(w->log());
  }
  r.iterations = std::move(iterations);
  r.residuals = std::move(residuals);
  r.residual_history = std::move(history);
  r.converged = !r.residual_history.empty() && r.residual_history.back() <= tol;
  return r;
}

BlockResult run_sequential(const PfasstConfig& cfg, const Field& u0, double t0, double dt) {
  SequentialMailbox box;
  std::vector<std::unique_ptr<RankWorker>> workers;
  for (int p = 0; p < cfg.ranks; ++p) {
    workers.push_back(std::make_unique<RankWorker>(cfg, p, box, u0, t0, dt));
  }
  for (int j = 0; j < cfg.ranks; ++j)
    for (int p = j; p < cfg.ranks; ++p) workers[static_cast<std::size_t>(p)]->predictor_stage(j);

  std::vector<double> residuals(static_cast<std::size_t>(cfg.ranks), 0.0);
  std::vector<double> history;
  int k = 0;
  while (k < cfg.max_iter) {
    ++k;
    for (auto& w : workers) residuals[static_cast<std::size_t>(w->rank())] = w->iterate(k);
    history.push_back(*std::max_element(residuals.begin(), residuals.end()));
    if (history.back() <= cfg.tol) break;
  }
  for (int p = 0; p < cfg.ranks; ++p) box.mark_terminated(p);
  return collect(workers, std::vector<int>(static_cast<std::size_t>(cfg.ranks), k), residuals,
                 history, cfg.tol);
}

BlockResult run_concurrent(const PfasstConfig& cfg, const Field& u0, double t0, double dt) {
  ConcurrentMailbox box;
  ConvergenceBoard board(cfg.ranks);
  const auto nranks = static_cast<std::size_t>(cfg.ranks);
  std::vector<std::unique_ptr<RankWorker>> workers;
  for (int p = 0; p < cfg.ranks; ++p) {
    workers.push_back(std::make_unique<RankWorker>(cfg, p, box, u0, t0, dt));
  }
  std::vector<int> iterations(nranks, 0);
  std::vector<double> residuals(nranks, 0.0);
  std::vector<std::vector<double>> histories(nranks);
  std::vector<std::exception_ptr> errors(nranks);

  auto body = [&](std::size_t p) {
    RankWorker& w = *workers[p];
    try {
      for (int j = 0; j <= w.rank(); ++j) w.predictor_stage(j);
      for (int k = 1; k <= cfg.max_iter; ++k) {
        residuals[p] = w.iterate(k);
        iterations[p] = k;
        const double global =
            board.reduce(k, residuals[p], &w.hierarchy().timing().comm_wait);
        histories[p].push_back(global);
        if (global <= cfg.tol) break;
      }
    } catch (const Aborted&) {
      // another rank failed first
    } catch (...) {
      errors[p] = std::current_exception();
      box.abort();
      board.abort();
    }
    box.mark_terminated(w.rank());
  };

  std::vector<std::thread> threads;
  threads.reserve(nranks);
  for (std::size_t p = 0; p < nranks; ++p) threads.emplace_back(body, p);
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return collect(workers, iterations, residuals, histories.front(), cfg.tol);
}

}  // namespace

std::string to_string(const MessageTag& tag) {
  return fmt::format("(sender {}, stage {}, {})", tag.sender, tag.stage, channel_name(tag.channel));
}

void SequentialMailbox::send(const MessageTag& tag, Field value) {
  if (!sent_.insert(tag).second) throw ProtocolViolation("message sent twice: " + to_string(tag));
  slots_.emplace(tag, std::move(value));
}

Field SequentialMailbox::receive(const MessageTag& tag, double* /*wait_seconds*/) {
  auto it = slots_.find(tag);
  if (it == slots_.end()) {
    throw ProtocolViolation("receive of a message that was never sent: " + to_string(tag));
  }
  Field v = std::move(it->second);
  slots_.erase(it);
  return v;
}

void SequentialMailbox::mark_terminated(int /*rank*/) {}

void ConcurrentMailbox::send(const MessageTag& tag, Field value) {
  {
    std::lock_guard lock(mutex_);
    if (!sent_.insert(tag).second) throw ProtocolViolation("message sent twice: " + to_string(tag));
    slots_.emplace(tag, std::move(value));
  }
  cv_.notify_all();
}

Field ConcurrentMailbox::receive(const MessageTag& tag, double* wait_seconds) {
  const auto start = std::chrono::steady_clock::now();
  std::unique_lock lock(mutex_);
  auto sender_done = [&] {
    return std::find(terminated_.begin(), terminated_.end(), tag.sender) != terminated_.end();
  };
  cv_.wait(lock, [&] { return aborted_ || slots_.count(tag) > 0 || sender_done(); });
  if (wait_seconds != nullptr) *wait_seconds += seconds_since(start);
  auto it = slots_.find(tag);
  if (it == slots_.end()) {
    if (aborted_) throw Aborted{};
    throw ProtocolViolation("sender terminated without sending " + to_string(tag));
  }
  Field v = std::move(it->second);
  slots_.erase(it);
  return v;
}

void ConcurrentMailbox::mark_terminated(int rank) {
  {
    std::lock_guard lock(mutex_);
    terminated_.push_back(rank);
  }
  cv_.notify_all();
}

void ConcurrentMailbox::abort() {
  {
    std::lock_guard lock(mutex_);
    aborted_ = true;
  }
  cv_.notify_all();
}

std::size_t ConcurrentMailbox::pending() const {
  std::lock_guard lock(mutex_);
  return slots_.size();
}

int BlockResult::max_iterations() const {
  return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end());
}

TimingRecord BlockResult::merged_timing() const {
  TimingRecord t;
  for (const auto& r : timing) t += r;
  return t;
}

BlockResult run_block(const PfasstConfig& cfg, const Field& u0, double t0, double dt) {
  if (cfg.ranks < 1) throw InvalidArgument("run_block: ranks must be >= 1");
  if (cfg.max_iter < 1) throw InvalidArgument("run_block: max_iter must be >= 1");
  if (!(dt > 0.0)) throw InvalidArgument("run_block: dt must be positive");
  if (u0.n() != cfg.fine.n) throw InvalidArgument("run_block: initial value has the wrong size");
  return cfg.backend == Backend::Sequential ? run_sequential(cfg, u0, t0, dt)
                                            : run_concurrent(cfg, u0, t0, dt);
}

int step_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw InvalidArgument("dt and t_end must be positive");
  const double ratio = t_end / dt;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument(fmt::format("t_end / dt = {} is not a whole number of steps", ratio));
  }
  return static_cast<int>(rounded);
}

SimulationResult run_simulation(const SimulationConfig& cfg) {
  const PfasstConfig& pc = cfg.pfasst;
  const int steps = step_count(cfg.t_end, cfg.dt);
  if (pc.ranks < 1) throw InvalidArgument("ranks must be >= 1");
  if (steps % pc.ranks != 0) {
    throw InvalidArgument(
        fmt::format("{} steps cannot be split into blocks of {} time ranks", steps, pc.ranks));
  }
  const auto start = std::chrono::steady_clock::now();
  const double dt = cfg.dt;
  SimulationResult out;
  Field u = exact_solution(0.0, pc.fine.n);

  auto record = [&](int step, int iterations, double residual, bool converged) {
    out.steps.push_back(
        {step, iterations, residual, rel_max_error(u, static_cast<double>(step + 1) * dt)});
    out.converged = out.converged && converged;
    out.max_iterations = std::max(out.max_iterations, iterations);
  };

  switch (cfg.mode) {
    case Mode::Sdc: {
      HeatDiscretization disc(pc.problem, pc.fine.n, pc.fine.kind, pc.mg);
      for (int n = 0; n < steps; ++n) {
        StepReport rep = sdc_step(u, static_cast<double>(n) * dt, dt, pc.tol, pc.max_iter, disc,
                                  pc.fine.num_nodes, &out.timing);
        u = std::move(rep.u_end);
        record(n, rep.iterations, rep.residual, rep.converged);
      }
      break;
    }
    case Mode::Mlsdc: {
      Hierarchy h(pc.problem, pc.fine, pc.coarse, pc.mg, pc.coarse_sweeps);
      for (int n = 0; n < steps; ++n) {
        StepReport rep = mlsdc_step(h, u, static_cast<double>(n) * dt, dt, pc.tol, pc.max_iter);
        u = std::move(rep.u_end);
        record(n, rep.iterations, rep.residual, rep.converged);
      }
      out.timing = h.timing();
      break;
    }
    case Mode::Pfasst: {
      for (int first = 0; first < steps; first += pc.ranks) {
        BlockResult block = run_block(pc, u, static_cast<double>(first) * dt, dt);
        for (int p = 0; p < pc.ranks; ++p) {
          const auto pi = static_cast<std::size_t>(p);
          u = block.end_values[pi];
          record(first + p, block.iterations[pi], block.residuals[pi], block.converged);
        }
        out.timing += block.merged_timing();
      }
      break;
    }
  }
  out.final_value = std::move(u);
  out.total_seconds = seconds_since(start);
  return out;
}

}  // namespace stheat
