#pragma once

#include <compare>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stheat/hierarchy.hpp"

namespace stheat {

/// Which exchange a message belongs to.
enum class Channel { Predictor, Fine, Coarse };

/// Identity of a message. `stage` is the predictor stage for Predictor
/// messages and the iteration number otherwise (iteration 0 is the state
/// left by the predictor).
struct MessageTag {
  int sender = 0;
  int stage = 0;
  Channel channel = Channel::Coarse;

  auto operator<=>(const MessageTag&) const = default;
};

std::string to_string(const MessageTag& tag);

/// One entry of a rank's receive log.
struct ConsumedMessage {
  int at_stage = 0;  ///< predictor stage or iteration in which the receive happened
  bool in_predictor = false;
  MessageTag tag;
};

/// Point-to-point transport between neighbouring time ranks. Sends never wait.
class Mailbox {
 public:
  virtual ~Mailbox() = default;
  /// Posts a message. Sending the same tag twice is a protocol violation.
  virtual void send(const MessageTag& tag, Field value) = 0;
  /// Takes the message with this tag; the time spent waiting is added to `wait_seconds`.
  virtual Field receive(const MessageTag& tag, double* wait_seconds) = 0;
  /// Marks a rank as finished; receives that can no longer be satisfied fail.
  virtual void mark_terminated(int rank) = 0;
};

/// Single-threaded transport: a receive for a message that was not posted yet
/// is a schedule error and raises ProtocolViolation.
class SequentialMailbox final : public Mailbox {
 public:
  void send(const MessageTag& tag, Field value) override;
  Field receive(const MessageTag& tag, double* wait_seconds) override;
  void mark_terminated(int rank) override;
  std::size_t pending() const { return slots_.size(); }

 private:
  std::map<MessageTag, Field> slots_;
  std::set<MessageTag> sent_;
};

/// Thread-safe transport with one slot per tag. A receive blocks until the
/// message arrives; it raises ProtocolViolation when the sender terminated
/// without posting it.
class ConcurrentMailbox final : public Mailbox {
 public:
  void send(const MessageTag& tag, Field value) override;
  Field receive(const MessageTag& tag, double* wait_seconds) override;
  void mark_terminated(int rank) override;
  /// Wakes all waiters; subsequent receives throw.
  void abort();
  std::size_t pending() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::map<MessageTag, Field> slots_;
  std::set<MessageTag> sent_;
  std::vector<int> terminated_;
  bool aborted_ = false;
};

enum class Backend { Sequential, Concurrent };

struct PfasstConfig {
  HeatProblem problem;
  LevelConfig fine{31, StencilKind::FourthOrderCompact, 5};
  LevelConfig coarse{15, StencilKind::SecondOrder7pt, 3};
  MgConfig mg;
  int coarse_sweeps = 1;
  int ranks = 1;
  double tol = 1e-10;
  int max_iter = 200;
  Backend backend = Backend::Sequential;
};

/// Outcome of one block of `ranks` consecutive time steps.
struct BlockResult {
  std::vector<Field> end_values;           ///< fine end value per rank
  std::vector<int> iterations;             ///< K per rank
  std::vector<double> residuals;           ///< final fine residual per rank
  std::vector<double> residual_history;    ///< max residual over ranks per iteration
  bool converged = false;
  std::vector<TimingRecord> timing;        ///< per rank
  std::vector<std::vector<ConsumedMessage>> receive_log;  ///< per rank

  int max_iterations() const;
  TimingRecord merged_timing() const;
};

/// Runs one block: rank p integrates [t0 + p dt, t0 + (p + 1) dt] starting from
/// the block initial value u0. All ranks iterate until every rank's fine
/// residual is at most cfg.tol or cfg.max_iter iterations were done.
BlockResult run_block(const PfasstConfig& cfg, const Field& u0, double t0, double dt);

enum class Mode { Sdc, Mlsdc, Pfasst };

struct SimulationConfig {
  Mode mode = Mode::Pfasst;
  PfasstConfig pfasst;  ///< levels, tolerances and backend; the fine level also drives SDC
  double dt = 0.1875;
  double t_end = 6.0;
};

struct StepRecord {
  int step = 0;
  int iterations = 0;
  double residual = 0.0;
  double rel_max_error = 0.0;
};

struct SimulationResult {
  std::vector<StepRecord> steps;
  Field final_value;
  bool converged = true;
  int max_iterations = 0;     ///< K over all steps
  TimingRecord timing;        ///< summed over ranks and blocks
  double total_seconds = 0.0;
};

/// Number of steps t_end / dt; throws InvalidArgument unless it is a positive integer.
int step_count(double t_end, double dt);

/// Integrates from the analytic initial value at t = 0 to t_end. Blocks of
/// `ranks` steps run one after another; every mode requires the step count to be
/// divisible by the rank count.
SimulationResult run_simulation(const SimulationConfig& cfg);

}  // namespace stheat
