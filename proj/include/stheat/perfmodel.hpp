#pragma once

#include <chrono>
#include <span>
#include <string>
#include <vector>

namespace stheat {

/// Parameters of the two-level PFASST speedup model.
struct SpeedupParams {
  double k_serial = 1.0;    ///< K_S: sweeps per step of serial SDC
  double k_parallel = 1.0;  ///< K_P: PFASST iterations
  double alpha = 0.0;       ///< coarse / fine sweep runtime
  double beta = 0.0;        ///< overhead per fine sweep
  double ranks = 1.0;       ///< P_T
};

/// s(P_T) = K_S P_T / (P_T alpha + K_P (1 + alpha + beta))
double model_speedup(const SpeedupParams& p);

/// Accumulated wall-clock seconds per phase for one time rank.
struct TimingRecord {
  double fine_sweep = 0.0;
  double coarse_sweep = 0.0;
  double restrict_fas = 0.0;
  double interpolation = 0.0;
  double comm_wait = 0.0;
  long fine_sweeps = 0;
  long coarse_sweeps = 0;

  TimingRecord& operator+=(const TimingRecord& other);
  double total() const;
};

/// Adds the elapsed time of its scope to `slot`.
class ScopedTimer {
 public:
  explicit ScopedTimer(double* slot) : slot_(slot), start_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    if (slot_ != nullptr) {
      *slot_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  double* slot_;
  std::chrono::steady_clock::time_point start_;
};

/// Mean coarse sweep time over mean fine sweep time.
double measure_alpha(const TimingRecord& t);
/// (restriction + FAS + interpolation + communication wait) / fine sweep time.
double measure_beta(const TimingRecord& t);

struct EfficiencyRow {
  int ranks = 1;
  double speedup = 0.0;
  double efficiency = 0.0;  ///< percent
};

std::vector<EfficiencyRow> efficiency_table(std::span<const double> speedups,
                                            std::span<const int> ranks);
/// "52.1%"
std::string format_percent(double percent);

/// (serial_step_time * steps) / parallel_total
double observed_speedup(double serial_step_time, int steps, double parallel_total);

}  // namespace stheat
