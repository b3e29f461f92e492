#include "stheat/perfmodel.hpp"

#include <fmt/format.h>

#include "stheat/errors.hpp"

namespace stheat {

double model_speedup(const SpeedupParams& p) {
  if (p.k_serial < 0 || p.k_parallel < 0 || p.alpha < 0 || p.beta < 0 || p.ranks < 1) {
    throw InvalidArgument("model_speedup: parameters must be non-negative and ranks >= 1");
  }
  const double denom = p.ranks * p.alpha + p.k_parallel * (1.0 + p.alpha + p.beta);
  if (!(denom > 0.0)) throw InvalidArgument("model_speedup: zero denominator");
  return p.k_serial * p.ranks / denom;
}

TimingRecord& TimingRecord::operator+=(const TimingRecord& o) {
  fine_sweep += o.fine_sweep;
  coarse_sweep += o.coarse_sweep;
  restrict_fas += o.restrict_fas;
  interpolation += o.interpolation;
  comm_wait += o.comm_wait;
  fine_sweeps += o.fine_sweeps;
  coarse_sweeps += o.coarse_sweeps;
  return *this;
}

double TimingRecord::total() const {
  return fine_sweep + coarse_sweep + restrict_fas + interpolation + comm_wait;
}

double measure_alpha(const TimingRecord& t) {
  if (t.fine_sweeps <= 0 || t.coarse_sweeps <= 0 || t.fine_sweep <= 0.0) {
    throw InsufficientData("measure_alpha: need at least one fine and one coarse sweep");
  }
  return (t.coarse_sweep / static_cast<double>(t.coarse_sweeps)) /
         (t.fine_sweep / static_cast<double>(t.fine_sweeps));
}

double measure_beta(const TimingRecord& t) {
  if (t.fine_sweeps <= 0 || t.fine_sweep <= 0.0) {
    throw InsufficientData("measure_beta: need at least one fine sweep");
  }
  return (t.restrict_fas + t.interpolation + t.comm_wait) / t.fine_sweep;
}

std::vector<EfficiencyRow> efficiency_table(std::span<const double> speedups,
                                            std::span<const int> ranks) {
  if (speedups.size() != ranks.size()) {
    throw InvalidArgument("efficiency_table: speedups and ranks differ in length");
  }
  std::vector<EfficiencyRow> rows;
  rows.reserve(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] < 1) throw InvalidArgument("efficiency_table: ranks must be >= 1");
    rows.push_back({ranks[i], speedups[i], 100.0 * speedups[i] / ranks[i]});
  }
  return rows;
}

std::string format_percent(double percent) { return fmt::format("{:.1f}%", percent); }

double observed_speedup(double serial_step_time, int steps, double parallel_total) {
  if (!(parallel_total > 0.0)) throw InvalidArgument("observed_speedup: parallel time must be positive");
  if (!(serial_step_time > 0.0) || steps <= 0) {
    throw InvalidArgument("observed_speedup: inputs must be positive");
  }
  return serial_step_time * steps / parallel_total;
}

}  // namespace stheat
