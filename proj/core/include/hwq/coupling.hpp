#pragma once

#include <cstddef>
#include <vector>

#include "hwq/queue_sim.hpp"

namespace hwq {

/// Input to a FCFS G/G/k run that starts at time t0 with every server busy.
struct FcfsInput {
  double t0 = 0.0;
  double horizon = 0.0;
  /// Remaining processing time of the job on server i at t0 (all positive).
  std::vector<double> initial_remaining;
  /// Processing times of jobs waiting at t0, in queue order.
  std::vector<double> queued_work;
  /// Arrival times in (t0, horizon] and the processing time of each arrival.
  std::vector<double> arrival_times;
  std::vector<double> arrival_work;
};

/// Event-driven FCFS run with explicitly assigned processing times. Free
/// servers are taken lowest index first; departures precede arrivals at
/// equal times. The trace starts with the value at t0.
QueueTrace simulate_fcfs(const FcfsInput& input);

}  // namespace hwq
