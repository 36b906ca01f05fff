#pragma once

// Cyclic-executive runtime: expands a schedule solution into an explicit
// slot table over one hyperperiod, runs integration workloads under it
// (deterministically in logical time, or wall-clock with deadline
// accounting), and measures task-body execution times.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "railsim/abc.hpp"
#include "railsim/multirate.hpp"
#include "railsim/schedule.hpp"

namespace railsim {

struct Slot {
    int core = 0;
    Ticks cycle_index = 0;   // RT-cycle number on this core
    std::size_t task = 0;    // index into SchedulingProblem::tasks
    int block = 0;
    Ticks release = 0;       // ticks from hyperperiod start
    Ticks deadline = 0;      // release + T'
    double planned_start = 0.0;
    double length = 0.0;     // wcet of this block, ticks
};

struct ScheduleTable {
    int cores = 0;
    Ticks hyperperiod = 0;              // lcm of effective periods
    std::vector<Ticks> cycle_len;       // L_j per core
    std::vector<Ticks> effective_period_of;  // T'_i per task
    std::vector<Slot> slots;            // ordered by (core, cycle, planned start)

    std::string to_text(const SchedulingProblem& problem) const;
};

ScheduleTable build_table(const SchedulingProblem& problem, const ScheduleSolution& sol,
                          const std::optional<BlockPlan>& blocks = std::nullopt);

struct TaskStats {
    std::string id;
    std::uint64_t activations = 0;
    std::uint64_t deadline_misses = 0;
    double max_lateness = 0.0;  // ticks (logical) or seconds (wall)
    double jitter = 0.0;        // max - min start offset within the period
    std::vector<double> slot_durations;  // wall mode only, seconds
};

struct ExecutionReport {
    std::vector<TaskStats> tasks;
    bool wall_clock = false;
    bool pinning_requested = false;
    bool pinning_ok = false;
    std::string warning;
};

nlohmann::json report_to_json(const ExecutionReport& r);

// Binds schedule-table tasks to integration rate groups. A task with
// effective period d * base_period advances its group by one Euler step of
// d*h at every activation.
struct IntegrationWorkload {
    VehicleParams vehicle;
    TrackExcitation track;
    VehicleState initial{};
    double h = 1e-4;               // base step [s]
    Ticks base_period = 0;         // ticks corresponding to one base step
    double duration = 0.0;         // [s]
    int output_stride = 1;
    std::map<std::string, int> task_group;  // task id -> group (0..2)
};

struct RunResult {
    Trajectory trajectory;
    ExecutionReport report;
};

// Single-threaded deterministic execution in logical time. Bit-identical to
// multirate_integrator::simulate with the divisor set implied by the table.
RunResult run_logical(const ScheduleTable& table, const SchedulingProblem& problem,
                      const IntegrationWorkload& workload);

struct RealtimeOptions {
    double tick_seconds = 1e-6;   // wall duration of one schedule tick
    bool request_pinning = true;
};

// One pinned (best effort) worker per used core; workers exchange state only
// at RT-cycle barriers. Numerics are identical to run_logical; the report
// additionally carries wall-clock deadline accounting.
RunResult run_realtime(const ScheduleTable& table, const SchedulingProblem& problem,
                       const IntegrationWorkload& workload, double duration,
                       const RealtimeOptions& opts = {});

struct WcetEstimate {
    std::uint64_t samples = 0;
    double max_ns = 0.0;
    double mean_ns = 0.0;
    double stddev_ns = 0.0;
    double timer_overhead_ns = 0.0;
    bool resolution_warning = false;
};

WcetEstimate measure_wcet(const std::function<void()>& body, std::uint64_t iterations,
                          std::uint64_t warmup);

nlohmann::json wcet_to_json(const WcetEstimate& e);

}  // namespace railsim
