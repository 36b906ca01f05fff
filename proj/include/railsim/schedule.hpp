#pragma once

// Cyclic real-time scheduling model. Periods are integers in a configurable
// base time unit (default microseconds) so lcm and RT-cycle arithmetic are
// exact; execution times are reals in the same unit.
//
// An assignment matrix x[i][j] places task i on core j; each core j runs a
// repeating RT-cycle of integer length L_j, and a task's period is quantized
// down to the nearest multiple of its core's L (its effective period T').

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "railsim/errors.hpp"

namespace railsim {

using Ticks = std::int64_t;

struct TaskSpec {
    std::string id;
    Ticks period = 0;           // T_i, integer ticks
    std::vector<double> wcet;   // tau_{i,j} per core, ticks
    std::optional<int> group;   // optional integration-group link

    void validate(int cores) const;
};

struct SchedulingProblem {
    std::vector<TaskSpec> tasks;
    int cores = 1;
    double switch_cost = 0.0;  // p, ticks per resident task per RT-cycle
    std::string time_unit = "us";

    void validate() const;
};

struct ScheduleSolution {
    std::vector<std::vector<int>> x;  // tasks x cores, entries 0/1
    std::vector<Ticks> cycle;         // L_j per core

    int assigned_core(std::size_t task) const;  // -1 if row is not a unit row
};

struct Violation {
    std::string constraint;  // e.g. "load", "load_effective", "unique_core", ...
    int index;               // offending task or core index
    std::string detail;
};

struct Feasibility {
    bool feasible;
    double utilization;
};

struct BlockSplit {
    double fraction;             // Delta
    int block_count;             // ceil(1/Delta)
    double window;               // Delta * tau, per-RT-cycle budget
    std::vector<double> blocks;  // lengths, sum to tau
};

// Per-task block plans, indexed like SchedulingProblem::tasks. Tasks without
// an entry execute unsplit (Delta = 1).
using BlockPlan = std::vector<std::optional<BlockSplit>>;

// Necessary cyclic-schedule condition: sum of tau/T on one core <= 1.
Feasibility utilization_feasible(const std::vector<TaskSpec>& tasks, int core);

// T' = largest multiple of L not exceeding T.
Ticks effective_period(Ticks T, Ticks L);

// Least common multiple; throws CapacityError on overflow.
Ticks hyperperiod(const std::vector<Ticks>& periods);

// Schedule cost: per core, the utilization inflation caused by period
// quantization plus the per-cycle switching overhead p per resident task.
double objective(const SchedulingProblem& problem, const ScheduleSolution& sol);

// All constraint violations of a candidate solution; empty means valid.
// Core load is checked both against the nominal periods and against the
// quantized effective periods (the latter is what actually runs).
std::vector<Violation> validate_solution(const SchedulingProblem& problem,
                                         const ScheduleSolution& sol);

// Splits an execution time tau into ceil(1/Delta) blocks with per-cycle
// window Delta*tau; the last block carries the remainder.
BlockSplit split_blocks(double tau, double delta, Ticks L);

// Smallest period among tasks assigned to the given core, or nullopt if none.
std::optional<Ticks> min_assigned_period(const SchedulingProblem& problem,
                                         const ScheduleSolution& sol, int core);

// JSON wire format:
// {"time_unit":"us","cores":n,"switch_cost":p,
//  "tasks":[{"id":...,"period":...,"wcet":[per-core]}]}
nlohmann::json problem_to_json(const SchedulingProblem& problem);
SchedulingProblem problem_from_json(const nlohmann::json& j);

nlohmann::json solution_to_json(const ScheduleSolution& sol);
ScheduleSolution solution_from_json(const nlohmann::json& j);

}  // namespace railsim
