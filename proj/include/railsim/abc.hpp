#pragma once

// Artificial bee colony search over (assignment, RT-cycle lengths), with an
// exhaustive brute-force oracle for small instances. The colony keeps
// colony_size/2 food sources; employed bees mutate their source, onlookers
// re-sample sources fitness-proportionally, and a source that fails to
// improve for abandonment_limit trials is replaced by a scout.

#include <cstdint>
#include <random>
#include <vector>

#include "railsim/schedule.hpp"

namespace railsim {

struct AbcParams {
    int colony_size = 20;        // even; half employed, half onlooker
    int abandonment_limit = 30;
    int max_iterations = 500;
    std::uint64_t seed = 0;

    void validate() const;
};

struct CandidateSolution {
    ScheduleSolution sol;
    double objective_value = 0.0;  // F
    double penalty = 0.0;          // 0 when constraint-valid
    double fitness = 0.0;          // 1 / (1 + F + penalty)
    int trial_counter = 0;

    bool feasible() const { return penalty == 0.0; }
};

struct OptimizeResult {
    bool feasible = false;           // a constraint-valid best was found
    ScheduleSolution best;
    double objective_value = 0.0;
    int iterations_used = 0;
    std::vector<double> history;     // best feasible F after each iteration
};

struct BruteForceResult {
    ScheduleSolution best;
    double objective_value = 0.0;
};

// Evaluates F, the infeasibility penalty and the resulting fitness.
CandidateSolution evaluate_candidate(const SchedulingProblem& problem, ScheduleSolution sol);

// One uniformly chosen mutation: move a task to another core, or pick a new
// L on one loaded core. Cycle lengths of affected cores are re-clamped to
// their minimum assigned period.
ScheduleSolution neighbor(const ScheduleSolution& sol, const SchedulingProblem& problem,
                          std::mt19937_64& rng);

// Uniform random structurally valid solution.
ScheduleSolution random_solution(const SchedulingProblem& problem, std::mt19937_64& rng);

OptimizeResult optimize(const SchedulingProblem& problem, const AbcParams& params);

// Exhaustive enumeration of every assignment and every per-core L in
// [1, min assigned period]. Ties on F go to the lexicographically smallest
// (flattened assignment, then cycle vector). Throws CapacityError when the
// search space exceeds ~1e7 points.
BruteForceResult brute_force(const SchedulingProblem& problem);

nlohmann::json optimize_result_to_json(const OptimizeResult& r);

}  // namespace railsim
