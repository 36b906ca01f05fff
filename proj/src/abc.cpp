#include "railsim/abc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace railsim {

namespace {

constexpr double kPenaltyWeight = 10.0;
constexpr double kBruteForceBudget = 1e7;

std::vector<int> flatten(const std::vector<std::vector<int>>& x) {
    std::vector<int> out;
    for (const auto& row : x) out.insert(out.end(), row.begin(), row.end());
    return out;
}

// Lexicographic tie-break: flattened assignment first, then cycle vector.
bool lex_less(const ScheduleSolution& a, const ScheduleSolution& b) {
    const auto fa = flatten(a.x), fb = flatten(b.x);
    if (fa != fb) return fa < fb;
    return a.cycle < b.cycle;
}

Ticks clamp_cycle(const SchedulingProblem& problem, const ScheduleSolution& sol, int core,
                  Ticks L) {
    const auto min_T = min_assigned_period(problem, sol, core);
    if (!min_T) return 1;
    return std::clamp<Ticks>(L, 1, *min_T);
}

}  // namespace

void AbcParams::validate() const {
    if (colony_size < 2 || colony_size % 2 != 0)
        throw ValidationError("colony_size: must be even and >= 2");
    if (abandonment_limit < 1) throw ValidationError("abandonment_limit: must be >= 1");
    if (max_iterations < 1) throw ValidationError("max_iterations: must be >= 1");
}

CandidateSolution evaluate_candidate(const SchedulingProblem& problem, ScheduleSolution sol) {
    CandidateSolution c;

    // Objective needs L within bounds; evaluate a clamped copy and charge the
    // overshoot to the penalty so infeasible candidates stay comparable.
    double excess = 0.0;
    ScheduleSolution clamped = sol;
    for (int j = 0; j < problem.cores; ++j) {
        const Ticks L = sol.cycle[static_cast<std::size_t>(j)];
        const Ticks Lc = clamp_cycle(problem, sol, j, L);
        if (Lc != L)
            excess += std::fabs(static_cast<double>(L - Lc)) / static_cast<double>(Lc);
        clamped.cycle[static_cast<std::size_t>(j)] = Lc;
    }

    const auto violations = validate_solution(problem, sol);
    for (int j = 0; j < problem.cores; ++j) {
        double u_nom = 0.0, u_eff = 0.0;
        const Ticks L = clamped.cycle[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < problem.tasks.size(); ++i) {
            if (clamped.assigned_core(i) != j) continue;
            const TaskSpec& t = problem.tasks[i];
            const double tau = t.wcet[static_cast<std::size_t>(j)];
            u_nom += tau / static_cast<double>(t.period);
            u_eff += tau / static_cast<double>(effective_period(t.period, L));
        }
        if (u_nom > 1.0) excess += u_nom - 1.0;
        if (u_eff > 1.0) excess += u_eff - 1.0;
    }

    c.sol = std::move(sol);
    c.objective_value = objective(problem, clamped);
    c.penalty = violations.empty() ? 0.0
                                   : kPenaltyWeight * (static_cast<double>(violations.size()) +
                                                       excess);
    c.fitness = 1.0 / (1.0 + c.objective_value + c.penalty);
    return c;
}

ScheduleSolution random_solution(const SchedulingProblem& problem, std::mt19937_64& rng) {
    const std::size_t M = problem.tasks.size();
    const auto n = static_cast<std::size_t>(problem.cores);
    ScheduleSolution s;
    s.x.assign(M, std::vector<int>(n, 0));
    s.cycle.assign(n, 1);
    std::uniform_int_distribution<int> pick_core(0, problem.cores - 1);
    for (std::size_t i = 0; i < M; ++i) s.x[i][static_cast<std::size_t>(pick_core(rng))] = 1;
    for (int j = 0; j < problem.cores; ++j) {
        const auto min_T = min_assigned_period(problem, s, j);
        if (!min_T) continue;
        std::uniform_int_distribution<Ticks> pick_L(1, *min_T);
        s.cycle[static_cast<std::size_t>(j)] = pick_L(rng);
    }
    return s;
}

ScheduleSolution neighbor(const ScheduleSolution& sol, const SchedulingProblem& problem,
                          std::mt19937_64& rng) {
    ScheduleSolution s = sol;
    const std::size_t M = problem.tasks.size();

    std::vector<int> l_candidates;  // loaded cores where L has an alternative
    for (int j = 0; j < problem.cores; ++j) {
        const auto min_T = min_assigned_period(problem, s, j);
        if (min_T && *min_T > 1) l_candidates.push_back(j);
    }
    const bool can_move = problem.cores > 1 && M >= 1;
    const bool can_retune = !l_candidates.empty();
    if (!can_move && !can_retune) return s;  // nothing mutable

    bool do_move = can_move;
    if (can_move && can_retune) do_move = std::uniform_int_distribution<int>(0, 1)(rng) == 0;

    if (do_move) {
        std::uniform_int_distribution<std::size_t> pick_task(0, M - 1);
        const std::size_t i = pick_task(rng);
        const int from = s.assigned_core(i);
        std::uniform_int_distribution<int> pick_other(0, problem.cores - 2);
        int to = pick_other(rng);
        if (to >= from) ++to;
        s.x[i][static_cast<std::size_t>(from)] = 0;
        s.x[i][static_cast<std::size_t>(to)] = 1;
        for (int j : {from, to})
            s.cycle[static_cast<std::size_t>(j)] =
                clamp_cycle(problem, s, j, s.cycle[static_cast<std::size_t>(j)]);
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, l_candidates.size() - 1);
        const int j = l_candidates[pick(rng)];
        const Ticks min_T = *min_assigned_period(problem, s, j);
        const Ticks cur = s.cycle[static_cast<std::size_t>(j)];
        std::uniform_int_distribution<Ticks> pick_L(1, min_T - 1);
        Ticks next = pick_L(rng);
        if (next >= cur) ++next;  // uniform over [1, min_T] \ {cur}
        s.cycle[static_cast<std::size_t>(j)] = next;
    }
    return s;
}

OptimizeResult optimize(const SchedulingProblem& problem, const AbcParams& params) {
    problem.validate();
    params.validate();

    std::mt19937_64 rng(params.seed);
    const int sources_count = params.colony_size / 2;

    std::vector<CandidateSolution> sources;
    sources.reserve(static_cast<std::size_t>(sources_count));
    for (int s = 0; s < sources_count; ++s)
        sources.push_back(evaluate_candidate(problem, random_solution(problem, rng)));

    OptimizeResult result;
    double best_F = std::numeric_limits<double>::infinity();
    auto consider = [&](const CandidateSolution& c) {
        if (!c.feasible()) return;
        if (!result.feasible || c.objective_value < best_F ||
            (c.objective_value == best_F && lex_less(c.sol, result.best))) {
            result.feasible = true;
            best_F = c.objective_value;
            result.best = c.sol;
        }
    };
    for (const auto& s : sources) consider(s);

    auto greedy_replace = [&](CandidateSolution& slot, CandidateSolution cand) {
        consider(cand);
        if (cand.fitness > slot.fitness) {
            cand.trial_counter = 0;
            slot = std::move(cand);
        } else {
            ++slot.trial_counter;
        }
    };

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        // Employed phase.
        for (auto& src : sources)
            greedy_replace(src, evaluate_candidate(problem, neighbor(src.sol, problem, rng)));

        // Onlooker phase: fitness-proportional roulette.
        double fitness_sum = 0.0;
        for (const auto& src : sources) fitness_sum += src.fitness;
        std::uniform_real_distribution<double> spin(0.0, fitness_sum);
        for (int o = 0; o < sources_count; ++o) {
            double ball = spin(rng);
            std::size_t chosen = sources.size() - 1;
            for (std::size_t s = 0; s < sources.size(); ++s) {
                ball -= sources[s].fitness;
                if (ball <= 0.0) {
                    chosen = s;
                    break;
                }
            }
            greedy_replace(sources[chosen],
                           evaluate_candidate(problem, neighbor(sources[chosen].sol, problem, rng)));
        }

        // Scout phase: abandon the most exhausted source.
        auto worst = std::max_element(sources.begin(), sources.end(),
                                      [](const CandidateSolution& a, const CandidateSolution& b) {
                                          return a.trial_counter < b.trial_counter;
                                      });
        if (worst->trial_counter > params.abandonment_limit) {
            *worst = evaluate_candidate(problem, random_solution(problem, rng));
            consider(*worst);
        }

        result.history.push_back(result.feasible ? best_F
                                                 : std::numeric_limits<double>::infinity());
        result.iterations_used = iter + 1;
    }
    result.objective_value = result.feasible ? best_F : std::numeric_limits<double>::infinity();
    return result;
}

BruteForceResult brute_force(const SchedulingProblem& problem) {
    problem.validate();
    const std::size_t M = problem.tasks.size();
    const auto n = static_cast<std::size_t>(problem.cores);

    Ticks max_L = 1;
    for (const auto& t : problem.tasks) max_L = std::max(max_L, t.period);
    const double space = std::pow(static_cast<double>(n), static_cast<double>(M)) *
                         std::pow(static_cast<double>(max_L), static_cast<double>(n));
    if (space > kBruteForceBudget)
        throw CapacityError("brute force space ~" + std::to_string(space) + " exceeds budget");

    BruteForceResult best;
    bool found = false;

    std::vector<std::size_t> assign(M, 0);  // task -> core odometer
    for (;;) {
        ScheduleSolution s;
        s.x.assign(M, std::vector<int>(n, 0));
        s.cycle.assign(n, 1);
        for (std::size_t i = 0; i < M; ++i) s.x[i][assign[i]] = 1;

        std::vector<int> loaded;
        std::vector<Ticks> bound;
        for (int j = 0; j < problem.cores; ++j) {
            const auto min_T = min_assigned_period(problem, s, j);
            if (min_T) {
                loaded.push_back(j);
                bound.push_back(*min_T);
            }
        }

        std::vector<Ticks> L(loaded.size(), 1);
        for (;;) {
            for (std::size_t k = 0; k < loaded.size(); ++k)
                s.cycle[static_cast<std::size_t>(loaded[k])] = L[k];
            if (validate_solution(problem, s).empty()) {
                const double F = objective(problem, s);
                if (!found || F < best.objective_value ||
                    (F == best.objective_value && lex_less(s, best.best))) {
                    found = true;
                    best.objective_value = F;
                    best.best = s;
                }
            }
            // advance L odometer
            std::size_t k = 0;
            while (k < L.size() && ++L[k] > bound[k]) {
                L[k] = 1;
                ++k;
            }
            if (k == L.size()) break;
        }

        // advance assignment odometer
        std::size_t i = 0;
        while (i < M && ++assign[i] == n) {
            assign[i] = 0;
            ++i;
        }
        if (i == M) break;
    }
    if (!found) throw ScheduleError("no feasible solution exists for this instance");
    return best;
}

nlohmann::json optimize_result_to_json(const OptimizeResult& r) {
    nlohmann::json history = nlohmann::json::array();
    for (double f : r.history) {
        if (std::isfinite(f))
            history.push_back(f);
        else
            history.push_back(nullptr);
    }
    nlohmann::json j{{"feasible", r.feasible}, {"iterations_used", r.iterations_used},
                     {"history", history}};
    if (r.feasible) {
        j["assignment"] = r.best.x;
        j["cycle"] = r.best.cycle;
        j["objective"] = r.objective_value;
    }
    return j;
}

}  // namespace railsim
