#include "railsim/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace railsim {

void TaskSpec::validate(int cores) const {
    if (id.empty()) throw ValidationError("task id: must be non-empty");
    if (period < 1) throw ValidationError("task " + id + ": period must be a positive integer");
    if (static_cast<int>(wcet.size()) != cores)
        throw ValidationError("task " + id + ": wcet must have one entry per core");
    bool fits_somewhere = false;
    for (double w : wcet) {
        if (!(w > 0)) throw ValidationError("task " + id + ": wcet must be strictly positive");
        if (w <= static_cast<double>(period)) fits_somewhere = true;
    }
    if (!fits_somewhere)
        throw ValidationError("task " + id + ": wcet exceeds period on every core");
}

void SchedulingProblem::validate() const {
    if (tasks.empty()) throw ValidationError("tasks: at least one task required");
    if (cores < 1) throw ValidationError("cores: must be >= 1");
    if (switch_cost < 0) throw ValidationError("switch_cost: must be non-negative");
    for (const auto& t : tasks) t.validate(cores);
}

int ScheduleSolution::assigned_core(std::size_t task) const {
    if (task >= x.size()) return -1;
    int core = -1;
    for (std::size_t j = 0; j < x[task].size(); ++j) {
        if (x[task][j] == 1) {
            if (core >= 0) return -1;
            core = static_cast<int>(j);
        } else if (x[task][j] != 0) {
            return -1;
        }
    }
    return core;
}

Feasibility utilization_feasible(const std::vector<TaskSpec>& tasks, int core) {
    double u = 0.0;
    for (const auto& t : tasks) {
        if (core < 0 || core >= static_cast<int>(t.wcet.size()))
            throw ValidationError("task " + t.id + ": no wcet for core " + std::to_string(core));
        u += t.wcet[static_cast<std::size_t>(core)] / static_cast<double>(t.period);
    }
    return {u <= 1.0, u};
}

Ticks effective_period(Ticks T, Ticks L) {
    if (L < 1) throw ScheduleError("L must be >= 1");
    if (L > T) throw ScheduleError("L=" + std::to_string(L) + " exceeds period " + std::to_string(T));
    return L * (T / L);
}

Ticks hyperperiod(const std::vector<Ticks>& periods) {
    if (periods.empty()) throw ValidationError("periods: empty");
    Ticks acc = 1;
    for (Ticks p : periods) {
        if (p < 1) throw ValidationError("periods: must be >= 1");
        const Ticks g = std::gcd(acc, p);
        const __int128 wide = static_cast<__int128>(acc / g) * p;
        if (wide > std::numeric_limits<Ticks>::max())
            throw CapacityError("hyperperiod overflows the tick range");
        acc = static_cast<Ticks>(wide);
    }
    return acc;
}

namespace {

void check_structure(const SchedulingProblem& problem, const ScheduleSolution& sol) {
    const std::size_t M = problem.tasks.size();
    if (sol.x.size() != M || sol.cycle.size() != static_cast<std::size_t>(problem.cores))
        throw ValidationError("solution: shape does not match problem");
    for (std::size_t i = 0; i < M; ++i) {
        if (sol.x[i].size() != static_cast<std::size_t>(problem.cores))
            throw ValidationError("solution: assignment row " + std::to_string(i) + " has wrong width");
        if (sol.assigned_core(i) < 0)
            throw ValidationError("solution: task " + problem.tasks[i].id +
                                  " is not assigned to exactly one core");
    }
}

}  // namespace

std::optional<Ticks> min_assigned_period(const SchedulingProblem& problem,
                                         const ScheduleSolution& sol, int core) {
    std::optional<Ticks> best;
    for (std::size_t i = 0; i < problem.tasks.size(); ++i) {
        if (sol.assigned_core(i) == core)
            best = best ? std::min(*best, problem.tasks[i].period) : problem.tasks[i].period;
    }
    return best;
}

double objective(const SchedulingProblem& problem, const ScheduleSolution& sol) {
    check_structure(problem, sol);
    double F = 0.0;
    for (int j = 0; j < problem.cores; ++j) {
        const Ticks L = sol.cycle[static_cast<std::size_t>(j)];
        int resident = 0;
        double core_cost = 0.0;
        for (std::size_t i = 0; i < problem.tasks.size(); ++i) {
            if (sol.assigned_core(i) != j) continue;
            ++resident;
            const TaskSpec& t = problem.tasks[i];
            const double tau = t.wcet[static_cast<std::size_t>(j)];
            const Ticks Tp = effective_period(t.period, L);
            core_cost += tau / static_cast<double>(Tp) - tau / static_cast<double>(t.period);
        }
        if (resident == 0) continue;  // idle cores contribute nothing
        if (L < 1) throw ValidationError("solution: L must be >= 1 on core " + std::to_string(j));
        F += core_cost + static_cast<double>(resident) * problem.switch_cost /
                             static_cast<double>(L);
    }
    return F;
}

std::vector<Violation> validate_solution(const SchedulingProblem& problem,
                                         const ScheduleSolution& sol) {
    std::vector<Violation> out;
    const std::size_t M = problem.tasks.size();
    const auto n = static_cast<std::size_t>(problem.cores);

    if (sol.x.size() != M || sol.cycle.size() != n) {
        out.push_back({"shape", 0, "assignment/cycle shapes do not match the problem"});
        return out;
    }

    int assigned_total = 0;
    for (std::size_t i = 0; i < M; ++i) {
        if (sol.x[i].size() != n) {
            out.push_back({"shape", static_cast<int>(i), "assignment row has wrong width"});
            return out;
        }
        int row = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (sol.x[i][j] != 0 && sol.x[i][j] != 1)
                out.push_back({"binary", static_cast<int>(i), "x entries must be 0 or 1"});
            row += sol.x[i][j];
        }
        assigned_total += row;
        if (row != 1)
            out.push_back({"unique_core", static_cast<int>(i),
                           "task " + problem.tasks[i].id + " assigned to " + std::to_string(row) +
                               " cores"});
    }
    if (assigned_total != static_cast<int>(M))
        out.push_back({"all_tasks", 0, "total assignments != number of tasks"});

    for (int j = 0; j < problem.cores; ++j) {
        const Ticks L = sol.cycle[static_cast<std::size_t>(j)];
        const auto min_T = min_assigned_period(problem, sol, j);
        if (!min_T) continue;  // idle core: L unconstrained
        if (L < 1) {
            out.push_back({"cycle_natural", j, "L must be a positive integer"});
            continue;
        }
        if (L > *min_T) {
            out.push_back({"cycle_bound", j,
                           "L=" + std::to_string(L) + " exceeds min assigned period " +
                               std::to_string(*min_T)});
            continue;
        }
        double u_nominal = 0.0, u_effective = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            if (sol.x[i][static_cast<std::size_t>(j)] != 1) continue;
            const TaskSpec& t = problem.tasks[i];
            // Malformed multi-assignment rows can place a task whose period is
            // below this core's L; unique_core already flags them.
            if (L > t.period) continue;
            const double tau = t.wcet[static_cast<std::size_t>(j)];
            u_nominal += tau / static_cast<double>(t.period);
            u_effective += tau / static_cast<double>(effective_period(t.period, L));
        }
        if (u_nominal > 1.0)
            out.push_back({"load", j, "nominal utilization " + std::to_string(u_nominal)});
        if (u_effective > 1.0)
            out.push_back(
                {"load_effective", j, "quantized utilization " + std::to_string(u_effective)});
    }
    return out;
}

BlockSplit split_blocks(double tau, double delta, Ticks L) {
    if (!(tau > 0)) throw ValidationError("tau: must be strictly positive");
    if (!(delta > 0.0 && delta <= 1.0)) throw ValidationError("delta: must be in (0, 1]");
    const double window = delta * tau;
    if (window > static_cast<double>(L))
        throw ScheduleError("block window " + std::to_string(window) + " exceeds RT-cycle L=" +
                            std::to_string(L));
    BlockSplit s;
    s.fraction = delta;
    s.window = window;
    const double inv = 1.0 / delta;
    const auto whole = static_cast<int>(std::floor(inv));
    s.block_count = static_cast<int>(std::ceil(inv));
    double remaining = tau;
    for (int b = 0; b < whole && remaining > window; ++b) {
        s.blocks.push_back(window);
        remaining -= window;
    }
    if (remaining > 0.0) s.blocks.push_back(remaining);
    s.block_count = static_cast<int>(s.blocks.size());
    return s;
}

nlohmann::json problem_to_json(const SchedulingProblem& problem) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : problem.tasks) {
        nlohmann::json jt{{"id", t.id}, {"period", t.period}, {"wcet", t.wcet}};
        if (t.group) jt["group"] = *t.group;
        tasks.push_back(std::move(jt));
    }
    return {{"time_unit", problem.time_unit},
            {"cores", problem.cores},
            {"switch_cost", problem.switch_cost},
            {"tasks", tasks}};
}

SchedulingProblem problem_from_json(const nlohmann::json& j) {
    SchedulingProblem p;
    for (const auto& [key, value] : j.items()) {
        if (key == "time_unit")
            p.time_unit = value.get<std::string>();
        else if (key == "cores")
            p.cores = value.get<int>();
        else if (key == "switch_cost")
            p.switch_cost = value.get<double>();
        else if (key == "tasks") {
            for (const auto& jt : value) {
                TaskSpec t;
                for (const auto& [tk, tv] : jt.items()) {
                    if (tk == "id")
                        t.id = tv.get<std::string>();
                    else if (tk == "period")
                        t.period = tv.get<Ticks>();
                    else if (tk == "wcet")
                        t.wcet = tv.get<std::vector<double>>();
                    else if (tk == "group")
                        t.group = tv.get<int>();
                    else
                        throw ValidationError("unknown task key: " + tk);
                }
                p.tasks.push_back(std::move(t));
            }
        } else {
            throw ValidationError("unknown scheduling key: " + key);
        }
    }
    p.validate();
    return p;
}

nlohmann::json solution_to_json(const ScheduleSolution& sol) {
    return {{"assignment", sol.x}, {"cycle", sol.cycle}};
}

ScheduleSolution solution_from_json(const nlohmann::json& j) {
    ScheduleSolution s;
    s.x = j.at("assignment").get<std::vector<std::vector<int>>>();
    s.cycle = j.at("cycle").get<std::vector<Ticks>>();
    return s;
}

}  // namespace railsim
