#include "railsim/executor.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#ifdef __linux__
#include <pthread.h>
#include <sched.h>
#endif

namespace railsim {

namespace {

struct TaskLayout {
    int core;
    Ticks L;
    Ticks effective;   // T'
    double tau;
    std::vector<double> blocks;  // lengths, one per occupied consecutive cycle
};

std::vector<TaskLayout> layout_tasks(const SchedulingProblem& problem,
                                     const ScheduleSolution& sol,
                                     const std::optional<BlockPlan>& blocks) {
    std::vector<TaskLayout> out;
    out.reserve(problem.tasks.size());
    for (std::size_t i = 0; i < problem.tasks.size(); ++i) {
        const TaskSpec& t = problem.tasks[i];
        TaskLayout lay;
        lay.core = sol.assigned_core(i);
        lay.L = sol.cycle[static_cast<std::size_t>(lay.core)];
        lay.effective = effective_period(t.period, lay.L);
        lay.tau = t.wcet[static_cast<std::size_t>(lay.core)];
        if (blocks && i < blocks->size() && (*blocks)[i]) {
            const BlockSplit& split = (*blocks)[i].value();
            const Ticks k = lay.effective / lay.L;
            if (static_cast<Ticks>(split.blocks.size()) > k)
                throw ScheduleError("task " + t.id + ": " +
                                    std::to_string(split.blocks.size()) +
                                    " blocks do not fit in " + std::to_string(k) + " RT-cycles");
            lay.blocks = split.blocks;
        } else {
            lay.blocks = {lay.tau};
        }
        out.push_back(std::move(lay));
    }
    return out;
}

}  // namespace

ScheduleTable build_table(const SchedulingProblem& problem, const ScheduleSolution& sol,
                          const std::optional<BlockPlan>& blocks) {
    problem.validate();
    const auto violations = validate_solution(problem, sol);
    if (!violations.empty())
        throw ScheduleError("solution invalid: " + violations.front().constraint + " (" +
                            violations.front().detail + ")");

    const auto layouts = layout_tasks(problem, sol, blocks);

    ScheduleTable table;
    table.cores = problem.cores;
    table.cycle_len = sol.cycle;
    for (const auto& lay : layouts) table.effective_period_of.push_back(lay.effective);

    std::vector<Ticks> eff;
    for (const auto& lay : layouts) eff.push_back(lay.effective);
    table.hyperperiod = hyperperiod(eff);

    for (int core = 0; core < problem.cores; ++core) {
        const auto any = std::any_of(layouts.begin(), layouts.end(),
                                     [&](const TaskLayout& l) { return l.core == core; });
        if (!any) continue;
        const Ticks L = sol.cycle[static_cast<std::size_t>(core)];
        const Ticks cycles = table.hyperperiod / L;

        // Gather due blocks per cycle, then order each cycle EDF-wise.
        std::vector<std::vector<Slot>> per_cycle(static_cast<std::size_t>(cycles));
        for (std::size_t i = 0; i < layouts.size(); ++i) {
            const TaskLayout& lay = layouts[i];
            if (lay.core != core) continue;
            for (Ticks release = 0; release < table.hyperperiod; release += lay.effective) {
                for (std::size_t b = 0; b < lay.blocks.size(); ++b) {
                    Slot s;
                    s.core = core;
                    s.task = i;
                    s.block = static_cast<int>(b);
                    s.release = release;
                    s.deadline = release + lay.effective;
                    s.length = lay.blocks[b];
                    s.cycle_index = release / L + static_cast<Ticks>(b);
                    per_cycle[static_cast<std::size_t>(s.cycle_index)].push_back(s);
                }
            }
        }
        for (Ticks c = 0; c < cycles; ++c) {
            auto& list = per_cycle[static_cast<std::size_t>(c)];
            std::sort(list.begin(), list.end(), [&](const Slot& a, const Slot& b) {
                if (a.deadline != b.deadline) return a.deadline < b.deadline;
                if (problem.tasks[a.task].id != problem.tasks[b.task].id)
                    return problem.tasks[a.task].id < problem.tasks[b.task].id;
                return a.block < b.block;
            });
            double used = 0.0;
            for (Slot& s : list) {
                s.planned_start = static_cast<double>(c * L) + used;
                used += s.length;
            }
            if (used > static_cast<double>(L) + 1e-9)
                throw ScheduleError("RT-cycle " + std::to_string(c) + " on core " +
                                    std::to_string(core) + " overflows: " + std::to_string(used) +
                                    " > L=" + std::to_string(L));
            table.slots.insert(table.slots.end(), list.begin(), list.end());
        }
    }
    std::sort(table.slots.begin(), table.slots.end(), [](const Slot& a, const Slot& b) {
        if (a.core != b.core) return a.core < b.core;
        if (a.cycle_index != b.cycle_index) return a.cycle_index < b.cycle_index;
        return a.planned_start < b.planned_start;
    });
    return table;
}

std::string ScheduleTable::to_text(const SchedulingProblem& problem) const {
    std::ostringstream os;
    os << "hyperperiod " << hyperperiod << " (" << problem.time_unit << ")\n";
    for (const Slot& s : slots) {
        os << "core " << s.core << " cycle " << s.cycle_index << " task "
           << problem.tasks[s.task].id << " block " << s.block << " release " << s.release
           << " deadline " << s.deadline << "\n";
    }
    return os.str();
}

nlohmann::json report_to_json(const ExecutionReport& r) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : r.tasks) {
        nlohmann::json jt{{"id", t.id},
                          {"activations", t.activations},
                          {"deadline_misses", t.deadline_misses},
                          {"max_lateness", t.max_lateness},
                          {"jitter", t.jitter}};
        if (r.wall_clock) jt["slot_durations"] = t.slot_durations;
        tasks.push_back(std::move(jt));
    }
    nlohmann::json j{{"tasks", tasks},
                     {"wall_clock", r.wall_clock},
                     {"pinning_requested", r.pinning_requested},
                     {"pinning_ok", r.pinning_ok}};
    if (!r.warning.empty()) j["warning"] = r.warning;
    return j;
}

namespace {

// Per-group binding derived from table + workload: which task drives the
// group and its base-step divisor.
struct GroupBinding {
    std::array<bool, kNumGroups> present{};
    std::array<int, kNumGroups> divisor{1, 1, 1};
    std::array<std::size_t, kNumGroups> task{};
};

GroupBinding bind_groups(const ScheduleTable& table, const SchedulingProblem& problem,
                         const IntegrationWorkload& workload) {
    if (!(workload.duration > 0)) throw ConfigError("duration: must be strictly positive");
    if (workload.base_period < 1) throw ConfigError("base_period: must be >= 1 tick");
    if (!(workload.h > 0)) throw ConfigError("h: must be strictly positive");
    if (workload.task_group.empty()) throw ConfigError("workload: no task bindings");

    GroupBinding bind;
    for (const auto& [id, group] : workload.task_group) {
        if (group < 0 || group >= static_cast<int>(kNumGroups))
            throw ConfigError("task " + id + ": group out of range");
        const auto it =
            std::find_if(problem.tasks.begin(), problem.tasks.end(),
                         [&](const TaskSpec& t) { return t.id == id; });
        if (it == problem.tasks.end())
            throw ConfigError("task " + id + " not present in the schedule table");
        const auto idx = static_cast<std::size_t>(it - problem.tasks.begin());
        const auto g = static_cast<std::size_t>(group);
        if (bind.present[g])
            throw ConfigError("group " + std::string(kGroupNames[g]) +
                              " bound to more than one task");
        const Ticks eff = table.effective_period_of[idx];
        if (eff % workload.base_period != 0)
            throw ConfigError("task " + id + ": effective period " + std::to_string(eff) +
                              " is not a multiple of the base period");
        bind.present[g] = true;
        bind.task[g] = idx;
        bind.divisor[g] = static_cast<int>(eff / workload.base_period);
    }
    return bind;
}

TaskStats make_stats(const ScheduleTable& table, const SchedulingProblem& problem,
                     std::size_t task_idx) {
    TaskStats st;
    st.id = problem.tasks[task_idx].id;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const Slot& s : table.slots) {
        if (s.task != task_idx) continue;
        const double offset = s.planned_start - static_cast<double>(s.release);
        lo = std::min(lo, offset);
        hi = std::max(hi, offset);
    }
    st.jitter = (lo <= hi) ? hi - lo : 0.0;
    return st;
}

}  // namespace

RunResult run_logical(const ScheduleTable& table, const SchedulingProblem& problem,
                      const IntegrationWorkload& workload) {
    const GroupBinding bind = bind_groups(table, problem, workload);

    const auto steps = static_cast<std::uint64_t>(std::llround(workload.duration / workload.h));
    if (steps == 0) throw ConfigError("duration shorter than one base step");
    const auto stride = static_cast<std::uint64_t>(std::max(workload.output_stride, 1));

    EulerStepper stepper(workload.vehicle, workload.track, workload.h, workload.initial);

    RunResult result;
    Trajectory& traj = result.trajectory;
    traj.h = workload.h;
    traj.output_stride = static_cast<int>(stride);
    traj.divisors = bind.divisor;
    traj.track = workload.track;
    traj.config_digest = trajectory_digest(workload.vehicle, workload.track, bind.divisor,
                                           workload.h, workload.duration);
    traj.times.push_back(0.0);
    traj.samples.push_back(workload.initial);

    std::array<std::uint64_t, kNumGroups> activations{};
    for (std::uint64_t n = 0; n < steps; ++n) {
        std::array<bool, kNumGroups> due{};
        for (std::size_t g = 0; g < kNumGroups; ++g) {
            due[g] = bind.present[g] && (n % static_cast<std::uint64_t>(bind.divisor[g]) == 0);
            if (due[g]) ++activations[g];
        }
        stepper.step(n, due, bind.divisor);
        if ((n + 1) % stride == 0) {
            const double t = static_cast<double>(n + 1) * workload.h;
            if (!stepper.state().finite())
                throw DivergenceError("integration diverged at t=" + std::to_string(t), t);
            traj.times.push_back(t);
            traj.samples.push_back(stepper.state());
        }
    }

    result.report.wall_clock = false;
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        if (!bind.present[g]) continue;
        TaskStats st = make_stats(table, problem, bind.task[g]);
        st.activations = activations[g];
        result.report.tasks.push_back(std::move(st));
    }
    return result;
}

RunResult run_realtime(const ScheduleTable& table, const SchedulingProblem& problem,
                       const IntegrationWorkload& workload, double duration,
                       const RealtimeOptions& opts) {
    if (!(duration > 0)) throw ConfigError("duration: must be strictly positive");
    IntegrationWorkload wl = workload;
    wl.duration = workload.h;  // placeholder so bind_groups validates the rest
    const GroupBinding bind = bind_groups(table, problem, wl);

    // Barrier-per-cycle state exchange reproduces the integrator's
    // snapshot-per-base-step semantics only when each RT-cycle is exactly one
    // base step, on every used core.
    std::vector<int> used_cores;
    for (int j = 0; j < table.cores; ++j) {
        if (std::any_of(table.slots.begin(), table.slots.end(),
                        [&](const Slot& s) { return s.core == j; }))
            used_cores.push_back(j);
    }
    if (used_cores.empty()) throw ConfigError("schedule table has no slots");
    for (int j : used_cores) {
        if (table.cycle_len[static_cast<std::size_t>(j)] != workload.base_period)
            throw ConfigError("core " + std::to_string(j) +
                              ": RT-cycle length must equal the base period for real-time runs");
    }
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        if (!bind.present[g]) continue;
        const double period_wall = static_cast<double>(table.effective_period_of[bind.task[g]]) *
                                   opts.tick_seconds;
        if (period_wall < 1e-3)
            throw ConfigError("task " + problem.tasks[bind.task[g]].id +
                              ": wall period below 1 ms");
    }

    const double cycle_wall =
        static_cast<double>(workload.base_period) * opts.tick_seconds;
    const auto steps = static_cast<std::uint64_t>(duration / cycle_wall);
    if (steps == 0) throw ConfigError("duration shorter than one RT-cycle");
    const auto stride = static_cast<std::uint64_t>(std::max(workload.output_stride, 1));

    // Groups per worker (one worker per used core).
    std::vector<std::vector<std::size_t>> worker_groups(used_cores.size());
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        if (!bind.present[g]) continue;
        const int core = [&] {
            for (const Slot& s : table.slots)
                if (s.task == bind.task[g]) return s.core;
            throw ConfigError("task " + problem.tasks[bind.task[g]].id + " has no slots");
        }();
        const auto w = static_cast<std::size_t>(
            std::find(used_cores.begin(), used_cores.end(), core) - used_cores.begin());
        worker_groups[w].push_back(g);
    }

    // Shared state: snapshot published at each barrier; per-group staging
    // written by exactly one worker per cycle.
    VehicleState published = workload.initial;
    struct Staged {
        std::array<double, 2> pos, vel;
        bool valid = false;
    };
    std::array<Staged, kNumGroups> staged;

    Trajectory traj;
    traj.h = workload.h;
    traj.output_stride = static_cast<int>(stride);
    traj.divisors = bind.divisor;
    traj.track = workload.track;
    traj.config_digest = trajectory_digest(workload.vehicle, workload.track, bind.divisor,
                                           workload.h, static_cast<double>(steps) * workload.h);
    traj.times.push_back(0.0);
    traj.samples.push_back(workload.initial);

    std::atomic<bool> abort{false};
    std::atomic<std::uint64_t> cycle{0};
    std::string divergence_msg;

    auto on_barrier = [&]() noexcept {
        const std::uint64_t n = cycle.load(std::memory_order_relaxed);
        for (std::size_t g = 0; g < kNumGroups; ++g) {
            if (!staged[g].valid) continue;
            for (std::size_t k = 0; k < 2; ++k) {
                published.pos[kGroupCoords[g][k]] = staged[g].pos[k];
                published.vel[kGroupCoords[g][k]] = staged[g].vel[k];
            }
            staged[g].valid = false;
        }
        if ((n + 1) % stride == 0) {
            if (!published.finite()) {
                divergence_msg =
                    "integration diverged at t=" + std::to_string(static_cast<double>(n + 1) *
                                                                  workload.h);
                abort.store(true, std::memory_order_relaxed);
            } else {
                traj.times.push_back(static_cast<double>(n + 1) * workload.h);
                traj.samples.push_back(published);
            }
        }
        cycle.store(n + 1, std::memory_order_relaxed);
    };

    std::barrier sync(static_cast<std::ptrdiff_t>(used_cores.size()), on_barrier);

    struct WorkerStats {
        std::array<std::uint64_t, kNumGroups> activations{};
        std::array<std::uint64_t, kNumGroups> misses{};
        std::array<double, kNumGroups> max_lateness{};
        std::array<double, kNumGroups> start_lo;
        std::array<double, kNumGroups> start_hi{};
        std::array<std::vector<double>, kNumGroups> durations;
        bool pin_ok = true;
        std::exception_ptr error;
        WorkerStats() { start_lo.fill(std::numeric_limits<double>::infinity()); }
    };
    std::vector<WorkerStats> stats(used_cores.size());

    using clock = std::chrono::steady_clock;
    const auto run_start = clock::now();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());

    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < used_cores.size(); ++w) {
        workers.emplace_back([&, w] {
            WorkerStats& st = stats[w];
#ifdef __linux__
            if (opts.request_pinning) {
                cpu_set_t set;
                CPU_ZERO(&set);
                CPU_SET(static_cast<unsigned>(w) % hw, &set);
                st.pin_ok =
                    pthread_setaffinity_np(pthread_self(), sizeof set, &set) == 0;
            }
#else
            st.pin_ok = false;
#endif
            try {
                for (std::uint64_t n = 0; n < steps; ++n) {
                    if (abort.load(std::memory_order_relaxed)) {
                        sync.arrive_and_drop();
                        break;
                    }
                    const auto cycle_start =
                        run_start + std::chrono::duration_cast<clock::duration>(
                                        std::chrono::duration<double>(
                                            static_cast<double>(n) * cycle_wall));
                    std::this_thread::sleep_until(cycle_start);

                    for (std::size_t g : worker_groups[w]) {
                        const auto d = static_cast<std::uint64_t>(bind.divisor[g]);
                        if (n % d != 0) continue;
                        const Ticks release_abs =
                            static_cast<Ticks>(n) * workload.base_period;
                        const auto slot_begin = clock::now();

                        // Same arithmetic as EulerStepper against the
                        // published snapshot.
                        const double t = static_cast<double>(n) * workload.h;
                        const ExcitationSample exc = excitation(
                            t, workload.track, workload.vehicle.a_k, workload.vehicle.a_t);
                        const StateDerivative der = rhs(published, exc, workload.vehicle);
                        const double he = static_cast<double>(bind.divisor[g]) * workload.h;
                        for (std::size_t k = 0; k < 2; ++k) {
                            const std::size_t c = kGroupCoords[g][k];
                            staged[g].pos[k] = published.pos[c] + he * published.vel[c];
                            staged[g].vel[k] = published.vel[c] + he * der.acc[c];
                        }
                        staged[g].valid = true;

                        const auto slot_end = clock::now();
                        const double start_off =
                            std::chrono::duration<double>(slot_begin - run_start).count() -
                            static_cast<double>(release_abs) * opts.tick_seconds;
                        const double deadline_wall =
                            static_cast<double>(release_abs +
                                                table.effective_period_of[bind.task[g]]) *
                            opts.tick_seconds;
                        const double end_off =
                            std::chrono::duration<double>(slot_end - run_start).count();
                        ++st.activations[g];
                        if (end_off > deadline_wall) {
                            ++st.misses[g];
                            st.max_lateness[g] =
                                std::max(st.max_lateness[g], end_off - deadline_wall);
                        }
                        st.start_lo[g] = std::min(st.start_lo[g], start_off);
                        st.start_hi[g] = std::max(st.start_hi[g], start_off);
                        st.durations[g].push_back(
                            std::chrono::duration<double>(slot_end - slot_begin).count());
                    }
                    sync.arrive_and_wait();
                }
            } catch (...) {
                st.error = std::current_exception();
                abort.store(true, std::memory_order_relaxed);
                sync.arrive_and_drop();
            }
        });
    }
    for (auto& t : workers) t.join();

    for (const auto& st : stats)
        if (st.error) std::rethrow_exception(st.error);
    if (!divergence_msg.empty()) throw DivergenceError(divergence_msg, 0.0);

    RunResult result;
    result.trajectory = std::move(traj);
    result.report.wall_clock = true;
    result.report.pinning_requested = opts.request_pinning;
    result.report.pinning_ok =
        opts.request_pinning &&
        std::all_of(stats.begin(), stats.end(), [](const WorkerStats& s) { return s.pin_ok; });
    if (opts.request_pinning && !result.report.pinning_ok)
        result.report.warning = "core pinning unavailable; ran unpinned";

    for (std::size_t w = 0; w < used_cores.size(); ++w) {
        for (std::size_t g : worker_groups[w]) {
            TaskStats ts;
            ts.id = problem.tasks[bind.task[g]].id;
            ts.activations = stats[w].activations[g];
            ts.deadline_misses = stats[w].misses[g];
            ts.max_lateness = stats[w].max_lateness[g];
            ts.jitter = (stats[w].start_lo[g] <= stats[w].start_hi[g])
                            ? stats[w].start_hi[g] - stats[w].start_lo[g]
                            : 0.0;
            ts.slot_durations = std::move(stats[w].durations[g]);
            result.report.tasks.push_back(std::move(ts));
        }
    }
    return result;
}

WcetEstimate measure_wcet(const std::function<void()>& body, std::uint64_t iterations,
                          std::uint64_t warmup) {
    if (iterations < 1) throw ParameterError("iterations: must be >= 1");
    using clock = std::chrono::steady_clock;

    // Clock granularity: smallest nonzero observed tick.
    double resolution_ns = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
        const auto a = clock::now();
        auto b = clock::now();
        while (b == a) b = clock::now();
        resolution_ns = std::min(
            resolution_ns, std::chrono::duration<double, std::nano>(b - a).count());
    }

    // Empty-bracket overhead, median of 1000.
    std::vector<double> empties(1000);
    for (auto& e : empties) {
        const auto a = clock::now();
        const auto b = clock::now();
        e = std::chrono::duration<double, std::nano>(b - a).count();
    }
    std::nth_element(empties.begin(), empties.begin() + 500, empties.end());
    const double overhead = empties[500];

    for (std::uint64_t i = 0; i < warmup; ++i) body();

    double sum = 0.0, sum_sq = 0.0, max_v = 0.0;
    for (std::uint64_t i = 0; i < iterations; ++i) {
        const auto a = clock::now();
        body();
        const auto b = clock::now();
        const double raw = std::chrono::duration<double, std::nano>(b - a).count();
        const double v = std::max(0.0, raw - overhead);
        sum += v;
        sum_sq += v * v;
        max_v = std::max(max_v, v);
    }
    WcetEstimate e;
    e.samples = iterations;
    e.timer_overhead_ns = overhead;
    e.max_ns = max_v;
    e.mean_ns = sum / static_cast<double>(iterations);
    const double var = sum_sq / static_cast<double>(iterations) - e.mean_ns * e.mean_ns;
    e.stddev_ns = std::sqrt(std::max(0.0, var));
    e.resolution_warning = resolution_ns > 1000.0;
    return e;
}

nlohmann::json wcet_to_json(const WcetEstimate& e) {
    return {{"samples", e.samples},
            {"max_ns", e.max_ns},
            {"mean_ns", e.mean_ns},
            {"stddev_ns", e.stddev_ns},
            {"timer_overhead_ns", e.timer_overhead_ns},
            {"resolution_warning", e.resolution_warning}};
}

}  // namespace railsim
