#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "railsim/executor.hpp"

using namespace railsim;

namespace {

TaskSpec task(const std::string& id, Ticks period, std::vector<double> wcet) {
    TaskSpec t;
    t.id = id;
    t.period = period;
    t.wcet = std::move(wcet);
    return t;
}

ScheduleSolution solution(std::vector<int> core_of_task, std::vector<Ticks> cycles, int cores) {
    ScheduleSolution s;
    for (int c : core_of_task) {
        std::vector<int> row(static_cast<std::size_t>(cores), 0);
        row[static_cast<std::size_t>(c)] = 1;
        s.x.push_back(std::move(row));
    }
    s.cycle = std::move(cycles);
    return s;
}

// Problem shaped like the simulation itself: one slow carriage task and two
// fast trolley tasks, base period 100 ticks.
SchedulingProblem sim_problem(int cores) {
    SchedulingProblem p;
    p.cores = cores;
    p.switch_cost = 1.0;
    p.tasks = {task("carriage", 500, std::vector<double>(static_cast<std::size_t>(cores), 20.0)),
               task("trolley1", 100, std::vector<double>(static_cast<std::size_t>(cores), 20.0)),
               task("trolley2", 100, std::vector<double>(static_cast<std::size_t>(cores), 20.0))};
    return p;
}

IntegrationWorkload sim_workload(double duration, int stride = 1) {
    IntegrationWorkload w;
    w.vehicle = VehicleParams::defaults();
    w.track = TrackExcitation::defaults();
    w.h = 1e-4;
    w.base_period = 100;
    w.duration = duration;
    w.output_stride = stride;
    w.task_group = {{"carriage", 0}, {"trolley1", 1}, {"trolley2", 2}};
    return w;
}

}  // namespace

TEST_CASE("build_table for a single task fills one slot per hyperperiod") {
    SchedulingProblem p;
    p.cores = 1;
    p.switch_cost = 0.0;
    p.tasks = {task("only", 4, {1.0})};
    const auto table = build_table(p, solution({0}, {4}, 1));
    CHECK(table.cores == 1);
    CHECK(table.hyperperiod == 4);
    CHECK(table.cycle_len == std::vector<Ticks>{4});
    CHECK(table.effective_period_of == std::vector<Ticks>{4});
    REQUIRE(table.slots.size() == 1);
    CHECK(table.slots[0].task == 0);
    CHECK(table.slots[0].release == 0);
    CHECK(table.slots[0].deadline == 4);
    CHECK(table.slots[0].planned_start == 0.0);
    CHECK(table.slots[0].length == 1.0);
}

TEST_CASE("build_table orders slots EDF within a cycle") {
    SchedulingProblem p;
    p.cores = 1;
    p.switch_cost = 0.0;
    p.tasks = {task("slow", 4, {1.0}), task("fast", 2, {0.5})};
    const auto table = build_table(p, solution({0, 0}, {2}, 1));
    CHECK(table.hyperperiod == 4);
    // Cycle 0 releases both; the T=2 task has the earlier deadline and runs
    // first. Cycle 1 releases only the fast task.
    REQUIRE(table.slots.size() == 3);
    CHECK(table.slots[0].cycle_index == 0);
    CHECK(table.slots[0].task == 1);
    CHECK(table.slots[0].planned_start == 0.0);
    CHECK(table.slots[1].cycle_index == 0);
    CHECK(table.slots[1].task == 0);
    CHECK(table.slots[1].planned_start == doctest::Approx(0.5));
    CHECK(table.slots[2].cycle_index == 1);
    CHECK(table.slots[2].task == 1);
    CHECK(table.slots[2].release == 2);
    CHECK(table.slots[2].deadline == 4);
}

TEST_CASE("build_table places the slow carriage task once per five cycles") {
    const auto p = sim_problem(1);
    const auto table = build_table(p, solution({0, 0, 0}, {100}, 1));
    CHECK(table.hyperperiod == 500);
    std::size_t carriage_slots = 0, trolley_slots = 0;
    for (const auto& s : table.slots) {
        if (s.task == 0)
            ++carriage_slots;
        else
            ++trolley_slots;
        CHECK(s.release == s.cycle_index * 100);
    }
    CHECK(carriage_slots == 1);
    CHECK(trolley_slots == 10);
}

TEST_CASE("slot invariants hold on a two-core layout") {
    const auto p = sim_problem(2);
    const auto table = build_table(p, solution({0, 1, 1}, {100, 100}, 2));
    for (const auto& s : table.slots) {
        // planned_start is absolute within the hyperperiod; every block stays
        // inside its RT-cycle.
        const double cycle_start = static_cast<double>(
            s.cycle_index * table.cycle_len[static_cast<std::size_t>(s.core)]);
        const double L = static_cast<double>(table.cycle_len[static_cast<std::size_t>(s.core)]);
        CHECK(s.planned_start >= cycle_start - 1e-12);
        CHECK(s.planned_start + s.length <= cycle_start + L + 1e-9);
        CHECK(s.deadline == s.release + table.effective_period_of[s.task]);
    }
    CHECK(!table.to_text(p).empty());
}

TEST_CASE("build_table rejects infeasible solutions and overfull cycles") {
    const auto p = sim_problem(1);
    CHECK_THROWS_AS(build_table(p, solution({0, 0, 0}, {101}, 1)), ScheduleError);

    SchedulingProblem q;
    q.cores = 1;
    q.switch_cost = 0.0;
    q.tasks = {task("a", 10, {6.0}), task("b", 10, {6.0})};
    CHECK_THROWS_AS(build_table(q, solution({0, 0}, {10}, 1)), ScheduleError);
}

TEST_CASE("block plan spreads a split task over successive RT-cycles") {
    SchedulingProblem p;
    p.cores = 1;
    p.switch_cost = 0.0;
    p.tasks = {task("a", 12, {4.0})};
    BlockPlan plan(1);
    plan[0] = split_blocks(4.0, 0.25, 3);  // four blocks of 1.0
    const auto table = build_table(p, solution({0}, {3}, 1), plan);
    REQUIRE(table.slots.size() == 4);
    for (int b = 0; b < 4; ++b) {
        const auto& s = table.slots[static_cast<std::size_t>(b)];
        CHECK(s.block == b);
        CHECK(s.length == doctest::Approx(1.0));
        CHECK(s.cycle_index == b);  // one block per cycle within the period
        CHECK(s.deadline == 12);
    }
}

TEST_CASE("run_logical reproduces simulate bit for bit") {
    const auto w = sim_workload(0.5, 5);

    SUBCASE("uniform rates on one core") {
        SchedulingProblem p = sim_problem(1);
        p.tasks[0].period = 100;  // carriage at the base rate too
        const auto table = build_table(p, solution({0, 0, 0}, {100}, 1));
        const auto run = run_logical(table, p, w);
        const auto ref = simulate(w.vehicle, w.track, RateGroups{{1, 1, 1}}, w.h, w.duration,
                                  w.initial, SimOptions{w.output_stride});
        CHECK(run.trajectory.config_digest == ref.config_digest);
        REQUIRE(run.trajectory.samples.size() == ref.samples.size());
        for (std::size_t s = 0; s < ref.samples.size(); ++s)
            for (std::size_t c = 0; c < kNumCoords; ++c) {
                CHECK(run.trajectory.samples[s].pos[c] == ref.samples[s].pos[c]);
                CHECK(run.trajectory.samples[s].vel[c] == ref.samples[s].vel[c]);
            }
    }

    SUBCASE("slow carriage on two cores") {
        const auto p = sim_problem(2);
        const auto table = build_table(p, solution({0, 1, 1}, {100, 100}, 2));
        const auto run = run_logical(table, p, w);
        const auto ref = simulate(w.vehicle, w.track, RateGroups{{5, 1, 1}}, w.h, w.duration,
                                  w.initial, SimOptions{w.output_stride});
        CHECK(run.trajectory.config_digest == ref.config_digest);
    }
}

TEST_CASE("run_logical reports activation counts without misses") {
    const auto p = sim_problem(1);
    const auto table = build_table(p, solution({0, 0, 0}, {100}, 1));
    const auto run = run_logical(table, p, sim_workload(0.1));
    REQUIRE(run.report.tasks.size() == 3);
    CHECK_FALSE(run.report.wall_clock);
    for (const auto& t : run.report.tasks) CHECK(t.deadline_misses == 0);
    const auto& carriage = *std::find_if(run.report.tasks.begin(), run.report.tasks.end(),
                                         [](const TaskStats& t) { return t.id == "carriage"; });
    const auto& trolley = *std::find_if(run.report.tasks.begin(), run.report.tasks.end(),
                                        [](const TaskStats& t) { return t.id == "trolley1"; });
    CHECK(trolley.activations == 1000);
    CHECK(carriage.activations == 200);
}

TEST_CASE("run_logical validates the workload binding") {
    const auto p = sim_problem(1);
    const auto table = build_table(p, solution({0, 0, 0}, {100}, 1));

    auto w = sim_workload(0.1);
    w.duration = 0.0;
    CHECK_THROWS_AS(run_logical(table, p, w), ConfigError);

    w = sim_workload(0.1);
    w.task_group = {{"carriage", 0}, {"trolley1", 1}, {"nope", 2}};
    CHECK_THROWS_AS(run_logical(table, p, w), ConfigError);

    w = sim_workload(0.1);
    w.base_period = 33;  // T' = 100 not a multiple
    CHECK_THROWS_AS(run_logical(table, p, w), ConfigError);
}

TEST_CASE("run_realtime matches the logical trajectory over a short horizon") {
    const auto p = sim_problem(2);
    const auto table = build_table(p, solution({0, 1, 1}, {100, 100}, 2));
    auto w = sim_workload(1.0, 10);
    RealtimeOptions opts;
    opts.tick_seconds = 2e-5;  // 2 ms wall per RT-cycle
    opts.request_pinning = false;
    const double wall = 0.2;  // 100 cycles
    const auto rt = run_realtime(table, p, w, wall, opts);
    CHECK(rt.report.wall_clock);

    w.duration = static_cast<double>(rt.trajectory.samples.size() - 1) * w.h *
                 static_cast<double>(w.output_stride);
    const auto ref = simulate(w.vehicle, w.track, RateGroups{{5, 1, 1}}, w.h, w.duration,
                              w.initial, SimOptions{w.output_stride});
    REQUIRE(rt.trajectory.samples.size() <= ref.samples.size());
    for (std::size_t s = 0; s < rt.trajectory.samples.size(); ++s)
        for (std::size_t c = 0; c < kNumCoords; ++c) {
            CHECK(rt.trajectory.samples[s].pos[c] == ref.samples[s].pos[c]);
            CHECK(rt.trajectory.samples[s].vel[c] == ref.samples[s].vel[c]);
        }
}

TEST_CASE("run_realtime rejects cycles shorter than the base period") {
    const auto p = sim_problem(2);
    const auto table = build_table(p, solution({0, 1, 1}, {50, 50}, 2));
    CHECK_THROWS_AS(run_realtime(table, p, sim_workload(0.1), 0.01), ConfigError);
}

TEST_CASE("measure_wcet basics") {
    const auto noop = measure_wcet([] {}, 200, 20);
    CHECK(noop.samples == 200);
    CHECK(noop.max_ns >= noop.mean_ns);
    CHECK(noop.mean_ns >= 0.0);

    std::atomic<std::uint64_t> sink{0};
    const auto busy = measure_wcet(
        [&] {
            for (int i = 0; i < 20000; ++i) sink.fetch_add(1, std::memory_order_relaxed);
        },
        50, 5);
    CHECK(busy.mean_ns > noop.mean_ns);
    CHECK(busy.max_ns >= busy.mean_ns);
    CHECK(busy.stddev_ns >= 0.0);
}
