#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "railsim/schedule.hpp"

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

}  // namespace

TEST_CASE("utilization_feasible") {
    CHECK(utilization_feasible({}, 0).feasible);
    CHECK(utilization_feasible({}, 0).utilization == 0.0);

    const std::vector<TaskSpec> boundary{task("a", 2, {1.0}), task("b", 2, {1.0})};
    const auto r = utilization_feasible(boundary, 0);
    CHECK(r.utilization == doctest::Approx(1.0));
    CHECK(r.feasible);  // boundary inclusive

    // Thread iteration times 0.018/0.018/0.017 ms with 0.1/0.1/0.5 ms periods
    // (in tenth-of-microsecond ticks).
    const std::vector<TaskSpec> three{task("t1", 1000, {180.0}), task("t2", 1000, {180.0}),
                                      task("t3", 5000, {170.0})};
    const auto m = utilization_feasible(three, 0);
    CHECK(m.utilization == doctest::Approx(0.394).epsilon(1e-9));
    CHECK(m.feasible);

    const std::vector<TaskSpec> over{task("a", 2, {3.0, 1.0})};
    CHECK_FALSE(utilization_feasible(over, 0).feasible);
}

TEST_CASE("effective_period") {
    CHECK(effective_period(10, 1) == 10);
    CHECK(effective_period(10, 3) == 9);
    CHECK(effective_period(7, 7) == 7);
    CHECK_THROWS_AS(effective_period(5, 6), ScheduleError);
    CHECK_THROWS_AS(effective_period(5, 0), ScheduleError);
}

TEST_CASE("effective_period never exceeds T and equals T exactly for divisors") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<Ticks> ut(1, 1000);
    for (int rep = 0; rep < 500; ++rep) {
        const Ticks T = ut(rng);
        std::uniform_int_distribution<Ticks> ul(1, T);
        const Ticks L = ul(rng);
        const Ticks Tp = effective_period(T, L);
        CHECK(Tp <= T);
        CHECK(Tp % L == 0);
        CHECK((Tp == T) == (T % L == 0));
    }
}

TEST_CASE("hyperperiod") {
    CHECK(hyperperiod({2, 3}) == 6);
    CHECK(hyperperiod({4, 4, 4}) == 4);
    CHECK(hyperperiod({6, 10, 15}) == 30);
    // Pairwise-coprime large primes overflow 64-bit ticks.
    const std::vector<Ticks> primes{1000000007, 1000000009, 998244353, 754974721, 167772161};
    CHECK_THROWS_AS(hyperperiod(primes), CapacityError);
}

TEST_CASE("objective worked examples") {
    SchedulingProblem p;
    p.tasks = {task("a", 10, {1.0})};
    p.cores = 1;

    p.switch_cost = 0.0;
    CHECK(objective(p, solution({0}, {10}, 1)) == doctest::Approx(0.0));

    p.switch_cost = 0.01;
    CHECK(objective(p, solution({0}, {10}, 1)) == doctest::Approx(0.001).epsilon(1e-12));
    // L=4: T' = 8, F = (1/8 - 1/10) + 0.01/4
    CHECK(objective(p, solution({0}, {4}, 1)) == doctest::Approx(0.0275).epsilon(1e-12));
}

TEST_CASE("objective ignores idle cores and rejects broken structure") {
    SchedulingProblem p;
    p.tasks = {task("a", 10, {1.0, 1.0})};
    p.cores = 2;
    p.switch_cost = 0.01;
    CHECK(objective(p, solution({0}, {10, 999}, 2)) == doctest::Approx(0.001).epsilon(1e-12));

    ScheduleSolution broken = solution({0}, {10, 1}, 2);
    broken.x[0] = {1, 1};
    CHECK_THROWS_AS(objective(p, broken), ValidationError);
}

TEST_CASE("objective reduces to switch cost when all L divide all periods") {
    SchedulingProblem p;
    p.tasks = {task("a", 12, {1.0, 1.0}), task("b", 24, {2.0, 2.0}), task("c", 12, {0.5, 0.5})};
    p.cores = 2;
    p.switch_cost = 0.3;
    const auto s = solution({0, 0, 1}, {6, 4}, 2);
    // Quantization term vanishes; F = 2*p/6 + 1*p/4.
    CHECK(objective(p, s) == doctest::Approx(2 * 0.3 / 6.0 + 0.3 / 4.0).epsilon(1e-12));
}

TEST_CASE("objective is monotone non-increasing in L over divisor chains") {
    SchedulingProblem p;
    p.tasks = {task("a", 24, {1.0}), task("b", 48, {2.0})};
    p.cores = 1;
    p.switch_cost = 0.1;
    double prev = std::numeric_limits<double>::infinity();
    for (Ticks L : {1, 2, 3, 4, 6, 8, 12, 24}) {  // all divide both periods
        const double F = objective(p, solution({0, 0}, {L}, 1));
        CHECK(F <= prev + 1e-15);
        prev = F;
    }
}

TEST_CASE("validate_solution") {
    SchedulingProblem p;
    p.tasks = {task("a", 10, {1.0, 1.0}), task("b", 20, {2.0, 2.0})};
    p.cores = 2;

    CHECK(validate_solution(p, solution({0, 1}, {10, 20}, 2)).empty());

    SUBCASE("duplicated task") {
        auto s = solution({0, 1}, {10, 20}, 2);
        s.x[0] = {1, 1};
        const auto v = validate_solution(p, s);
        CHECK(std::any_of(v.begin(), v.end(),
                          [](const Violation& x) { return x.constraint == "unique_core" &&
                                                          x.index == 0; }));
    }
    SUBCASE("overloaded core") {
        SchedulingProblem q;
        q.tasks = {task("a", 5, {3.0}), task("b", 5, {3.0})};
        q.cores = 1;
        const auto v = validate_solution(q, solution({0, 0}, {5}, 1));
        REQUIRE(!v.empty());
        CHECK(std::any_of(v.begin(), v.end(),
                          [](const Violation& x) { return x.constraint == "load" && x.index == 0; }));
    }
    SUBCASE("cycle exceeding min assigned period") {
        const auto v = validate_solution(p, solution({0, 1}, {11, 20}, 2));
        CHECK(std::any_of(v.begin(), v.end(),
                          [](const Violation& x) { return x.constraint == "cycle_bound"; }));
    }
    SUBCASE("quantization can push a fitting load over 100%") {
        SchedulingProblem q;
        q.tasks = {task("a", 10, {4.9}), task("b", 10, {4.9})};
        q.cores = 1;
        // L=7 quantizes both periods to 7: 2*4.9/7 = 1.4 > 1, while the
        // nominal load 0.98 still fits.
        const auto v = validate_solution(q, solution({0, 0}, {7}, 1));
        CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) {
            return x.constraint == "load_effective";
        }));
        CHECK(std::none_of(v.begin(), v.end(),
                           [](const Violation& x) { return x.constraint == "load"; }));
    }
}

TEST_CASE("utilization is permutation invariant") {
    std::vector<TaskSpec> tasks{task("a", 3, {0.4}), task("b", 7, {1.1}), task("c", 11, {2.0})};
    const double u = utilization_feasible(tasks, 0).utilization;
    std::sort(tasks.begin(), tasks.end(),
              [](const TaskSpec& a, const TaskSpec& b) { return a.id > b.id; });
    CHECK(utilization_feasible(tasks, 0).utilization == doctest::Approx(u).epsilon(1e-15));
}

TEST_CASE("split_blocks") {
    const auto one = split_blocks(4.0, 1.0, 10);
    CHECK(one.blocks == std::vector<double>{4.0});

    const auto four = split_blocks(4.0, 0.25, 10);
    CHECK(four.blocks == std::vector<double>{1.0, 1.0, 1.0, 1.0});

    const auto rem = split_blocks(5.0, 0.4, 10);
    CHECK(rem.blocks == std::vector<double>{2.0, 2.0, 1.0});
    CHECK(rem.block_count == 3);

    CHECK_THROWS_AS(split_blocks(5.0, 0.9, 4), ScheduleError);  // window 4.5 > L
    CHECK_THROWS_AS(split_blocks(5.0, 1.5, 10), ValidationError);
}

TEST_CASE("split_blocks lengths always sum to tau") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> utau(0.01, 50.0), ud(0.05, 1.0);
    for (int rep = 0; rep < 300; ++rep) {
        const double tau = utau(rng);
        const double delta = ud(rng);
        const auto s = split_blocks(tau, delta, 1000);
        double sum = 0.0;
        for (double b : s.blocks) {
            CHECK(b <= s.window + 1e-12);
            sum += b;
        }
        CHECK(std::fabs(sum - tau) <= 1e-12 * std::max(1.0, tau));
    }
}

TEST_CASE("problem JSON round trip") {
    SchedulingProblem p;
    p.cores = 2;
    p.switch_cost = 0.05;
    p.tasks = {task("carriage", 500, {18.0, 18.5}), task("trolley1", 100, {18.0, 18.0})};
    p.tasks[0].group = 0;

    const auto j = problem_to_json(p);
    const auto q = problem_from_json(j);
    CHECK(q.cores == p.cores);
    CHECK(q.switch_cost == p.switch_cost);
    CHECK(q.time_unit == "us");
    REQUIRE(q.tasks.size() == 2);
    CHECK(q.tasks[0].id == "carriage");
    CHECK(q.tasks[0].period == 500);
    CHECK(q.tasks[0].wcet == std::vector<double>{18.0, 18.5});
    CHECK(q.tasks[0].group == 0);

    nlohmann::json bad = j;
    bad["typo_key"] = 1;
    CHECK_THROWS_AS(problem_from_json(bad), ValidationError);
}
