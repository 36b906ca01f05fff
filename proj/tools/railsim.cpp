// Command-line front end: simulate / verify / schedule / eigen / measure.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "railsim/abc.hpp"
#include "railsim/config.hpp"
#include "railsim/csv.hpp"
#include "railsim/executor.hpp"
#include "railsim/multirate.hpp"
#include "railsim/rail_dynamics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace railsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;  // infeasible / validation / tolerance failure
constexpr int kExitBadInput = 2;    // bad input or IO

// Names of the 12 phase variables, displacements then velocities.
const char* kPhaseNames[12] = {"z_k", "phi_k", "z_1",  "phi_1",  "z_2",  "phi_2",
                               "v_zk", "w_phik", "v_z1", "w_phi1", "v_z2", "w_phi2"};

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    std::optional<std::vector<int>> divisors;
};

SimConfig load_config(const CommonOpts& opts) {
    SimConfig cfg;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw ParameterError("cannot open config file: " + opts.config_path);
        std::stringstream ss;
        ss << in.rdbuf();
        cfg = parse_config(ss.str());
    } else {
        cfg = parse_config("{}");
    }
    if (opts.seed) {
        cfg.seed = *opts.seed;
        cfg.abc.seed = *opts.seed;
    }
    if (opts.duration) cfg.integration.duration = *opts.duration;
    if (opts.divisors) {
        if (opts.divisors->size() != kNumGroups)
            throw ParameterError("--divisors expects three comma-separated integers");
        std::copy(opts.divisors->begin(), opts.divisors->end(),
                  cfg.integration.divisors.begin());
    }
    return cfg;
}

std::ofstream open_out(const CommonOpts& opts, const std::string& name) {
    fs::create_directories(opts.out_dir);
    const fs::path p = fs::path(opts.out_dir) / name;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw ParameterError("cannot write " + p.string());
    return os;
}

Trajectory run_configured(const SimConfig& cfg, const std::array<int, kNumGroups>& divisors) {
    return simulate(cfg.vehicle, cfg.track, RateGroups{divisors}, cfg.integration.h,
                    cfg.integration.duration, VehicleState{},
                    SimOptions{cfg.integration.output_stride});
}

int cmd_simulate(const CommonOpts& opts) {
    const SimConfig cfg = load_config(opts);
    const Trajectory traj = run_configured(cfg, cfg.integration.divisors);
    {
        auto os = open_out(opts, "trajectory.csv");
        write_trajectory_csv(os, traj);
    }
    {
        auto os = open_out(opts, "plot.gp");
        write_plot_script(os, "trajectory.csv");
    }
    std::cout << "wrote " << (fs::path(opts.out_dir) / "trajectory.csv").string() << " ("
              << traj.samples.size() << " samples)\n";
    return kExitOk;
}

int cmd_verify(const CommonOpts& opts, double tolerance) {
    const SimConfig cfg = load_config(opts);
    const Trajectory multi = run_configured(cfg, cfg.integration.divisors);
    const Trajectory reference = run_configured(cfg, {1, 1, 1});
    const DeviationReport report = compare_trajectories(reference, multi);

    json j;
    j["tolerance"] = tolerance;
    j["divisors"] = cfg.integration.divisors;
    for (int i = 0; i < 12; ++i) {
        j["coordinates"][kPhaseNames[i]] = {{"max_abs", report.max_abs[i]},
                                            {"peak", report.peak[i]},
                                            {"relative", report.relative[i]}};
    }
    j["worst_relative"] = report.worst_relative();
    const bool ok = report.worst_relative() <= tolerance;
    j["within_tolerance"] = ok;
    {
        auto os = open_out(opts, "deviation_report.json");
        os << j.dump(2) << "\n";
    }
    std::cout << "worst relative deviation " << format_double(report.worst_relative())
              << (ok ? " within " : " exceeds ") << format_double(tolerance) << "\n";
    return ok ? kExitOk : kExitInfeasible;
}

int cmd_schedule(const CommonOpts& opts) {
    const SimConfig cfg = load_config(opts);
    if (!cfg.scheduling)
        throw ParameterError("config has no scheduling block");
    const SchedulingProblem& problem = *cfg.scheduling;

    const OptimizeResult result = optimize(problem, cfg.abc);
    json j = optimize_result_to_json(result);
    try {
        const BruteForceResult oracle = brute_force(problem);
        j["brute_force"] = {{"assignment", oracle.best.x},
                            {"cycle", oracle.best.cycle},
                            {"objective", oracle.objective_value}};
    } catch (const CapacityError&) {
        // instance too large to enumerate; omit the oracle section
    }
    {
        auto os = open_out(opts, "solution.json");
        os << j.dump(2) << "\n";
    }
    if (!result.feasible) {
        std::cerr << "error: no feasible schedule found within the iteration budget\n";
        return kExitInfeasible;
    }
    std::cout << "best objective " << format_double(result.objective_value) << " after "
              << result.iterations_used << " iterations\n";
    return kExitOk;
}

int cmd_eigen(const CommonOpts& opts) {
    const SimConfig cfg = load_config(opts);
    const auto freqs = undamped_frequencies(assemble_system(cfg.vehicle));
    for (double f : freqs) std::cout << format_double(f) << "\n";
    return kExitOk;
}

int cmd_measure(const CommonOpts& opts, std::uint64_t iterations, std::uint64_t warmup) {
    const SimConfig cfg = load_config(opts);
    const ExcitationSample exc = excitation(0.5, cfg.track, cfg.vehicle.a_k, cfg.vehicle.a_t);

    json j;
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        VehicleState state;
        state.pos[kGroupCoords[g][0]] = 1e-3;  // keep the body non-trivial
        volatile double sink = 0.0;
        const auto body = [&] {
            const StateDerivative d = rhs(state, exc, cfg.vehicle);
            sink = sink + d.acc[kGroupCoords[g][0]] + d.acc[kGroupCoords[g][1]];
        };
        const WcetEstimate e = measure_wcet(body, iterations, warmup);
        j[kGroupNames[g]] = wcet_to_json(e);
    }
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-rate rail vehicle dynamics simulator and cyclic-schedule optimizer"};
    app.require_subcommand(1);

    CommonOpts opts;
    double tolerance = 0.02;
    std::uint64_t iterations = 20000, warmup = 2000;
    std::vector<int> divisors_flag;
    std::uint64_t seed_flag = 0;
    double duration_flag = 0.0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON config file");
        sub->add_option("--out", opts.out_dir, "output directory");
        // `each` runs per parsed value, before CLI11 stores into the bound
        // variable; convert the raw token so the override is never stale.
        sub->add_option("--seed", seed_flag, "override seed")->each([&](const std::string& s) {
            opts.seed = std::stoull(s);
        });
        sub->add_option("--duration", duration_flag, "override duration [s]")
            ->each([&](const std::string& s) { opts.duration = std::stod(s); });
        sub->add_option("--divisors", divisors_flag, "rate divisors a,b,c")
            ->delimiter(',')
            ->each([&](const std::string& s) {
                if (!opts.divisors) opts.divisors.emplace();
                opts.divisors->push_back(std::stoi(s));
            });
    };

    auto* sim = app.add_subcommand("simulate", "integrate and write trajectory.csv + plot.gp");
    add_common(sim);
    auto* ver = app.add_subcommand("verify", "compare multi-rate run against uniform-rate");
    add_common(ver);
    ver->add_option("--tolerance", tolerance, "relative deviation tolerance");
    auto* sch = app.add_subcommand("schedule", "optimize the task-to-core schedule");
    add_common(sch);
    auto* eig = app.add_subcommand("eigen", "print undamped natural frequencies [Hz]");
    add_common(eig);
    auto* mea = app.add_subcommand("measure", "measure task body execution times");
    add_common(mea);
    mea->add_option("--iterations", iterations, "timed iterations");
    mea->add_option("--warmup", warmup, "discarded warmup iterations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(opts);
        if (ver->parsed()) return cmd_verify(opts, tolerance);
        if (sch->parsed()) return cmd_schedule(opts);
        if (eig->parsed()) return cmd_eigen(opts);
        if (mea->parsed()) return cmd_measure(opts, iterations, warmup);
    } catch (const ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    }
    return kExitBadInput;
}
