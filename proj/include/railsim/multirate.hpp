#pragma once

// Fixed-step explicit Euler integration of the vehicle model with per-group
// rate divisors: the six coordinate pairs are split into three groups
// (carriage, trolley 1, trolley 2), and group g advances only every
// divisor[g]-th base step, with an effective step of divisor[g]*h. Groups
// read a snapshot of the full state taken at the start of the base step
// (zero-order hold on everything computed by other groups).

#include <array>
#include <cstdint>
#include <vector>

#include "railsim/rail_dynamics.hpp"

namespace railsim {

inline constexpr std::size_t kNumGroups = 3;

// Coordinate indices belonging to each rate group.
inline constexpr std::array<std::array<std::size_t, 2>, kNumGroups> kGroupCoords = {{
    {kCarriageHeave, kCarriagePitch},
    {kTrolley1Heave, kTrolley1Pitch},
    {kTrolley2Heave, kTrolley2Pitch},
}};

inline constexpr const char* kGroupNames[kNumGroups] = {"carriage", "trolley1", "trolley2"};

struct RateGroups {
    // Base-step divisor per group: carriage, trolley1, trolley2.
    std::array<int, kNumGroups> divisors{1, 1, 1};

    void validate() const {
        for (int d : divisors)
            if (d < 1) throw ParameterError("divisors: must be >= 1");
    }
};

struct Trajectory {
    double h = 0.0;                           // base step [s]
    int output_stride = 1;                    // samples every stride-th base step
    std::array<int, kNumGroups> divisors{1, 1, 1};
    TrackExcitation track{};
    std::uint64_t config_digest = 0;
    std::vector<double> times;                // t = i * h * output_stride
    std::vector<VehicleState> samples;
};

struct SimOptions {
    int output_stride = 1;
};

Trajectory simulate(const VehicleParams& p, const TrackExcitation& track, const RateGroups& groups,
                    double h, double duration, const VehicleState& initial,
                    const SimOptions& opts = {});

// One multi-rate Euler base step, shared by simulate() and the executor so
// both produce bit-identical sequences. The caller decides which groups are
// due at step n; every due group reads the same start-of-step snapshot.
class EulerStepper {
public:
    EulerStepper(const VehicleParams& p, const TrackExcitation& track, double h,
                 const VehicleState& initial);

    // Advances all groups with due[g] set, each with effective step
    // divisor[g] * h, using the excitation evaluated at t = n*h.
    void step(std::uint64_t n, const std::array<bool, kNumGroups>& due,
              const std::array<int, kNumGroups>& divisors);

    const VehicleState& state() const { return state_; }

private:
    VehicleParams params_;
    TrackExcitation track_;
    double h_;
    VehicleState state_;
};

// Per-coordinate comparison over the 12 phase variables (6 displacements
// followed by 6 velocities, coordinate order as in rail_dynamics).
struct DeviationReport {
    std::array<double, 12> max_abs{};        // max |a - b| over the grid
    std::array<double, 12> peak{};           // max |a| over the grid
    std::array<double, 12> relative{};       // max_abs / peak (0 when both are 0)

    double worst_relative() const;
};

DeviationReport compare_trajectories(const Trajectory& a, const Trajectory& b);

// Digest of everything that determines a trajectory, for reproducibility
// metadata. Identical configs give identical digests.
std::uint64_t trajectory_digest(const VehicleParams& p, const TrackExcitation& track,
                                const std::array<int, kNumGroups>& divisors, double h,
                                double duration);

}  // namespace railsim
