#include "railsim/multirate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace railsim {

namespace {

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= p[i];
        hash *= 1099511628211ull;
    }
    return hash;
}

}  // namespace

std::uint64_t trajectory_digest(const VehicleParams& p, const TrackExcitation& t,
                                const std::array<int, kNumGroups>& divisors, double h,
                                double duration) {
    std::uint64_t d = 14695981039346656037ull;
    d = fnv1a(d, &p, sizeof p);
    d = fnv1a(d, &t, sizeof t);
    d = fnv1a(d, divisors.data(), sizeof divisors);
    d = fnv1a(d, &h, sizeof h);
    d = fnv1a(d, &duration, sizeof duration);
    return d;
}

EulerStepper::EulerStepper(const VehicleParams& p, const TrackExcitation& track, double h,
                           const VehicleState& initial)
    : params_(p), track_(track), h_(h), state_(initial) {
    p.validate();
    track.validate();
    if (!(h > 0)) throw ParameterError("h: must be strictly positive");
    if (!initial.finite()) throw ParameterError("initial: non-finite state");
}

void EulerStepper::step(std::uint64_t n, const std::array<bool, kNumGroups>& due,
                        const std::array<int, kNumGroups>& divisors) {
    const double t = static_cast<double>(n) * h_;
    const VehicleState snapshot = state_;
    const ExcitationSample exc = excitation(t, track_, params_.a_k, params_.a_t);
    const StateDerivative d = rhs(snapshot, exc, params_);
    for (std::size_t g = 0; g < kNumGroups; ++g) {
        if (!due[g]) continue;
        const double he = static_cast<double>(divisors[g]) * h_;
        for (std::size_t c : kGroupCoords[g]) {
            state_.pos[c] = snapshot.pos[c] + he * snapshot.vel[c];
            state_.vel[c] = snapshot.vel[c] + he * d.acc[c];
        }
    }
}

Trajectory simulate(const VehicleParams& p, const TrackExcitation& track, const RateGroups& groups,
                    double h, double duration, const VehicleState& initial,
                    const SimOptions& opts) {
    groups.validate();
    if (!(duration >= h)) throw ParameterError("duration: must be >= h");
    if (opts.output_stride < 1) throw ParameterError("output_stride: must be >= 1");

    const auto steps = static_cast<std::uint64_t>(std::llround(duration / h));
    const auto stride = static_cast<std::uint64_t>(opts.output_stride);

    EulerStepper stepper(p, track, h, initial);

    Trajectory traj;
    traj.h = h;
    traj.output_stride = opts.output_stride;
    traj.divisors = groups.divisors;
    traj.track = track;
    traj.config_digest = trajectory_digest(p, track, groups.divisors, h, duration);
    traj.times.reserve(steps / stride + 2);
    traj.samples.reserve(steps / stride + 2);
    traj.times.push_back(0.0);
    traj.samples.push_back(initial);

    for (std::uint64_t n = 0; n < steps; ++n) {
        std::array<bool, kNumGroups> due{};
        for (std::size_t g = 0; g < kNumGroups; ++g)
            due[g] = (n % static_cast<std::uint64_t>(groups.divisors[g]) == 0);
        stepper.step(n, due, groups.divisors);
        if ((n + 1) % stride == 0) {
            const double t = static_cast<double>(n + 1) * h;
            if (!stepper.state().finite())
                throw DivergenceError("integration diverged at t=" + std::to_string(t), t);
            traj.times.push_back(t);
            traj.samples.push_back(stepper.state());
        }
    }
    if (!stepper.state().finite()) {
        const double t = static_cast<double>(steps) * h;
        throw DivergenceError("integration diverged at t=" + std::to_string(t), t);
    }
    return traj;
}

double DeviationReport::worst_relative() const {
    double worst = 0.0;
    for (double r : relative) worst = std::max(worst, r);
    return worst;
}

DeviationReport compare_trajectories(const Trajectory& a, const Trajectory& b) {
    if (a.samples.size() != b.samples.size() || a.h != b.h ||
        a.output_stride != b.output_stride)
        throw ParameterError("trajectories: mismatched sample grids");

    DeviationReport r;
    for (std::size_t s = 0; s < a.samples.size(); ++s) {
        for (std::size_t c = 0; c < kNumCoords; ++c) {
            const double dp = std::fabs(a.samples[s].pos[c] - b.samples[s].pos[c]);
            const double dv = std::fabs(a.samples[s].vel[c] - b.samples[s].vel[c]);
            r.max_abs[c] = std::max(r.max_abs[c], dp);
            r.max_abs[c + 6] = std::max(r.max_abs[c + 6], dv);
            r.peak[c] = std::max(r.peak[c], std::fabs(a.samples[s].pos[c]));
            r.peak[c + 6] = std::max(r.peak[c + 6], std::fabs(a.samples[s].vel[c]));
        }
    }
    for (std::size_t i = 0; i < 12; ++i) {
        if (r.peak[i] > 0.0)
            r.relative[i] = r.max_abs[i] / r.peak[i];
        else
            r.relative[i] = (r.max_abs[i] > 0.0) ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return r;
}

}  // namespace railsim
