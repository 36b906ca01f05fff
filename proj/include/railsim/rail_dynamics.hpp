#pragma once

// Vertical-plane rail vehicle model: a carriage on two trolleys with a
// two-tier spring/damper suspension, excited by periodic rail roughness
// reaching the four wheelsets with transport delays.
//
// Generalized coordinate order used throughout (index 0..5):
//   z_k, phi_k, z_1, phi_1, z_2, phi_2
// (carriage heave/pitch, first trolley heave/pitch, second trolley heave/pitch).

#include <array>
#include <cstddef>

#include "railsim/errors.hpp"

namespace railsim {

inline constexpr std::size_t kNumCoords = 6;
inline constexpr std::size_t kNumWheelsets = 4;

enum Coord : std::size_t {
    kCarriageHeave = 0,
    kCarriagePitch = 1,
    kTrolley1Heave = 2,
    kTrolley1Pitch = 3,
    kTrolley2Heave = 4,
    kTrolley2Pitch = 5,
};

// Display names matching the CSV contract, indexed by Coord.
inline constexpr const char* kCoordNames[kNumCoords] = {
    "z_k", "phi_k", "z_1", "phi_1", "z_2", "phi_2"};

using Vec6 = std::array<double, kNumCoords>;
using Mat6 = std::array<Vec6, kNumCoords>;
using Mat6x4 = std::array<std::array<double, kNumWheelsets>, kNumCoords>;

// Masses, inertias, suspension coefficients and geometry. All SI.
struct VehicleParams {
    double m_k;  // carriage mass [kg]
    double J_k;  // carriage pitch inertia [kg m^2]
    double m_t;  // trolley mass [kg]
    double J_t;  // trolley pitch inertia [kg m^2]
    double a_k;  // half distance between trolley pivots [m]
    double a_t;  // half trolley wheelbase [m]
    double c_k;  // second-tier (carriage) stiffness [N/m]
    double b_k;  // second-tier damping [N s/m]
    double c_t;  // first-tier (trolley) stiffness [N/m]
    double b_t;  // first-tier damping [N s/m]

    void validate() const;

    // Default 57 t carriage / 9 t trolley parameter set.
    static VehicleParams defaults();
};

// 12 phase variables: displacement and velocity per generalized coordinate.
struct VehicleState {
    Vec6 pos{};  // displacements [m] / angles [rad]
    Vec6 vel{};  // velocities [m/s] / rates [rad/s]

    bool finite() const;
};

// Time derivative of a VehicleState (velocities copied, accelerations solved).
struct StateDerivative {
    Vec6 vel{};
    Vec6 acc{};
};

// Two-harmonic rail roughness profile swept at vehicle speed V.
struct TrackExcitation {
    double A1;      // first-harmonic amplitude [m]
    double A2;      // second-harmonic amplitude [m]
    double L_rail;  // rail link length [m]
    double V;       // vehicle speed [m/s]

    // Fundamental angular frequency, derived, never stored.
    double angular_frequency() const { return 2.0 * 3.14159265358979323846 * V / L_rail; }

    void validate() const;

    static TrackExcitation defaults();
};

// Roughness input under the four wheelsets at one instant.
// Order: front-trolley-front, front-trolley-rear, rear-trolley-front,
// rear-trolley-rear.
struct ExcitationSample {
    std::array<double, kNumWheelsets> eta{};
    std::array<double, kNumWheelsets> eta_dot{};
};

// Linear system form  M q'' + C q' + K q = B_c eta' + B_k eta.
struct SystemMatrices {
    Vec6 M_diag{};
    Mat6 C{};
    Mat6 K{};
    Mat6x4 B_c{};
    Mat6x4 B_k{};
};

// Roughness displacement/velocity per wheelset at time t. Wheelset j sees the
// profile delayed by its distance behind the lead wheelset divided by V; before
// the delayed profile starts (t < delay) the input is zero.
ExcitationSample excitation(double t, const TrackExcitation& track, double a_k, double a_t);

// Per-wheelset transport delays [s], same order as ExcitationSample.
std::array<double, kNumWheelsets> excitation_delays(const TrackExcitation& track, double a_k,
                                                    double a_t);

// Right-hand side of the 12-variable first-order system.
StateDerivative rhs(const VehicleState& state, const ExcitationSample& exc,
                    const VehicleParams& p);

// Mass/damping/stiffness/input matrices of the same equations.
SystemMatrices assemble_system(const VehicleParams& p);

// Undamped natural frequencies [Hz], ascending, from the (M, K) pencil.
std::array<double, kNumCoords> undamped_frequencies(const SystemMatrices& sys);

// Fraction of modal energy carried by the carriage coordinates for each mode
// of the undamped pencil, returned in the same ascending-frequency order.
// Used to classify modes as carriage- or trolley-dominated.
std::array<double, kNumCoords> carriage_mode_fractions(const SystemMatrices& sys);

}  // namespace railsim
