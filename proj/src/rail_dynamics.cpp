#include "railsim/rail_dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace railsim {

namespace {

void require(bool ok, const std::string& field, const std::string& why) {
    if (!ok) throw ParameterError(field + ": " + why);
}

bool all_finite(const Vec6& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

void VehicleParams::validate() const {
    require(m_k > 0, "m_k", "must be strictly positive");
    require(J_k > 0, "J_k", "must be strictly positive");
    require(m_t > 0, "m_t", "must be strictly positive");
    require(J_t > 0, "J_t", "must be strictly positive");
    require(c_k > 0, "c_k", "must be strictly positive");
    require(c_t > 0, "c_t", "must be strictly positive");
    require(b_k >= 0, "b_k", "must be non-negative");
    require(b_t >= 0, "b_t", "must be non-negative");
    require(a_t > 0, "a_t", "must be strictly positive");
    require(a_k > a_t, "a_k", "must exceed a_t");
}

VehicleParams VehicleParams::defaults() {
    VehicleParams p{};
    p.m_k = 57000.0;
    p.J_k = 7.0e5;
    p.m_t = 9000.0;
    p.J_t = 5000.0;
    p.a_k = 3.725;
    p.a_t = 1.25;
    p.c_k = 2.66e6;
    p.b_k = 1.0e5;
    p.c_t = 3.04e6;
    p.b_t = 3.0e4;
    return p;
}

bool VehicleState::finite() const { return all_finite(pos) && all_finite(vel); }

void TrackExcitation::validate() const {
    require(L_rail > 0, "l_rail", "must be strictly positive");
    require(V > 0, "v", "must be strictly positive");
    require(A1 >= 0, "a1", "must be non-negative");
    require(A2 >= 0, "a2", "must be non-negative");
}

TrackExcitation TrackExcitation::defaults() { return TrackExcitation{0.005, 0.002, 25.0, 20.0}; }

std::array<double, kNumWheelsets> excitation_delays(const TrackExcitation& track, double a_k,
                                                    double a_t) {
    return {0.0, 2.0 * a_t / track.V, 2.0 * a_k / track.V, (2.0 * a_k + 2.0 * a_t) / track.V};
}

ExcitationSample excitation(double t, const TrackExcitation& track, double a_k, double a_t) {
    track.validate();
    const double w = track.angular_frequency();
    const auto delay = excitation_delays(track, a_k, a_t);
    ExcitationSample s;
    for (std::size_t j = 0; j < kNumWheelsets; ++j) {
        const double tj = t - delay[j];
        if (tj < 0.0) continue;  // rail not yet reached: input is zero
        s.eta[j] = track.A1 * std::sin(w * tj) + track.A2 * std::sin(2.0 * w * tj);
        s.eta_dot[j] =
            track.A1 * w * std::cos(w * tj) + 2.0 * track.A2 * w * std::cos(2.0 * w * tj);
    }
    return s;
}

StateDerivative rhs(const VehicleState& state, const ExcitationSample& exc,
                    const VehicleParams& p) {
    if (!state.finite()) throw ParameterError("state: non-finite phase variable");
    for (std::size_t j = 0; j < kNumWheelsets; ++j)
        if (!std::isfinite(exc.eta[j]) || !std::isfinite(exc.eta_dot[j]))
            throw ParameterError("excitation: non-finite sample");

    const double z_k = state.pos[kCarriageHeave], phi_k = state.pos[kCarriagePitch];
    const double z_1 = state.pos[kTrolley1Heave], phi_1 = state.pos[kTrolley1Pitch];
    const double z_2 = state.pos[kTrolley2Heave], phi_2 = state.pos[kTrolley2Pitch];
    const double vz_k = state.vel[kCarriageHeave], wphi_k = state.vel[kCarriagePitch];
    const double vz_1 = state.vel[kTrolley1Heave], wphi_1 = state.vel[kTrolley1Pitch];
    const double vz_2 = state.vel[kTrolley2Heave], wphi_2 = state.vel[kTrolley2Pitch];

    const auto& e = exc.eta;
    const auto& ed = exc.eta_dot;

    StateDerivative d;
    d.vel = state.vel;

    // Carriage heave: both second-tier suspensions act between carriage and
    // the two trolleys.
    d.acc[kCarriageHeave] = -(p.b_k * (2.0 * vz_k - vz_1 - vz_2)
                              + p.c_k * (2.0 * z_k - z_1 - z_2)) / p.m_k;

    // Carriage pitch (galloping); trolley 1 sits at +a_k, trolley 2 at -a_k.
    d.acc[kCarriagePitch] = -(p.a_k * p.b_k * (2.0 * p.a_k * wphi_k - vz_1 + vz_2)
                              + p.a_k * p.c_k * (2.0 * p.a_k * phi_k - z_1 + z_2)) / p.J_k;

    // First trolley heave: second-tier coupling to the carriage plus two
    // first-tier wheelset suspensions, driven by eta_1, eta_2.
    d.acc[kTrolley1Heave] = (p.b_k * (vz_k - vz_1 + p.a_k * wphi_k)
                             + p.c_k * (z_k - z_1 + p.a_k * phi_k)
                             - 2.0 * p.b_t * vz_1 - 2.0 * p.c_t * z_1
                             + p.b_t * (ed[0] + ed[1]) + p.c_t * (e[0] + e[1])) / p.m_t;

    d.acc[kTrolley1Pitch] = (-2.0 * p.a_t * p.a_t * (p.b_t * wphi_1 + p.c_t * phi_1)
                             + p.a_t * (p.b_t * (ed[0] - ed[1]) + p.c_t * (e[0] - e[1]))) / p.J_t;

    // Second trolley: mirror of the first (pitch arm enters with opposite sign).
    d.acc[kTrolley2Heave] = (p.b_k * (vz_k - vz_2 - p.a_k * wphi_k)
                             + p.c_k * (z_k - z_2 - p.a_k * phi_k)
                             - 2.0 * p.b_t * vz_2 - 2.0 * p.c_t * z_2
                             + p.b_t * (ed[2] + ed[3]) + p.c_t * (e[2] + e[3])) / p.m_t;

    d.acc[kTrolley2Pitch] = (-2.0 * p.a_t * p.a_t * (p.b_t * wphi_2 + p.c_t * phi_2)
                             + p.a_t * (p.b_t * (ed[2] - ed[3]) + p.c_t * (e[2] - e[3]))) / p.J_t;

    return d;
}

SystemMatrices assemble_system(const VehicleParams& p) {
    if (!(p.m_k > 0 && p.J_k > 0 && p.m_t > 0 && p.J_t > 0))
        throw ParameterError("params: masses and inertias must be strictly positive");
    if (!(p.c_k >= 0 && p.c_t >= 0 && p.b_k >= 0 && p.b_t >= 0))
        throw ParameterError("params: stiffnesses and dampings must be non-negative");
    if (!(p.a_k >= 0 && p.a_t >= 0)) throw ParameterError("params: geometry must be non-negative");

    SystemMatrices s;
    s.M_diag = {p.m_k, p.J_k, p.m_t, p.J_t, p.m_t, p.J_t};

    const double ak = p.a_k, at = p.a_t;

    auto fill = [&](Mat6& A, double tier2, double tier1) {
        A[kCarriageHeave] = {2 * tier2, 0, -tier2, 0, -tier2, 0};
        A[kCarriagePitch] = {0, 2 * ak * ak * tier2, -ak * tier2, 0, ak * tier2, 0};
        A[kTrolley1Heave] = {-tier2, -ak * tier2, tier2 + 2 * tier1, 0, 0, 0};
        A[kTrolley1Pitch] = {0, 0, 0, 2 * at * at * tier1, 0, 0};
        A[kTrolley2Heave] = {-tier2, ak * tier2, 0, 0, tier2 + 2 * tier1, 0};
        A[kTrolley2Pitch] = {0, 0, 0, 0, 0, 2 * at * at * tier1};
    };
    fill(s.C, p.b_k, p.b_t);
    fill(s.K, p.c_k, p.c_t);

    s.B_k[kTrolley1Heave] = {p.c_t, p.c_t, 0, 0};
    s.B_k[kTrolley1Pitch] = {at * p.c_t, -at * p.c_t, 0, 0};
    s.B_k[kTrolley2Heave] = {0, 0, p.c_t, p.c_t};
    s.B_k[kTrolley2Pitch] = {0, 0, at * p.c_t, -at * p.c_t};
    s.B_c[kTrolley1Heave] = {p.b_t, p.b_t, 0, 0};
    s.B_c[kTrolley1Pitch] = {at * p.b_t, -at * p.b_t, 0, 0};
    s.B_c[kTrolley2Heave] = {0, 0, p.b_t, p.b_t};
    s.B_c[kTrolley2Pitch] = {0, 0, at * p.b_t, -at * p.b_t};
    return s;
}

namespace {

Eigen::Matrix<double, 6, 6> to_eigen(const Mat6& m) {
    Eigen::Matrix<double, 6, 6> out;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) out(i, j) = m[i][j];
    return out;
}

// Generalized symmetric eigenproblem K v = lambda M v with diagonal M.
Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> solve_pencil(
    const SystemMatrices& sys) {
    for (double m : sys.M_diag)
        if (!(m > 0)) throw AnalysisError("mass matrix not strictly positive");
    Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
    for (int i = 0; i < 6; ++i) M(i, i) = sys.M_diag[i];
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(to_eigen(sys.K), M);
    if (es.info() != Eigen::Success) throw AnalysisError("eigen decomposition failed");
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw AnalysisError("stiffness matrix not positive definite");
    return es;
}

}  // namespace

std::array<double, kNumCoords> undamped_frequencies(const SystemMatrices& sys) {
    auto es = solve_pencil(sys);
    std::array<double, kNumCoords> f{};
    for (int i = 0; i < 6; ++i)
        f[static_cast<std::size_t>(i)] =
            std::sqrt(es.eigenvalues()(i)) / (2.0 * 3.14159265358979323846);
    return f;  // eigenvalues come out ascending
}

std::array<double, kNumCoords> carriage_mode_fractions(const SystemMatrices& sys) {
    auto es = solve_pencil(sys);
    std::array<double, kNumCoords> frac{};
    for (int i = 0; i < 6; ++i) {
        double total = 0.0, carriage = 0.0;
        for (int c = 0; c < 6; ++c) {
            const double e = sys.M_diag[static_cast<std::size_t>(c)] * es.eigenvectors()(c, i) *
                             es.eigenvectors()(c, i);
            total += e;
            if (c == kCarriageHeave || c == kCarriagePitch) carriage += e;
        }
        frac[static_cast<std::size_t>(i)] = carriage / total;
    }
    return frac;
}

}  // namespace railsim
