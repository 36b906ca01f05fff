#include "railsim/csv.hpp"

#include <charconv>

namespace railsim {

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << kCsvHeader << "\n";
    for (std::size_t s = 0; s < traj.samples.size(); ++s) {
        os << format_double(traj.times[s]);
        for (std::size_t c = 0; c < kNumCoords; ++c)
            os << "," << format_double(traj.samples[s].pos[c]);
        os << "\n";
    }
}

void write_plot_script(std::ostream& os, const std::string& csv_name) {
    os << "set datafile separator ','\n"
          "set key autotitle columnhead\n"
          "set xlabel 't [s]'\n"
          "set ylabel 'displacement [m] / angle [rad]'\n"
          "plot";
    for (std::size_t c = 0; c < kNumCoords; ++c)
        os << (c == 0 ? " " : ", \\\n     ") << "'" << csv_name << "' using 1:" << (c + 2)
           << " with lines";
    os << "\n";
}

}  // namespace railsim
