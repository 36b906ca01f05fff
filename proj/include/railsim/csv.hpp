#pragma once

// Trajectory CSV emission. Locale-independent: '.' decimal point, '\n'
// newlines, shortest round-trip float formatting, fixed column order
// t,z_k,phi_k,z_1,phi_1,z_2,phi_2.

#include <ostream>
#include <string>

#include "railsim/multirate.hpp"

namespace railsim {

inline constexpr const char* kCsvHeader = "t,z_k,phi_k,z_1,phi_1,z_2,phi_2";

// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Gnuplot script plotting the displacement columns of the given CSV file.
void write_plot_script(std::ostream& os, const std::string& csv_name);

}  // namespace railsim
