#pragma once

#include <iosfwd>
#include <string>

#include "vtm/simulate.hpp"

namespace vtm {

/// Columns: t, q_1..q_n, qd_1..qd_n, p_1..p_n, E_kin, E_pot, E_tot, drift,
/// event. Momentum cells of locked joints are empty. Values use 17
/// significant digits so a read-back is exact.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

/// Shortest-roundtrip-safe decimal form with 17 significant digits.
std::string format_double(double v);

}  // namespace vtm
