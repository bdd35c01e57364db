#pragma once

#include "chronocalc/fields.hpp"

#include <string>
#include <vector>

// Builtin fields with closed-form flows, used by the golden tests and the CLI.
namespace chronocalc::catalog {

VectorField zero(int dim);
VectorField constant(const Eigen::VectorXd& c);
/// x -> A x
VectorField linear(const Eigen::MatrixXd& a);
/// Linear field with A = [[0, -1], [1, 0]].
VectorField rotation2d();
/// Nilpotent shear A = [[0, 1], [0, 0]]; its Volterra series terminates.
VectorField nilpotent2d();

/// Heisenberg fields on R^3: V1 = (1, 0, -y/2), V2 = (0, 1, x/2), [V1, V2] = (0, 0, 1).
VectorField heisenberg_v1();
VectorField heisenberg_v2();

/// Brockett integrator: V1 = (1, 0, -y), V2 = (0, 1, x), [V1, V2] = (0, 0, 2).
VectorField brockett_v1();
VectorField brockett_v2();

/// Unicycle with the heading stored as (c, s) = (cos theta, sin theta), which
/// keeps the kinematics polynomial on R^4: drive = (c, s, 0, 0),
/// steer = (0, 0, -s, c). The brackets span the 3-dimensional tangent space of
/// the invariant set c^2 + s^2 = 1.
VectorField unicycle_drive();
VectorField unicycle_steer();

/// Named control systems (lists of fields). Names: zero, constant, linear,
/// rotation2d, heisenberg, unicycle, brockett.
std::vector<VectorField> system(const std::string& name);
std::vector<std::string> system_names();
bool has_system(const std::string& name);

} // namespace chronocalc::catalog
