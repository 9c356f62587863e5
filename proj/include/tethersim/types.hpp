#pragma once

#include <Eigen/Dense>

namespace tethersim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rotation matrices are stored as full 3x3 matrices and are only ever
// updated by right multiplication with another rotation. There is no
// corrective reprojection anywhere on the integrator path; orthogonality
// is preserved by construction.
using Rotation = Eigen::Matrix3d;

}  // namespace tethersim
