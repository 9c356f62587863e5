#pragma once

#include "tethersim/types.hpp"

namespace tethersim::lie {

/// Hat map R^3 -> so(3): hat(v) * w == v x w for all w.
Mat3 hat(const Vec3& v);

/// Inverse of the hat map. Throws NonSkewInput if ||S + S^T||_inf > 1e-9.
Vec3 vee(const Mat3& S);

/// Exponential map so(3) -> SO(3), Rodrigues closed form with a series
/// branch below ||v|| = 1e-6.
Rotation exp_so3(const Vec3& v);

/// Logarithm SO(3) -> R^3 (rotation vector, angle in [0, pi]).
Vec3 log_so3(const Rotation& R);

/// Right Jacobian of exp_so3: exp((phi + d)^) = exp(phi^) exp((Jr(phi) d)^)
/// to first order in d.
Mat3 right_jacobian_so3(const Vec3& phi);

/// Inverse of the right Jacobian; sigma' = Jr(sigma)^{-1} Omega integrates
/// R = R0 exp(sigma^) against body rates.
Mat3 right_jacobian_inv_so3(const Vec3& phi);

/// tr(hat(eta) * B), evaluated as -eta . vee(B - B^T).
double trace_pairing(const Vec3& eta, const Mat3& B);

/// Closest rotation in the Frobenius sense (polar factor). Reference-path
/// utility only; the variational integrator never calls it.
Rotation project_to_so3(const Mat3& M);

/// max |I - R^T R| entrywise.
double orthogonality_error(const Rotation& R);

}  // namespace tethersim::lie
