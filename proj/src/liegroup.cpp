#include "tethersim/liegroup.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "tethersim/errors.hpp"

namespace tethersim::lie {

Mat3 hat(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return S;
}

Vec3 vee(const Mat3& S) {
  const double skew_defect = (S + S.transpose()).cwiseAbs().maxCoeff();
  if (skew_defect > 1e-9) {
    throw NonSkewInput("vee: input is not skew-symmetric, defect = " +
                       std::to_string(skew_defect));
  }
  return Vec3(S(2, 1), S(0, 2), S(1, 0));
}

Rotation exp_so3(const Vec3& v) {
  const double theta2 = v.squaredNorm();
  const Mat3 V = hat(v);
  double a, b;  // R = I + a*V + b*V^2
  if (theta2 < 1e-12) {
    // theta < 1e-6: series for sin(t)/t and (1-cos(t))/t^2
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * V + b * V * V;
}

Vec3 log_so3(const Rotation& R) {
  const double cos_theta = std::max(-1.0, std::min(1.0, (R.trace() - 1.0) / 2.0));
  const double theta = std::acos(cos_theta);
  const Vec3 w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < 1e-6) {
    // R ~ I: w = 2 sin(theta) axis, sin(t)/t series
    return 0.5 * (1.0 + theta * theta / 6.0) * w;
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the antisymmetric part degenerates; recover the axis from
    // the symmetric part B = (R + I)/2 = axis axis^T at theta = pi.
    const Mat3 B = 0.5 * (R + Mat3::Identity());
    int k = 0;
    B.diagonal().maxCoeff(&k);
    Vec3 axis = B.col(k) / std::sqrt(std::max(B(k, k), 1e-300));
    axis.normalize();
    // Fix the sign so that hat(axis) agrees with the antisymmetric part.
    if (axis.dot(w) < 0.0) axis = -axis;
    return theta * axis;
  }
  return theta / (2.0 * std::sin(theta)) * w;
}

Mat3 right_jacobian_so3(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 V = hat(phi);
  double c1, c2;  // Jr = I - c1*V + c2*V^2
  if (theta2 < 1e-12) {
    c1 = 0.5 - theta2 / 24.0;
    c2 = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    c1 = (1.0 - std::cos(theta)) / theta2;
    c2 = (theta - std::sin(theta)) / (theta2 * theta);
  }
  return Mat3::Identity() - c1 * V + c2 * V * V;
}

Mat3 right_jacobian_inv_so3(const Vec3& phi) {
  const double theta2 = phi.squaredNorm();
  const Mat3 V = hat(phi);
  double c;  // Jr^{-1} = I + V/2 + c V^2
  if (theta2 < 1e-12) {
    c = 1.0 / 12.0 + theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    c = 1.0 / theta2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  return Mat3::Identity() + 0.5 * V + c * V * V;
}

double trace_pairing(const Vec3& eta, const Mat3& B) {
  const Mat3 A = B - B.transpose();
  return -eta.x() * A(2, 1) - eta.y() * A(0, 2) - eta.z() * A(1, 0);
}

Rotation project_to_so3(const Mat3& M) {
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0.0) {
    Mat3 D = Mat3::Identity();
    D(2, 2) = -1.0;
    R = svd.matrixU() * D * svd.matrixV().transpose();
  }
  return R;
}

double orthogonality_error(const Rotation& R) {
  return (Mat3::Identity() - R.transpose() * R).cwiseAbs().maxCoeff();
}

}  // namespace tethersim::lie
