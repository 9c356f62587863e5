#include "tethersim/params.hpp"

#include <Eigen/Eigenvalues>

#include "tethersim/errors.hpp"

namespace tethersim {

namespace {

bool symmetric_positive_definite(const Mat3& M) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * M.cwiseAbs().maxCoeff()) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(M);
  return es.eigenvalues().minCoeff() > 0.0;
}

}  // namespace

void PhysParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigInvalid(std::string(name) + " must be strictly positive");
  };
  positive(m, "m");
  positive(m_r, "m_r");
  positive(m_s, "m_s");
  positive(d, "d");
  positive(b, "b");
  positive(kappa2, "kappa2");
  positive(L, "L");
  positive(mu_bar, "mu_bar");
  positive(EA, "EA");
  positive(h, "h");
  if (GM < 0.0) throw ConfigInvalid("GM must be non-negative");
  if (N < 1) throw ConfigInvalid("N must be at least 1");
  if (!symmetric_positive_definite(J)) throw ConfigInvalid("J must be symmetric positive definite");
  if (!symmetric_positive_definite(J_s)) throw ConfigInvalid("J_s must be symmetric positive definite");
  const Vec3 expected(d, 0.0, b);
  if ((rho - expected).norm() > 1e-12 * expected.norm()) {
    throw ConfigInvalid("rho must equal [d, 0, b]");
  }
  if (b > L) throw ConfigInvalid("guideway length b exceeds tether length L");
}

double PhysParams::element_length(double s_p) const {
  if (s_p >= L) throw FullyReeled("element_length: s_p >= L, no deployed tether");
  return (L - s_p) / static_cast<double>(N);
}

Mat3 nonstandard_inertia(const Mat3& J) {
  return 0.5 * J.trace() * Mat3::Identity() - J;
}

}  // namespace tethersim
