#include "tethersim/lgvi.hpp"

#include <cmath>
#include <vector>

#include <lapacke.h>

#include "tethersim/errors.hpp"
#include "tethersim/liegroup.hpp"

namespace tethersim::lgvi {

namespace {

using lie::exp_so3;
using lie::hat;
using lie::log_so3;
using lie::right_jacobian_so3;

Vec3 skew_vee(const Mat3& B) {
  // vee(B - B^T) without the skewness check.
  return Vec3(B(2, 1) - B(1, 2), B(0, 2) - B(2, 0), B(1, 0) - B(0, 1));
}

// Ad*_{f^{-1}}: identity on the abelian slots, m -> F m on the rotations.
AlgebraVector adstar(const GroupIncrement& f, const AlgebraVector& m) {
  AlgebraVector out = m;
  out.phi() = f.F * Vec3(m.phi());
  out.phi_s() = f.F_s * Vec3(m.phi_s());
  return out;
}

double gamma23(const PhysParams& p, int a) {
  return p.mu_bar * (1.0 + 3.0 * p.N - 3.0 * a) / (6.0 * p.N);
}

double gamma31(const PhysParams& p, int a) {
  return p.mu_bar * (2.0 + 3.0 * p.N - 3.0 * a) / (6.0 * p.N);
}

// Slot scales for the Newton convergence test: translation-type slots by
// m_total L / h^2, attitude slots by tr(J) / h^2.
struct SlotScales {
  double translation;
  double attitude;
  double attitude_sub;
};

SlotScales slot_scales(const PhysParams& p) {
  const double m_total = p.m + p.m_r + p.mu_bar * p.L + p.m_s;
  const double h2 = p.h * p.h;
  return {m_total * p.L / h2, p.J.trace() / h2, p.J_s.trace() / h2};
}

// ---------------------------------------------------------------------------
// Reduced coordinates: the Newton unknown drops dr_1 (slaved to the
// attachment constraint) and, for a fixed drum, ds_p.

struct Reduction {
  int N;
  bool free_drum;
  int n_core;  // banded block: dx, phi, dr_2..dr_{N+1}, phi_s

  explicit Reduction(int n_elements, bool free_drum_)
      : N(n_elements), free_drum(free_drum_), n_core(3 * n_elements + 9) {}

  static int off_x() { return 0; }
  static int off_phi() { return 3; }
  static int off_r(int j) { return 6 + 3 * (j - 2); }  // j = 2..N+1
  int off_phi_s() const { return 3 * N + 6; }
};

GroupIncrement build_increment(const PhysParams& p, const GroupConfig& g,
                               const Reduction& red, const Eigen::VectorXd& core,
                               double ds_p) {
  GroupIncrement f;
  f.dx = core.segment<3>(Reduction::off_x());
  f.F = exp_so3(core.segment<3>(Reduction::off_phi()));
  f.ds_p = ds_p;
  f.dr.resize(p.N + 1);
  for (int j = 2; j <= p.N + 1; ++j) f.dr[j - 1] = core.segment<3>(Reduction::off_r(j));
  f.dr[0] = f.dx + g.R * (f.F - Mat3::Identity()) * p.rho;
  f.F_s = exp_so3(core.segment<3>(red.off_phi_s()));
  return f;
}

// Constrained rows: the dr_1 row folds into the x and base-attitude rows
// through delta r_1 = delta x - R hat(rho) eta.
void project_rows(const PhysParams& p, const GroupConfig& g, const Reduction& red,
                  const AlgebraVector& res, Eigen::VectorXd& core, double& sp_row) {
  core.resize(red.n_core);
  core.segment<3>(Reduction::off_x()) = Vec3(res.dx()) + Vec3(res.dr(1));
  core.segment<3>(Reduction::off_phi()) =
      Vec3(res.phi()) + p.rho.cross(g.R.transpose() * Vec3(res.dr(1)));
  for (int j = 2; j <= p.N + 1; ++j) core.segment<3>(Reduction::off_r(j)) = res.dr(j);
  core.segment<3>(red.off_phi_s()) = res.phi_s();
  sp_row = res.ds_p();
}

double scaled_norm(const PhysParams& p, const Reduction& red,
                   const Eigen::VectorXd& core, double sp_row) {
  const SlotScales s = slot_scales(p);
  double worst = 0.0;
  for (int i = 0; i < red.n_core; ++i) {
    double scale = s.translation;
    if (i >= Reduction::off_phi() && i < Reduction::off_phi() + 3) scale = s.attitude;
    if (i >= red.off_phi_s()) scale = s.attitude_sub;
    worst = std::max(worst, std::abs(core(i)) / scale);
  }
  if (red.free_drum) worst = std::max(worst, std::abs(sp_row) / s.translation);
  return worst;
}

// ---------------------------------------------------------------------------
// Banded core in LAPACK general-band storage (kl = ku = 8), plus a dense
// border row/column for the reeling degree of freedom.

constexpr int kBandwidth = 8;

struct BorderedBandedSystem {
  int n;
  Eigen::MatrixXd ab;        // (2 kl + ku + 1) x n
  Eigen::VectorXd border_col;
  Eigen::RowVectorXd border_row;
  double corner = 0.0;

  explicit BorderedBandedSystem(int n_core)
      : n(n_core), ab(Eigen::MatrixXd::Zero(3 * kBandwidth + 1, n_core)),
        border_col(Eigen::VectorXd::Zero(n_core)),
        border_row(Eigen::RowVectorXd::Zero(n_core)) {}

  void add(int i, int j, double v) {
    // Row i, column j of the core matrix; band storage offset kl + ku + i - j.
    ab(2 * kBandwidth + i - j, j) += v;
  }

  template <typename Block>
  void add_block(int i, int j, const Block& B) {
    for (int r = 0; r < B.rows(); ++r)
      for (int c = 0; c < B.cols(); ++c) add(i + r, j + c, B(r, c));
  }

  // Solves [A c; r^T alpha] [y; s] = [b; beta] with a banded factorization
  // of A and a Schur complement for the border. Without the border (fixed
  // drum) it is a plain banded solve.
  bool solve(Eigen::VectorXd& b, double beta, bool with_border, double& s_out) {
    std::vector<lapack_int> ipiv(n);
    const lapack_int ldab = static_cast<lapack_int>(ab.rows());
    lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kBandwidth, kBandwidth,
                                     ab.data(), ldab, ipiv.data());
    if (info != 0) return false;

    Eigen::MatrixXd rhs(n, with_border ? 2 : 1);
    rhs.col(0) = b;
    if (with_border) rhs.col(1) = border_col;
    info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kBandwidth, kBandwidth,
                          static_cast<lapack_int>(rhs.cols()), ab.data(), ldab,
                          ipiv.data(), rhs.data(), n);
    if (info != 0) return false;

    if (with_border) {
      const double denom = corner - border_row.dot(rhs.col(1));
      if (std::abs(denom) < 1e-300) return false;
      s_out = (beta - border_row.dot(rhs.col(0))) / denom;
      b = rhs.col(0) - s_out * rhs.col(1);
    } else {
      s_out = 0.0;
      b = rhs.col(0);
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Analytic Jacobian of the projected residual with respect to the reduced
// unknown. The potential gradient is evaluated at the known configuration
// only, so the Jacobian is purely kinetic apart from the Carnot term.

struct JacobianWorkspace {
  // Full-slot identifiers: rows/columns of the unreduced residual.
  enum Slot { kX = 0, kPhi = 1, kSp = 2, kR = 3 };  // kR + (a-1) for r_a
};

void assemble_jacobian(const PhysParams& p, const GroupConfig& g, const Reduction& red,
                       const Eigen::VectorXd& core, const GroupIncrement& f,
                       BorderedBandedSystem& sys) {
  const int N = p.N;
  const double beta = 1.0 / p.h;
  const double l = p.element_length(g.s_p);
  const InertiaCoeffs c = inertia_coeffs(p, g.s_p, g.r);
  const Mat3 Jd = nonstandard_inertia(p.J);
  const Mat3 Jsd = nonstandard_inertia(p.J_s);
  const Vec3 phi = core.segment<3>(Reduction::off_phi());
  const Vec3 phi_s = core.segment<3>(red.off_phi_s());
  const Mat3 Jr_phi = right_jacobian_so3(phi);
  const Mat3 Jr_phis = right_jacobian_so3(phi_s);

  // Chains of the slaved dr_1 = dx + R(F - I) rho.
  const Mat3 dr1_dphi = -g.R * f.F * hat(p.rho) * Jr_phi;

  // Row projector factors for the dr_1 residual row.
  const Mat3 row_r1_to_phi = hat(p.rho) * g.R.transpose();

  // Generic dispatch: full-slot block -> reduced banded/border entries.
  auto reduced_rows = [&](int slot, auto&& emit) {
    // emit(row_offset_or_border, left_factor)
    if (slot == JacobianWorkspace::kX) {
      emit(Reduction::off_x(), Mat3::Identity().eval(), false);
    } else if (slot == JacobianWorkspace::kPhi) {
      emit(Reduction::off_phi(), Mat3::Identity().eval(), false);
    } else if (slot == JacobianWorkspace::kSp) {
      emit(0, Mat3::Identity().eval(), true);
    } else {
      const int a = slot - JacobianWorkspace::kR + 1;
      if (a == 1) {
        emit(Reduction::off_x(), Mat3::Identity().eval(), false);
        emit(Reduction::off_phi(), row_r1_to_phi, false);
      } else {
        emit(Reduction::off_r(a), Mat3::Identity().eval(), false);
      }
    }
  };
  auto reduced_cols = [&](int slot, auto&& emit) {
    if (slot == JacobianWorkspace::kX) {
      emit(Reduction::off_x(), Mat3::Identity().eval(), false);
    } else if (slot == JacobianWorkspace::kPhi) {
      emit(Reduction::off_phi(), Mat3::Identity().eval(), false);
    } else if (slot == JacobianWorkspace::kSp) {
      emit(0, Mat3::Identity().eval(), true);
    } else {
      const int a = slot - JacobianWorkspace::kR + 1;
      if (a == 1) {
        emit(Reduction::off_x(), Mat3::Identity().eval(), false);
        emit(Reduction::off_phi(), dr1_dphi, false);
      } else {
        emit(Reduction::off_r(a), Mat3::Identity().eval(), false);
      }
    }
  };

  // add_full(row_slot, col_slot, B): distributes L * B * R.
  auto add_full = [&](int row_slot, int col_slot, const Eigen::MatrixXd& B) {
    reduced_rows(row_slot, [&](int ro, const Mat3& L, bool row_border) {
      reduced_cols(col_slot, [&](int co, const Mat3& R, bool col_border) {
        Eigen::MatrixXd blk = B;
        if (!row_border && B.rows() == 3) blk = L * blk;
        if (!col_border && blk.cols() == 3) blk = blk * R;
        if (row_border && col_border) {
          sys.corner += blk(0, 0);
        } else if (row_border) {
          sys.border_row.segment(co, blk.cols()) += blk.row(0);
        } else if (col_border) {
          sys.border_col.segment(ro, blk.rows()) += blk.col(0);
        } else {
          sys.add_block(ro, co, blk);
        }
      });
    });
  };

  const int phi_slot = JacobianWorkspace::kPhi;
  const int sp_slot = JacobianWorkspace::kSp;
  auto r_slot = [](int a) { return JacobianWorkspace::kR + (a - 1); };

  // Base translation.
  add_full(JacobianWorkspace::kX, JacobianWorkspace::kX,
           (-beta * p.base_mass(g.s_p)) * Mat3::Identity());

  // Base attitude trace term. For B = Jd F the derivative of
  // vee(B - B^T) along F exp(eps h^) is [tr(B) I - (B + B^T)/2 + w^/2] h
  // with w = vee(B - B^T); the leading F h^ factor contributes -w^.
  {
    const Mat3 B = Jd * f.F;
    const Vec3 w = skew_vee(B);
    const Mat3 blk = -beta * f.F *
                     (B.trace() * Mat3::Identity() - 0.5 * (B + B.transpose()) -
                      0.5 * hat(w)) *
                     Jr_phi;
    add_full(phi_slot, phi_slot, blk);
  }

  // Reeling slot.
  {
    double M3_sum = 0.0, dM3_sum = 0.0;
    for (int a = 1; a <= N; ++a) {
      M3_sum += c.M3[a - 1];
      dM3_sum += c.dM3[a - 1];
    }
    const double strain_len = (g.r[1] - g.r[0]).norm() - l;
    const double dq = -(p.mu_bar * f.ds_p / (p.h * l * l)) * strain_len * strain_len;
    Eigen::MatrixXd spsp(1, 1);
    spsp(0, 0) = -beta * (p.mu_bar * g.s_p + p.kappa2 + M3_sum) +
                 beta * (p.mu_bar + dM3_sum) * f.ds_p + dq;
    add_full(sp_slot, sp_slot, spsp);
    add_full(sp_slot, JacobianWorkspace::kX, (beta * p.mu_bar * f.dx.transpose()).eval());
  }

  for (int j = 1; j <= N + 1; ++j) {
    const bool lead = (j <= N);   // element j exists
    const bool trail = (j >= 2);  // element j-1 exists

    // sp row, r_j column (and its transpose-role sibling r_j row, sp column).
    Eigen::RowVector3d sp_rj = Eigen::RowVector3d::Zero();
    Vec3 rj_sp = Vec3::Zero();
    if (lead) {
      sp_rj += -beta * c.M31[j - 1].transpose();
      sp_rj += beta * c.dM1 * f.dr[j - 1].transpose() + beta * c.dM12 * f.dr[j].transpose();
      rj_sp += -beta * c.M31[j - 1] +
               (1.0 / p.h) * (gamma31(p, j) * f.dr[j - 1] + gamma23(p, j) * f.dr[j]);
    }
    if (trail) {
      sp_rj += -beta * c.M23[j - 2].transpose();
      sp_rj += beta * c.dM1 * f.dr[j - 1].transpose() + beta * c.dM12 * f.dr[j - 2].transpose();
      rj_sp += -beta * c.M23[j - 2] -
               (1.0 / p.h) * (gamma23(p, j - 1) * f.dr[j - 1] + gamma31(p, j - 1) * f.dr[j - 2]);
    }
    add_full(sp_slot, r_slot(j), sp_rj);
    add_full(r_slot(j), sp_slot, rj_sp);

    // Node mass rows.
    double diag = 0.0;
    if (lead) diag += -beta * c.M1 + beta * f.ds_p * gamma31(p, j);
    if (trail) diag += -beta * c.M2 - beta * f.ds_p * gamma23(p, j - 1);
    if (j == N + 1) diag += -beta * p.m_s;
    add_full(r_slot(j), r_slot(j), (diag * Mat3::Identity()).eval());
    if (lead) {
      const double sup = -beta * c.M12 + beta * f.ds_p * gamma23(p, j);
      add_full(r_slot(j), r_slot(j + 1), (sup * Mat3::Identity()).eval());
    }
    if (trail) {
      const double sub = -beta * c.M12 - beta * f.ds_p * gamma31(p, j - 1);
      add_full(r_slot(j), r_slot(j - 1), (sub * Mat3::Identity()).eval());
    }
  }

  // Sub-spacecraft couplings.
  const int rs = r_slot(N + 1);
  const int phis_slot = JacobianWorkspace::kR + (N + 1);  // one past the r slots
  // dr_{N+1} row, phi_s column.
  add_full(rs, phis_slot, (beta * p.m_s * g.R_s * f.F_s * hat(p.rho_s) * Jr_phis).eval());
  // phi_s row, dr_{N+1} column.
  add_full(phis_slot, rs,
           (beta * p.m_s *
            (-f.F_s * hat(p.rho_s) * f.F_s.transpose() +
             hat((f.F_s - Mat3::Identity()) * p.rho_s)) *
            g.R_s.transpose()).eval());
  // phi_s row, phi_s column. Same trace-term rule as the base attitude,
  // plus the attachment cross term through q = F_s^T R_s^T dr_{N+1}.
  {
    const Vec3 u = g.R_s.transpose() * f.dr[N];
    const Vec3 q = f.F_s.transpose() * u;
    const Mat3 Bs = Jsd * f.F_s;
    const Vec3 ws = skew_vee(Bs);
    const Vec3 Wtot = ws + p.m_s * p.rho_s.cross(q);
    const Mat3 blk =
        -beta * f.F_s *
            (-hat(Wtot) + Bs.trace() * Mat3::Identity() - 0.5 * (Bs + Bs.transpose()) +
             0.5 * hat(ws) +
             p.m_s * (q * p.rho_s.transpose() - p.rho_s.dot(q) * Mat3::Identity())) *
            Jr_phis +
        beta * p.m_s * hat(u) * f.F_s * hat(p.rho_s) * Jr_phis;
    add_full(phis_slot, phis_slot, blk);
  }
}

bool increment_keeps_state_valid(const PhysParams& p, const GroupConfig& g,
                                 const GroupIncrement& f) {
  const double sp_next = g.s_p + f.ds_p;
  if (sp_next < p.b || sp_next > p.L) return false;
  const double l = p.element_length(g.s_p);
  for (int a = 1; a <= p.N; ++a) {
    const Vec3 next = (g.r[a] + f.dr[a]) - (g.r[a - 1] + f.dr[a - 1]);
    if (next.norm() < 1e-9 * l) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

AlgebraVector d2_kinetic(const PhysParams& p, const GroupConfig& g, const GroupIncrement& f) {
  const int N = p.N;
  const double beta = 1.0 / p.h;
  const InertiaCoeffs c = inertia_coeffs(p, g.s_p, g.r);
  const Mat3 Jd = nonstandard_inertia(p.J);
  const Mat3 Jsd = nonstandard_inertia(p.J_s);

  AlgebraVector out(N);
  out.dx() = beta * p.base_mass(g.s_p) * f.dx;
  out.phi() = beta * skew_vee(Jd * f.F);  // vee(Jd F - F^T Jd)
  out.ds_p() = beta * (p.mu_bar * g.s_p + p.kappa2) * f.ds_p;
  for (int a = 1; a <= N; ++a) {
    out.ds_p() += beta * (c.M3[a - 1] * f.ds_p + c.M23[a - 1].dot(f.dr[a]) +
                          c.M31[a - 1].dot(f.dr[a - 1]));
    out.dr(a) += beta * (c.M1 * f.dr[a - 1] + c.M12 * f.dr[a] + f.ds_p * c.M31[a - 1]);
    out.dr(a + 1) += beta * (c.M2 * f.dr[a] + c.M12 * f.dr[a - 1] + f.ds_p * c.M23[a - 1]);
  }
  out.dr(N + 1) += beta * p.m_s * (f.dr[N] + g.R_s * (f.F_s - Mat3::Identity()) * p.rho_s);
  out.phi_s() = beta * (skew_vee(Jsd * f.F_s) +
                        p.m_s * p.rho_s.cross(f.F_s.transpose() * g.R_s.transpose() * f.dr[N]));
  return out;
}

AlgebraVector d1_kinetic(const PhysParams& p, const GroupConfig& g, const GroupIncrement& f) {
  const int N = p.N;
  const double beta = 1.0 / p.h;
  const InertiaCoeffs c = inertia_coeffs(p, g.s_p, g.r);

  AlgebraVector out(N);
  double dsp = 0.5 * p.mu_bar * (f.dx.squaredNorm() + f.ds_p * f.ds_p);
  for (int a = 1; a <= N; ++a) {
    dsp += 0.5 * c.dM1 * (f.dr[a - 1].squaredNorm() + f.dr[a].squaredNorm()) +
           0.5 * c.dM3[a - 1] * f.ds_p * f.ds_p + c.dM12 * f.dr[a - 1].dot(f.dr[a]);
    // M23/M31 depend on the node positions: element a pushes on nodes a, a+1.
    const Vec3 coupling = gamma23(p, a) * f.dr[a] + gamma31(p, a) * f.dr[a - 1];
    out.dr(a) += beta * f.ds_p * coupling;
    out.dr(a + 1) -= beta * f.ds_p * coupling;
  }
  out.ds_p() = beta * dsp;
  out.phi_s() = beta * p.m_s *
                ((f.F_s - Mat3::Identity()) * p.rho_s).cross(g.R_s.transpose() * f.dr[N]);
  return out;
}

double carnot_forcing(const PhysParams& p, const GroupConfig& g, const GroupIncrement& f) {
  const double l = p.element_length(g.s_p);
  const double strain_len = (g.r[1] - g.r[0]).norm() - l;
  return -(0.5 * p.h / (l * l)) * (p.mu_bar * f.ds_p * f.ds_p / (p.h * p.h) + p.EA) *
         strain_len * strain_len;
}

AlgebraVector action_gradient(const PhysParams& p, const GroupConfig& g,
                              const GroupIncrement& f_prev, const GroupIncrement& f) {
  const GroupConfig g_prev = group_compose(g, f_prev.inverse());
  AlgebraVector res = d2_kinetic(p, g_prev, f_prev);
  const AlgebraVector d2 = adstar(f, d2_kinetic(p, g, f));
  const AlgebraVector d1 = d1_kinetic(p, g, f);
  const AlgebraVector gv = potential_gradient(p, g);
  res.raw() += -d2.raw() + d1.raw() - p.h * gv.raw();
  return res;
}

AlgebraVector del_residual(const PhysParams& p, const GroupConfig& g,
                           const GroupIncrement& f_prev, const GroupIncrement& f, double u) {
  AlgebraVector res = action_gradient(p, g, f_prev, f);
  res.ds_p() += p.h * u / p.d + carnot_forcing(p, g, f);
  res.phi() += -p.h * u * Vec3::UnitY();
  return res;
}

Vec3 discrete_angular_momentum(const PhysParams& p, const GroupConfig& g,
                               const GroupIncrement& f) {
  const AlgebraVector d2 = d2_kinetic(p, g, f);
  const GroupConfig head = group_compose(g, f);
  Vec3 pi = head.x.cross(Vec3(d2.dx())) + head.R * Vec3(d2.phi()) + head.R_s * Vec3(d2.phi_s());
  for (int a = 1; a <= p.N + 1; ++a) pi += head.r[a - 1].cross(Vec3(d2.dr(a)));
  return pi;
}

// ---------------------------------------------------------------------------

Stepper::Stepper(PhysParams params, StepperOptions options)
    : params_(std::move(params)), opts_(options) {
  params_.validate();
}

std::pair<GroupIncrement, NewtonReport> Stepper::step(const StepProblem& problem,
                                                      const GroupIncrement& guess) const {
  const PhysParams& p = params_;
  const GroupConfig& g = problem.g;
  if (g.num_elements() != p.N || problem.f_prev.num_elements() != p.N ||
      guess.num_elements() != p.N) {
    throw DimensionMismatch("step: element count mismatch");
  }
  const bool free_drum = (opts_.drum == DrumMode::kFree);
  const Reduction red(p.N, free_drum);

  const double u_eff = (opts_.forcing == ForcingRule::kRectangle)
                           ? problem.u
                           : 0.5 * (problem.u + problem.u_prev);

  // Constant over the Newton iteration: the previous-step fiber derivative
  // and the potential gradient at g_k.
  const GroupConfig g_prev = group_compose(g, problem.f_prev.inverse());
  const AlgebraVector d2_prev = d2_kinetic(p, g_prev, problem.f_prev);
  const AlgebraVector grad_v = potential_gradient(p, g);

  auto residual = [&](const GroupIncrement& f) {
    AlgebraVector res = d2_prev;
    const AlgebraVector d2 = adstar(f, d2_kinetic(p, g, f));
    const AlgebraVector d1 = d1_kinetic(p, g, f);
    res.raw() += -d2.raw() + d1.raw() - p.h * grad_v.raw();
    res.ds_p() += p.h * u_eff / p.d + carnot_forcing(p, g, f);
    res.phi() += -p.h * u_eff * Vec3::UnitY();
    return res;
  };

  // Unknown: banded core + optional reeling border.
  Eigen::VectorXd core(red.n_core);
  core.segment<3>(Reduction::off_x()) = guess.dx;
  core.segment<3>(Reduction::off_phi()) = log_so3(guess.F);
  for (int j = 2; j <= p.N + 1; ++j) core.segment<3>(Reduction::off_r(j)) = guess.dr[j - 1];
  core.segment<3>(red.off_phi_s()) = log_so3(guess.F_s);
  double ds_p = free_drum ? guess.ds_p : 0.0;

  NewtonReport report;
  GroupIncrement f = build_increment(p, g, red, core, ds_p);
  Eigen::VectorXd E;
  double E_sp = 0.0;

  for (int it = 0; it <= opts_.max_iterations; ++it) {
    const AlgebraVector res = residual(f);
    project_rows(p, g, red, res, E, E_sp);
    report.scaled_residual = scaled_norm(p, red, E, E_sp);
    report.residual_norm =
        std::sqrt(E.squaredNorm() + (free_drum ? E_sp * E_sp : 0.0));
    if (report.scaled_residual <= opts_.tol) {
      report.converged = true;
      break;
    }
    if (it == opts_.max_iterations) break;

    BorderedBandedSystem sys(red.n_core);
    if (opts_.jacobian == JacobianMode::kAnalytic) {
      assemble_jacobian(p, g, red, core, f, sys);
    } else {
      // Finite-difference columns of the projected residual; debug path.
      const double eps = 1e-7;
      Eigen::VectorXd col;
      double col_sp = 0.0;
      for (int j = 0; j < red.n_core; ++j) {
        Eigen::VectorXd cpert = core;
        cpert(j) += eps;
        const AlgebraVector rp = residual(build_increment(p, g, red, cpert, ds_p));
        project_rows(p, g, red, rp, col, col_sp);
        for (int i = 0; i < red.n_core; ++i) {
          const double v = (col(i) - E(i)) / eps;
          if (v != 0.0 && std::abs(i - j) <= kBandwidth) sys.add(i, j, v);
        }
        if (free_drum) sys.border_row(j) = (col_sp - E_sp) / eps;
      }
      if (free_drum) {
        const AlgebraVector rp = residual(build_increment(p, g, red, core, ds_p + eps));
        project_rows(p, g, red, rp, col, col_sp);
        sys.border_col = (col - E) / eps;
        sys.corner = (col_sp - E_sp) / eps;
      }
    }

    Eigen::VectorXd rhs = -E;
    double delta_sp = 0.0;
    if (!sys.solve(rhs, -E_sp, free_drum, delta_sp)) {
      throw SingularMassMatrix("step: banded factorization failed");
    }

    // Damped update: halve until the candidate keeps every element length
    // and the reeling range valid (max 8 halvings).
    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 8; ++halving) {
      const Eigen::VectorXd cand_core = core + lambda * rhs;
      const double cand_sp = ds_p + lambda * delta_sp;
      const GroupIncrement cand = build_increment(p, g, red, cand_core, cand_sp);
      if (increment_keeps_state_valid(p, g, cand)) {
        core = cand_core;
        ds_p = cand_sp;
        f = cand;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++report.iterations;
    if (!accepted) break;
  }

  if (!report.converged) throw NoConvergence(report);
  const double sp_next = g.s_p + f.ds_p;
  if (sp_next < p.b || sp_next > p.L) {
    throw StateInvalid("step: s_p left [b, L]");
  }
  return {f, report};
}

GroupIncrement Stepper::initialize(const GroupConfig& g0, const VelocityState& v0,
                                   InitMode mode) const {
  const PhysParams& p = params_;
  GroupIncrement f = velocity_to_increment(v0, p.h);
  if (opts_.drum == DrumMode::kFixed) f.ds_p = 0.0;
  // The attachment node rides with the base; the slaved form differs from
  // h rdot_1 at O(h^2) and keeps r_1 = x + R rho exact for the whole run.
  f.dr[0] = f.dx + g0.R * (f.F - Mat3::Identity()) * p.rho;
  if (mode == InitMode::kVelocityMap) return f;

  // Legendre mode: match the projected discrete momentum
  //   Ad*_{f^{-1}} D2 L_d(g0, f) - D1 L_d(g0, f)
  // to the continuous momentum of the kinetic form. Dense Newton with
  // finite-difference Jacobian; this runs once per trajectory.
  const bool free_drum = (opts_.drum == DrumMode::kFree);
  const Reduction red(p.N, free_drum);
  const AlgebraVector p_cont = continuous_momentum(p, g0, v0);
  const AlgebraVector grad_v0 = potential_gradient(p, g0);

  auto momentum_defect = [&](const GroupIncrement& fc) {
    AlgebraVector md = adstar(fc, d2_kinetic(p, g0, fc));
    md.raw() += -d1_kinetic(p, g0, fc).raw() + 0.5 * p.h * grad_v0.raw() - p_cont.raw();
    return md;
  };

  const int n = red.n_core + (free_drum ? 1 : 0);
  Eigen::VectorXd xi(n);
  xi.segment<3>(Reduction::off_x()) = f.dx;
  xi.segment<3>(Reduction::off_phi()) = log_so3(f.F);
  for (int j = 2; j <= p.N + 1; ++j) xi.segment<3>(Reduction::off_r(j)) = f.dr[j - 1];
  xi.segment<3>(red.off_phi_s()) = log_so3(f.F_s);
  if (free_drum) xi(n - 1) = f.ds_p;

  auto build = [&](const Eigen::VectorXd& z) {
    return build_increment(p, g0, red, z.head(red.n_core), free_drum ? z(n - 1) : 0.0);
  };
  auto project = [&](const AlgebraVector& res) {
    Eigen::VectorXd out(n);
    Eigen::VectorXd core_rows;
    double sp_row = 0.0;
    project_rows(p, g0, red, res, core_rows, sp_row);
    out.head(red.n_core) = core_rows;
    if (free_drum) out(n - 1) = sp_row;
    return out;
  };

  NewtonReport report;
  GroupIncrement fc = build(xi);
  for (int it = 0; it <= opts_.max_iterations; ++it) {
    const Eigen::VectorXd E = project(momentum_defect(fc));
    double sp_row = free_drum ? E(n - 1) : 0.0;
    report.scaled_residual = scaled_norm(p, red, E.head(red.n_core), sp_row);
    report.residual_norm = E.norm();
    if (report.scaled_residual <= opts_.tol) {
      report.converged = true;
      break;
    }
    if (it == opts_.max_iterations) break;

    Eigen::MatrixXd Jm(n, n);
    const double eps = 1e-7;
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd zp = xi;
      zp(j) += eps;
      Jm.col(j) = (project(momentum_defect(build(zp))) - E) / eps;
    }
    const Eigen::VectorXd delta = Jm.partialPivLu().solve(-E);

    double lambda = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= 8; ++halving) {
      const Eigen::VectorXd cand = xi + lambda * delta;
      const GroupIncrement fcand = build(cand);
      if (increment_keeps_state_valid(p, g0, fcand)) {
        xi = cand;
        fc = fcand;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++report.iterations;
    if (!accepted) break;
  }
  if (!report.converged) throw NoConvergence(report);
  return fc;
}

}  // namespace tethersim::lgvi
