#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "qcorr/errors.hpp"
#include "qcorr/qstate.hpp"

namespace qcorr {

// Two identical two-level atoms radiating into a common vacuum.
// r12 is the interatomic distance in units of the transition wavelength,
// so the dimensionless product entering the coupling functions is kr = 2 pi r12.
struct CollectiveParams {
  double alpha = 1.0;  // initial amplitude of |ee> in alpha|ee> + sqrt(1-alpha^2)|gg>
  double gamma = 1.0;  // single-atom spontaneous emission rate, 1/s
  double r12 = 1.0;    // distance in wavelengths
  double omega = 0.0;  // transition frequency, 1/s; enters only coherence phases
};

struct CollectiveCoefficients {
  double gamma12 = 0.0;
  double omega12 = 0.0;
  double gamma12_plus = 0.0;   // gamma + gamma12
  double gamma12_minus = 0.0;  // gamma - gamma12
  double a1 = 0.0;             // alpha^2 gamma12_plus / (2 gamma12_minus)
  double a2 = 0.0;             // alpha^2 gamma12_minus / (2 gamma12_plus)
};

// Collective damping: (3 gamma / 2) [sin(kr)/kr + cos(kr)/kr^2 - sin(kr)/kr^3].
inline double gamma_12(double gamma, double kr) {
  if (!(kr > 0.0)) throw DomainError("gamma_12: kr must be > 0");
  const double s = std::sin(kr), c = std::cos(kr);
  return 1.5 * gamma * (s / kr + c / (kr * kr) - s / (kr * kr * kr));
}

// Dipole-dipole shift: (3 gamma / 4) [sin(kr)/kr^2 + cos(kr)/kr^3 - cos(kr)/kr].
inline double omega_12(double gamma, double kr) {
  if (!(kr > 0.0)) throw DomainError("omega_12: kr must be > 0");
  const double s = std::sin(kr), c = std::cos(kr);
  return 0.75 * gamma * (s / (kr * kr) + c / (kr * kr * kr) - c / kr);
}

inline CollectiveCoefficients collective_coefficients(const CollectiveParams& p) {
  const double kr = 2.0 * M_PI * p.r12;
  CollectiveCoefficients co;
  co.gamma12 = gamma_12(p.gamma, kr);
  co.omega12 = omega_12(p.gamma, kr);
  co.gamma12_plus = p.gamma + co.gamma12;
  co.gamma12_minus = p.gamma - co.gamma12;
  if (std::abs(co.gamma12_plus) < 1e-14 || std::abs(co.gamma12_minus) < 1e-14)
    throw DegenerateCoupling("collective_coefficients: |gamma +- gamma12| < 1e-14");
  const double a2sq = p.alpha * p.alpha;
  co.a1 = a2sq * co.gamma12_plus / (2.0 * co.gamma12_minus);
  co.a2 = a2sq * co.gamma12_minus / (2.0 * co.gamma12_plus);
  return co;
}

// Analytic state at time t for the initial state alpha|ee> + sqrt(1-alpha^2)|gg>:
//   rho11 = alpha^2 e^{-2 gamma t}
//   rho14 = alpha sqrt(1-alpha^2) e^{-(gamma + 2 i omega) t}
//   rho22 = rho33 = a1 [e^{-(gamma+gamma12) t} - e^{-2 gamma t}]
//                 + a2 [e^{-(gamma-gamma12) t} - e^{-2 gamma t}]
//   rho23 = a1 [...] - a2 [...]
//   rho44 = 1 - rho11 - rho22 - rho33, all other entries zero.
inline DensityMatrix collective_state(const CollectiveParams& p, double t) {
  if (t < 0.0) throw OutOfRange("collective_state: t < 0");
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0))
    throw OutOfRange("collective_state: alpha outside [0, 1]");
  const CollectiveCoefficients co = collective_coefficients(p);
  const double g = p.gamma;
  const double e2g = std::exp(-2.0 * g * t);
  const double br1 = std::exp(-co.gamma12_plus * t) - e2g;
  const double br2 = std::exp(-co.gamma12_minus * t) - e2g;
  const double rho11 = p.alpha * p.alpha * e2g;
  const double rho22 = co.a1 * br1 + co.a2 * br2;
  const double rho23 = co.a1 * br1 - co.a2 * br2;
  const double rho44 = 1.0 - rho11 - 2.0 * rho22;
  const double amp14 = p.alpha * std::sqrt(1.0 - p.alpha * p.alpha) * std::exp(-g * t);
  const complexd rho14 =
      amp14 * complexd(std::cos(2.0 * p.omega * t), -std::sin(2.0 * p.omega * t));

  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = rho11;
  m(1, 1) = rho22;
  m(2, 2) = rho22;
  m(3, 3) = rho44;
  m(1, 2) = rho23;
  m(2, 1) = rho23;
  m(0, 3) = rho14;
  m(3, 0) = std::conj(rho14);
  DensityMatrix rho{m};
  ValidationReport rep = validate(rho);
  if (!rep.passed)
    throw NonPhysicalParams("collective_state: state failed validation at t = " +
                            std::to_string(t));
  return rho;
}

struct CollectiveEigs {
  double lambda_plus = 0.0;   // 4 (rho23 - |rho14|)^2
  double lambda_minus = 0.0;  // 4 (rho23 + |rho14|)^2
  double lambda_zero = 0.0;   // C^2 + R^2
};

// Closed-form eigenvalues of A = x x^T + T T^T for the X-type family above,
// with C = 1 - 4 rho22 and R = 2 rho11 + 2 rho22 - 1.
inline CollectiveEigs collective_eigs_A(const DensityMatrix& rho) {
  const XStateView v = x_state_view(rho);
  const double rho23 = v.rho23;
  const double abs14 = std::abs(v.rho14);
  const double c = 1.0 - 4.0 * v.rho22;
  const double r = 2.0 * v.rho11 + 2.0 * v.rho22 - 1.0;
  CollectiveEigs e;
  e.lambda_plus = 4.0 * (rho23 - abs14) * (rho23 - abs14);
  e.lambda_minus = 4.0 * (rho23 + abs14) * (rho23 + abs14);
  e.lambda_zero = c * c + r * r;
  return e;
}

enum class ZTermConvention {
  half,  // -i (omega/2) sum_i [sigma_i^z, rho]; reproduces the analytic rho14 phase
  bare   // -i omega sum_i [sigma_i^z, rho]
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

// Fixed-step RK4 integration of
//   drho/dt = -i zc [sigma1^z + sigma2^z, rho]
//             - i Omega12 [sigma1^+ sigma2^- + sigma2^+ sigma1^-, rho]
//             + 1/2 sum_ij gamma_ij (2 sigma_j^- rho sigma_i^+
//                                    - sigma_i^+ sigma_j^- rho - rho sigma_i^+ sigma_j^-)
// with gamma_ii = gamma, gamma_ij = gamma12, from the pure initial state
// alpha|ee> + sqrt(1-alpha^2)|gg>. Used to cross-check collective_state.
inline Trajectory integrate_master_equation(
    const CollectiveParams& p, double t_end, int steps,
    ZTermConvention conv = ZTermConvention::half,
    std::optional<CollectiveCoefficients> coeffs_override = std::nullopt) {
  if (steps < 100) throw OutOfRange("integrate_master_equation: steps < 100");
  if (t_end < 0.0) throw OutOfRange("integrate_master_equation: t_end < 0");
  const CollectiveCoefficients co =
      coeffs_override ? *coeffs_override : collective_coefficients(p);

  const auto& s = pauli_matrices();
  Eigen::Matrix2cd sm = Eigen::Matrix2cd::Zero();  // |g><e|
  sm(1, 0) = 1.0;
  const Eigen::Matrix2cd sp = sm.adjoint();
  const Eigen::Matrix4cd sminus[2] = {kron2(sm, s[0]), kron2(s[0], sm)};
  const Eigen::Matrix4cd splus[2] = {kron2(sp, s[0]), kron2(s[0], sp)};
  const Eigen::Matrix4cd sz = kron2(s[3], s[0]) + kron2(s[0], s[3]);

  const double zc = (conv == ZTermConvention::half ? 0.5 : 1.0) * p.omega;
  const Eigen::Matrix4cd h_eff =
      zc * sz + co.omega12 * (splus[0] * sminus[1] + splus[1] * sminus[0]);
  const double gmat[2][2] = {{p.gamma, co.gamma12}, {co.gamma12, p.gamma}};

  auto liouville = [&](const Eigen::Matrix4cd& rho) {
    const complexd i(0.0, 1.0);
    Eigen::Matrix4cd out = -i * (h_eff * rho - rho * h_eff);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const Eigen::Matrix4cd pm = splus[a] * sminus[b];
        out += 0.5 * gmat[a][b] *
               (2.0 * sminus[b] * rho * splus[a] - pm * rho - rho * pm);
      }
    return out;
  };

  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  psi(0) = p.alpha;
  psi(3) = std::sqrt(1.0 - p.alpha * p.alpha);
  Eigen::Matrix4cd rho = psi * psi.adjoint();

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(DensityMatrix{rho});
  if (t_end == 0.0) return traj;

  const double h = t_end / steps;
  for (int k = 0; k < steps; ++k) {
    const Eigen::Matrix4cd k1 = liouville(rho);
    const Eigen::Matrix4cd k2 = liouville(rho + 0.5 * h * k1);
    const Eigen::Matrix4cd k3 = liouville(rho + 0.5 * h * k2);
    const Eigen::Matrix4cd k4 = liouville(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!(std::abs(rho.trace() - complexd(1.0, 0.0)) <= 1e-8))
      throw StepSizeTooLarge("integrate_master_equation: trace drift > 1e-8");
    traj.times.push_back(h * (k + 1));
    traj.states.push_back(DensityMatrix{rho});
  }
  return traj;
}

}  // namespace qcorr
