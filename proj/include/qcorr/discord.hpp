#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include "qcorr/errors.hpp"
#include "qcorr/qstate.hpp"

namespace qcorr {

using CorrelationMatrixA = Eigen::Matrix3d;

// A = x x^T + T T^T; symmetric and positive semidefinite by construction.
inline CorrelationMatrixA correlation_matrix(const PauliDecomposition& d) {
  return d.x * d.x.transpose() + d.T * d.T.transpose();
}

// Tr A = |x|^2 + |T|_F^2, the smooth part of the geometric measure.
inline double smooth_part(const PauliDecomposition& d) {
  return d.x.squaredNorm() + d.T.squaredNorm();
}

struct CubicSolution {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;  // lambda^3 + a2 lambda^2 + a1 lambda + a0
  double p = 0.0, q = 0.0;              // depressed cubic coefficients
  double delta = 0.0;                   // q^2/4 + p^3/27, clamped to <= 0
  std::complex<double> m_plus{0.0, 0.0};
  std::complex<double> m_minus{0.0, 0.0};
  double imag_residue = 0.0;            // largest |Im| discarded from the roots
  std::array<double, 3> roots{};        // descending
};

namespace detail {

inline std::complex<double> cbrt_principal(const std::complex<double>& z) {
  if (std::abs(z) < 1e-300) return {0.0, 0.0};
  return std::pow(z, 1.0 / 3.0);
}

}  // namespace detail

// Closed-form (Cardano) eigenvalues of a symmetric 3x3 matrix via
//   a2 = -Tr A, a1 = sum of cyclic 2x2 minors, a0 = -det A,
//   p = a1 - a2^2/3, q = a0 - a1 a2/3 + 2 a2^3/27, Delta = q^2/4 + p^3/27,
//   M+- = -q/2 +- sqrt(Delta),
//   lambda1 = M+^(1/3) + M-^(1/3) - a2/3,
//   lambda2,3 = -(M+^(1/3) + M-^(1/3))/2 +- i sqrt(3)(M+^(1/3) - M-^(1/3))/2 - a2/3.
// For symmetric input all roots are real, so Delta <= 0 analytically; round-off
// positives are clamped to 0 before taking the complex square root.
inline CubicSolution cubic_eigenvalues(const CorrelationMatrixA& a) {
  CubicSolution sol;
  sol.a2 = -a.trace();
  sol.a1 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int k1 = (k + 1) % 3;
    sol.a1 += a(k, k) * a(k1, k1) - a(k, k1) * a(k1, k);
  }
  sol.a0 = -a.determinant();

  sol.p = sol.a1 - sol.a2 * sol.a2 / 3.0;
  sol.q = sol.a0 - sol.a1 * sol.a2 / 3.0 + 2.0 * sol.a2 * sol.a2 * sol.a2 / 27.0;
  sol.delta = std::min(sol.q * sol.q / 4.0 + sol.p * sol.p * sol.p / 27.0, 0.0);

  const std::complex<double> root_delta(0.0, std::sqrt(-sol.delta));
  sol.m_plus = -sol.q / 2.0 + root_delta;
  sol.m_minus = -sol.q / 2.0 - root_delta;
  const std::complex<double> wp = detail::cbrt_principal(sol.m_plus);
  const std::complex<double> wm = detail::cbrt_principal(sol.m_minus);

  const double shift = sol.a2 / 3.0;
  const std::complex<double> i_sqrt3(0.0, std::sqrt(3.0));
  const std::complex<double> l1 = wp + wm - shift;
  const std::complex<double> l2 = -0.5 * (wp + wm) + 0.5 * i_sqrt3 * (wp - wm) - shift;
  const std::complex<double> l3 = -0.5 * (wp + wm) - 0.5 * i_sqrt3 * (wp - wm) - shift;

  const std::array<std::complex<double>, 3> raw{l1, l2, l3};
  sol.imag_residue = 0.0;
  std::array<int, 3> idx{0, 1, 2};
  std::array<double, 3> re{};
  for (int k = 0; k < 3; ++k) {
    re[k] = raw[k].real();
    sol.imag_residue = std::max(sol.imag_residue, std::abs(raw[k].imag()));
  }
  std::sort(idx.begin(), idx.end(), [&](int u, int v) {
    if (re[u] != re[v]) return re[u] > re[v];
    return u < v;
  });
  for (int k = 0; k < 3; ++k) sol.roots[k] = re[idx[k]];
  return sol;
}

// D = 1/4 (|x|^2 + |T|_F^2 - lambda_max(A)) = 1/4 (lambda_mid + lambda_min).
inline double geometric_discord(const DensityMatrix& rho) {
  const PauliDecomposition d = pauli_decompose(rho);
  const CubicSolution sol = cubic_eigenvalues(correlation_matrix(d));
  return 0.25 * (sol.roots[1] + sol.roots[2]);
}

// Diagnostic variant that reads the smooth part literally as
// |x x^T|_F^2 + |T T^T|_F^2 = |x|^4 + sum_i sigma_i(T)^4. Kept for comparison
// only; it disagrees with the standard form whenever A has appreciable
// off-diagonal weight (e.g. 0.0072 vs 0.18 for the collective initial state).
inline double geometric_discord_literal(const DensityMatrix& rho) {
  const PauliDecomposition d = pauli_decompose(rho);
  const CubicSolution sol = cubic_eigenvalues(correlation_matrix(d));
  const double x2 = d.x.squaredNorm();
  const Eigen::Matrix3d tt = d.T * d.T.transpose();
  return 0.25 * (x2 * x2 + tt.squaredNorm() - sol.roots[0]);
}

// Shannon entropy in bits; tolerates round-off negatives down to -1e-12.
inline double entropy(const std::vector<double>& probs) {
  double sum = 0.0;
  for (double v : probs) {
    if (v < -1e-12)
      throw NotAProbabilityVector("entropy: negative weight " + std::to_string(v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-10)
    throw NotAProbabilityVector("entropy: weights sum to " + std::to_string(sum));
  double h = 0.0;
  for (double v : probs)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

namespace detail {

inline double h2(double x) {
  x = std::clamp(x, 0.0, 1.0);
  double h = 0.0;
  if (x > 0.0) h -= x * std::log2(x);
  if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
  return h;
}

}  // namespace detail

struct OptimizerOptions {
  int grid_theta = 65;        // theta samples over [0, pi], endpoints included
  int grid_phi = 128;         // phi samples over [0, 2 pi), half-open
  double tol = 1e-8;          // objective tolerance of the local refinement
  bool measure_on_a = false;  // measure subsystem A instead of B
};

struct MeasurementOptimum {
  double value = 0.0;  // the discord value
  double theta = 0.0;
  double phi = 0.0;
  Eigen::Vector3d direction{0.0, 0.0, 1.0};  // canonical (antipodes identified)
  double conditional_entropy = 0.0;          // min_n sum_k p_k S(rho_unmeasured|k)
};

// Information-theoretic discord with measurement on subsystem B (default):
//   D' = S(rho_B) - S(rho_AB) + min over projective directions n of
//        sum_{k=+-} p_k S(rho_{A|k}),
// minimized by a deterministic coarse grid followed by compass refinement.
// The result is clamped to [0, min(S_A, S_B) + 1e-9].
inline MeasurementOptimum info_discord_numeric_detail(const DensityMatrix& rho,
                                                      const OptimizerOptions& opts = {}) {
  const PauliDecomposition d = pauli_decompose(rho);
  Eigen::Vector3d x_un = d.x;  // unmeasured side
  Eigen::Vector3d y_me = d.y;  // measured side
  Eigen::Matrix3d t_eff = d.T;
  if (opts.measure_on_a) {
    std::swap(x_un, y_me);
    t_eff = Eigen::Matrix3d(d.T.transpose());
  }

  const double s_a = detail::h2(0.5 * (1.0 + d.x.norm()));
  const double s_b = detail::h2(0.5 * (1.0 + d.y.norm()));
  const double s_measured = opts.measure_on_a ? s_a : s_b;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es;
  es.compute(Eigen::Matrix4cd(0.5 * (rho.entries + rho.entries.adjoint())),
             Eigen::EigenvaluesOnly);
  // Joint entropy from the spectrum with negative weights contributing zero.
  // Several reference scenarios carry correlation tuples slightly outside the
  // physical set; this is the continuous extension of -sum p log2 p there and
  // is identical to entropy() on valid states.
  double s_ab = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double v = es.eigenvalues()(k);
    if (v > 0.0) s_ab -= v * std::log2(v);
  }

  auto cond_entropy = [&](double theta, double phi) {
    const double st = std::sin(theta);
    const Eigen::Vector3d n(st * std::cos(phi), st * std::sin(phi), std::cos(theta));
    const Eigen::Vector3d tn = t_eff * n;
    const double yn = y_me.dot(n);
    double e = 0.0;
    for (int sign = -1; sign <= 1; sign += 2) {
      const double pk = 0.5 * (1.0 + sign * yn);
      if (pk < 1e-14) continue;
      const double bnorm = std::min((x_un + sign * tn).norm() / (2.0 * pk), 1.0);
      e += pk * detail::h2(0.5 * (1.0 + bnorm));
    }
    return e;
  };

  const int gt = std::max(opts.grid_theta, 2);
  const int gp = std::max(opts.grid_phi, 1);
  double best_e = std::numeric_limits<double>::infinity();
  double best_theta = 0.0, best_phi = 0.0;
  for (int i = 0; i < gt; ++i) {
    const double theta = M_PI * i / (gt - 1);
    for (int j = 0; j < gp; ++j) {
      const double phi = 2.0 * M_PI * j / gp;
      const double e = cond_entropy(theta, phi);
      if (e < best_e) {
        best_e = e;
        best_theta = theta;
        best_phi = phi;
      }
    }
  }

  auto normalize_angles = [](double& theta, double& phi) {
    if (theta < 0.0) {
      theta = -theta;
      phi += M_PI;
    } else if (theta > M_PI) {
      theta = 2.0 * M_PI - theta;
      phi += M_PI;
    }
    phi = std::fmod(phi, 2.0 * M_PI);
    if (phi < 0.0) phi += 2.0 * M_PI;
  };

  double step_theta = M_PI / (gt - 1);
  double step_phi = 2.0 * M_PI / gp;
  const double step_floor = 1e-7;
  int evals = 0;
  while (std::max(step_theta, step_phi) >= step_floor && evals < 20000) {
    bool moved = false;
    const double cand[4][2] = {{best_theta - step_theta, best_phi},
                               {best_theta + step_theta, best_phi},
                               {best_theta, best_phi - step_phi},
                               {best_theta, best_phi + step_phi}};
    for (const auto& c : cand) {
      double th = c[0], ph = c[1];
      normalize_angles(th, ph);
      const double e = cond_entropy(th, ph);
      ++evals;
      if (e < best_e) {
        best_e = e;
        best_theta = th;
        best_phi = ph;
        moved = true;
        break;
      }
    }
    if (!moved) {
      step_theta *= 0.5;
      step_phi *= 0.5;
    }
  }

  MeasurementOptimum opt;
  opt.conditional_entropy = best_e;
  opt.theta = best_theta;
  opt.phi = best_phi;
  const double st = std::sin(best_theta);
  Eigen::Vector3d n(st * std::cos(best_phi), st * std::sin(best_phi),
                    std::cos(best_theta));
  if (n.z() < -1e-12 || (std::abs(n.z()) <= 1e-12 &&
                         (n.x() < -1e-12 ||
                          (std::abs(n.x()) <= 1e-12 && n.y() < 0.0))))
    n = -n;
  opt.direction = n;

  const double upper = std::min(s_a, s_b) + 1e-9;
  opt.value = std::clamp(s_measured - s_ab + best_e, 0.0, upper);
  return opt;
}

inline double info_discord_numeric(const DensityMatrix& rho,
                                   const OptimizerOptions& opts = {}) {
  return info_discord_numeric_detail(rho, opts).value;
}

struct CollectiveDiscordTerms {
  double C = 0.0;
  double R = 0.0;
  double u_plus = 0.0, u_minus = 0.0;
  double v_plus = 0.0, v_minus = 0.0;
  double s_plus = 0.0, s_minus = 0.0, s_zero = 0.0;
  double m_plus = 0.0, m_minus = 0.0;
  double n_plus = 0.0, n_minus = 0.0;
};

struct CollectiveDiscordResult {
  double value = 0.0;
  CollectiveDiscordTerms terms;
  double numeric_value = 0.0;
  bool discrepant = false;  // |value - numeric_value| > 1e-4
};

namespace detail {

// H(x) = -(1-x) log2(1-x) - (1+x) log2(1+x); non-positive factors contribute 0.
inline double entropy_like_h(double x) {
  auto term = [](double u) { return u <= 0.0 ? 0.0 : u * std::log2(u); };
  return -term(1.0 - x) - term(1.0 + x);
}

inline double ratio_term(double coef, double num, double den) {
  if (coef <= 0.0 || num <= 0.0 || den <= 0.0) return 0.0;
  return coef * std::log2(num / den);
}

inline double plogp(double u) { return u <= 0.0 ? 0.0 : u * std::log2(u); }

}  // namespace detail

// Intermediate quantities of the closed-form information discord for the
// X-type collective family, transcribed exactly as given:
//   C = 1 - 4 rho22, R = 2 rho11 + 2 rho22 - 1,
//   lambda+- = 4 (rho23 -+ |rho14|)^2,
//   u+- = (1 - C +- 4 rho23)/4,
//   v+- = (1 + C +- 2 sqrt(R^2 + |rho14|^2))/4,
//   s+- = 1 + H(sqrt(R^2 + lambda+-)),
//   s0 = -sum_{i=+-} [ (m_i/4) log2(m_i/n_i) + ((1-C)/4) log2((1-C)/n_i) ],
//   m+- = (1 + C +- 2R)/4, n+- = 2 (1 +- R).
inline CollectiveDiscordTerms collective_discord_terms(const DensityMatrix& rho) {
  const XStateView x = x_state_view(rho);
  const double abs14 = std::abs(x.rho14);
  CollectiveDiscordTerms t;
  t.C = 1.0 - 4.0 * x.rho22;
  t.R = 2.0 * x.rho11 + 2.0 * x.rho22 - 1.0;
  const double lambda_plus = 4.0 * (x.rho23 - abs14) * (x.rho23 - abs14);
  const double lambda_minus = 4.0 * (x.rho23 + abs14) * (x.rho23 + abs14);
  t.u_plus = (1.0 - t.C + 4.0 * x.rho23) / 4.0;
  t.u_minus = (1.0 - t.C - 4.0 * x.rho23) / 4.0;
  const double vroot = std::sqrt(t.R * t.R + abs14 * abs14);
  t.v_plus = (1.0 + t.C + 2.0 * vroot) / 4.0;
  t.v_minus = (1.0 + t.C - 2.0 * vroot) / 4.0;
  t.s_plus = 1.0 + detail::entropy_like_h(std::sqrt(t.R * t.R + lambda_plus));
  t.s_minus = 1.0 + detail::entropy_like_h(std::sqrt(t.R * t.R + lambda_minus));
  t.m_plus = (1.0 + t.C + 2.0 * t.R) / 4.0;
  t.m_minus = (1.0 + t.C - 2.0 * t.R) / 4.0;
  t.n_plus = 2.0 * (1.0 + t.R);
  t.n_minus = 2.0 * (1.0 - t.R);
  const double one_minus_c4 = (1.0 - t.C) / 4.0;
  t.s_zero = -(detail::ratio_term(t.m_plus / 4.0, t.m_plus, t.n_plus) +
               detail::ratio_term(one_minus_c4, 1.0 - t.C, t.n_plus) +
               detail::ratio_term(t.m_minus / 4.0, t.m_minus, t.n_minus) +
               detail::ratio_term(one_minus_c4, 1.0 - t.C, t.n_minus));
  return t;
}

// D' = 1 + H(R) + min{s0, s+, s-} - sum_{i=+-} (u_i log2 u_i + v_i log2 v_i).
inline double collective_discord_value(const CollectiveDiscordTerms& t) {
  const double smin = std::min({t.s_zero, t.s_plus, t.s_minus});
  const double uv_sum = detail::plogp(t.u_plus) + detail::plogp(t.u_minus) +
                        detail::plogp(t.v_plus) + detail::plogp(t.v_minus);
  return 1.0 + detail::entropy_like_h(t.R) + smin - uv_sum;
}

// Closed form evaluated verbatim and compared against the numeric
// minimization; a gap larger than 1e-4 sets the discrepant flag (recorded,
// never corrected).
inline CollectiveDiscordResult info_discord_collective(
    const DensityMatrix& rho, const OptimizerOptions& opts = {}) {
  CollectiveDiscordResult res;
  res.terms = collective_discord_terms(rho);
  res.value = collective_discord_value(res.terms);
  res.numeric_value = info_discord_numeric(rho, opts);
  res.discrepant = std::abs(res.value - res.numeric_value) > 1e-4;
  return res;
}

}  // namespace qcorr
