#pragma once

// Test-side oracles and frozen reference values. Everything here is computed
// independently of the library under test: states are assembled entry by
// entry, entropies use their textbook definitions, and the frozen constants
// were produced with an arbitrary-precision tool from the defining equations.

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using cd = std::complex<double>;

// Assemble a two-qubit density matrix directly from Bloch vectors and the
// correlation matrix using the per-entry expansion in the product basis
// |ee>, |eg>, |ge>, |gg> with sigma_3 = diag(1, -1).
inline Eigen::Matrix4cd state_from_pauli(const Eigen::Vector3d& x,
                                         const Eigen::Vector3d& y,
                                         const Eigen::Matrix3d& T) {
  Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
  const cd i(0.0, 1.0);
  r(0, 0) = 0.25 * (1.0 + x(2) + y(2) + T(2, 2));
  r(1, 1) = 0.25 * (1.0 + x(2) - y(2) - T(2, 2));
  r(2, 2) = 0.25 * (1.0 - x(2) + y(2) - T(2, 2));
  r(3, 3) = 0.25 * (1.0 - x(2) - y(2) + T(2, 2));
  r(0, 1) = 0.25 * (y(0) - i * y(1) + T(2, 0) - i * T(2, 1));
  r(2, 3) = 0.25 * (y(0) - i * y(1) - T(2, 0) + i * T(2, 1));
  r(0, 2) = 0.25 * (x(0) - i * x(1) + T(0, 2) - i * T(1, 2));
  r(1, 3) = 0.25 * (x(0) - i * x(1) - T(0, 2) + i * T(1, 2));
  r(0, 3) = 0.25 * (T(0, 0) - T(1, 1) - i * T(0, 1) - i * T(1, 0));
  r(1, 2) = 0.25 * (T(0, 0) + T(1, 1) + i * T(0, 1) - i * T(1, 0));
  r(1, 0) = std::conj(r(0, 1));
  r(3, 2) = std::conj(r(2, 3));
  r(2, 0) = std::conj(r(0, 2));
  r(3, 1) = std::conj(r(1, 3));
  r(3, 0) = std::conj(r(0, 3));
  r(2, 1) = std::conj(r(1, 2));
  return r;
}

inline Eigen::Matrix4cd bell_diagonal_matrix(double c1, double c2, double c3) {
  return state_from_pauli(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                          Eigen::Vector3d(c1, c2, c3).asDiagonal());
}

// Eigenvalues of a Bell-diagonal state: the weights of the four Bell states.
inline std::array<double, 4> bd_eigenvalues(double c1, double c2, double c3) {
  return {0.25 * (1.0 + c1 - c2 + c3), 0.25 * (1.0 - c1 + c2 + c3),
          0.25 * (1.0 + c1 + c2 - c3), 0.25 * (1.0 - c1 - c2 - c3)};
}

inline double binary_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

inline double shannon_entropy_bits(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p)
    if (v > 0.0) s -= v * std::log2(v);
  return s;
}

// Closed-form information-theoretic discord of a Bell-diagonal state:
// D' = 1 - S(rho) + h2((1 + c)/2) with c = max_i |c_i|.
inline double bd_info_discord(double c1, double c2, double c3) {
  const auto lam = bd_eigenvalues(c1, c2, c3);
  const double s_ab = shannon_entropy_bits({lam[0], lam[1], lam[2], lam[3]});
  const double c = std::max({std::abs(c1), std::abs(c2), std::abs(c3)});
  return 1.0 - s_ab + binary_entropy(0.5 * (1.0 + c));
}

// Geometric discord of a Bell-diagonal state: 1/4 (sum of the two smaller
// c_i^2), written here without the cubic machinery.
inline double bd_geometric_discord(double c1, double c2, double c3) {
  std::array<double, 3> sq{c1 * c1, c2 * c2, c3 * c3};
  const double total = sq[0] + sq[1] + sq[2];
  return 0.25 * (total - std::max({sq[0], sq[1], sq[2]}));
}

struct Rng {
  std::mt19937 gen;
  explicit Rng(unsigned seed) : gen(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }

  // Uniform over the Bell-diagonal tetrahedron by rejection.
  std::array<double, 3> bell_diagonal_c() {
    for (;;) {
      const double c1 = uniform(-1.0, 1.0);
      const double c2 = uniform(-1.0, 1.0);
      const double c3 = uniform(-1.0, 1.0);
      const auto lam = bd_eigenvalues(c1, c2, c3);
      if (lam[0] >= 0.0 && lam[1] >= 0.0 && lam[2] >= 0.0 && lam[3] >= 0.0)
        return {c1, c2, c3};
    }
  }

  // Random mixed state from a complex Ginibre matrix, G G^dag normalized.
  template <int N>
  Eigen::Matrix<cd, N, N> density_matrix() {
    Eigen::Matrix<cd, N, N> g;
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c) g(r, c) = cd(normal(), normal());
    Eigen::Matrix<cd, N, N> rho = g * g.adjoint();
    return rho / rho.trace().real();
  }

  // PSD with entries confined to [0, 2]: B B^T with nonnegative B entries.
  Eigen::Matrix3d psd3_unit() {
    Eigen::Matrix3d b;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) b(r, c) = uniform(0.0, 0.8);
    return b * b.transpose();
  }

  // Random symmetric positive semidefinite 3x3 matrix B B^T with a random
  // overall scale for conditioning diversity.
  Eigen::Matrix3d psd3() {
    Eigen::Matrix3d b;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) b(r, c) = uniform(-1.0, 1.0);
    return std::pow(10.0, uniform(-2.0, 2.0)) * (b * b.transpose());
  }

  Eigen::Vector3d unit_vector() {
    Eigen::Vector3d v(normal(), normal(), normal());
    while (v.norm() < 1e-6) v = Eigen::Vector3d(normal(), normal(), normal());
    return v.normalized();
  }
};

// Frozen reference values. Sources: closed-form time solutions of the decay
// laws and high-precision evaluation of the defining expressions.
namespace frozen {

// Colored-noise demixing factor x(t) for a = 2/3, tau = 5 at t = 5.
inline constexpr double colored_x_oscillatory = 0.41709059963705056208;
// Same channel family, a = 1/3, tau = 5 at t = 5 (exceeds 1 by design).
inline constexpr double colored_x_oscillatory_2 = 1.6134678079375404646;
// Hyperbolic branch: a = 0.04, tau = 5 at t = 5 (4 a tau < 1).
inline constexpr double colored_x_hyperbolic = 0.05813531726843138558;
// Degenerate branch 4 a tau = 1: a = 0.05, tau = 5 at t = 5.
inline constexpr double colored_x_critical = 0.09020401043104986459;

// Collective coupling at r12 = 0.6737 (in units of the wavelength).
inline constexpr double kr_ref = 4.2329819414468874095;
inline constexpr double gamma12_over_gamma = -0.33547880802704393353;
inline constexpr double omega12_over_gamma = 0.040025416685712873637;
// Collective shift at kr = pi/2 equals 3 gamma / pi^2.
inline constexpr double omega12_quarter_wave = 0.30396355092701331433;
inline constexpr double gamma12_plus_over_gamma = 0.66452119197295606647;
inline constexpr double gamma12_minus_over_gamma = 1.3354788080270439335;
// Population mixture weights for alpha^2 = 0.9 at the couplings above.
inline constexpr double collective_a1 = 0.2239155983535267535;
inline constexpr double collective_a2 = 0.90435861319623224944;

// Branch-crossing times for c0 = (0.12, 0.13, 0.08), gamma1 = 0.035,
// gamma2 = 0.015 under the phase/bit-flip law: ln(13/12)/0.015,
// ln(13/8)/0.035, ln(3/2)/0.02.
inline constexpr double fig1_cross_12 = 5.3361805115690950549;
inline constexpr double fig1_cross_23 = 13.871651879477165937;
inline constexpr double fig1_cross_13 = 20.273255405408219099;

// Crossing time for c0 = (0.5, 0.3, 0.4), gamma1 = 0.45, gamma2 = 0.15 under
// the double-phase law: ln(5/4)/0.6.
inline constexpr double fig2_cross = 0.37190591885701625961;
// One-sided slopes of the geometric measure at that crossing (exact
// rationals: -27/1562.5 and -102/1562.5).
inline constexpr double fig2_left_slope = -0.01728;
inline constexpr double fig2_right_slope = -0.06528;

// Branch crossings for the two-sided amplitude-damping run with
// c0 = (0.45, 0.25, 0.2) and unit rates on both sides: the max-changing
// lambda1-lambda3 crossing and the earlier non-max lambda2-lambda3 one.
inline constexpr double fig3_geo_cross = 0.31884877451856610438;
inline constexpr double fig3_nonmax_cross = 0.14619805078831294501;

// Transversal branch crossings (in upsilon = t / (2 tau_A)) for the colored
// run with c0 = (0.5, 0.3, 0.4), a = (2/3, 1/3), tau = (5, 5).
inline constexpr double fig4_cross_1 = 0.05549832257316993539;
inline constexpr double fig4_cross_2 = 0.16226120748842160022;
inline constexpr double fig4_cross_3 = 0.33208420672326143563;
inline constexpr double fig4_cross_4 = 0.41756660993244207201;
// Osculation points (tangential touches where a demixing factor hits 1).
inline constexpr double fig4_osc_12_a = 0.12384;
inline constexpr double fig4_osc_12_b = 0.36012;
inline constexpr double fig4_osc_23 = 0.26118;

// Collective run at alpha^2 = 0.9, gamma = 1, r12 = 0.6737: geometric
// critical times and the argmin switch of the closed-form branches.
inline constexpr double fig5_geo_cross_1 = 0.24878056509916326895;
inline constexpr double fig5_geo_cross_2 = 0.8879062998407751017;
inline constexpr double fig5_s_cross = 1.6486690674972187721;

}  // namespace frozen

}  // namespace oracles
