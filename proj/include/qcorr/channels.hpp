#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "qcorr/errors.hpp"
#include "qcorr/qstate.hpp"

namespace qcorr {

struct KrausChannel {
  std::vector<Eigen::Matrix2cd> operators;

  // max |(sum_k K_k^dag K_k - 1)_ij|
  double completeness_defect() const {
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    for (const auto& k : operators) acc += k.adjoint() * k;
    return (acc - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
  }
};

struct DecayParams {
  double gamma1 = 0.0;  // 1/s
  double gamma2 = 0.0;  // 1/s
};

// Random-telegraph (colored) noise: amplitude a, memory time tau.
struct ColoredNoiseParams {
  double a = 0.0;    // 1/s
  double tau = 1.0;  // s
};

inline void check_probability(double p, const char* where) {
  if (!(p >= 0.0 && p <= 1.0))
    throw OutOfRange(std::string(where) + ": probability " + std::to_string(p) +
                     " outside [0, 1]");
}

// K1 = sqrt(1 - p/2) 1, K2 = sqrt(p/2) sigma3.
// Bloch action: (b1, b2, b3) -> ((1-p) b1, (1-p) b2, b3).
inline KrausChannel phase_damping(double p) {
  check_probability(p, "phase_damping");
  const auto& s = pauli_matrices();
  return {{std::sqrt(1.0 - p / 2.0) * s[0], std::sqrt(p / 2.0) * s[3]}};
}

// K1 = sqrt(1 - q/2) 1, K2 = sqrt(q/2) sigma1.
// Bloch action: (b1, b2, b3) -> (b1, (1-q) b2, (1-q) b3).
inline KrausChannel bit_flip(double q) {
  check_probability(q, "bit_flip");
  const auto& s = pauli_matrices();
  return {{std::sqrt(1.0 - q / 2.0) * s[0], std::sqrt(q / 2.0) * s[1]}};
}

// Decay |e> -> |g| with probability p; in this basis |e> is index 0, so
// K1 = diag(sqrt(1-p), 1) and K2 has sqrt(p) in the (g|.|e) slot.
// Excited population maps as rho_ee -> (1-p) rho_ee.
inline KrausChannel amplitude_damping(double p) {
  check_probability(p, "amplitude_damping");
  Eigen::Matrix2cd k1 = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd k2 = Eigen::Matrix2cd::Zero();
  k1(0, 0) = std::sqrt(1.0 - p);
  k1(1, 1) = 1.0;
  k2(1, 0) = std::sqrt(p);
  return {{k1, k2}};
}

inline double markov_probability(double gamma, double t) {
  if (gamma < 0.0) throw OutOfRange("markov_probability: gamma < 0");
  if (t < 0.0) throw OutOfRange("markov_probability: t < 0");
  double p = 1.0 - std::exp(-gamma * t);
  return std::clamp(p, 0.0, 1.0);
}

// x(t) = 1 - e^{-u} [cos(mu u) + sin(mu u)/mu], u = t/(2 tau), mu = sqrt((4 a tau)^2 - 1).
// For 4 a tau < 1 the analytic continuation uses cosh/sinh; at 4 a tau = 1 the
// limit sin(mu u)/mu -> u applies. The value is NOT clamped: in the oscillatory
// regime x(t) ranges through [0, 2), and the induced Kraus pair
// sqrt(1 - x/2), sqrt(x/2) stays valid on that whole range.
inline double colored_noise_probability(const ColoredNoiseParams& params, double t) {
  if (params.a < 0.0) throw OutOfRange("colored_noise_probability: a < 0");
  if (!(params.tau > 0.0)) throw OutOfRange("colored_noise_probability: tau <= 0");
  if (t < 0.0) throw OutOfRange("colored_noise_probability: t < 0");
  const double u = t / (2.0 * params.tau);
  const double s = 4.0 * params.a * params.tau;
  double bracket;
  if (std::abs(s - 1.0) < 1e-12) {
    bracket = 1.0 + u;
  } else if (s > 1.0) {
    const double mu = std::sqrt(s * s - 1.0);
    bracket = std::cos(mu * u) + std::sin(mu * u) / mu;
  } else {
    const double nu = std::sqrt(1.0 - s * s);
    bracket = std::cosh(nu * u) + std::sinh(nu * u) / nu;
  }
  return 1.0 - std::exp(-u) * bracket;
}

// rho -> sum_ij (A_i x B_j) rho (A_i x B_j)^dag
inline DensityMatrix apply_product_channel(const DensityMatrix& rho,
                                           const KrausChannel& ch_a,
                                           const KrausChannel& ch_b) {
  if (ch_a.completeness_defect() > 1e-10 || ch_b.completeness_defect() > 1e-10)
    throw NonPhysicalParams("apply_product_channel: channel is not trace-preserving");
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (const auto& a : ch_a.operators)
    for (const auto& b : ch_b.operators) {
      Eigen::Matrix4cd k = kron2(a, b);
      out += k * rho.entries * k.adjoint();
    }
  DensityMatrix result{out};
  ValidationReport rep = validate(result);
  if (!rep.passed)
    throw NonPhysicalParams("apply_product_channel: output failed validation");
  return result;
}

// Phase damping (rate gamma1) on A, bit flip (rate gamma2) on B:
// c1 = c10 e^{-g1 t}, c2 = c20 e^{-(g1+g2) t}, c3 = c30 e^{-g2 t}.
inline BellDiagonalParams evolve_bd_phase_bitflip(const BellDiagonalParams& c0,
                                                  double gamma1, double gamma2,
                                                  double t) {
  if (gamma1 < 0.0 || gamma2 < 0.0) throw OutOfRange("evolve_bd_phase_bitflip: rate < 0");
  if (t < 0.0) throw OutOfRange("evolve_bd_phase_bitflip: t < 0");
  return {c0.c1 * std::exp(-gamma1 * t), c0.c2 * std::exp(-(gamma1 + gamma2) * t),
          c0.c3 * std::exp(-gamma2 * t)};
}

// Phase damping on both sides (rates gamma1, gamma2):
// c1 = c10 e^{-(g1+g2) t}, c2 = c20 e^{-(g1+g2) t}, c3 = c30.
inline BellDiagonalParams evolve_bd_phase_phase(const BellDiagonalParams& c0,
                                                double gamma1, double gamma2,
                                                double t) {
  if (gamma1 < 0.0 || gamma2 < 0.0) throw OutOfRange("evolve_bd_phase_phase: rate < 0");
  if (t < 0.0) throw OutOfRange("evolve_bd_phase_phase: t < 0");
  const double e12 = std::exp(-(gamma1 + gamma2) * t);
  return {c0.c1 * e12, c0.c2 * e12, c0.c3};
}

// Colored-noise phase flip on A, colored-noise bit flip on B:
// c1 = c10 (1-x1), c2 = c20 (1-x1)(1-x2), c3 = c30 (1-x2).
inline BellDiagonalParams evolve_bd_colored(const BellDiagonalParams& c0,
                                            const ColoredNoiseParams& pa,
                                            const ColoredNoiseParams& pb, double t) {
  const double x1 = colored_noise_probability(pa, t);
  const double x2 = colored_noise_probability(pb, t);
  return {c0.c1 * (1.0 - x1), c0.c2 * (1.0 - x1) * (1.0 - x2), c0.c3 * (1.0 - x2)};
}

}  // namespace qcorr
