#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "qcorr/errors.hpp"

namespace qcorr {

using complexd = std::complex<double>;

// Two-qubit state in the basis |ee>, |eg>, |ge>, |gg> with sigma3|e> = +|e>.
struct DensityMatrix {
  Eigen::Matrix4cd entries;
};

// Bloch vectors of both subsystems plus the 3x3 correlation tensor:
// x_i = Tr[rho (sigma_i x 1)], y_j = Tr[rho (1 x sigma_j)],
// T_ij = Tr[rho (sigma_i x sigma_j)].
struct PauliDecomposition {
  Eigen::Vector3d x;
  Eigen::Vector3d y;
  Eigen::Matrix3d T;
};

// Parameters of a Bell-diagonal state 1/4 [1x1 + sum_i c_i sigma_i x sigma_i].
struct BellDiagonalParams {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

struct ValidationReport {
  double hermiticity_defect = 0.0;
  double trace_defect = 0.0;
  double min_eigenvalue = 0.0;
  bool passed = false;
};

inline constexpr double hermiticity_tol = 1e-12;
inline constexpr double trace_tol = 1e-12;
inline constexpr double psd_tol = 1e-10;

inline const std::array<Eigen::Matrix2cd, 4>& pauli_matrices() {
  static const std::array<Eigen::Matrix2cd, 4> sigma = [] {
    std::array<Eigen::Matrix2cd, 4> s;
    const complexd i(0.0, 1.0);
    s[0] << 1, 0, 0, 1;
    s[1] << 0, 1, 1, 0;
    s[2] << 0, -i, i, 0;
    s[3] << 1, 0, 0, -1;
    return s;
  }();
  return sigma;
}

inline Eigen::Matrix4cd kron2(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

inline ValidationReport validate(const DensityMatrix& rho) {
  ValidationReport rep;
  const Eigen::Matrix4cd& m = rho.entries;
  rep.hermiticity_defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
  rep.trace_defect = std::abs(m.trace() - complexd(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es;
  es.compute(Eigen::Matrix4cd(0.5 * (m + m.adjoint())), Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.passed = rep.hermiticity_defect <= hermiticity_tol &&
               rep.trace_defect <= trace_tol && rep.min_eigenvalue >= -psd_tol;
  return rep;
}

inline DensityMatrix pauli_compose(const PauliDecomposition& d) {
  const auto& s = pauli_matrices();
  Eigen::Matrix4cd m = kron2(s[0], s[0]);
  for (int i = 0; i < 3; ++i) {
    m += d.x(i) * kron2(s[i + 1], s[0]);
    m += d.y(i) * kron2(s[0], s[i + 1]);
    for (int j = 0; j < 3; ++j) m += d.T(i, j) * kron2(s[i + 1], s[j + 1]);
  }
  DensityMatrix rho{0.25 * m};
  ValidationReport rep = validate(rho);
  if (!rep.passed) {
    throw NonPhysicalParams(
        "pauli_compose: result is not a valid density matrix (min eigenvalue " +
        std::to_string(rep.min_eigenvalue) + ")");
  }
  return rho;
}

inline PauliDecomposition pauli_decompose(const DensityMatrix& rho) {
  const auto& s = pauli_matrices();
  PauliDecomposition d;
  for (int i = 0; i < 3; ++i) {
    d.x(i) = (rho.entries * kron2(s[i + 1], s[0])).trace().real();
    d.y(i) = (rho.entries * kron2(s[0], s[i + 1])).trace().real();
    for (int j = 0; j < 3; ++j)
      d.T(i, j) = (rho.entries * kron2(s[i + 1], s[j + 1])).trace().real();
  }
  return d;
}

inline DensityMatrix bell_diagonal(const BellDiagonalParams& c) {
  PauliDecomposition d;
  d.x.setZero();
  d.y.setZero();
  d.T = Eigen::Vector3d(c.c1, c.c2, c.c3).asDiagonal();
  try {
    return pauli_compose(d);
  } catch (const NonPhysicalParams&) {
    throw NonPhysicalParams("bell_diagonal: parameters (" + std::to_string(c.c1) +
                            ", " + std::to_string(c.c2) + ", " + std::to_string(c.c3) +
                            ") do not give a positive semidefinite state");
  }
}

inline DensityMatrix bell_diagonal(double c1, double c2, double c3) {
  return bell_diagonal(BellDiagonalParams{c1, c2, c3});
}

inline double purity(const DensityMatrix& rho) {
  return (rho.entries * rho.entries).trace().real();
}

// Real-coefficient view of an X-type state with rho22 == rho33 and real rho23,
// the structure shared by the collective-decoherence family.
struct XStateView {
  double rho11 = 0.0;
  double rho22 = 0.0;
  double rho44 = 0.0;
  double rho23 = 0.0;
  complexd rho14{0.0, 0.0};
};

inline XStateView x_state_view(const DensityMatrix& rho, double tol = 1e-10) {
  const Eigen::Matrix4cd& m = rho.entries;
  double off_x = 0.0;
  static constexpr int zero_slots[8][2] = {{0, 1}, {0, 2}, {1, 0}, {2, 0},
                                           {1, 3}, {2, 3}, {3, 1}, {3, 2}};
  for (auto [i, j] : zero_slots) off_x = std::max(off_x, std::abs(m(i, j)));
  if (off_x > tol) throw StructureMismatch("x_state_view: matrix is not X-type");
  if (std::abs(m(1, 1) - m(2, 2)) > tol)
    throw StructureMismatch("x_state_view: rho22 != rho33");
  if (std::abs(m(1, 2).imag()) > tol)
    throw StructureMismatch("x_state_view: rho23 is not real");
  XStateView v;
  v.rho11 = m(0, 0).real();
  v.rho22 = m(1, 1).real();
  v.rho44 = m(3, 3).real();
  v.rho23 = m(1, 2).real();
  v.rho14 = m(0, 3);
  return v;
}

}  // namespace qcorr
