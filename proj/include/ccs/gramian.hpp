/*
 * Copyright 2026 The ccselect Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ccs/lti.hpp"

namespace ccs {

/// Controllability (P) and observability (Q) gramians of a stable system.
struct GramianPair {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
};

/**
 * Solves A X + X A^T + W = 0 for Hurwitz A by Bartels-Stewart style
 * back-substitution on the complex Schur form of A: with A = U T U*, the
 * transformed unknown Y = U* X U satisfies T Y + Y T* + F = 0 and its
 * columns are obtained right-to-left from triangular solves
 * (T + conj(T_kk) I) y_k = -(f_k + sum_{j>k} conj(T_kj) y_j).
 */
inline Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& W) {
  if (A.rows() != A.cols() || W.rows() != W.cols() || A.rows() != W.rows())
    throw std::invalid_argument("solve_lyapunov: dimension mismatch");
  const int n = static_cast<int>(A.rows());
  if (n == 0) return Eigen::MatrixXd::Zero(0, 0);

  Eigen::ComplexSchur<Eigen::MatrixXd> schur(A, /*computeU=*/true);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("solve_lyapunov: Schur decomposition failed");
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();
  for (int k = 0; k < n; ++k)
    if (T(k, k).real() >= 0.0)
      throw std::runtime_error("solve_lyapunov: unstable system, gramian undefined");

  Eigen::MatrixXcd F = U.adjoint() * W * U;
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd M(n, n);
  for (int k = n - 1; k >= 0; --k) {
    Eigen::VectorXcd rhs = -F.col(k);
    for (int j = k + 1; j < n; ++j) rhs -= std::conj(T(k, j)) * Y.col(j);
    M = T;
    M.diagonal().array() += std::conj(T(k, k));
    Y.col(k) = M.triangularView<Eigen::Upper>().solve(rhs);
  }
  Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
  // The exact solution is symmetric; strip the asymmetric round-off.
  return 0.5 * (X + X.transpose());
}

inline GramianPair gramians(const StateSpaceModel& sys) {
  GramianPair g;
  g.P = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
  g.Q = solve_lyapunov(sys.A.transpose(), sys.C.transpose() * sys.C);
  return g;
}

/**
 * Hankel singular values: sqrt of the eigenvalues of P*Q, computed through
 * the symmetric product S Q S with S = P^(1/2) and clamped at zero below
 * 1e-12.  D is ignored.
 */
inline std::vector<double> hankel_singular_values(const StateSpaceModel& sys) {
  const int n = sys.states();
  if (n == 0) return {};
  const GramianPair g = gramians(sys);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esP(g.P);
  Eigen::VectorXd lam = esP.eigenvalues();
  for (int i = 0; i < n; ++i) lam(i) = std::sqrt(std::max(0.0, lam(i)));
  Eigen::MatrixXd S = esP.eigenvectors() * lam.asDiagonal() * esP.eigenvectors().transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S * g.Q * S);
  std::vector<double> sv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // PSD clamping tolerance 1e-12: numerical negatives are inevitable.
    const double e = std::max(0.0, es.eigenvalues()(i));
    sv[static_cast<std::size_t>(n - 1 - i)] = std::sqrt(e);
  }
  return sv;
}

inline std::vector<double> hankel_singular_values(const RationalTF& tf, int pade_order = 2) {
  if (!is_stable(tf)) throw std::runtime_error("hankel_singular_values: unstable system");
  if (tf.is_zero()) return {};
  return hankel_singular_values(realize(tf, pade_order));
}

/// Hankel norm: largest Hankel singular value.
inline double norm_hankel(const RationalTF& tf, int pade_order = 2) {
  if (tf.is_zero()) return 0.0;
  auto sv = hankel_singular_values(tf, pade_order);
  return sv.empty() ? 0.0 : sv.front();
}

/// H2 norm sqrt(trace(C P C^T)); defined for strictly proper stable systems.
inline double norm_h2(const RationalTF& tf, int pade_order = 2) {
  if (tf.is_zero()) return 0.0;
  if (!is_stable(tf)) throw std::runtime_error("norm_h2: unstable system");
  if (!is_strictly_proper(tf)) throw std::runtime_error("norm_h2: H2 norm unbounded");
  StateSpaceModel sys = realize(tf, pade_order);
  Eigen::MatrixXd P = solve_lyapunov(sys.A, sys.B * sys.B.transpose());
  const double v = (sys.C * P * sys.C.transpose())(0, 0);
  return std::sqrt(std::max(0.0, v));
}

/// Squared Hilbert-Schmidt norm of the Hankel operator: sum of sigma_k^2 = trace(PQ).
inline double norm_hs_squared(const RationalTF& tf, int pade_order = 2) {
  if (tf.is_zero()) return 0.0;
  if (!is_stable(tf)) throw std::runtime_error("norm_hs_squared: unstable system");
  StateSpaceModel sys = realize(tf, pade_order);
  const GramianPair g = gramians(sys);
  return (g.P * g.Q).trace();
}

}  // namespace ccs
