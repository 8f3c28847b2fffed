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

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ccs/poly.hpp"

namespace ccs {

/**
 * SISO rational transfer function with an exact dead time,
 *
 *     g(s) = num(s)/den(s) * exp(-delay * s),
 *
 * coefficients in descending powers of s.  The delay is kept exact and is
 * only replaced by a Pade approximant inside realize(), so DC gains and
 * rational algebra stay exact.  divide() may produce a negative delay;
 * such results are flagged non-causal instead of being an error.
 */
struct RationalTF {
  Poly num{0.0};
  Poly den{1.0};
  double delay = 0.0;

  RationalTF() = default;
  RationalTF(Poly n, Poly d, double dl = 0.0)
      : num(poly_trim(std::move(n))), den(poly_trim(std::move(d))), delay(dl) {
    if (poly_is_zero(den)) throw std::invalid_argument("RationalTF: zero denominator");
  }

  static RationalTF zero() { return RationalTF({0.0}, {1.0}, 0.0); }
  static RationalTF constant(double k) { return RationalTF({k}, {1.0}, 0.0); }

  bool is_zero() const { return poly_is_zero(num); }
};

/// Continuous-time state-space realization (A, B, C, D).
struct StateSpaceModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  int states() const { return static_cast<int>(A.rows()); }
  int inputs() const { return static_cast<int>(D.cols()); }
  int outputs() const { return static_cast<int>(D.rows()); }

  void check_dimensions() const {
    if (A.rows() != A.cols()) throw std::invalid_argument("StateSpaceModel: A not square");
    if (B.rows() != A.rows() || C.cols() != A.cols() || D.rows() != C.rows() ||
        D.cols() != B.cols())
      throw std::invalid_argument("StateSpaceModel: inconsistent dimensions");
  }
};

/// Plant model G(s): a p x m grid of SISO transfer functions with channel labels.
struct TransferMatrix {
  std::vector<std::vector<RationalTF>> entries;  // row-major by output
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;

  int outputs() const { return static_cast<int>(entries.size()); }
  int inputs() const { return entries.empty() ? 0 : static_cast<int>(entries[0].size()); }

  const RationalTF& at(int i, int j) const { return entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }

  void validate() const {
    for (const auto& row : entries)
      if (static_cast<int>(row.size()) != inputs())
        throw std::invalid_argument("TransferMatrix: ragged entry grid");
    if (!input_names.empty() && static_cast<int>(input_names.size()) != inputs())
      throw std::invalid_argument("TransferMatrix: input label count mismatch");
    if (!output_names.empty() && static_cast<int>(output_names.size()) != outputs())
      throw std::invalid_argument("TransferMatrix: output label count mismatch");
  }
};

inline bool is_proper(const RationalTF& tf) {
  if (tf.is_zero()) return true;
  return poly_degree(tf.num) <= poly_degree(tf.den);
}

inline bool is_strictly_proper(const RationalTF& tf) {
  if (tf.is_zero()) return true;
  return poly_degree(tf.num) < poly_degree(tf.den);
}

/// Stability boundary: a pole with real part < -1e-10 counts as stable.
inline constexpr double kStabilityTol = 1e-10;

inline bool is_stable(const RationalTF& tf) {
  if (tf.is_zero()) return true;
  for (const auto& p : poly_roots(tf.den))
    if (p.real() >= -kStabilityTol) return false;
  return true;
}

inline bool is_causal(const RationalTF& tf) { return tf.delay >= 0.0; }

inline std::complex<double> freq_response(const RationalTF& tf, double omega) {
  const std::complex<double> s(0.0, omega);
  std::complex<double> v = poly_eval(tf.num, s) / poly_eval(tf.den, s);
  return v * std::exp(-s * tf.delay);
}

inline std::complex<double> freq_response(const StateSpaceModel& sys, double omega, int out = 0,
                                          int in = 0) {
  const int n = sys.states();
  if (n == 0) return std::complex<double>(sys.D(out, in), 0.0);
  Eigen::MatrixXcd M = std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) -
                       sys.A.cast<std::complex<double>>();
  Eigen::VectorXcd x = M.partialPivLu().solve(sys.B.col(in).cast<std::complex<double>>());
  std::complex<double> v = (sys.C.row(out).cast<std::complex<double>>() * x)(0);
  return v + std::complex<double>(sys.D(out, in), 0.0);
}

/**
 * Diagonal Pade approximant of exp(-L s) of the given order, as a rational
 * function.  Both polynomials share the coefficients
 * c_k = q!(2q-k)! / ((2q)! k! (q-k)!), with alternating signs on the
 * numerator, so the factor is all-pass with unit DC gain.
 */
inline RationalTF pade_delay(double delay, int order) {
  if (delay < 0.0) throw std::invalid_argument("pade_delay: negative delay");
  if (order < 1) throw std::invalid_argument("pade_delay: order must be >= 1");
  if (delay == 0.0) return RationalTF::constant(1.0);
  const int q = order;
  std::vector<double> c(static_cast<std::size_t>(q) + 1);
  c[0] = 1.0;
  for (int k = 1; k <= q; ++k)
    c[static_cast<std::size_t>(k)] =
        c[static_cast<std::size_t>(k) - 1] * static_cast<double>((q - k + 1)) /
        static_cast<double>((2 * q - k + 1) * k);
  Poly num(static_cast<std::size_t>(q) + 1), den(static_cast<std::size_t>(q) + 1);
  for (int k = 0; k <= q; ++k) {
    const double Lk = std::pow(delay, k) * c[static_cast<std::size_t>(k)];
    den[static_cast<std::size_t>(q - k)] = Lk;
    num[static_cast<std::size_t>(q - k)] = (k % 2 == 0) ? Lk : -Lk;
  }
  return RationalTF(num, den, 0.0);
}

inline RationalTF multiply(const RationalTF& a, const RationalTF& b) {
  if (a.is_zero() || b.is_zero()) return RationalTF::zero();
  Poly num = poly_mul(a.num, b.num);
  Poly den = poly_mul(a.den, b.den);
  poly_cancel_common_roots(num, den);
  return RationalTF(num, den, a.delay + b.delay);
}

/**
 * a / b with delay(a) - delay(b); a negative net delay is returned as-is and
 * reported by is_causal().
 */
inline RationalTF divide(const RationalTF& a, const RationalTF& b) {
  if (b.is_zero()) throw std::invalid_argument("divide: division by zero transfer function");
  if (a.is_zero()) return RationalTF::zero();
  Poly num = poly_mul(a.num, b.den);
  Poly den = poly_mul(a.den, b.num);
  poly_cancel_common_roots(num, den);
  return RationalTF(num, den, a.delay - b.delay);
}

/**
 * Controllable-canonical realization of a proper transfer function.  The
 * dead time, if any, is replaced by its Pade approximant first, and common
 * numerator/denominator roots are cancelled (relative tolerance 1e-9)
 * before the matrices are formed so the result is minimal.
 */
inline StateSpaceModel realize(const RationalTF& tf_in, int pade_order = 2) {
  RationalTF tf = tf_in;
  if (!is_proper(tf)) throw std::invalid_argument("realize: improper transfer function");
  if (tf.delay < 0.0) throw std::invalid_argument("realize: non-causal transfer function");
  if (tf.delay > 0.0) {
    if (pade_order < 1) throw std::invalid_argument("realize: pade_order must be >= 1");
    const RationalTF pd = pade_delay(tf.delay, pade_order);
    tf = multiply(RationalTF(tf.num, tf.den, 0.0), pd);
  }

  StateSpaceModel sys;
  if (tf.is_zero()) {
    sys.A = Eigen::MatrixXd::Zero(0, 0);
    sys.B = Eigen::MatrixXd::Zero(0, 1);
    sys.C = Eigen::MatrixXd::Zero(1, 0);
    sys.D = Eigen::MatrixXd::Zero(1, 1);
    return sys;
  }

  Poly num = tf.num, den = tf.den;
  poly_cancel_common_roots(num, den);
  num = poly_trim(num);
  den = poly_trim(den);

  // Normalize denominator to monic.
  const double lead = den[0];
  for (double& c : den) c /= lead;
  for (double& c : num) c /= lead;

  const int n = static_cast<int>(den.size()) - 1;
  // Pad numerator to n+1 coefficients.
  Poly b(static_cast<std::size_t>(n) + 1, 0.0);
  std::copy(num.begin(), num.end(), b.end() - static_cast<std::ptrdiff_t>(num.size()));

  const double d0 = b[0];
  if (n == 0) {
    sys.A = Eigen::MatrixXd::Zero(0, 0);
    sys.B = Eigen::MatrixXd::Zero(0, 1);
    sys.C = Eigen::MatrixXd::Zero(1, 0);
    sys.D = Eigen::MatrixXd::Constant(1, 1, d0);
    return sys;
  }

  sys.A = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) sys.A(0, j) = -den[static_cast<std::size_t>(j) + 1];
  for (int i = 1; i < n; ++i) sys.A(i, i - 1) = 1.0;
  sys.B = Eigen::MatrixXd::Zero(n, 1);
  sys.B(0, 0) = 1.0;
  sys.C = Eigen::MatrixXd::Zero(1, n);
  for (int j = 0; j < n; ++j)
    sys.C(0, j) = b[static_cast<std::size_t>(j) + 1] - d0 * den[static_cast<std::size_t>(j) + 1];
  sys.D = Eigen::MatrixXd::Constant(1, 1, d0);
  return sys;
}

/// G(0), entry-wise; dead time has no effect at s = 0.
inline Eigen::MatrixXd dc_gain(const TransferMatrix& G) {
  const int p = G.outputs(), m = G.inputs();
  Eigen::MatrixXd K(p, m);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < m; ++j) {
      const RationalTF& g = G.at(i, j);
      const double den0 = poly_eval(g.den, 0.0);
      if (den0 == 0.0)
        throw std::runtime_error("dc_gain: integrating channel, no finite DC gain at (" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");
      K(i, j) = poly_eval(g.num, 0.0) / den0;
    }
  return K;
}

inline double dc_gain(const RationalTF& g) {
  const double den0 = poly_eval(g.den, 0.0);
  if (den0 == 0.0) throw std::runtime_error("dc_gain: integrating channel, no finite DC gain");
  return poly_eval(g.num, 0.0) / den0;
}

/// Poles of the rational part (den roots after minimal cancellation).
inline std::vector<std::complex<double>> poles(const RationalTF& tf) {
  Poly num = tf.num, den = tf.den;
  poly_cancel_common_roots(num, den);
  return poly_roots(den);
}

inline std::vector<std::complex<double>> zeros(const RationalTF& tf) {
  Poly num = tf.num, den = tf.den;
  poly_cancel_common_roots(num, den);
  return poly_roots(num);
}

/**
 * Exact zero-order-hold discretization of (A, B) at step dt via the block
 * matrix exponential exp([[A, B], [0, 0]] dt).
 */
inline void zoh_discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double dt,
                           Eigen::MatrixXd& Ad, Eigen::MatrixXd& Bd) {
  const int n = static_cast<int>(A.rows());
  const int m = static_cast<int>(B.cols());
  if (n == 0) {
    Ad = A;
    Bd = B;
    return;
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = A * dt;
  M.topRightCorner(n, m) = B * dt;
  Eigen::MatrixXd phi = M.exp();
  Ad = phi.topLeftCorner(n, n);
  Bd = phi.topRightCorner(n, m);
}

/**
 * Unit-step response of a SISO system sampled at t_k = k*dt, exact at the
 * sample points.  The exact dead time is handled by shifting the time axis,
 * so the returned times are t_k = delay + k*dt.
 */
struct StepSamples {
  std::vector<double> t;
  std::vector<double> y;
};

inline StepSamples step_response(const RationalTF& tf, double t_end, double dt) {
  RationalTF core(tf.num, tf.den, 0.0);
  StateSpaceModel sys = realize(core, 1);
  Eigen::MatrixXd Ad, Bd;
  zoh_discretize(sys.A, sys.B, dt, Ad, Bd);
  const int steps = std::max(1, static_cast<int>(std::ceil((t_end - tf.delay) / dt)));
  StepSamples out;
  out.t.reserve(static_cast<std::size_t>(steps) + 1);
  out.y.reserve(static_cast<std::size_t>(steps) + 1);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.states());
  const double d = sys.D(0, 0);
  for (int k = 0; k <= steps; ++k) {
    const double yk = (sys.states() > 0 ? (sys.C * x)(0) : 0.0) + d;
    out.t.push_back(tf.delay + k * dt);
    out.y.push_back(yk);
    if (sys.states() > 0) x = Ad * x + Bd.col(0);
  }
  return out;
}

}  // namespace ccs
