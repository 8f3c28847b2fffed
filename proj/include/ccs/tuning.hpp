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
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ccs/lti.hpp"

namespace ccs {

/// First-order-plus-dead-time model K e^{-Ls} / (1 + Ts).
struct FOPDTModel {
  double K = 0.0;
  double T = 1.0;
  double L = 0.0;

  RationalTF to_tf() const { return RationalTF({K}, {T, 1.0}, L); }
};

/// PI controller C(s) = Kp (1 + 1/(Ti s)).
struct PIController {
  double Kp = 0.0;
  double Ti = 1.0;

  RationalTF to_tf() const { return RationalTF({Kp * Ti, Kp}, {Ti, 0.0}, 0.0); }
};

/// IMC controller C = f g_minus^-1 / (1 - f g_plus), plus design diagnostics.
struct IMCController {
  RationalTF controller;
  RationalTF g_plus;   // all-pass factor (delays + mirrored NMP zeros), unit DC gain
  RationalTF g_minus;  // invertible factor
  int filter_order = 0;
  double epsilon = 0.0;
};

namespace detail {

/// Slowest/fastest time constants 1/|Re(p)| of the rational part.
inline void time_constant_range(const RationalTF& tf, double& slow, double& fast) {
  slow = 1.0;
  fast = 1.0;
  auto ps = poles(tf);
  if (ps.empty()) return;
  slow = 0.0;
  fast = std::numeric_limits<double>::infinity();
  for (const auto& p : ps) {
    const double re = std::abs(p.real());
    if (re <= 0.0) continue;
    slow = std::max(slow, 1.0 / re);
    fast = std::min(fast, 1.0 / re);
  }
  if (slow == 0.0) slow = fast = 1.0;
}

/// Nelder-Mead minimization in 2-D with a fixed, deterministic schedule.
inline std::array<double, 2> nelder_mead_2d(const std::function<double(double, double)>& f,
                                            std::array<double, 2> x0, double scale0,
                                            double scale1, int max_iter = 400) {
  struct Vertex {
    std::array<double, 2> x;
    double fx;
  };
  std::array<Vertex, 3> simplex;
  simplex[0] = {x0, f(x0[0], x0[1])};
  simplex[1] = {{x0[0] + scale0, x0[1]}, 0.0};
  simplex[1].fx = f(simplex[1].x[0], simplex[1].x[1]);
  simplex[2] = {{x0[0], x0[1] + scale1}, 0.0};
  simplex[2].fx = f(simplex[2].x[0], simplex[2].x[1]);

  auto order = [&]() {
    std::sort(simplex.begin(), simplex.end(),
              [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
  };
  for (int it = 0; it < max_iter; ++it) {
    order();
    const double spread = std::abs(simplex[2].fx - simplex[0].fx);
    const double size = std::max(std::abs(simplex[2].x[0] - simplex[0].x[0]),
                                 std::abs(simplex[2].x[1] - simplex[0].x[1]));
    if (spread <= 1e-14 * (1.0 + std::abs(simplex[0].fx)) && size <= 1e-10 * (1.0 + std::abs(simplex[0].x[0])))
      break;
    std::array<double, 2> centroid = {(simplex[0].x[0] + simplex[1].x[0]) / 2.0,
                                      (simplex[0].x[1] + simplex[1].x[1]) / 2.0};
    auto point = [&](double coef) -> std::array<double, 2> {
      return {centroid[0] + coef * (centroid[0] - simplex[2].x[0]),
              centroid[1] + coef * (centroid[1] - simplex[2].x[1])};
    };
    std::array<double, 2> xr = point(1.0);
    const double fr = f(xr[0], xr[1]);
    if (fr < simplex[0].fx) {
      std::array<double, 2> xe = point(2.0);
      const double fe = f(xe[0], xe[1]);
      simplex[2] = (fe < fr) ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < simplex[1].fx) {
      simplex[2] = {xr, fr};
    } else {
      std::array<double, 2> xc = point(fr < simplex[2].fx ? 0.5 : -0.5);
      const double fc = f(xc[0], xc[1]);
      if (fc < std::min(fr, simplex[2].fx)) {
        simplex[2] = {xc, fc};
      } else {
        for (int i = 1; i < 3; ++i) {
          simplex[i].x = {(simplex[i].x[0] + simplex[0].x[0]) / 2.0,
                          (simplex[i].x[1] + simplex[0].x[1]) / 2.0};
          simplex[i].fx = f(simplex[i].x[0], simplex[i].x[1]);
        }
      }
    }
  }
  order();
  return simplex[0].x;
}

}  // namespace detail

/// Area/63.2% initial estimate used to seed the least-squares FOPDT fit.
struct FOPDTInitialEstimate {
  double K = 0.0;
  double T0 = 1.0;
  double L0 = 0.0;
  double t_area = 0.0;   // normalized area integral, estimates L + T
  double t_63 = 0.0;     // first crossing of 63.2% of the final value
};

inline FOPDTInitialEstimate fopdt_initial_estimate(const RationalTF& tf,
                                                   const StepSamples& samples) {
  FOPDTInitialEstimate est;
  est.K = dc_gain(tf);
  const auto& t = samples.t;
  const auto& y = samples.y;
  const std::size_t n = t.size();
  // Area under (1 - y/K); the segment [0, delay) contributes delay exactly.
  double area = tf.delay;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double f0 = 1.0 - y[k] / est.K;
    const double f1 = 1.0 - y[k + 1] / est.K;
    area += 0.5 * (f0 + f1) * (t[k + 1] - t[k]);
  }
  est.t_area = area;

  const double target = 1.0 - std::exp(-1.0);
  est.t_63 = t.back();
  for (std::size_t k = 0; k < n; ++k) {
    if (y[k] / est.K >= target) {
      if (k == 0) {
        est.t_63 = t[0];
      } else {
        const double f0 = y[k - 1] / est.K, f1 = y[k] / est.K;
        const double w = (target - f0) / std::max(1e-300, f1 - f0);
        est.t_63 = t[k - 1] + w * (t[k] - t[k - 1]);
      }
      break;
    }
  }
  // The dead time can never be smaller than the exact transport delay.
  est.L0 = tf.delay + std::max(0.0, est.t_area - est.t_63);
  est.T0 = std::max(1e-6, est.t_63 - est.L0);
  return est;
}

/**
 * FOPDT approximation: K is the exact DC gain; (T, L) minimize the integral
 * of the squared step-response error over [0, 5 * slowest time constant],
 * seeded by the area/63.2% estimate and refined by Nelder-Mead.
 */
inline FOPDTModel fit_fopdt(const RationalTF& tf) {
  if (!is_stable(tf)) throw std::invalid_argument("fit_fopdt: unstable transfer function");
  const double K = dc_gain(tf);
  if (K == 0.0) throw std::runtime_error("fit_fopdt: no first-order approximant");

  double slow = 1.0, fast = 1.0;
  detail::time_constant_range(tf, slow, fast);
  const double t_end = tf.delay + 5.0 * slow;
  const double dt = (t_end - tf.delay) / 2000.0;
  const StepSamples samples = step_response(tf, t_end, dt);

  const FOPDTInitialEstimate est = fopdt_initial_estimate(tf, samples);

  const auto& ts = samples.t;
  const auto& ys = samples.y;
  auto objective = [&](double T, double L) {
    if (T <= 0.0 || L < 0.0) return 1e100 * (1.0 + std::abs(T) + std::abs(L));
    double acc = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double tk = ts[k];
      const double model = (tk <= L) ? 0.0 : K * (1.0 - std::exp(-(tk - L) / T));
      const double r = ys[k] - model;
      const double w = (k == 0 || k + 1 == ts.size()) ? 0.5 : 1.0;
      acc += w * r * r;
    }
    // The model is also in error over [0, delay) unless L covers it.
    if (L < tf.delay) {
      // y is exactly zero there; the model contributes (K(1-e^{-(t-L)/T}))^2.
      const int pre = 64;
      const double h = (tf.delay - L) / pre;
      for (int k = 0; k <= pre; ++k) {
        const double tk = L + k * h;
        const double model = K * (1.0 - std::exp(-(tk - L) / T));
        acc += ((k == 0 || k == pre) ? 0.5 : 1.0) * model * model * (h / dt);
      }
    }
    return acc * dt;
  };

  auto best = detail::nelder_mead_2d(objective, {est.T0, est.L0}, 0.2 * est.T0 + 1e-3,
                                     0.1 * est.T0 + 1e-3);
  FOPDTModel m;
  m.K = K;
  m.T = std::max(1e-9, best[0]);
  m.L = std::max(0.0, best[1]);
  return m;
}

/**
 * Lambda-tuned PI: Kp = (1/K) T/(L + lambda), Ti = T, lambda = eta T.
 */
inline PIController lambda_pi(const FOPDTModel& model, double eta) {
  if (model.K == 0.0) throw std::invalid_argument("lambda_pi: zero gain model");
  if (eta <= 0.0) throw std::invalid_argument("lambda_pi: eta must be positive");
  const double lambda = eta * model.T;
  PIController c;
  c.Kp = (1.0 / model.K) * model.T / (model.L + lambda);
  c.Ti = model.T;
  return c;
}

/**
 * IMC design.  The model is factored as g = g_plus * g_minus where g_plus
 * carries the dead time (as a Pade all-pass) and the non-minimum-phase
 * zeros paired with their left-half-plane mirrors for unit DC gain, and
 * g_minus holds the remaining, invertible dynamics.  With the filter
 * f = 1/(1 + eps s)^q the controller reduces to the single rational
 *
 *     C = d_minus d_plus / (n_minus ((1 + eps s)^q d_plus - n_plus)),
 *
 * q being the smallest integer (at least one) that makes C proper.
 * eps = eta * Z with Z = max over NMP zeros of 1/Re(z); for minimum-phase
 * models eps = eta * T of the FOPDT approximation instead.
 */
inline IMCController imc_design(const RationalTF& tf, double eta, int pade_order = 2,
                                double t_fopdt_hint = -1.0) {
  if (!is_stable(tf)) throw std::invalid_argument("imc_design: unstable transfer function");
  if (eta <= 0.0) throw std::invalid_argument("imc_design: eta must be positive");
  if (tf.is_zero()) throw std::invalid_argument("imc_design: zero transfer function");

  Poly num = tf.num, den = tf.den;
  poly_cancel_common_roots(num, den);
  num = poly_trim(num);
  den = poly_trim(den);

  std::vector<std::complex<double>> zs = poly_roots(num);
  std::vector<std::complex<double>> nmp, mp;
  for (const auto& z : zs) (z.real() > 0.0 ? nmp : mp).push_back(z);

  // g_plus = sign * prod (s - z)/(s + z); sign = (-1)^|nmp| gives g_plus(0) = 1.
  const double sign = (nmp.size() % 2 == 0) ? 1.0 : -1.0;
  Poly n_plus = poly_from_roots(nmp, sign);
  std::vector<std::complex<double>> mirrored;
  mirrored.reserve(nmp.size());
  for (const auto& z : nmp) mirrored.push_back(-z);
  Poly d_plus = poly_from_roots(mirrored, 1.0);

  std::vector<std::complex<double>> minus_roots = mp;
  minus_roots.insert(minus_roots.end(), mirrored.begin(), mirrored.end());
  Poly n_minus = poly_from_roots(minus_roots, num[0] * sign);
  Poly d_minus = den;

  if (tf.delay > 0.0) {
    const RationalTF pd = pade_delay(tf.delay, pade_order);
    n_plus = poly_mul(n_plus, pd.num);
    d_plus = poly_mul(d_plus, pd.den);
  }

  double eps;
  if (!nmp.empty()) {
    double Z = 0.0;
    for (const auto& z : nmp) Z = std::max(Z, 1.0 / z.real());
    eps = eta * Z;
  } else {
    const double T = (t_fopdt_hint > 0.0) ? t_fopdt_hint : fit_fopdt(tf).T;
    eps = eta * T;
  }

  const int q = std::max(1, poly_degree(d_minus) - poly_degree(n_minus));
  Poly filt = {1.0};
  for (int i = 0; i < q; ++i) filt = poly_mul(filt, Poly{eps, 1.0});

  Poly denom_inner = poly_add(poly_mul(filt, d_plus), poly_scale(n_plus, -1.0));
  // 1 - f g_plus vanishes at s = 0 by construction; pin the structural root
  // so the controller carries an exact integrator.
  if (!denom_inner.empty() &&
      std::abs(denom_inner.back()) <= 1e-10 * poly_max_abs(denom_inner))
    denom_inner.back() = 0.0;

  Poly c_num = poly_mul(d_minus, d_plus);
  Poly c_den = poly_mul(n_minus, denom_inner);
  poly_cancel_common_roots(c_num, c_den);
  // Cancellation rebuilds the polynomials from roots; restore the exact
  // integrator root.
  if (std::abs(c_den.back()) <= 1e-10 * poly_max_abs(c_den)) c_den.back() = 0.0;

  IMCController out;
  out.controller = RationalTF(c_num, c_den, 0.0);
  out.g_plus = RationalTF(n_plus, d_plus, 0.0);
  out.g_minus = RationalTF(n_minus, d_minus, 0.0);
  out.filter_order = q;
  out.epsilon = eps;

  if (!is_proper(out.controller))
    throw std::runtime_error("imc_design: internal cancellation failure (improper controller)");
  for (const auto& p : poles(out.controller))
    if (p.real() > 1e-9)
      throw std::runtime_error("imc_design: internal cancellation failure (unstable controller)");
  return out;
}

}  // namespace ccs
