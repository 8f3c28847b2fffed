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
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccs/lti.hpp"
#include "ccs/rng.hpp"

namespace ccs {

/**
 * Random MIMO plant generator settings.  Defaults mirror the benchmark
 * configuration: 5x5 plants, orders 1-3, relative degrees 1-3, pole time
 * constants log-uniform on [1, 10], 20% complex pole share, up to 4 NMP
 * zeros, 10% of entries delayed by up to 0.5 time units.
 */
struct GeneratorConfig {
  int n_inputs = 5;
  int n_outputs = 5;
  int min_inputs_per_output = 4;
  int max_inputs_per_output = 5;
  int min_tf_order = 1;
  int max_tf_order = 3;
  int min_relative_degree = 1;
  int max_relative_degree = 3;
  double max_static_gain = 10.0;  // magnitudes are log-uniform on [1, max]
  double min_pole_time_constant = 1.0;
  double max_pole_time_constant = 10.0;
  double min_complex_damping = 0.1;
  double pct_complex_stable_poles = 20.0;
  int min_nmp_zeros = 0;
  int max_nmp_zeros = 4;
  double pct_delay = 10.0;
  double min_delay = 0.0;
  double max_delay = 0.5;
  int pade_order = 2;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_inputs < 1 || n_outputs < 1)
      throw std::invalid_argument("GeneratorConfig: plant dimensions must be positive");
    if (min_inputs_per_output < 1 || min_inputs_per_output > max_inputs_per_output ||
        max_inputs_per_output > n_inputs)
      throw std::invalid_argument("GeneratorConfig: inputs-per-output range invalid");
    if (min_tf_order < 1 || min_tf_order > max_tf_order)
      throw std::invalid_argument("GeneratorConfig: order range invalid");
    if (min_relative_degree < 0 || min_relative_degree > max_relative_degree)
      throw std::invalid_argument("GeneratorConfig: relative degree range invalid");
    if (min_relative_degree > max_tf_order)
      throw std::invalid_argument("GeneratorConfig: relative degree exceeds order for all draws");
    if (max_static_gain < 1.0)
      throw std::invalid_argument("GeneratorConfig: max_static_gain must be >= 1");
    if (min_pole_time_constant <= 0.0 || min_pole_time_constant > max_pole_time_constant)
      throw std::invalid_argument("GeneratorConfig: pole time constant range invalid");
    if (min_complex_damping <= 0.0 || min_complex_damping > 1.0)
      throw std::invalid_argument("GeneratorConfig: damping must be in (0, 1]");
    if (pct_complex_stable_poles < 0.0 || pct_complex_stable_poles > 100.0 || pct_delay < 0.0 ||
        pct_delay > 100.0)
      throw std::invalid_argument("GeneratorConfig: percentages must be in [0, 100]");
    if (min_nmp_zeros < 0 || min_nmp_zeros > max_nmp_zeros)
      throw std::invalid_argument("GeneratorConfig: NMP zero range invalid");
    if (min_delay < 0.0 || min_delay > max_delay)
      throw std::invalid_argument("GeneratorConfig: delay range invalid");
    if (pade_order < 1) throw std::invalid_argument("GeneratorConfig: pade_order must be >= 1");
  }
};

namespace detail {

// Step-response screening limits (overshoot 10%, undershoot 25%,
// determination tolerance 0.01).
inline constexpr double kMaxOvershoot = 0.10;
inline constexpr double kMaxUndershoot = 0.25;
inline constexpr double kShapeTol = 0.01;
inline constexpr int kMaxEntryAttempts = 1000;

inline bool shape_acceptable(const RationalTF& tf, double tau_slow, double tau_fast) {
  const double t_end = 8.0 * tau_slow;
  const double dt = std::max(t_end / 8000.0, tau_fast / 50.0);
  RationalTF core(tf.num, tf.den, 0.0);  // dead time only shifts the response
  const StepSamples s = step_response(core, t_end, dt);
  const double K = dc_gain(core);
  double top = 0.0, bottom = 0.0;
  for (double y : s.y) {
    const double v = y / K;
    top = std::max(top, v - 1.0);
    bottom = std::max(bottom, -v);
  }
  return top <= kMaxOvershoot + kShapeTol && bottom <= kMaxUndershoot + kShapeTol;
}

inline RationalTF draw_entry(Rng rng, const GeneratorConfig& cfg, int row, int col) {
  for (int attempt = 0; attempt < kMaxEntryAttempts; ++attempt) {
    const int order = static_cast<int>(rng.uniform_int(cfg.min_tf_order, cfg.max_tf_order));
    int rel_deg = static_cast<int>(rng.uniform_int(cfg.min_relative_degree, cfg.max_relative_degree));
    rel_deg = std::min(rel_deg, order);

    std::vector<std::complex<double>> ps;
    double tau_slow = 0.0, tau_fast = std::numeric_limits<double>::infinity();
    int remaining = order;
    while (remaining > 0) {
      const double tau = rng.log_uniform(cfg.min_pole_time_constant, cfg.max_pole_time_constant);
      tau_slow = std::max(tau_slow, tau);
      tau_fast = std::min(tau_fast, tau);
      if (remaining >= 2 && rng.bernoulli(cfg.pct_complex_stable_poles / 100.0)) {
        const double zeta = rng.uniform(cfg.min_complex_damping, 1.0);
        const double re = -1.0 / tau;
        const double im = std::sqrt(std::max(0.0, 1.0 - zeta * zeta)) / (tau * zeta);
        ps.emplace_back(re, im);
        ps.emplace_back(re, -im);
        remaining -= 2;
      } else {
        ps.emplace_back(-1.0 / tau, 0.0);
        remaining -= 1;
      }
    }

    const int num_degree = order - rel_deg;
    int n_nmp = static_cast<int>(rng.uniform_int(cfg.min_nmp_zeros, cfg.max_nmp_zeros));
    n_nmp = std::min(n_nmp, num_degree);
    std::vector<std::complex<double>> zs;
    for (int z = 0; z < n_nmp; ++z)
      zs.emplace_back(1.0 / rng.log_uniform(cfg.min_pole_time_constant, cfg.max_pole_time_constant),
                      0.0);
    for (int z = 0; z < num_degree - n_nmp; ++z)
      zs.emplace_back(-1.0 / rng.log_uniform(cfg.min_pole_time_constant, cfg.max_pole_time_constant),
                      0.0);

    const double magnitude = rng.log_uniform(1.0, cfg.max_static_gain);
    const double gain = rng.bernoulli(0.5) ? magnitude : -magnitude;
    const double delay = rng.bernoulli(cfg.pct_delay / 100.0)
                             ? rng.uniform(cfg.min_delay, cfg.max_delay)
                             : 0.0;

    Poly den = poly_from_roots(ps, 1.0);
    Poly num = poly_from_roots(zs, 1.0);
    const double num0 = poly_eval(num, 0.0);
    const double den0 = poly_eval(den, 0.0);
    num = poly_scale(num, gain * den0 / num0);
    RationalTF tf(num, den, delay);

    if (shape_acceptable(tf, tau_slow, tau_fast)) return tf;
  }
  throw std::runtime_error("generate: overshoot/undershoot screening failed for entry (" +
                           std::to_string(row) + "," + std::to_string(col) + ")");
}

}  // namespace detail

/**
 * Draws a random plant, deterministically in the seed.  Row i uses the
 * sub-stream fork(i); its structure draws come from fork(i).fork(0) and
 * entry (i, j) from fork(i).fork(1 + j), so individual entries are
 * reproducible regardless of which other entries are active.
 */
inline TransferMatrix generate(const GeneratorConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);
  const int p = cfg.n_outputs, m = cfg.n_inputs;

  TransferMatrix G;
  G.entries.assign(static_cast<std::size_t>(p),
                   std::vector<RationalTF>(static_cast<std::size_t>(m), RationalTF::zero()));
  for (int j = 0; j < m; ++j) G.input_names.push_back("u" + std::to_string(j + 1));
  for (int i = 0; i < p; ++i) G.output_names.push_back("y" + std::to_string(i + 1));

  for (int i = 0; i < p; ++i) {
    Rng row_rng = root.fork(static_cast<std::uint64_t>(i)).fork(0);
    const int active = static_cast<int>(
        row_rng.uniform_int(cfg.min_inputs_per_output, cfg.max_inputs_per_output));
    // Partial Fisher-Yates draw of `active` distinct input indices.
    std::vector<int> idx(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) idx[static_cast<std::size_t>(j)] = j;
    for (int t = 0; t < active; ++t) {
      const int swap_with = static_cast<int>(row_rng.uniform_int(t, m - 1));
      std::swap(idx[static_cast<std::size_t>(t)], idx[static_cast<std::size_t>(swap_with)]);
    }
    idx.resize(static_cast<std::size_t>(active));
    std::sort(idx.begin(), idx.end());

    for (int j : idx) {
      Rng entry_rng = root.fork(static_cast<std::uint64_t>(i)).fork(1 + static_cast<std::uint64_t>(j));
      G.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          detail::draw_entry(entry_rng, cfg, i, j);
    }
  }
  return G;
}

}  // namespace ccs
