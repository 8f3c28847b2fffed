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

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccs/gramian.hpp"
#include "ccs/lti.hpp"

namespace ccs {

enum class Measure { PM, HIIA, SIGMA2, RGA };
enum class Scaling { NONE, ROW, COLUMN, ROW_OR_COLUMN, SINKHORN_KNOPP };

inline std::string to_string(Measure m) {
  switch (m) {
    case Measure::PM: return "pm";
    case Measure::HIIA: return "hiia";
    case Measure::SIGMA2: return "sigma2";
    case Measure::RGA: return "rga";
  }
  return "?";
}

inline std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::NONE: return "none";
    case Scaling::ROW: return "row";
    case Scaling::COLUMN: return "column";
    case Scaling::ROW_OR_COLUMN: return "rowcol";
    case Scaling::SINKHORN_KNOPP: return "sk";
  }
  return "?";
}

inline Measure measure_from_string(const std::string& s) {
  if (s == "pm") return Measure::PM;
  if (s == "hiia") return Measure::HIIA;
  if (s == "sigma2") return Measure::SIGMA2;
  if (s == "rga") return Measure::RGA;
  throw std::invalid_argument("unknown measure: " + s);
}

inline Scaling scaling_from_string(const std::string& s) {
  if (s == "none") return Scaling::NONE;
  if (s == "row") return Scaling::ROW;
  if (s == "column") return Scaling::COLUMN;
  if (s == "rowcol") return Scaling::ROW_OR_COLUMN;
  if (s == "sk") return Scaling::SINKHORN_KNOPP;
  throw std::invalid_argument("unknown scaling: " + s);
}

/**
 * Interaction matrix: how strongly each input channel drives each output
 * channel, tagged with the measure and scaling that produced it.
 */
struct InteractionMatrix {
  Eigen::MatrixXd values;
  Measure measure = Measure::PM;
  Scaling scaling = Scaling::NONE;
  std::vector<std::string> input_names;
  std::vector<std::string> output_names;
  std::vector<std::string> annotations;  // e.g. applied emphasis factors

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/**
 * Gramian-based interaction matrix
 *
 *   [Gamma]_ij = ||g_ij|| / sum_kl ||g_kl||
 *
 * with the Hankel norm (HIIA), the H2 norm (SIGMA2) or the squared
 * Hilbert-Schmidt norm (PM) of each subsystem.  Identically-zero entries
 * contribute exact zeros without touching the norm machinery.
 */
inline InteractionMatrix build_im(const TransferMatrix& G, Measure measure, int pade_order = 2) {
  if (measure == Measure::RGA)
    throw std::invalid_argument("build_im: use rga() for the relative gain array");
  const int p = G.outputs(), m = G.inputs();
  if (p == 0 || m == 0) throw std::invalid_argument("build_im: empty plant");

  InteractionMatrix im;
  im.measure = measure;
  im.scaling = Scaling::NONE;
  im.input_names = G.input_names;
  im.output_names = G.output_names;
  im.values = Eigen::MatrixXd::Zero(p, m);

  for (int i = 0; i < p; ++i)
    for (int j = 0; j < m; ++j) {
      const RationalTF& g = G.at(i, j);
      if (g.is_zero()) continue;
      if (!is_stable(g))
        throw std::runtime_error("build_im: unstable entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ")");
      switch (measure) {
        case Measure::HIIA: im.values(i, j) = norm_hankel(g, pade_order); break;
        case Measure::SIGMA2: im.values(i, j) = norm_h2(g, pade_order); break;
        case Measure::PM: im.values(i, j) = norm_hs_squared(g, pade_order); break;
        default: break;
      }
    }

  const double total = im.values.sum();
  if (total <= 0.0) throw std::runtime_error("build_im: degenerate plant");
  im.values /= total;
  return im;
}

/// Classical relative gain array Lambda = G(0) o (G(0)^-1)^T.
inline InteractionMatrix rga(const TransferMatrix& G) {
  if (G.outputs() != G.inputs()) throw std::invalid_argument("rga: plant must be square");
  const Eigen::MatrixXd K = dc_gain(G);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw std::runtime_error("rga: singular steady-state gain matrix");
  Eigen::MatrixXd Kinv = lu.inverse();
  InteractionMatrix im;
  im.measure = Measure::RGA;
  im.scaling = Scaling::NONE;
  im.input_names = G.input_names;
  im.output_names = G.output_names;
  im.values = K.cwiseProduct(Kinv.transpose());
  return im;
}

}  // namespace ccs
