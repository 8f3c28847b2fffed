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
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "ccs/interaction.hpp"

namespace ccs {

namespace detail {
inline void require_scalable(const InteractionMatrix& im) {
  if (im.measure == Measure::RGA)
    throw std::invalid_argument("scaling schemes are defined for nonnegative gramian IMs only");
  if (im.values.minCoeff() < 0.0)
    throw std::invalid_argument("scaling: interaction matrix must be nonnegative");
}
}  // namespace detail

/// Divides each column by its sum so every input carries equal weight.
inline InteractionMatrix scale_columns(const InteractionMatrix& im) {
  detail::require_scalable(im);
  InteractionMatrix out = im;
  for (int j = 0; j < im.cols(); ++j) {
    const double s = im.values.col(j).sum();
    if (s <= 0.0)
      throw std::runtime_error("scale_columns: zero column sum for input " +
                               (j < static_cast<int>(im.input_names.size())
                                    ? im.input_names[static_cast<std::size_t>(j)]
                                    : std::to_string(j)));
    out.values.col(j) /= s;
  }
  out.scaling = Scaling::COLUMN;
  return out;
}

/// Divides each row by its sum so every output carries equal weight.
inline InteractionMatrix scale_rows(const InteractionMatrix& im) {
  detail::require_scalable(im);
  InteractionMatrix out = im;
  for (int i = 0; i < im.rows(); ++i) {
    const double s = im.values.row(i).sum();
    if (s <= 0.0)
      throw std::runtime_error("scale_rows: zero row sum for output " +
                               (i < static_cast<int>(im.output_names.size())
                                    ? im.output_names[static_cast<std::size_t>(i)]
                                    : std::to_string(i)));
    out.values.row(i) /= s;
  }
  out.scaling = Scaling::ROW;
  return out;
}

/**
 * Scales rows if the smallest of all row and column sums is a row sum,
 * otherwise scales columns.  An exact tie between the two sets breaks
 * toward columns.
 */
inline InteractionMatrix scale_row_or_column(const InteractionMatrix& im) {
  detail::require_scalable(im);
  double min_row = std::numeric_limits<double>::infinity();
  double min_col = std::numeric_limits<double>::infinity();
  for (int i = 0; i < im.rows(); ++i) min_row = std::min(min_row, im.values.row(i).sum());
  for (int j = 0; j < im.cols(); ++j) min_col = std::min(min_col, im.values.col(j).sum());
  InteractionMatrix out = (min_row < min_col) ? scale_rows(im) : scale_columns(im);
  out.scaling = Scaling::ROW_OR_COLUMN;
  return out;
}

/// Convergence report of the Sinkhorn-Knopp balancer.
struct SinkhornReport {
  int iterations = 0;
  double final_epsilon = 0.0;
  Eigen::VectorXd row_scale;
  Eigen::VectorXd col_scale;
};

/**
 * Sinkhorn-Knopp balancing to a doubly stochastic matrix D(r) G D(c).
 *
 * Iteration and stopping rule:
 *
 *     r_0 = e,  c_{k+1} = D(G^T r_k)^-1 e,  r_{k+1} = D(G c_{k+1})^-1 e,
 *     eps_k = || c_k o D(c_{k+1})^-1 - e ||_1
 *
 * stopping right after a column update once eps <= tol; a final check that
 * the row and column sums actually lie in [1-tol, 1+tol] guards against a
 * loose eps.  Requires a square nonnegative matrix; failure to converge
 * within max_iter (lack of support) is an error carrying the report.
 */
struct SinkhornError : std::runtime_error {
  SinkhornReport report;
  explicit SinkhornError(SinkhornReport r)
      : std::runtime_error("sinkhorn_knopp: no convergence within max_iter (matrix lacks support)"),
        report(std::move(r)) {}
};

inline std::pair<InteractionMatrix, SinkhornReport> sinkhorn_knopp(const InteractionMatrix& im,
                                                                   double tol = 1e-3,
                                                                   int max_iter = 10000) {
  detail::require_scalable(im);
  if (im.rows() != im.cols())
    throw std::invalid_argument("sinkhorn_knopp: interaction matrix must be square");
  if (tol <= 0.0) throw std::invalid_argument("sinkhorn_knopp: tol must be positive");
  const int n = im.rows();
  const Eigen::MatrixXd& G = im.values;

  Eigen::VectorXd r = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd c(n);

  auto balanced = [&](const Eigen::VectorXd& rv, const Eigen::VectorXd& cv) {
    return Eigen::MatrixXd(rv.asDiagonal() * G * cv.asDiagonal());
  };
  auto sums_ok = [&](const Eigen::MatrixXd& B) {
    for (int i = 0; i < n; ++i)
      if (std::abs(B.row(i).sum() - 1.0) > tol || std::abs(B.col(i).sum() - 1.0) > tol)
        return false;
    return true;
  };

  SinkhornReport rep;
  for (int k = 1; k <= max_iter; ++k) {
    Eigen::VectorXd colsum = G.transpose() * r;
    if ((colsum.array() <= 0.0).any()) break;  // zero column: no support
    c = colsum.cwiseInverse();
    rep.iterations = k;
    rep.final_epsilon = (c_prev.cwiseQuotient(c) - Eigen::VectorXd::Ones(n)).lpNorm<1>();
    if (rep.final_epsilon <= tol) {
      Eigen::MatrixXd B = balanced(r, c);
      if (sums_ok(B)) {
        if (!r.allFinite() || !c.allFinite() || r.minCoeff() <= 0.0 || c.minCoeff() <= 0.0) break;
        InteractionMatrix out = im;
        out.values = std::move(B);
        out.scaling = Scaling::SINKHORN_KNOPP;
        rep.row_scale = r;
        rep.col_scale = c;
        return {out, rep};
      }
    }
    Eigen::VectorXd rowsum = G * c;
    if ((rowsum.array() <= 0.0).any()) break;  // zero row: no support
    r = rowsum.cwiseInverse();
    c_prev = c;
  }
  rep.row_scale = r;
  rep.col_scale = c_prev;
  throw SinkhornError(rep);
}

/**
 * Multiplies one row or column by a positive factor, to bias the pairing
 * toward a specific output or input after balancing.
 */
enum class Axis { ROW, COLUMN };

inline InteractionMatrix emphasize(const InteractionMatrix& im, Axis axis, int index,
                                   double factor) {
  if (factor <= 0.0) throw std::invalid_argument("emphasize: factor must be positive");
  const int limit = (axis == Axis::ROW) ? im.rows() : im.cols();
  if (index < 0 || index >= limit) throw std::out_of_range("emphasize: index out of range");
  InteractionMatrix out = im;
  if (axis == Axis::ROW)
    out.values.row(index) *= factor;
  else
    out.values.col(index) *= factor;
  std::ostringstream note;
  note << "emphasize " << (axis == Axis::ROW ? "row " : "column ") << index << " x" << factor;
  out.annotations.push_back(note.str());
  return out;
}

/// Applies the named scaling scheme; NONE returns the input unchanged.
inline InteractionMatrix apply_scaling(const InteractionMatrix& im, Scaling scheme,
                                       double sk_tol = 1e-3, int sk_max_iter = 10000) {
  switch (scheme) {
    case Scaling::NONE: return im;
    case Scaling::ROW: return scale_rows(im);
    case Scaling::COLUMN: return scale_columns(im);
    case Scaling::ROW_OR_COLUMN: return scale_row_or_column(im);
    case Scaling::SINKHORN_KNOPP: return sinkhorn_knopp(im, sk_tol, sk_max_iter).first;
  }
  throw std::logic_error("apply_scaling: unknown scheme");
}

}  // namespace ccs
