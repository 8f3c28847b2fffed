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
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace ccs {

// Polynomials are real coefficient vectors in descending powers of s,
// e.g. {1, 3, 2} is s^2 + 3s + 2.  The zero polynomial is {0}.

using Poly = std::vector<double>;

inline double poly_max_abs(const Poly& p) {
  double m = 0.0;
  for (double c : p) m = std::max(m, std::abs(c));
  return m;
}

/// Drops leading coefficients that are zero relative to the largest one.
inline Poly poly_trim(Poly p, double rel_tol = 0.0) {
  const double cut = rel_tol * poly_max_abs(p);
  std::size_t lead = 0;
  while (lead + 1 < p.size() && std::abs(p[lead]) <= cut) ++lead;
  p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(lead));
  if (p.empty()) p = {0.0};
  return p;
}

inline bool poly_is_zero(const Poly& p) {
  for (double c : p)
    if (c != 0.0) return false;
  return true;
}

inline int poly_degree(const Poly& p) {
  Poly t = poly_trim(p);
  return static_cast<int>(t.size()) - 1;
}

template <typename Scalar>
Scalar poly_eval(const Poly& p, Scalar s) {
  Scalar acc = Scalar(0);
  for (double c : p) acc = acc * s + Scalar(c);
  return acc;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Poly poly_add(const Poly& a, const Poly& b) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[r.size() - a.size() + i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[r.size() - b.size() + i] += b[i];
  return r;
}

inline Poly poly_scale(Poly p, double k) {
  for (double& c : p) c *= k;
  return p;
}

/// Roots as eigenvalues of the companion matrix of the monic polynomial.
inline std::vector<std::complex<double>> poly_roots(const Poly& p_in) {
  Poly p = poly_trim(p_in);
  if (poly_is_zero(p) || p.size() == 1) return {};
  const int n = static_cast<int>(p.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -p[static_cast<std::size_t>(j) + 1] / p[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, /*computeEigenvectors=*/false);
  std::vector<std::complex<double>> roots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  // Deterministic order independent of LAPACK internals.
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

/// Real polynomial lead * prod (s - r_i); imaginary residue from conjugate
/// pairs is discarded.
inline Poly poly_from_roots(const std::vector<std::complex<double>>& roots, double lead = 1.0) {
  std::vector<std::complex<double>> acc = {std::complex<double>(lead, 0.0)};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(acc.size() + 1, std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= acc[i] * r;
    }
    acc = std::move(next);
  }
  Poly out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].real();
  return out;
}

/**
 * Removes root pairs shared between numerator and denominator within a
 * relative tolerance and rebuilds both polynomials.  Used to keep
 * realizations minimal.
 */
inline void poly_cancel_common_roots(Poly& num, Poly& den, double rel_tol = 1e-9) {
  if (poly_is_zero(num)) return;
  Poly n = poly_trim(num), d = poly_trim(den);
  if (n.size() == 1 || d.size() == 1) return;
  auto zn = poly_roots(n);
  auto zd = poly_roots(d);
  std::vector<bool> keep_d(zd.size(), true);
  std::vector<std::complex<double>> kept_n;
  for (const auto& z : zn) {
    bool cancelled = false;
    for (std::size_t i = 0; i < zd.size(); ++i) {
      if (!keep_d[i]) continue;
      const double scale = std::max(1.0, std::abs(zd[i]));
      if (std::abs(z - zd[i]) <= rel_tol * scale) {
        keep_d[i] = false;
        cancelled = true;
        break;
      }
    }
    if (!cancelled) kept_n.push_back(z);
  }
  if (kept_n.size() == zn.size()) return;  // nothing cancelled
  std::vector<std::complex<double>> kept_d;
  for (std::size_t i = 0; i < zd.size(); ++i)
    if (keep_d[i]) kept_d.push_back(zd[i]);
  num = poly_from_roots(kept_n, n[0]);
  den = poly_from_roots(kept_d, d[0]);
}

}  // namespace ccs
