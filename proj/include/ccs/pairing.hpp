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
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ccs/interaction.hpp"
#include "ccs/lti.hpp"

namespace ccs {

struct FeedforwardEdge {
  int source_input = -1;  // plant input index feeding the block
  int target_loop = -1;   // loop (output index) whose input is corrected
  bool operator==(const FeedforwardEdge&) const = default;
};

/**
 * Result of a configuration-selection step: an output-to-input permutation,
 * the sum of selected interaction elements, the Niederlinski index when the
 * filter ran, and any feedforward edges chosen for a sparse structure.
 */
struct PairingDecision {
  std::vector<int> assignment;  // output i is paired with input assignment[i]
  double total_interaction = 0.0;
  std::optional<double> ni;
  std::vector<FeedforwardEdge> feedforward;
  int rejected_candidates = 0;
};

namespace detail {

constexpr double kInfeasible = std::numeric_limits<double>::quiet_NaN();

/**
 * Shortest-augmenting-path (Jonker-Volgenant) solver minimizing total cost
 * over a square matrix.  Forbidden entries carry the cost `big`; if the
 * optimum is forced onto one of them the instance is infeasible.
 */
inline bool solve_min_assignment(const Eigen::MatrixXd& cost, double big,
                                 std::vector<int>& row_of_col) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  row_of_col.assign(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j)
    if (p[static_cast<std::size_t>(j)] != 0) row_of_col[static_cast<std::size_t>(j) - 1] = p[static_cast<std::size_t>(j)] - 1;
  // Reject assignments routed through forbidden entries.
  for (int j = 0; j < n; ++j) {
    const int i = row_of_col[static_cast<std::size_t>(j)];
    if (i < 0 || cost(i, j) >= big / 2.0) return false;
  }
  return true;
}

/// Constraints for a (sub)problem in the ranked enumeration.
struct AssignmentConstraints {
  std::vector<int> forced;                 // forced[i] = column, or -1
  std::vector<std::vector<char>> banned;   // banned[i][j]

  static AssignmentConstraints unconstrained(int n) {
    AssignmentConstraints c;
    c.forced.assign(static_cast<std::size_t>(n), -1);
    c.banned.assign(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
    return c;
  }
};

/**
 * Maximizes sum of values subject to forced/banned entries; among optima it
 * returns the lexicographically smallest permutation.  Totals are always
 * recomputed as left-to-right element sums so comparisons are consistent
 * with a brute-force enumeration over the same doubles.
 */
class LexAssignmentSolver {
 public:
  explicit LexAssignmentSolver(const Eigen::MatrixXd& values) : values_(values) {
    n_ = static_cast<int>(values.rows());
    if (values.rows() != values.cols())
      throw std::invalid_argument("assignment: interaction matrix must be square");
    if (!values.allFinite()) throw std::invalid_argument("assignment: non-finite entries");
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff()) * std::max(1, n_);
    big_ = 1e9 * scale;
    tie_tol_ = 1e-12 * scale;
  }

  double tie_tol() const { return tie_tol_; }

  double direct_total(const std::vector<int>& perm) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) s += values_(i, perm[static_cast<std::size_t>(i)]);
    return s;
  }

  /// Best total under the constraints, or nullopt when infeasible.
  std::optional<double> best_total(const AssignmentConstraints& c) const {
    std::vector<int> perm;
    if (!solve_raw(c, perm)) return std::nullopt;
    return direct_total(perm);
  }

  /// Lexicographically smallest optimal permutation under the constraints.
  std::optional<std::vector<int>> solve_lex(const AssignmentConstraints& c) const {
    std::optional<double> best = best_total(c);
    if (!best) return std::nullopt;
    AssignmentConstraints work = c;
    for (int i = 0; i < n_; ++i) {
      if (work.forced[static_cast<std::size_t>(i)] >= 0) continue;
      for (int j = 0; j < n_; ++j) {
        if (work.banned[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) continue;
        if (column_taken(work, j)) continue;
        work.forced[static_cast<std::size_t>(i)] = j;
        std::optional<double> t = best_total(work);
        if (t && *t >= *best - tie_tol_) break;
        work.forced[static_cast<std::size_t>(i)] = -1;
      }
      if (work.forced[static_cast<std::size_t>(i)] < 0) return std::nullopt;  // should not happen
    }
    return work.forced;
  }

 private:
  static bool column_taken(const AssignmentConstraints& c, int j) {
    for (int f : c.forced)
      if (f == j) return true;
    return false;
  }

  bool solve_raw(const AssignmentConstraints& c, std::vector<int>& perm) const {
    // Collapse forced rows/columns into a reduced problem.
    std::vector<int> rows, cols;
    std::vector<char> col_used(static_cast<std::size_t>(n_), 0);
    for (int i = 0; i < n_; ++i) {
      const int f = c.forced[static_cast<std::size_t>(i)];
      if (f >= 0) {
        if (col_used[static_cast<std::size_t>(f)]) return false;
        col_used[static_cast<std::size_t>(f)] = 1;
      } else {
        rows.push_back(i);
      }
    }
    for (int j = 0; j < n_; ++j)
      if (!col_used[static_cast<std::size_t>(j)]) cols.push_back(j);

    perm = c.forced;
    const int k = static_cast<int>(rows.size());
    if (k == 0) return true;
    Eigen::MatrixXd cost(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const int i = rows[static_cast<std::size_t>(a)], j = cols[static_cast<std::size_t>(b)];
        cost(a, b) = c.banned[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ? big_ : -values_(i, j);
      }
    std::vector<int> row_of_col;
    if (!solve_min_assignment(cost, big_, row_of_col)) return false;
    for (int b = 0; b < k; ++b) {
      const int a = row_of_col[static_cast<std::size_t>(b)];
      perm[static_cast<std::size_t>(rows[static_cast<std::size_t>(a)])] = cols[static_cast<std::size_t>(b)];
    }
    return true;
  }

  const Eigen::MatrixXd& values_;
  int n_ = 0;
  double big_ = 0.0;
  double tie_tol_ = 0.0;
};

}  // namespace detail

/**
 * Lazy best-first enumeration of assignments by non-increasing total using
 * Murty's partitioning of the solution space.  Ties in the total are emitted
 * in lexicographic permutation order.
 */
class AssignmentEnumerator {
 public:
  explicit AssignmentEnumerator(const Eigen::MatrixXd& values)
      : values_(values), solver_(values_) {
    const int n = static_cast<int>(values_.rows());
    auto root = detail::AssignmentConstraints::unconstrained(n);
    push_node(std::move(root));
  }
  AssignmentEnumerator(const AssignmentEnumerator&) = delete;
  AssignmentEnumerator& operator=(const AssignmentEnumerator&) = delete;

  /// Next-best assignment, or nullopt when the space is exhausted.
  std::optional<std::pair<std::vector<int>, double>> next() {
    if (heap_.empty()) return std::nullopt;
    Node best = heap_.top();
    heap_.pop();
    partition(best);
    return std::make_pair(best.perm, best.total);
  }

 private:
  struct Node {
    detail::AssignmentConstraints constraints;
    std::vector<int> perm;
    double total = 0.0;
  };
  struct NodeOrder {
    // priority_queue keeps the "largest"; we want highest total first and,
    // for equal totals, the lexicographically smallest permutation.
    bool operator()(const Node& a, const Node& b) const {
      if (a.total != b.total) return a.total < b.total;
      return a.perm > b.perm;
    }
  };

  void push_node(detail::AssignmentConstraints c) {
    auto perm = solver_.solve_lex(c);
    if (!perm) return;
    Node node;
    node.constraints = std::move(c);
    node.perm = *perm;
    node.total = solver_.direct_total(node.perm);
    heap_.push(std::move(node));
  }

  void partition(const Node& node) {
    const int n = static_cast<int>(values_.rows());
    detail::AssignmentConstraints base = node.constraints;
    for (int i = 0; i < n; ++i) {
      if (node.constraints.forced[static_cast<std::size_t>(i)] >= 0) continue;
      const int j = node.perm[static_cast<std::size_t>(i)];
      detail::AssignmentConstraints child = base;
      child.banned[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
      push_node(std::move(child));
      base.forced[static_cast<std::size_t>(i)] = j;
    }
  }

  Eigen::MatrixXd values_;
  detail::LexAssignmentSolver solver_;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> heap_;
};

/**
 * Pairing that maximizes the sum of selected interaction elements; ties
 * break toward the lexicographically smallest permutation.
 */
inline PairingDecision max_assignment(const InteractionMatrix& im) {
  detail::LexAssignmentSolver solver(im.values);
  auto perm = solver.solve_lex(
      detail::AssignmentConstraints::unconstrained(static_cast<int>(im.values.rows())));
  if (!perm) throw std::runtime_error("max_assignment: infeasible");
  PairingDecision d;
  d.assignment = *perm;
  d.total_interaction = solver.direct_total(*perm);
  return d;
}

/// The k best assignments in non-increasing total order (no duplicates).
inline std::vector<PairingDecision> ranked_assignments(const InteractionMatrix& im, int k) {
  if (k < 1) throw std::invalid_argument("ranked_assignments: k must be >= 1");
  AssignmentEnumerator en(im.values);
  std::vector<PairingDecision> out;
  while (static_cast<int>(out.size()) < k) {
    auto nxt = en.next();
    if (!nxt) break;  // k > n!: truncated list
    PairingDecision d;
    d.assignment = std::move(nxt->first);
    d.total_interaction = nxt->second;
    out.push_back(std::move(d));
  }
  return out;
}

/// det(G0 reordered so the candidate pairing is on the diagonal) / prod of diagonal.
inline std::optional<double> niederlinski_index(const Eigen::MatrixXd& G0,
                                                const std::vector<int>& assignment) {
  const int n = static_cast<int>(G0.rows());
  Eigen::MatrixXd H(n, n);
  for (int c = 0; c < n; ++c) H.col(c) = G0.col(assignment[static_cast<std::size_t>(c)]);
  double diag_prod = 1.0;
  for (int i = 0; i < n; ++i) {
    if (H(i, i) == 0.0) return std::nullopt;  // NI undefined
    diag_prod *= H(i, i);
  }
  return H.determinant() / diag_prod;
}

/**
 * Walks candidate pairings in order of decreasing total interaction and
 * returns the first with a nonnegative Niederlinski index.  Candidates
 * whose reordered gain matrix has a zero diagonal entry are skipped as
 * NI-undefined.
 */
inline PairingDecision pair_with_ni(const InteractionMatrix& im, const Eigen::MatrixXd& G0) {
  if (im.values.rows() != im.values.cols())
    throw std::invalid_argument("pair_with_ni: interaction matrix must be square");
  if (G0.rows() != im.values.rows() || G0.cols() != im.values.cols())
    throw std::invalid_argument("pair_with_ni: gain matrix shape mismatch");
  AssignmentEnumerator en(im.values);
  int rejected = 0;
  while (auto cand = en.next()) {
    const auto ni = niederlinski_index(G0, cand->first);
    if (ni && *ni >= 0.0) {
      PairingDecision d;
      d.assignment = std::move(cand->first);
      d.total_interaction = cand->second;
      d.ni = *ni;
      d.rejected_candidates = rejected;
      return d;
    }
    ++rejected;
  }
  throw std::runtime_error("pair_with_ni: no integral-stabilizable pairing");
}

/**
 * Sparse structure selection.  With the interaction matrix renormalized to
 * total sum one and reordered so the pairing sits on the diagonal, scan the
 * off-diagonal elements in decreasing order and add each as a feedforward
 * edge if it passes the appropriateness check
 *
 *     gamma*_ij = gamma_ij - rho * sum_{k != i} gamma_ki > 0
 *
 * and its block -g_ij/g_ii is stable, proper and causal.  The scan ends
 * once the cumulative sum of chosen elements (diagonal plus selected
 * off-diagonal) exceeds the threshold, or at the first element whose
 * gamma* is not positive.  Blocks that fail the stability/properness/
 * causality guard are skipped without ending the scan (that verdict does
 * not depend on rho), so a larger penalty can only shorten the selected
 * prefix: the edge count is non-increasing in rho.  An empty edge set is a
 * valid outcome.
 */
inline PairingDecision sparse_structure(const InteractionMatrix& im,
                                        const PairingDecision& pairing, double rho,
                                        const TransferMatrix& G, double threshold = 0.7) {
  if (rho < 0.0) throw std::invalid_argument("sparse_structure: rho must be nonnegative");
  const int n = im.rows();
  if (im.rows() != im.cols()) throw std::invalid_argument("sparse_structure: IM must be square");
  if (static_cast<int>(pairing.assignment.size()) != n)
    throw std::invalid_argument("sparse_structure: pairing does not match IM");
  const double total = im.values.sum();
  if (total <= 0.0) throw std::invalid_argument("sparse_structure: degenerate IM");

  const auto& sigma = pairing.assignment;
  // Reorder columns so loop i's paired input is column i, and renormalize
  // to total sum one (SK-scaled IMs sum to n, the 0.7 rule is stated for
  // sum-one IMs).
  Eigen::MatrixXd M(n, n);
  for (int c = 0; c < n; ++c) M.col(c) = im.values.col(sigma[static_cast<std::size_t>(c)]) / total;

  Eigen::MatrixXd gamma_star(n, n);
  for (int i = 0; i < n; ++i) {
    const double col_off_diag = M.col(i).sum() - M(i, i);
    for (int j = 0; j < n; ++j) gamma_star(i, j) = M(i, j) - rho * col_off_diag;
  }

  auto admissible_block = [&](int i, int j) {
    const RationalTF& gij = G.at(i, sigma[static_cast<std::size_t>(j)]);
    const RationalTF& gii = G.at(i, sigma[static_cast<std::size_t>(i)]);
    if (gij.is_zero() || gii.is_zero()) return false;
    RationalTF block;
    try {
      block = divide(gij, gii);
    } catch (const std::exception&) {
      return false;
    }
    return is_stable(block) && is_proper(block) && is_causal(block);
  };

  // Candidates in decreasing original-value order; ties lexicographic.
  std::vector<std::pair<int, int>> order;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) order.emplace_back(i, j);
  std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    return M(a.first, a.second) > M(b.first, b.second);
  });

  PairingDecision out = pairing;
  out.feedforward.clear();
  double cumulative = M.diagonal().sum();
  for (const auto& [i, j] : order) {
    if (cumulative > threshold) break;
    if (gamma_star(i, j) <= 0.0) break;  // not appropriate; scan ends here
    if (!admissible_block(i, j)) continue;  // rho-independent skip
    out.feedforward.push_back({sigma[static_cast<std::size_t>(j)], i});
    cumulative += M(i, j);
  }
  return out;
}

/**
 * RGA pairing by closeness to one: maximizes sum of -|lambda_ij - 1| with
 * the same assignment machinery; total_interaction reports the sum of the
 * selected RGA elements themselves.
 */
inline PairingDecision rga_pairing(const InteractionMatrix& im) {
  if (im.measure != Measure::RGA)
    throw std::invalid_argument("rga_pairing: expects an RGA interaction matrix");
  Eigen::MatrixXd closeness =
      -(im.values.array() - 1.0).abs().matrix();
  detail::LexAssignmentSolver solver(closeness);
  auto perm = solver.solve_lex(
      detail::AssignmentConstraints::unconstrained(static_cast<int>(closeness.rows())));
  if (!perm) throw std::runtime_error("rga_pairing: infeasible");
  PairingDecision d;
  d.assignment = *perm;
  double s = 0.0;
  for (int i = 0; i < im.rows(); ++i) s += im.values(i, d.assignment[static_cast<std::size_t>(i)]);
  d.total_interaction = s;
  return d;
}

}  // namespace ccs
