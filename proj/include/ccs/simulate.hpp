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
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ccs/lti.hpp"
#include "ccs/pairing.hpp"
#include "ccs/tuning.hpp"

namespace ccs {

/**
 * Closed-loop simulation settings.  dt <= 0 and instability_threshold <= 0
 * select the automatic rules: dt = (smallest closed-loop time constant)/20
 * clamped to [horizon/2e5, horizon/2e3], and threshold = 1e3 * max(|ref|,
 * |dist| * ||G(0)||_inf).
 */
struct SimulationConfig {
  double horizon = 2000.0;
  double dt = 0.0;
  double reference_amplitude = 1.0;
  double disturbance_amplitude = 1.0;
  std::vector<double> eta_grid;
  double instability_threshold = 0.0;
  int pade_order = 2;

  static std::vector<double> default_eta_grid() {
    std::vector<double> g(25);
    const double a = std::log(0.1), b = std::log(10.0);
    for (int i = 0; i < 25; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / 24.0);
    return g;
  }

  SimulationConfig() : eta_grid(default_eta_grid()) {}

  void validate() const {
    if (horizon <= 0.0) throw std::invalid_argument("SimulationConfig: horizon must be positive");
    if (dt >= horizon) throw std::invalid_argument("SimulationConfig: dt must be < horizon");
    if (eta_grid.empty()) throw std::invalid_argument("SimulationConfig: eta_grid is empty");
    for (std::size_t i = 0; i < eta_grid.size(); ++i) {
      if (eta_grid[i] <= 0.0) throw std::invalid_argument("SimulationConfig: eta must be positive");
      if (i > 0 && eta_grid[i] < eta_grid[i - 1])
        throw std::invalid_argument("SimulationConfig: eta_grid must be ascending");
    }
  }
};

enum class StepKind { REFERENCE, DISTURBANCE };
enum class TuningMethod { LAMBDA, IMC };

inline std::string to_string(TuningMethod m) {
  return m == TuningMethod::LAMBDA ? "lambda" : "imc";
}

/// Cost of one configuration, minimized over the eta grid.
struct ConfigurationScore {
  double cost_ref = std::numeric_limits<double>::infinity();
  double cost_dist = std::numeric_limits<double>::infinity();
  double best_eta = 0.0;
  double score = 0.0;
};

namespace detail {

struct RealizedPlant {
  int p = 0, m = 0;
  Eigen::MatrixXd A, B, C, D;  // input: plant input vector w, output: y
};

inline RealizedPlant realize_plant(const TransferMatrix& G, int pade_order) {
  RealizedPlant pl;
  pl.p = G.outputs();
  pl.m = G.inputs();
  std::vector<StateSpaceModel> blocks;
  std::vector<int> block_in, block_out;
  int n_total = 0;
  for (int i = 0; i < pl.p; ++i)
    for (int j = 0; j < pl.m; ++j) {
      StateSpaceModel sys = realize(G.at(i, j), pade_order);
      n_total += sys.states();
      block_in.push_back(j);
      block_out.push_back(i);
      blocks.push_back(std::move(sys));
    }
  pl.A = Eigen::MatrixXd::Zero(n_total, n_total);
  pl.B = Eigen::MatrixXd::Zero(n_total, pl.m);
  pl.C = Eigen::MatrixXd::Zero(pl.p, n_total);
  pl.D = Eigen::MatrixXd::Zero(pl.p, pl.m);
  int at = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& sys = blocks[b];
    const int n = sys.states();
    const int i = block_out[b], j = block_in[b];
    if (n > 0) {
      pl.A.block(at, at, n, n) = sys.A;
      pl.B.block(at, j, n, 1) = sys.B;
      pl.C.block(i, at, 1, n) = sys.C;
    }
    pl.D(i, j) += sys.D(0, 0);
    at += n;
  }
  return pl;
}

}  // namespace detail

/**
 * Assembles the full loop as one LTI model with inputs [references r (p);
 * input-side load disturbances d (m)] and outputs y.  Loop i applies
 * controller i to r_i - y_i and drives plant input assignment[i]; each
 * feedforward edge (source j -> target loop i) subtracts
 * (g_ij / g_i,sigma(i)) u_j from that loop's input, resolved jointly with
 * the other algebraic relations.  A singular algebraic loop is an error.
 */
inline StateSpaceModel build_closed_loop(const TransferMatrix& G, const PairingDecision& decision,
                                         const std::vector<RationalTF>& controllers,
                                         int pade_order = 2) {
  const detail::RealizedPlant pl = detail::realize_plant(G, pade_order);
  const int p = pl.p, m = pl.m;
  if (p != m) throw std::invalid_argument("build_closed_loop: plant must be square");
  if (static_cast<int>(decision.assignment.size()) != p)
    throw std::invalid_argument("build_closed_loop: assignment size mismatch");
  if (static_cast<int>(controllers.size()) != p)
    throw std::invalid_argument("build_closed_loop: one controller per loop required");

  const auto& sigma = decision.assignment;

  // Controllers.
  std::vector<StateSpaceModel> ctrl;
  int nc = 0;
  for (const auto& c : controllers) {
    if (!is_proper(c)) throw std::invalid_argument("build_closed_loop: improper controller");
    ctrl.push_back(realize(c, pade_order));
    nc += ctrl.back().states();
  }

  // Feedforward blocks, one per edge, fed by the commanded plant input of
  // the source channel.
  std::vector<StateSpaceModel> ff;
  int nf = 0;
  for (const auto& e : decision.feedforward) {
    const int i = e.target_loop;
    if (i < 0 || i >= p) throw std::invalid_argument("build_closed_loop: bad edge target");
    const RationalTF block = divide(G.at(i, e.source_input), G.at(i, sigma[static_cast<std::size_t>(i)]));
    if (!is_causal(block) || !is_proper(block) || !is_stable(block))
      throw std::invalid_argument("build_closed_loop: inadmissible feedforward block");
    ff.push_back(realize(block, pade_order));
    nf += ff.back().states();
  }

  const int ng = static_cast<int>(pl.A.rows());
  const int n = ng + nc + nf;

  // Block layout: x = [x_G; x_C; x_F].
  Eigen::MatrixXd Ac = Eigen::MatrixXd::Zero(nc, nc), Bc = Eigen::MatrixXd::Zero(nc, p);
  Eigen::MatrixXd Cc = Eigen::MatrixXd::Zero(p, nc);
  Eigen::VectorXd Dc = Eigen::VectorXd::Zero(p);
  {
    int at = 0;
    for (int i = 0; i < p; ++i) {
      const auto& s = ctrl[static_cast<std::size_t>(i)];
      const int k = s.states();
      if (k > 0) {
        Ac.block(at, at, k, k) = s.A;
        Bc.block(at, i, k, 1) = s.B;
        Cc.block(i, at, 1, k) = s.C;
      }
      Dc(i) = s.D(0, 0);
      at += k;
    }
  }

  Eigen::MatrixXd Af = Eigen::MatrixXd::Zero(nf, nf), Bf = Eigen::MatrixXd::Zero(nf, m);
  Eigen::MatrixXd Cf = Eigen::MatrixXd::Zero(m, nf);  // contribution to commanded inputs
  Eigen::MatrixXd Df = Eigen::MatrixXd::Zero(m, m);
  {
    int at = 0;
    for (std::size_t e = 0; e < ff.size(); ++e) {
      const auto& s = ff[e];
      const int k = s.states();
      const int src = decision.feedforward[e].source_input;
      const int dst = sigma[static_cast<std::size_t>(decision.feedforward[e].target_loop)];
      if (k > 0) {
        Af.block(at, at, k, k) = s.A;
        Bf.block(at, src, k, 1) = s.B;
        Cf.block(dst, at, 1, k) = s.C;
      }
      Df(dst, src) += s.D(0, 0);
      at += k;
    }
  }

  // Scatter of controller outputs onto plant inputs: u[sigma(i)] <- v_i.
  Eigen::MatrixXd Pv = Eigen::MatrixXd::Zero(m, p);
  for (int i = 0; i < p; ++i) Pv(sigma[static_cast<std::size_t>(i)], i) = 1.0;

  // Solve the algebraic relations for the commanded input u:
  //   (I + Df) u = Pv v - Cf x_F,   v = Cc x_C + Dc (r - y),
  //   y = C_G x_G + D_G (u + d)
  // => M u = -K C_G x_G + Pv Cc x_C - Cf x_F + K r - K D_G d,
  //    K = Pv diag(Dc),  M = I + Df + K D_G.
  Eigen::MatrixXd K = Pv * Dc.asDiagonal();
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m) + Df + K * pl.D;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw std::runtime_error("build_closed_loop: algebraic loop among feedforward edges");

  Eigen::MatrixXd Ux = Eigen::MatrixXd::Zero(m, n);
  Ux.leftCols(ng) = -K * pl.C;
  Ux.middleCols(ng, nc) = Pv * Cc;
  Ux.rightCols(nf) = -Cf;
  Ux = lu.solve(Ux);
  Eigen::MatrixXd Ur = lu.solve(K);
  Eigen::MatrixXd Ud = lu.solve(Eigen::MatrixXd(-K * pl.D));

  // w = u + d
  Eigen::MatrixXd Wx = Ux, Wr = Ur, Wd = Ud + Eigen::MatrixXd::Identity(m, m);

  Eigen::MatrixXd Yx = Eigen::MatrixXd::Zero(p, n);
  Yx.leftCols(ng) = pl.C;
  Yx += pl.D * Wx;
  Eigen::MatrixXd Yr = pl.D * Wr;
  Eigen::MatrixXd Yd = pl.D * Wd;

  Eigen::MatrixXd Ex = -Yx, Er = Eigen::MatrixXd::Identity(p, p) - Yr, Ed = -Yd;

  StateSpaceModel cl;
  cl.A = Eigen::MatrixXd::Zero(n, n);
  cl.B = Eigen::MatrixXd::Zero(n, p + m);
  cl.C = Yx;
  cl.D = Eigen::MatrixXd::Zero(p, p + m);
  cl.D.leftCols(p) = Yr;
  cl.D.rightCols(m) = Yd;

  cl.A.topLeftCorner(ng, ng) = pl.A;
  cl.A.topRows(ng) += pl.B * Wx;
  cl.B.topRows(ng).leftCols(p) = pl.B * Wr;
  cl.B.topRows(ng).rightCols(m) = pl.B * Wd;

  cl.A.block(ng, ng, nc, nc) = Ac;
  cl.A.middleRows(ng, nc) += Bc * Ex;
  cl.B.middleRows(ng, nc).leftCols(p) = Bc * Er;
  cl.B.middleRows(ng, nc).rightCols(m) = Bc * Ed;

  cl.A.bottomRightCorner(nf, nf) = Af;
  cl.A.bottomRows(nf) += Bf * Ux;
  cl.B.bottomRows(nf).leftCols(p) = Bf * Ur;
  cl.B.bottomRows(nf).rightCols(m) = Bf * Ud;

  return cl;
}

namespace detail {

struct ChannelRun {
  Eigen::VectorXd u0;  // constant input vector (p + m)
  Eigen::VectorXd r;   // reference vector used in the cost integrand (p)
};

struct ChannelResult {
  double cost = 0.0;
  bool crossed = false;   // instability threshold hit (cost is infinity)
  bool flagged = false;   // eigenvalue check and threshold check disagree
};

/**
 * Shared simulation core: exact ZOH discretization, per-sample trapezoid
 * accumulation of sum_i (r_i - y_i)^2, threshold monitoring, and an exact
 * constant tail once every transient has decayed below fp noise.
 */
inline std::vector<ChannelResult> simulate_channels(const StateSpaceModel& sys,
                                                    const SimulationConfig& cfg,
                                                    const std::vector<ChannelRun>& runs) {
  const int n = sys.states();
  const int p = sys.outputs();
  const int nch = static_cast<int>(runs.size());
  const double inf = std::numeric_limits<double>::infinity();

  double threshold = cfg.instability_threshold;
  if (threshold <= 0.0)
    threshold = 1e3 * std::max(std::abs(cfg.reference_amplitude),
                               std::abs(cfg.disturbance_amplitude));

  // Eigenvalues give the auto step and the stability pre-check.
  double max_re = -std::numeric_limits<double>::infinity();
  double max_abs_re = 0.0;
  if (n > 0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A, /*computeEigenvectors=*/false);
    for (int i = 0; i < n; ++i) {
      const double re = es.eigenvalues()(i).real();
      max_re = std::max(max_re, re);
      max_abs_re = std::max(max_abs_re, std::abs(re));
    }
  } else {
    max_re = -1.0;
  }
  const bool eig_stable = max_re < 0.0;

  double dt = cfg.dt;
  if (dt <= 0.0) {
    const double lo = cfg.horizon / 2e5, hi = cfg.horizon / 2e3;
    dt = (max_abs_re > 0.0) ? (1.0 / max_abs_re) / 20.0 : hi;
    dt = std::clamp(dt, lo, hi);
  }
  const long long N = std::max<long long>(1, static_cast<long long>(std::llround(cfg.horizon / dt)));

  Eigen::MatrixXd Ad, Bd;
  zoh_discretize(sys.A, sys.B, dt, Ad, Bd);

  Eigen::MatrixXd U0(sys.inputs(), nch), R(p, nch);
  for (int c = 0; c < nch; ++c) {
    U0.col(c) = runs[static_cast<std::size_t>(c)].u0;
    R.col(c) = runs[static_cast<std::size_t>(c)].r;
  }
  const Eigen::MatrixXd BU = (n > 0) ? Eigen::MatrixXd(Bd * U0) : Eigen::MatrixXd::Zero(0, nch);
  const Eigen::MatrixXd DU = sys.D * U0;

  // Steady state (for the exact tail); unavailable when I - Ad is singular.
  // The tail is also withheld when the settled output sits close to the
  // threshold, so the per-sample check keeps running in borderline cases.
  bool have_ss = false;
  Eigen::MatrixXd Xss;
  Eigen::MatrixXd fss = Eigen::MatrixXd::Zero(1, nch);
  std::vector<char> tail_safe(static_cast<std::size_t>(nch), 0);
  auto fill_ss = [&](const Eigen::MatrixXd& Yss) {
    for (int c = 0; c < nch; ++c) {
      fss(0, c) = (R.col(c) - Yss.col(c)).squaredNorm();
      tail_safe[static_cast<std::size_t>(c)] =
          Yss.col(c).lpNorm<Eigen::Infinity>() <= 0.999 * threshold;
    }
  };
  if (n > 0 && eig_stable) {
    Eigen::MatrixXd ImAd = Eigen::MatrixXd::Identity(n, n) - Ad;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ImAd);
    Xss = lu.solve(BU);
    const double resid = (ImAd * Xss - BU).norm();
    if (std::isfinite(resid) && resid <= 1e-8 * (1.0 + BU.norm())) {
      have_ss = true;
      fill_ss(sys.C * Xss + DU);
    }
  } else if (n == 0) {
    have_ss = true;
    Xss = Eigen::MatrixXd::Zero(0, nch);
    fill_ss(DU);
  }

  std::vector<ChannelResult> out(static_cast<std::size_t>(nch));
  std::vector<double> acc(static_cast<std::size_t>(nch), 0.0);
  std::vector<char> alive(static_cast<std::size_t>(nch), 1);
  int n_alive = nch;

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, nch), Xnext(n, nch);
  Eigen::MatrixXd Y(p, nch);

  const double cut_tol = 1e-12;
  long long k = 0;
  for (; k <= N; ++k) {
    if (n > 0) {
      Y.noalias() = sys.C * X;
      Y += DU;
    } else {
      Y = DU;
    }
    const double w = (k == 0 || k == N) ? 0.5 : 1.0;
    for (int c = 0; c < nch; ++c) {
      if (!alive[static_cast<std::size_t>(c)]) continue;
      double f = 0.0;
      bool bad = false;
      for (int i = 0; i < p; ++i) {
        const double y = Y(i, c);
        if (!std::isfinite(y) || std::abs(y) > threshold) {
          bad = true;
          break;
        }
        const double e = R(i, c) - y;
        f += e * e;
      }
      if (bad) {
        alive[static_cast<std::size_t>(c)] = 0;
        out[static_cast<std::size_t>(c)].crossed = true;
        out[static_cast<std::size_t>(c)].cost = inf;
        --n_alive;
        continue;
      }
      acc[static_cast<std::size_t>(c)] += w * f;
    }
    if (n_alive == 0) break;
    if (k == N) break;

    // Exact constant tail once every transient is below fp noise.
    if (have_ss && eig_stable && (k & 255) == 255 && k + 1 < N) {
      bool settled = true;
      for (int c = 0; c < nch && settled; ++c) {
        if (!alive[static_cast<std::size_t>(c)]) continue;
        if (!tail_safe[static_cast<std::size_t>(c)]) {
          settled = false;
          break;
        }
        const double scale = 1.0 + Xss.col(c).lpNorm<Eigen::Infinity>();
        if ((X.col(c) - Xss.col(c)).lpNorm<Eigen::Infinity>() > cut_tol * scale) settled = false;
      }
      if (settled) {
        for (int c = 0; c < nch; ++c)
          if (alive[static_cast<std::size_t>(c)])
            acc[static_cast<std::size_t>(c)] += (static_cast<double>(N - k) - 0.5) * fss(0, c);
        break;
      }
    }

    if (n > 0) {
      Xnext.noalias() = Ad * X;
      Xnext += BU;
      X.swap(Xnext);
    }
  }

  for (int c = 0; c < nch; ++c) {
    auto& res = out[static_cast<std::size_t>(c)];
    if (!res.crossed) res.cost = acc[static_cast<std::size_t>(c)] * dt;
    res.flagged = (eig_stable == res.crossed);  // checks disagree
  }
  return out;
}

}  // namespace detail

struct StepCost {
  double cost = std::numeric_limits<double>::infinity();
  bool flagged = false;
};

/**
 * Simulates a step on one channel from t = 0 over [0, horizon]; the cost is
 * the trapezoid-rule integral of sum_i (r_i - y_i)^2 on the dt grid.
 * Instability (a sample beyond the threshold, or a non-finite sample) makes
 * the cost infinite; it is a value, not an error.
 */
inline StepCost simulate_step(const StateSpaceModel& sys, int channel, StepKind kind,
                              const SimulationConfig& cfg) {
  cfg.validate();
  const int p = sys.outputs();
  const int m = sys.inputs() - p;
  if (m < 0) throw std::invalid_argument("simulate_step: system is not a closed loop");
  detail::ChannelRun run;
  run.u0 = Eigen::VectorXd::Zero(sys.inputs());
  run.r = Eigen::VectorXd::Zero(p);
  if (kind == StepKind::REFERENCE) {
    if (channel < 0 || channel >= p) throw std::out_of_range("simulate_step: bad output channel");
    run.u0(channel) = cfg.reference_amplitude;
    run.r(channel) = cfg.reference_amplitude;
  } else {
    if (channel < 0 || channel >= m) throw std::out_of_range("simulate_step: bad input channel");
    run.u0(p + channel) = cfg.disturbance_amplitude;
  }
  auto res = detail::simulate_channels(sys, cfg, {run});
  return {res[0].cost, res[0].flagged};
}

/// Evaluation of one configuration: per-eta costs minimized over the grid.
struct EvaluationResult {
  double cost_ref = std::numeric_limits<double>::infinity();
  double cost_dist = std::numeric_limits<double>::infinity();
  double total = std::numeric_limits<double>::infinity();
  double best_eta = 0.0;
  bool flagged = false;
};

/// Resolves the auto instability threshold, which needs the plant DC gain.
inline SimulationConfig resolve_threshold(SimulationConfig cfg, const TransferMatrix& G) {
  if (cfg.instability_threshold <= 0.0) {
    const Eigen::MatrixXd K = dc_gain(G);
    const double gnorm = K.cwiseAbs().rowwise().sum().maxCoeff();
    cfg.instability_threshold =
        1e3 * std::max(std::abs(cfg.reference_amplitude),
                       std::abs(cfg.disturbance_amplitude) * gnorm);
  }
  return cfg;
}

/**
 * For each eta, designs per-loop controllers on the paired diagonal
 * subsystems, simulates a reference step on every output channel and a load
 * disturbance on every input channel, and sums the costs; returns the
 * eta-minimized total with its components.  An eta whose design or loop is
 * unstable simply contributes an infinite cost.
 */
inline EvaluationResult evaluate_configuration(
    const TransferMatrix& G, const PairingDecision& decision, TuningMethod method,
    const SimulationConfig& cfg_in,
    const std::function<FOPDTModel(int, int)>& fit_provider = {}) {
  SimulationConfig cfg = resolve_threshold(cfg_in, G);
  cfg.validate();
  const int p = G.outputs(), m = G.inputs();
  if (p != m) throw std::invalid_argument("evaluate_configuration: plant must be square");

  // FOPDT models of the paired subsystems (shared across the eta grid).
  std::vector<FOPDTModel> fits(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    const int j = decision.assignment[static_cast<std::size_t>(i)];
    fits[static_cast<std::size_t>(i)] = fit_provider ? fit_provider(i, j) : fit_fopdt(G.at(i, j));
  }

  EvaluationResult best;
  for (double eta : cfg.eta_grid) {
    double cost_ref = 0.0, cost_dist = 0.0;
    bool flagged = false;
    try {
      std::vector<RationalTF> ctrls(static_cast<std::size_t>(p));
      for (int i = 0; i < p; ++i) {
        const RationalTF& gi = G.at(i, decision.assignment[static_cast<std::size_t>(i)]);
        if (method == TuningMethod::LAMBDA)
          ctrls[static_cast<std::size_t>(i)] =
              lambda_pi(fits[static_cast<std::size_t>(i)], eta).to_tf();
        else
          ctrls[static_cast<std::size_t>(i)] =
              imc_design(gi, eta, cfg.pade_order, fits[static_cast<std::size_t>(i)].T).controller;
      }
      StateSpaceModel loop = build_closed_loop(G, decision, ctrls, cfg.pade_order);

      std::vector<detail::ChannelRun> runs;
      runs.reserve(static_cast<std::size_t>(p + m));
      for (int i = 0; i < p; ++i) {
        detail::ChannelRun run;
        run.u0 = Eigen::VectorXd::Zero(p + m);
        run.r = Eigen::VectorXd::Zero(p);
        run.u0(i) = cfg.reference_amplitude;
        run.r(i) = cfg.reference_amplitude;
        runs.push_back(std::move(run));
      }
      for (int j = 0; j < m; ++j) {
        detail::ChannelRun run;
        run.u0 = Eigen::VectorXd::Zero(p + m);
        run.r = Eigen::VectorXd::Zero(p);
        run.u0(p + j) = cfg.disturbance_amplitude;
        runs.push_back(std::move(run));
      }
      auto results = detail::simulate_channels(loop, cfg, runs);
      for (int i = 0; i < p; ++i) {
        cost_ref += results[static_cast<std::size_t>(i)].cost;
        flagged = flagged || results[static_cast<std::size_t>(i)].flagged;
      }
      for (int j = 0; j < m; ++j) {
        cost_dist += results[static_cast<std::size_t>(p + j)].cost;
        flagged = flagged || results[static_cast<std::size_t>(p + j)].flagged;
      }
    } catch (const std::exception&) {
      cost_ref = cost_dist = std::numeric_limits<double>::infinity();
    }
    const double total = cost_ref + cost_dist;
    if (total < best.total) {
      best.total = total;
      best.cost_ref = cost_ref;
      best.cost_dist = cost_dist;
      best.best_eta = eta;
      best.flagged = flagged;
    }
  }
  if (!std::isfinite(best.total)) best.best_eta = cfg.eta_grid.front();
  return best;
}

/// S = c_min / c; an infinite cost scores zero.
template <typename Key>
std::map<Key, double> score_methods(const std::map<Key, double>& costs) {
  double c_min = std::numeric_limits<double>::infinity();
  for (const auto& [k, c] : costs) c_min = std::min(c_min, c);
  std::map<Key, double> out;
  for (const auto& [k, c] : costs) {
    if (!std::isfinite(c))
      out[k] = 0.0;
    else if (c == 0.0)
      out[k] = 1.0;
    else
      out[k] = std::isfinite(c_min) ? c_min / c : 0.0;
  }
  return out;
}

namespace detail {

/// Regularized incomplete beta function by Lentz's continued fraction.
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  auto cont_frac = [](double aa, double bb, double xx) {
    const double tiny = 1e-300;
    double qab = aa + bb, qap = aa + 1.0, qam = aa - 1.0;
    double c = 1.0, d = 1.0 - qab * xx / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
      const int m2 = 2 * m;
      double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < 1e-14) break;
    }
    return h;
  };
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(ln_front) * cont_frac(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) + b * std::log1p(-x) +
                        a * std::log(x)) *
                   cont_frac(b, a, 1.0 - x) / b;
}

/// Upper-tail probability P(T > t) for Student's t with nu degrees of freedom.
inline double student_t_sf(double t, double nu) {
  const double x = nu / (nu + t * t);
  const double half_tail = 0.5 * incomplete_beta(nu / 2.0, 0.5, x);
  return (t >= 0.0) ? half_tail : 1.0 - half_tail;
}

}  // namespace detail

struct TTestResult {
  double t = 0.0;
  double p_one_sided = 1.0;
  bool significant_at_95 = false;
};

/**
 * Paired one-sided t-test of the hypothesis mean(a) > mean(b): the statistic
 * is mean(d)/(sd(d)/sqrt(n)) on d = a - b with n-1 degrees of freedom.
 */
inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_t_test: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw std::invalid_argument("paired_t_test: need at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(n - 1);
  if (var == 0.0) throw std::runtime_error("paired_t_test: zero-variance differences");
  TTestResult res;
  res.t = mean / std::sqrt(var / static_cast<double>(n));
  res.p_one_sided = detail::student_t_sf(res.t, static_cast<double>(n - 1));
  res.significant_at_95 = res.p_one_sided < 0.05;
  return res;
}

}  // namespace ccs
