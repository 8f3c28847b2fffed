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

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ccs/io.hpp"
#include "ccs/scaling.hpp"

namespace ccs {

enum class ControlKind { DECENTRALIZED, SPARSE };

inline std::string to_string(ControlKind k) {
  return k == ControlKind::DECENTRALIZED ? "decentralized" : "sparse";
}

inline ControlKind control_kind_from_string(const std::string& s) {
  if (s == "decentralized") return ControlKind::DECENTRALIZED;
  if (s == "sparse") return ControlKind::SPARSE;
  throw std::invalid_argument("unknown control kind: " + s);
}

inline TuningMethod tuning_method_from_string(const std::string& s) {
  if (s == "lambda") return TuningMethod::LAMBDA;
  if (s == "imc") return TuningMethod::IMC;
  throw std::invalid_argument("unknown tuning method: " + s);
}

/**
 * Benchmark harness settings.  All randomness flows from `seed`; system i
 * draws its plant from the derived sub-stream fork(i), so changing
 * n_systems never reshuffles earlier systems.
 */
struct BenchmarkConfig {
  GeneratorConfig generator;
  int n_systems = 30;
  std::uint64_t seed = 1;
  SimulationConfig simulation;
  std::vector<Measure> measures = {Measure::PM, Measure::HIIA, Measure::SIGMA2};
  std::vector<Scaling> scalings = {Scaling::NONE, Scaling::ROW, Scaling::COLUMN,
                                   Scaling::ROW_OR_COLUMN, Scaling::SINKHORN_KNOPP};
  std::vector<ControlKind> kinds = {ControlKind::DECENTRALIZED, ControlKind::SPARSE};
  std::vector<TuningMethod> methods = {TuningMethod::LAMBDA, TuningMethod::IMC};
  double rho = 3.0;
  double sparse_threshold = 0.7;
  double sk_tol = 1e-3;
  int threads = 0;  // 0: hardware concurrency

  void validate() const {
    generator.validate();
    simulation.validate();
    if (n_systems < 1) throw std::invalid_argument("BenchmarkConfig: n_systems must be >= 1");
    if (measures.empty() || scalings.empty() || kinds.empty() || methods.empty())
      throw std::invalid_argument("BenchmarkConfig: empty evaluation grid");
    if (rho < 0.0) throw std::invalid_argument("BenchmarkConfig: rho must be nonnegative");
    if (sk_tol <= 0.0) throw std::invalid_argument("BenchmarkConfig: sk_tol must be positive");
  }
};

inline json benchmark_config_to_json(const BenchmarkConfig& c) {
  json j;
  j["generator"] = generator_config_to_json(c.generator);
  j["n_systems"] = c.n_systems;
  j["seed"] = c.seed;
  j["simulation"] = simulation_config_to_json(c.simulation);
  std::vector<std::string> ms, ss, ks, ts;
  for (auto m : c.measures) ms.push_back(to_string(m));
  for (auto s : c.scalings) ss.push_back(to_string(s));
  for (auto k : c.kinds) ks.push_back(to_string(k));
  for (auto t : c.methods) ts.push_back(to_string(t));
  j["measures"] = ms;
  j["scalings"] = ss;
  j["kinds"] = ks;
  j["methods"] = ts;
  j["rho"] = c.rho;
  j["sparse_threshold"] = c.sparse_threshold;
  j["sk_tol"] = c.sk_tol;
  return j;
}

inline BenchmarkConfig benchmark_config_from_json(const json& j) {
  try {
    BenchmarkConfig c;
    if (j.contains("generator")) c.generator = generator_config_from_json(j["generator"]);
    c.n_systems = j.value("n_systems", c.n_systems);
    c.seed = j.value("seed", c.seed);
    if (j.contains("simulation")) c.simulation = simulation_config_from_json(j["simulation"]);
    auto read_list = [&](const char* key, auto parse, auto& out) {
      if (!j.contains(key)) return;
      out.clear();
      for (const auto& s : j.at(key)) out.push_back(parse(s.template get<std::string>()));
    };
    read_list("measures", measure_from_string, c.measures);
    read_list("scalings", scaling_from_string, c.scalings);
    read_list("kinds", control_kind_from_string, c.kinds);
    read_list("methods", tuning_method_from_string, c.methods);
    c.rho = j.value("rho", c.rho);
    c.sparse_threshold = j.value("sparse_threshold", c.sparse_threshold);
    c.sk_tol = j.value("sk_tol", c.sk_tol);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed benchmark config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid benchmark config: ") + e.what());
  }
}

/// One benchmark report line.
struct ReportRow {
  int system_id = 0;
  Measure measure = Measure::PM;
  Scaling scaling = Scaling::NONE;
  ControlKind kind = ControlKind::DECENTRALIZED;
  TuningMethod method = TuningMethod::LAMBDA;
  double best_eta = 0.0;
  double cost_ref = std::numeric_limits<double>::infinity();
  double cost_dist = std::numeric_limits<double>::infinity();
  double score = 0.0;
  std::string note;  // empty on success, error text on a recorded failure
};

inline constexpr const char* kReportHeader =
    "system_id,measure,scaling,control_kind,method,best_eta,cost_ref,cost_dist,score,note";

inline std::string report_row_to_csv(const ReportRow& r) {
  std::ostringstream ss;
  ss << r.system_id << ',' << to_string(r.measure) << ',' << to_string(r.scaling) << ','
     << to_string(r.kind) << ',' << to_string(r.method) << ',' << format_double(r.best_eta) << ','
     << format_double(r.cost_ref) << ',' << format_double(r.cost_dist) << ','
     << format_double(r.score) << ',' << r.note;
  return ss.str();
}

inline ReportRow report_row_from_csv(const std::string& line) {
  std::istringstream ls(line);
  std::string cell;
  std::vector<std::string> cells;
  while (std::getline(ls, cell, ',')) cells.push_back(cell);
  if (cells.size() < 9) throw ParseError("bad report row: " + line);
  ReportRow r;
  r.system_id = std::stoi(cells[0]);
  r.measure = measure_from_string(cells[1]);
  r.scaling = scaling_from_string(cells[2]);
  r.kind = control_kind_from_string(cells[3]);
  r.method = tuning_method_from_string(cells[4]);
  r.best_eta = std::stod(cells[5]);
  r.cost_ref = std::stod(cells[6]);
  r.cost_dist = std::stod(cells[7]);
  r.score = std::stod(cells[8]);
  if (cells.size() > 9) r.note = cells[9];
  return r;
}

/**
 * Evaluates every (measure x scaling x kind x method) cell on one plant.
 * Identical configurations (same pairing and edges) share one simulation
 * sweep.  Scores are c_min/c on the eta-minimized total cost, with c_min
 * taken over all cells of the same tuning method on this system.
 */
inline std::vector<ReportRow> evaluate_system(int system_id, const TransferMatrix& G,
                                              const BenchmarkConfig& cfg) {
  // Memoized FOPDT fits per plant entry.
  std::map<std::pair<int, int>, FOPDTModel> fit_cache;
  auto fits = [&](int i, int j) -> FOPDTModel {
    auto it = fit_cache.find({i, j});
    if (it == fit_cache.end())
      it = fit_cache.emplace(std::make_pair(i, j), fit_fopdt(G.at(i, j))).first;
    return it->second;
  };

  struct Cell {
    Measure measure;
    Scaling scaling;
    ControlKind kind;
    std::optional<PairingDecision> decision;
    std::string note;
  };
  std::vector<Cell> cells;
  for (Measure measure : cfg.measures) {
    std::optional<InteractionMatrix> base;
    std::string base_err;
    try {
      base = build_im(G, measure, cfg.simulation.pade_order);
    } catch (const std::exception& e) {
      base_err = e.what();
    }
    for (Scaling scaling : cfg.scalings) {
      std::optional<InteractionMatrix> scaled;
      std::string err = base_err;
      if (base) {
        try {
          scaled = apply_scaling(*base, scaling, cfg.sk_tol);
        } catch (const std::exception& e) {
          err = e.what();
        }
      }
      for (ControlKind kind : cfg.kinds) {
        Cell cell{measure, scaling, kind, std::nullopt, err};
        if (scaled) {
          try {
            PairingDecision d = max_assignment(*scaled);
            if (kind == ControlKind::SPARSE)
              d = sparse_structure(*scaled, d, cfg.rho, G, cfg.sparse_threshold);
            cell.decision = std::move(d);
          } catch (const std::exception& e) {
            cell.note = e.what();
          }
        }
        cells.push_back(std::move(cell));
      }
    }
  }

  // One evaluation per distinct (configuration, method).
  auto config_key = [](const PairingDecision& d) {
    std::ostringstream ss;
    for (int a : d.assignment) ss << a << ';';
    ss << '|';
    for (const auto& e : d.feedforward) ss << e.source_input << '>' << e.target_loop << ';';
    return ss.str();
  };
  std::map<std::string, EvaluationResult> eval_cache;
  std::map<std::string, std::string> eval_errors;
  auto evaluate = [&](const PairingDecision& d, TuningMethod method) -> const EvaluationResult* {
    const std::string key = to_string(method) + "|" + config_key(d);
    if (auto it = eval_cache.find(key); it != eval_cache.end()) return &it->second;
    if (eval_errors.count(key)) return nullptr;
    try {
      eval_cache[key] = evaluate_configuration(G, d, method, cfg.simulation, fits);
      return &eval_cache[key];
    } catch (const std::exception& e) {
      eval_errors[key] = e.what();
      return nullptr;
    }
  };

  std::vector<ReportRow> rows;
  for (const auto& cell : cells) {
    for (TuningMethod method : cfg.methods) {
      ReportRow r;
      r.system_id = system_id;
      r.measure = cell.measure;
      r.scaling = cell.scaling;
      r.kind = cell.kind;
      r.method = method;
      if (cell.decision) {
        if (const EvaluationResult* res = evaluate(*cell.decision, method)) {
          r.best_eta = res->best_eta;
          r.cost_ref = res->cost_ref;
          r.cost_dist = res->cost_dist;
          if (res->flagged) r.note = "review:eigen-threshold-disagreement";
        } else {
          r.note = eval_errors[to_string(method) + "|" + config_key(*cell.decision)];
        }
      } else {
        r.note = cell.note;
      }
      // Notes become a CSV cell; keep them comma-free.
      for (char& ch : r.note)
        if (ch == ',' || ch == '\n') ch = ';';
      rows.push_back(std::move(r));
    }
  }

  // Scores: c_min per tuning method over this system's cells.
  for (TuningMethod method : cfg.methods) {
    std::map<std::size_t, double> costs;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].method == method) costs[i] = rows[i].cost_ref + rows[i].cost_dist;
    auto scores = score_methods(costs);
    for (const auto& [i, s] : scores) rows[i].score = s;
  }
  return rows;
}

/// Aggregated outcome of a run; rows are ordered by (system, cell).
struct BenchmarkResult {
  std::vector<ReportRow> rows;
  json summary;
};

inline json summarize(const BenchmarkConfig& cfg, const std::vector<ReportRow>& rows) {
  json schemes = json::array();
  auto collect = [&](Measure m, Scaling s, ControlKind k, TuningMethod t) {
    std::vector<double> v;
    for (const auto& r : rows)
      if (r.measure == m && r.scaling == s && r.kind == k && r.method == t) v.push_back(r.score);
    return v;
  };
  const bool have_unscaled =
      std::find(cfg.scalings.begin(), cfg.scalings.end(), Scaling::NONE) != cfg.scalings.end();
  for (TuningMethod t : cfg.methods)
    for (ControlKind k : cfg.kinds)
      for (Measure m : cfg.measures)
        for (Scaling s : cfg.scalings) {
          const auto scores = collect(m, s, k, t);
          double mean = 0.0;
          for (double x : scores) mean += x;
          if (!scores.empty()) mean /= static_cast<double>(scores.size());
          json entry{{"measure", to_string(m)},   {"scaling", to_string(s)},
                     {"kind", to_string(k)},      {"method", to_string(t)},
                     {"mean_score", mean},        {"n", scores.size()},
                     {"t_vs_no_scaling", nullptr}, {"p_one_sided", nullptr},
                     {"significant_at_95", nullptr}};
          if (s != Scaling::NONE && have_unscaled) {
            const auto baseline = collect(m, Scaling::NONE, k, t);
            if (baseline.size() == scores.size() && scores.size() >= 2) {
              try {
                const TTestResult tt = paired_t_test(scores, baseline);
                entry["t_vs_no_scaling"] = tt.t;
                entry["p_one_sided"] = tt.p_one_sided;
                entry["significant_at_95"] = tt.significant_at_95;
              } catch (const std::exception& e) {
                entry["t_test_error"] = e.what();
              }
            }
          }
          schemes.push_back(std::move(entry));
        }
  json summary;
  summary["tool_version"] = kToolVersion;
  summary["n_systems"] = cfg.n_systems;
  summary["seed"] = cfg.seed;
  summary["schemes"] = std::move(schemes);
  return summary;
}

/**
 * Runs the benchmark: generates n_systems plants from per-system seed
 * streams, evaluates every cell, and writes report.csv, summary.json and
 * manifest.json under out_dir.  Per-system row fragments are cached under
 * out_dir/cache, which makes interrupted runs resumable; the report is
 * rebuilt from the fragments on every run, in system order, by a single
 * writer.
 */
inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, const std::string& out_dir,
                                     std::ostream* log = nullptr) {
  cfg.validate();
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);
  const fs::path cache_dir = fs::path(out_dir) / "cache";
  fs::create_directories(cache_dir);

  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";
  const json cfg_json = benchmark_config_to_json(cfg);
  if (fs::exists(manifest_path)) {
    try {
      json old = json::parse(read_text_file(manifest_path.string()));
      if (old.value("config", json()) != cfg_json)
        throw std::runtime_error(
            "run_benchmark: output directory holds results for a different config; "
            "use a fresh directory");
    } catch (const json::exception&) {
      throw std::runtime_error("run_benchmark: existing manifest is unreadable");
    }
  }

  auto cache_path = [&](int i) {
    std::ostringstream ss;
    ss << "system_" << std::setw(4) << std::setfill('0') << i << ".csv";
    return cache_dir / ss.str();
  };

  const Rng seeds(cfg.seed);
  std::vector<std::vector<ReportRow>> per_system(static_cast<std::size_t>(cfg.n_systems));
  std::atomic<int> next{0};
  std::atomic<int> done{0};

  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.n_systems) return;
      const fs::path cp = cache_path(i);
      std::vector<ReportRow> rows;
      if (fs::exists(cp)) {
        std::istringstream in(read_text_file(cp.string()));
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line))
          if (!line.empty()) rows.push_back(report_row_from_csv(line));
      } else {
        GeneratorConfig gen = cfg.generator;
        gen.seed = seeds.fork(static_cast<std::uint64_t>(i)).key();
        const TransferMatrix G = generate(gen);
        rows = evaluate_system(i, G, cfg);
        std::ostringstream ss;
        ss << kReportHeader << "\n";
        for (const auto& r : rows) ss << report_row_to_csv(r) << "\n";
        write_text_file(cp.string(), ss.str());
      }
      per_system[static_cast<std::size_t>(i)] = std::move(rows);
      const int d = done.fetch_add(1) + 1;
      if (log) {
        static std::mutex log_mutex;
        std::lock_guard<std::mutex> lock(log_mutex);
        (*log) << "system " << i << " done (" << d << "/" << cfg.n_systems << ")\n";
      }
    }
  };

  int n_threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, cfg.n_systems);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  BenchmarkResult result;
  for (auto& rows : per_system)
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());

  std::ostringstream report;
  report << kReportHeader << "\n";
  for (const auto& r : result.rows) report << report_row_to_csv(r) << "\n";
  write_text_file((fs::path(out_dir) / "report.csv").string(), report.str());

  result.summary = summarize(cfg, result.rows);
  write_text_file((fs::path(out_dir) / "summary.json").string(), result.summary.dump(2) + "\n");

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json manifest;
  manifest["command"] = "benchmark";
  manifest["config"] = cfg_json;
  manifest["seed"] = cfg.seed;
  manifest["tool_version"] = kToolVersion;
  manifest["outputs"] = {"report.csv", "summary.json"};
  manifest["wall_time_s"] = wall;
  write_text_file(manifest_path.string(), manifest.dump(2) + "\n");
  return result;
}

}  // namespace ccs
