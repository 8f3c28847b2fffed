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

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ccs/benchmark.hpp"
#include "ccs/io.hpp"
#include "ccs/scaling.hpp"

namespace fs = std::filesystem;
using ccs::json;

namespace {

// Exit codes: 0 ok, 1 generic failure, 2 parse error, 3 unstable entry,
// 4 no NI-feasible pairing.
constexpr int kExitParse = 2;
constexpr int kExitUnstable = 3;
constexpr int kExitNoNiPairing = 4;

struct AnalyzeOptions {
  std::string plant_path;
  std::string im_path;  // pair-from-im mode when set
  std::string measure = "pm";
  std::string scaling = "none";
  bool apply_ni = false;
  bool sparse = false;
  double rho = 3.0;
  double threshold = 0.7;
  int pade = 2;
  double sk_tol = 1e-3;
  std::string out_dir = ".";
};

void write_manifest(const std::string& out_dir, const std::string& command, const json& config,
                    const std::vector<std::string>& outputs, double wall_s) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["tool_version"] = ccs::kToolVersion;
  m["outputs"] = outputs;
  m["wall_time_s"] = wall_s;
  ccs::write_text_file((fs::path(out_dir) / "manifest.json").string(), m.dump(2) + "\n");
}

void print_decision(const ccs::InteractionMatrix& im, const ccs::PairingDecision& d) {
  std::cout << "measure=" << ccs::to_string(im.measure)
            << " scaling=" << ccs::to_string(im.scaling) << "\n";
  for (std::size_t i = 0; i < d.assignment.size(); ++i) {
    const int j = d.assignment[i];
    const std::string out = i < im.output_names.size() ? im.output_names[i]
                                                       : "y" + std::to_string(i + 1);
    const std::string in = j >= 0 && j < static_cast<int>(im.input_names.size())
                               ? im.input_names[static_cast<std::size_t>(j)]
                               : "u" + std::to_string(j + 1);
    std::cout << "  " << out << " <- " << in << "\n";
  }
  std::cout << "  total interaction " << d.total_interaction;
  if (d.ni) std::cout << ", NI " << *d.ni;
  if (!d.feedforward.empty()) {
    std::cout << ", feedforward";
    for (const auto& e : d.feedforward)
      std::cout << " (u" << e.source_input + 1 << " -> loop " << e.target_loop + 1 << ")";
  }
  std::cout << "\n";
}

int run_pairing_pipeline(const AnalyzeOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const bool from_im = !opt.im_path.empty();

  ccs::TransferMatrix G;
  bool have_plant = false;
  if (!opt.plant_path.empty()) {
    G = ccs::load_plant(opt.plant_path);
    have_plant = true;
  }

  const ccs::Measure measure = ccs::measure_from_string(opt.measure);
  const ccs::Scaling scheme = ccs::scaling_from_string(opt.scaling);

  ccs::InteractionMatrix im;
  if (from_im) {
    im = ccs::load_im_csv(opt.im_path);  // measure/scaling come from the sidecar
  } else {
    if (!have_plant) throw ccs::ParseError("analyze: no plant file given");
    im = (measure == ccs::Measure::RGA) ? ccs::rga(G) : ccs::build_im(G, measure, opt.pade);
  }

  if (im.measure == ccs::Measure::RGA && scheme != ccs::Scaling::NONE)
    std::cerr << "note: the scaling schemes apply to gramian measures only; "
                 "RGA is used unscaled\n";
  ccs::InteractionMatrix scaled =
      (im.measure == ccs::Measure::RGA) ? im : ccs::apply_scaling(im, scheme, opt.sk_tol);

  ccs::PairingDecision decision;
  if (im.measure == ccs::Measure::RGA) {
    decision = ccs::rga_pairing(scaled);
  } else if (opt.apply_ni) {
    if (!have_plant)
      throw ccs::ParseError("--ni needs a plant file for the steady-state gain matrix");
    decision = ccs::pair_with_ni(scaled, ccs::dc_gain(G));
  } else {
    decision = ccs::max_assignment(scaled);
  }

  if (opt.sparse) {
    if (!have_plant) throw ccs::ParseError("--sparse needs a plant file");
    decision = ccs::sparse_structure(scaled, decision, opt.rho, G, opt.threshold);
  }

  fs::create_directories(opt.out_dir);
  const std::string stem = ccs::to_string(scaled.measure) + "_" + ccs::to_string(scaled.scaling);
  const std::string im_file = "im_" + stem + ".csv";
  const std::string pairing_file = "pairing_" + stem + ".json";
  ccs::save_im_csv(scaled, (fs::path(opt.out_dir) / im_file).string());
  ccs::write_text_file((fs::path(opt.out_dir) / pairing_file).string(),
                       ccs::pairing_to_json(decision).dump(2) + "\n");

  json cfg{{"measure", opt.measure}, {"scaling", opt.scaling},   {"ni", opt.apply_ni},
           {"sparse", opt.sparse},   {"rho", opt.rho},           {"threshold", opt.threshold},
           {"pade", opt.pade},       {"sk_tol", opt.sk_tol},
           {"input", from_im ? opt.im_path : opt.plant_path}};
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(opt.out_dir, from_im ? "pair-from-im" : "analyze", cfg,
                 {im_file, pairing_file}, wall);

  print_decision(scaled, decision);
  return 0;
}

int dispatch(int (*fn)(const AnalyzeOptions&), const AnalyzeOptions& opt) {
  try {
    return fn(opt);
  } catch (const ccs::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    std::cerr << "error: " << msg << "\n";
    if (msg.find("unstable entry") != std::string::npos) return kExitUnstable;
    if (msg.find("no integral-stabilizable") != std::string::npos) return kExitNoNiPairing;
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control configuration selection with gramian-based interaction measures"};
  app.require_subcommand(1);

  // --- analyze ---------------------------------------------------------
  AnalyzeOptions an;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Build an interaction matrix from a plant and select a pairing");
  analyze->add_option("plant", an.plant_path, "plant JSON file")->required();
  analyze->add_option("--measure", an.measure, "pm|hiia|sigma2|rga")->capture_default_str();
  analyze->add_option("--scaling", an.scaling, "none|row|column|rowcol|sk")->capture_default_str();
  analyze->add_flag("--ni", an.apply_ni, "filter candidates by the Niederlinski index");
  analyze->add_flag("--sparse", an.sparse, "add feedforward edges (sparse structure)");
  analyze->add_option("--rho", an.rho, "feedforward penalty weight")->capture_default_str();
  analyze->add_option("--threshold", an.threshold, "sparse selection stop threshold")
      ->capture_default_str();
  analyze->add_option("--pade", an.pade, "Pade order for delays")->capture_default_str();
  analyze->add_option("--sk-tol", an.sk_tol, "Sinkhorn-Knopp stopping tolerance")
      ->capture_default_str();
  analyze->add_option("--out", an.out_dir, "output directory")->capture_default_str();

  // --- pair-from-im ----------------------------------------------------
  AnalyzeOptions pf;
  CLI::App* pair_from_im = app.add_subcommand(
      "pair-from-im", "Select a pairing from a raw interaction matrix CSV");
  pair_from_im->add_option("im", pf.im_path, "interaction matrix CSV")->required();
  pair_from_im->add_option("--scaling", pf.scaling, "none|row|column|rowcol|sk")
      ->capture_default_str();
  pair_from_im->add_option("--plant", pf.plant_path, "plant JSON (enables --ni/--sparse)");
  pair_from_im->add_flag("--ni", pf.apply_ni, "filter candidates by the Niederlinski index");
  pair_from_im->add_flag("--sparse", pf.sparse, "add feedforward edges (sparse structure)");
  pair_from_im->add_option("--rho", pf.rho, "feedforward penalty weight")->capture_default_str();
  pair_from_im->add_option("--threshold", pf.threshold, "sparse selection stop threshold")
      ->capture_default_str();
  pair_from_im->add_option("--sk-tol", pf.sk_tol, "Sinkhorn-Knopp stopping tolerance")
      ->capture_default_str();
  pair_from_im->add_option("--out", pf.out_dir, "output directory")->capture_default_str();

  // --- generate --------------------------------------------------------
  std::string gen_cfg_path, gen_out = ".";
  int gen_count = 1;
  std::int64_t gen_seed = -1;
  CLI::App* generate_cmd =
      app.add_subcommand("generate", "Generate random plants from a generator config");
  generate_cmd->add_option("config", gen_cfg_path, "generator config JSON")->required();
  generate_cmd->add_option("--count", gen_count, "number of plants")->capture_default_str();
  generate_cmd->add_option("--seed", gen_seed, "override the config seed");
  generate_cmd->add_option("--out", gen_out, "output directory")->capture_default_str();

  // --- benchmark -------------------------------------------------------
  std::string bench_cfg_path, bench_out = "bench_out";
  int bench_threads = 0;
  bool bench_quiet = false;
  CLI::App* benchmark_cmd =
      app.add_subcommand("benchmark", "Statistically compare scaling schemes on random plants");
  benchmark_cmd->add_option("config", bench_cfg_path, "benchmark config JSON")->required();
  benchmark_cmd->add_option("--out", bench_out, "output directory")->capture_default_str();
  benchmark_cmd->add_option("--threads", bench_threads, "worker threads (0: all cores)")
      ->capture_default_str();
  benchmark_cmd->add_flag("--quiet", bench_quiet, "suppress progress lines");

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) return dispatch(run_pairing_pipeline, an);
  if (pair_from_im->parsed()) return dispatch(run_pairing_pipeline, pf);

  if (generate_cmd->parsed()) {
    try {
      const auto t0 = std::chrono::steady_clock::now();
      json cfg_json;
      try {
        cfg_json = json::parse(ccs::read_text_file(gen_cfg_path));
      } catch (const json::exception& e) {
        throw ccs::ParseError(std::string("cannot parse ") + gen_cfg_path + ": " + e.what());
      }
      ccs::GeneratorConfig cfg = ccs::generator_config_from_json(cfg_json);
      if (gen_seed >= 0) cfg.seed = static_cast<std::uint64_t>(gen_seed);
      fs::create_directories(gen_out);
      const ccs::Rng seeds(cfg.seed);
      std::vector<std::string> outputs;
      for (int i = 0; i < gen_count; ++i) {
        ccs::GeneratorConfig one = cfg;
        one.seed = seeds.fork(static_cast<std::uint64_t>(i)).key();
        const ccs::TransferMatrix G = ccs::generate(one);
        std::ostringstream name;
        name << "system_" << std::setw(4) << std::setfill('0') << i + 1 << ".json";
        ccs::save_plant(G, (fs::path(gen_out) / name.str()).string());
        outputs.push_back(name.str());
      }
      json cfg_snapshot = ccs::generator_config_to_json(cfg);
      cfg_snapshot["count"] = gen_count;
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      write_manifest(gen_out, "generate", cfg_snapshot, outputs, wall);
      std::cout << "wrote " << gen_count << " plants to " << gen_out << "\n";
      return 0;
    } catch (const ccs::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitParse;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  if (benchmark_cmd->parsed()) {
    try {
      json cfg_json;
      try {
        cfg_json = json::parse(ccs::read_text_file(bench_cfg_path));
      } catch (const json::exception& e) {
        throw ccs::ParseError(std::string("cannot parse ") + bench_cfg_path + ": " + e.what());
      }
      ccs::BenchmarkConfig cfg = ccs::benchmark_config_from_json(cfg_json);
      if (bench_threads > 0) cfg.threads = bench_threads;
      ccs::run_benchmark(cfg, bench_out, bench_quiet ? nullptr : &std::cerr);
      std::cout << "report written to " << (fs::path(bench_out) / "report.csv").string() << "\n";
      return 0;
    } catch (const ccs::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitParse;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
