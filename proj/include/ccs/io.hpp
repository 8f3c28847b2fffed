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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccs/generator.hpp"
#include "ccs/interaction.hpp"
#include "ccs/lti.hpp"
#include "ccs/pairing.hpp"
#include "ccs/simulate.hpp"

namespace ccs {

using nlohmann::json;

inline constexpr const char* kToolVersion = "ccselect 0.1.0";

/// Raised on malformed input files; the CLI maps it to exit code 2.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

// ---------------------------------------------------------------------------
// Plant JSON: {"inputs": [...], "outputs": [...],
//              "entries": [[{"num": [...], "den": [...], "delay": x}, ...], ...]}
// row-major by output; this format is the interchange unit of the toolkit.
// ---------------------------------------------------------------------------

inline json plant_to_json(const TransferMatrix& G) {
  json j;
  j["inputs"] = G.input_names;
  j["outputs"] = G.output_names;
  json rows = json::array();
  for (const auto& row : G.entries) {
    json r = json::array();
    for (const auto& tf : row)
      r.push_back(json{{"num", tf.num}, {"den", tf.den}, {"delay", tf.delay}});
    rows.push_back(std::move(r));
  }
  j["entries"] = std::move(rows);
  return j;
}

inline TransferMatrix plant_from_json(const json& j) {
  try {
    TransferMatrix G;
    G.input_names = j.at("inputs").get<std::vector<std::string>>();
    G.output_names = j.at("outputs").get<std::vector<std::string>>();
    for (const auto& row : j.at("entries")) {
      std::vector<RationalTF> r;
      for (const auto& e : row) {
        RationalTF tf(e.at("num").get<std::vector<double>>(),
                      e.at("den").get<std::vector<double>>(),
                      e.value("delay", 0.0));
        if (tf.delay < 0.0) throw ParseError("plant entry with negative delay");
        r.push_back(std::move(tf));
      }
      G.entries.push_back(std::move(r));
    }
    if (G.entries.empty()) throw ParseError("plant has no entries");
    G.validate();
    return G;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed plant JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed plant: ") + e.what());
  }
}

inline TransferMatrix load_plant(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ParseError(std::string("cannot parse ") + path + ": " + e.what());
  }
  return plant_from_json(j);
}

inline void save_plant(const TransferMatrix& G, const std::string& path) {
  write_text_file(path, plant_to_json(G).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Interaction matrix CSV (labels in the header row/column) plus a JSON
// sidecar "<path>.meta.json" carrying the measure/scaling tags.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

inline void save_im_csv(const InteractionMatrix& im, const std::string& path) {
  std::ostringstream ss;
  for (int j = 0; j < im.cols(); ++j)
    ss << ","
       << (j < static_cast<int>(im.input_names.size()) ? im.input_names[static_cast<std::size_t>(j)]
                                                       : "u" + std::to_string(j + 1));
  ss << "\n";
  for (int i = 0; i < im.rows(); ++i) {
    ss << (i < static_cast<int>(im.output_names.size()) ? im.output_names[static_cast<std::size_t>(i)]
                                                        : "y" + std::to_string(i + 1));
    for (int j = 0; j < im.cols(); ++j) ss << "," << format_double(im.values(i, j));
    ss << "\n";
  }
  write_text_file(path, ss.str());
  json meta{{"measure", to_string(im.measure)}, {"scaling", to_string(im.scaling)}};
  if (!im.annotations.empty()) meta["annotations"] = im.annotations;
  write_text_file(path + ".meta.json", meta.dump(2) + "\n");
}

inline InteractionMatrix load_im_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream in(text);
  std::string line;
  InteractionMatrix im;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (header) {
      for (std::size_t c = 1; c < cells.size(); ++c) im.input_names.push_back(cells[c]);
      header = false;
      continue;
    }
    if (cells.size() != im.input_names.size() + 1)
      throw ParseError("IM CSV row with wrong number of cells: " + path);
    im.output_names.push_back(cells[0]);
    std::vector<double> vals;
    for (std::size_t c = 1; c < cells.size(); ++c) {
      try {
        vals.push_back(std::stod(cells[c]));
      } catch (const std::exception&) {
        throw ParseError("IM CSV cell is not a number: " + cells[c]);
      }
    }
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError("IM CSV is empty: " + path);
  im.values.resize(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      im.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];

  const std::string meta_path = path + ".meta.json";
  if (std::filesystem::exists(meta_path)) {
    try {
      json meta = json::parse(read_text_file(meta_path));
      im.measure = measure_from_string(meta.value("measure", "pm"));
      im.scaling = scaling_from_string(meta.value("scaling", "none"));
      if (meta.contains("annotations"))
        im.annotations = meta["annotations"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed IM sidecar: ") + e.what());
    }
  }
  return im;
}

// ---------------------------------------------------------------------------
// Pairing decision JSON:
// {"pairs": [[out, in], ...], "ni": x, "feedforward": [[src, target], ...], "total": x}
// ---------------------------------------------------------------------------

inline json pairing_to_json(const PairingDecision& d) {
  json j;
  json pairs = json::array();
  for (std::size_t i = 0; i < d.assignment.size(); ++i)
    pairs.push_back(json::array({static_cast<int>(i), d.assignment[i]}));
  j["pairs"] = std::move(pairs);
  if (d.ni) j["ni"] = *d.ni;
  json ff = json::array();
  for (const auto& e : d.feedforward) ff.push_back(json::array({e.source_input, e.target_loop}));
  j["feedforward"] = std::move(ff);
  j["total"] = d.total_interaction;
  if (d.rejected_candidates > 0) j["rejected_candidates"] = d.rejected_candidates;
  return j;
}

inline PairingDecision pairing_from_json(const json& j) {
  try {
    PairingDecision d;
    const auto& pairs = j.at("pairs");
    d.assignment.assign(pairs.size(), -1);
    for (const auto& pr : pairs)
      d.assignment.at(pr.at(0).get<std::size_t>()) = pr.at(1).get<int>();
    if (j.contains("ni") && !j["ni"].is_null()) d.ni = j["ni"].get<double>();
    for (const auto& e : j.value("feedforward", json::array()))
      d.feedforward.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    d.total_interaction = j.value("total", 0.0);
    if (j.contains("rejected_candidates")) d.rejected_candidates = j["rejected_candidates"].get<int>();
    return d;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed pairing JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Generator and simulation configuration JSON.
// ---------------------------------------------------------------------------

inline json generator_config_to_json(const GeneratorConfig& c) {
  return json{{"n_inputs", c.n_inputs},
              {"n_outputs", c.n_outputs},
              {"min_inputs_per_output", c.min_inputs_per_output},
              {"max_inputs_per_output", c.max_inputs_per_output},
              {"min_tf_order", c.min_tf_order},
              {"max_tf_order", c.max_tf_order},
              {"min_relative_degree", c.min_relative_degree},
              {"max_relative_degree", c.max_relative_degree},
              {"max_static_gain", c.max_static_gain},
              {"min_pole_time_constant", c.min_pole_time_constant},
              {"max_pole_time_constant", c.max_pole_time_constant},
              {"min_complex_damping", c.min_complex_damping},
              {"pct_complex_stable_poles", c.pct_complex_stable_poles},
              {"min_nmp_zeros", c.min_nmp_zeros},
              {"max_nmp_zeros", c.max_nmp_zeros},
              {"pct_delay", c.pct_delay},
              {"min_delay", c.min_delay},
              {"max_delay", c.max_delay},
              {"pade_order", c.pade_order},
              {"seed", c.seed}};
}

inline GeneratorConfig generator_config_from_json(const json& j) {
  try {
    GeneratorConfig c;
    c.n_inputs = j.value("n_inputs", c.n_inputs);
    c.n_outputs = j.value("n_outputs", c.n_outputs);
    c.min_inputs_per_output = j.value("min_inputs_per_output", c.min_inputs_per_output);
    c.max_inputs_per_output = j.value("max_inputs_per_output", c.max_inputs_per_output);
    c.min_tf_order = j.value("min_tf_order", c.min_tf_order);
    c.max_tf_order = j.value("max_tf_order", c.max_tf_order);
    c.min_relative_degree = j.value("min_relative_degree", c.min_relative_degree);
    c.max_relative_degree = j.value("max_relative_degree", c.max_relative_degree);
    c.max_static_gain = j.value("max_static_gain", c.max_static_gain);
    c.min_pole_time_constant = j.value("min_pole_time_constant", c.min_pole_time_constant);
    c.max_pole_time_constant = j.value("max_pole_time_constant", c.max_pole_time_constant);
    c.min_complex_damping = j.value("min_complex_damping", c.min_complex_damping);
    c.pct_complex_stable_poles = j.value("pct_complex_stable_poles", c.pct_complex_stable_poles);
    c.min_nmp_zeros = j.value("min_nmp_zeros", c.min_nmp_zeros);
    c.max_nmp_zeros = j.value("max_nmp_zeros", c.max_nmp_zeros);
    c.pct_delay = j.value("pct_delay", c.pct_delay);
    c.min_delay = j.value("min_delay", c.min_delay);
    c.max_delay = j.value("max_delay", c.max_delay);
    c.pade_order = j.value("pade_order", c.pade_order);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed generator config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid generator config: ") + e.what());
  }
}

inline json simulation_config_to_json(const SimulationConfig& c) {
  return json{{"horizon", c.horizon},
              {"dt", c.dt},
              {"reference_amplitude", c.reference_amplitude},
              {"disturbance_amplitude", c.disturbance_amplitude},
              {"eta_grid", c.eta_grid},
              {"instability_threshold", c.instability_threshold},
              {"pade_order", c.pade_order}};
}

inline SimulationConfig simulation_config_from_json(const json& j) {
  try {
    SimulationConfig c;
    c.horizon = j.value("horizon", c.horizon);
    c.dt = j.value("dt", c.dt);
    c.reference_amplitude = j.value("reference_amplitude", c.reference_amplitude);
    c.disturbance_amplitude = j.value("disturbance_amplitude", c.disturbance_amplitude);
    if (j.contains("eta_grid")) c.eta_grid = j["eta_grid"].get<std::vector<double>>();
    c.instability_threshold = j.value("instability_threshold", c.instability_threshold);
    c.pade_order = j.value("pade_order", c.pade_order);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed simulation config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid simulation config: ") + e.what());
  }
}

}  // namespace ccs
