// Copyright 2026 The nlosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "nlo/engine.hpp"
#include "nlo/gbqc.hpp"
#include "nlo/vqa.hpp"

namespace nlo {

using ordered_json = nlohmann::ordered_json;

/// Full-precision decimal formatting; round-trips IEEE doubles exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Circuit JSON, the CLI's circuit input format:
// { "modes": int, "input": [int], "herald": [int|null],
//   "qubit_map": [[int,int]],
//   "elements": [ { "kind": "ps"|"bs"|"dep"|"loss", "modes": [int],
//                   "theta": float, "phi": float, "loss_p": float } ] }
// ---------------------------------------------------------------------------
inline std::string element_kind_name(ElementKind k) {
  switch (k) {
    case ElementKind::PhaseShifter: return "ps";
    case ElementKind::BeamSplitter: return "bs";
    case ElementKind::DepolarizationLayer: return "dep";
    case ElementKind::LossChannel: return "loss";
  }
  throw std::logic_error("unknown element kind");
}

inline ElementKind element_kind_from_name(const std::string& s) {
  if (s == "ps") return ElementKind::PhaseShifter;
  if (s == "bs") return ElementKind::BeamSplitter;
  if (s == "dep") return ElementKind::DepolarizationLayer;
  if (s == "loss") return ElementKind::LossChannel;
  throw std::invalid_argument("circuit json: unknown element kind '" + s + "'");
}

inline ordered_json circuit_to_json(const OpticalCircuit& c) {
  ordered_json j;
  j["modes"] = c.mode_count;
  j["input"] = c.input;
  ordered_json herald = ordered_json::array();
  for (const auto& h : c.herald)
    herald.push_back(h ? ordered_json(*h) : ordered_json(nullptr));
  j["herald"] = std::move(herald);
  ordered_json qmap = ordered_json::array();
  for (const auto& [a, b] : c.qubit_map) qmap.push_back({a, b});
  j["qubit_map"] = std::move(qmap);
  ordered_json elements = ordered_json::array();
  for (const PlacedElement& e : c.elements) {
    ordered_json je;
    je["kind"] = element_kind_name(e.kind);
    je["modes"] = std::vector<int>(e.modes.begin(),
                                   e.modes.begin() + e.mode_count());
    je["theta"] = e.theta;
    je["phi"] = e.phi;
    je["loss_p"] = e.loss_p;
    elements.push_back(std::move(je));
  }
  j["elements"] = std::move(elements);
  return j;
}

inline OpticalCircuit circuit_from_json(const ordered_json& j) {
  OpticalCircuit c(j.at("modes").get<int>());
  c.input = j.at("input").get<std::vector<int>>();
  c.herald.clear();
  for (const auto& h : j.at("herald"))
    c.herald.push_back(h.is_null() ? std::optional<int>()
                                   : std::optional<int>(h.get<int>()));
  c.qubit_map.clear();
  for (const auto& p : j.at("qubit_map"))
    c.qubit_map.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  for (const auto& je : j.at("elements")) {
    PlacedElement e;
    e.kind = element_kind_from_name(je.at("kind").get<std::string>());
    const auto modes = je.at("modes").get<std::vector<int>>();
    if (static_cast<int>(modes.size()) != e.mode_count())
      throw std::invalid_argument("circuit json: wrong mode count for element");
    for (std::size_t i = 0; i < modes.size(); ++i) e.modes[i] = modes[i];
    e.theta = je.value("theta", 0.0);
    e.phi = je.value("phi", 0.0);
    e.loss_p = je.value("loss_p", 0.0);
    e.active = e.loss_p > 0.0;
    c.elements.push_back(e);
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Qubit-circuit JSON:
// { "qubits": int, "gates": [{"kind": "x"|"h"|"cz"|"cx", "targets": [int]}] }
// ---------------------------------------------------------------------------
inline QubitCircuit qubit_circuit_from_json(const ordered_json& j) {
  QubitCircuit qc;
  qc.n_qubits = j.at("qubits").get<int>();
  for (const auto& jg : j.at("gates")) {
    const std::string kind = jg.at("kind").get<std::string>();
    QubitGate g;
    if (kind == "x") g.kind = QubitGate::Kind::X;
    else if (kind == "h") g.kind = QubitGate::Kind::H;
    else if (kind == "cz") g.kind = QubitGate::Kind::CZ;
    else if (kind == "cx") g.kind = QubitGate::Kind::CX;
    else throw std::invalid_argument("qubit circuit json: unknown gate '" + kind + "'");
    const auto targets = jg.at("targets").get<std::vector<int>>();
    if (static_cast<int>(targets.size()) != g.target_count())
      throw std::invalid_argument("qubit circuit json: wrong target count");
    for (std::size_t i = 0; i < targets.size(); ++i) g.targets[i] = targets[i];
    qc.gates.push_back(g);
  }
  qc.validate();
  return qc;
}

// ---------------------------------------------------------------------------
// Result JSON:
// { "rho": [[{"re":f,"im":f}]], "herald_probability": f,
//   "discarded_weight": f, "n_samples": int, "seed": int }
// ---------------------------------------------------------------------------
inline ordered_json density_to_json(const DensityMatrix& rho) {
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < rho.dim(); ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < rho.dim(); ++c) {
      row.push_back(ordered_json{{"re", rho.entries()(r, c).real()},
                                 {"im", rho.entries()(r, c).imag()}});
    }
    rows.push_back(std::move(row));
  }
  j["rho"] = std::move(rows);
  j["herald_probability"] = rho.herald_probability();
  j["discarded_weight"] = rho.discarded_weight();
  j["n_samples"] = rho.n_samples();
  j["seed"] = rho.seed();
  return j;
}

inline DensityMatrix density_from_json(const ordered_json& j) {
  const auto& rows = j.at("rho");
  const int dim = static_cast<int>(rows.size());
  Eigen::MatrixXcd m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c)
      m(r, c) = cdouble(rows.at(r).at(c).at("re").get<double>(),
                        rows.at(r).at(c).at("im").get<double>());
  return DensityMatrix(std::move(m), j.at("herald_probability").get<double>(),
                       j.at("discarded_weight").get<double>(),
                       j.at("n_samples").get<std::int64_t>(),
                       j.at("seed").get<std::uint64_t>());
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace nlo
