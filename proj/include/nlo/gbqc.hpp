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

#include <numbers>
#include <string>

#include "nlo/engine.hpp"
#include "nlo/metrics.hpp"
#include "nlo/reck.hpp"

namespace nlo {

// ---------------------------------------------------------------------------
// Qubit-level circuits for the gate-based experiments.
// ---------------------------------------------------------------------------
struct QubitGate {
  enum class Kind { X, H, CZ, CX };
  Kind kind;
  std::array<int, 2> targets{0, 0};
  int target_count() const {
    return (kind == Kind::CZ || kind == Kind::CX) ? 2 : 1;
  }
};

struct QubitCircuit {
  int n_qubits = 0;
  std::vector<QubitGate> gates;

  void validate() const {
    if (n_qubits < 1) throw std::invalid_argument("QubitCircuit: no qubits");
    for (const QubitGate& g : gates) {
      for (int i = 0; i < g.target_count(); ++i)
        if (g.targets[i] < 0 || g.targets[i] >= n_qubits)
          throw std::invalid_argument("QubitCircuit: target out of range");
      if (g.target_count() == 2 && g.targets[0] == g.targets[1])
        throw std::invalid_argument("QubitCircuit: duplicate targets");
    }
  }
};

// ---------------------------------------------------------------------------
// Dual-rail gate blocks.
// ---------------------------------------------------------------------------

/// X gate: one beam splitter, theta = pi. Two modes are enough.
inline OpticalCircuit x_gate_circuit() {
  OpticalCircuit c(2);
  c.elements.push_back(PlacedElement::bs(0, 1, std::numbers::pi, 0.0));
  c.input = {1, 0};
  c.qubit_map = {{0, 1}};
  return c;
}

/// Hadamard on one mode pair: PS(pi) on the second rail followed by
/// BS(pi/2, -pi/2) equals the real Hadamard matrix exactly (no residual
/// phase gauge needed).
inline std::vector<PlacedElement> h_gate_block(int rail0, int rail1) {
  return {PlacedElement::ps(rail1, std::numbers::pi),
          PlacedElement::bs(rail0, rail1, std::numbers::pi / 2.0,
                            -std::numbers::pi / 2.0)};
}

// Nonlinear-sign gate (Knill's real 3x3 unitary): heralds a sign flip of the
// two-photon component with amplitude 1/2 on detecting (1, 0) in the two
// ancilla modes. Mode order: (signal, ancilla with photon, empty ancilla).
inline const Eigen::Matrix3cd& ns_gate_matrix() {
  static const Eigen::Matrix3cd m = [] {
    const double s2 = std::numbers::sqrt2;
    Eigen::Matrix3cd u;
    u << 1.0 - s2, std::pow(2.0, -0.25), std::sqrt(3.0 / s2 - 2.0),
        std::pow(2.0, -0.25), 0.5, 0.5 - 1.0 / s2,
        std::sqrt(3.0 / s2 - 2.0), 0.5 - 1.0 / s2, s2 - 0.5;
    return u;
  }();
  return m;
}

namespace detail {

inline std::vector<PlacedElement> remap_elements(
    std::vector<PlacedElement> elements, std::span<const int> map) {
  for (PlacedElement& e : elements)
    for (int i = 0; i < e.mode_count(); ++i) e.modes[i] = map[e.modes[i]];
  return elements;
}

/// NS gate as beam splitters and phase shifters on (signal, anc0, anc1).
inline std::vector<PlacedElement> ns_gate_elements(int signal, int anc0,
                                                   int anc1) {
  static const std::vector<PlacedElement> base = [] {
    return reck_decompose(ModeTransfer::unitary(ns_gate_matrix())).elements;
  }();
  const std::array<int, 3> map{signal, anc0, anc1};
  return remap_elements(base, map);
}

}  // namespace detail

// Heralded CZ: a 50:50 combiner on the two qubits' |1> rails, an NS gate on
// each arm, and the inverse combiner. Two ancilla photons in four ancilla
// modes, herald pattern (1, 0, 1, 0); success amplitude 1/4 for every
// computational basis input (probability 1/16).
struct HeraldedCzBlock {
  std::vector<PlacedElement> elements;
  std::array<int, 4> ancilla_modes;
  std::array<int, 4> ancilla_input{1, 0, 1, 0};
  std::array<int, 4> herald{1, 0, 1, 0};
};

inline HeraldedCzBlock heralded_cz_block(int rail_a, int rail_b,
                                         int ancilla_base) {
  HeraldedCzBlock block;
  block.ancilla_modes = {ancilla_base, ancilla_base + 1, ancilla_base + 2,
                         ancilla_base + 3};
  block.elements.push_back(
      PlacedElement::bs(rail_a, rail_b, std::numbers::pi / 2.0, 0.0));
  for (const PlacedElement& e :
       detail::ns_gate_elements(rail_a, ancilla_base, ancilla_base + 1))
    block.elements.push_back(e);
  for (const PlacedElement& e :
       detail::ns_gate_elements(rail_b, ancilla_base + 2, ancilla_base + 3))
    block.elements.push_back(e);
  block.elements.push_back(
      PlacedElement::bs(rail_a, rail_b, -std::numbers::pi / 2.0, 0.0));
  return block;
}

// ---------------------------------------------------------------------------
// Qubit-to-optical transpiler. Each qubit gets the mode pair (2q, 2q+1) with
// logical |0> prepared as (1, 0); each CZ (and the CZ inside a lowered CX)
// appends four herald ancilla modes. With `reck` the whole linear network is
// rewritten as one triangular mesh, as the gate-based experiments require.
// ---------------------------------------------------------------------------
inline OpticalCircuit transpile(const QubitCircuit& qc, bool reck = true) {
  qc.validate();
  int cz_count = 0;
  for (const QubitGate& g : qc.gates)
    if (g.kind == QubitGate::Kind::CZ || g.kind == QubitGate::Kind::CX)
      ++cz_count;

  OpticalCircuit c(2 * qc.n_qubits + 4 * cz_count);
  for (int q = 0; q < qc.n_qubits; ++q) {
    c.input[2 * q] = 1;
    c.qubit_map.emplace_back(2 * q, 2 * q + 1);
  }

  int ancilla_base = 2 * qc.n_qubits;
  auto add_cz = [&](int qa, int qb) {
    const HeraldedCzBlock block =
        heralded_cz_block(2 * qa + 1, 2 * qb + 1, ancilla_base);
    for (const PlacedElement& e : block.elements) c.elements.push_back(e);
    for (int i = 0; i < 4; ++i) {
      c.input[block.ancilla_modes[i]] = block.ancilla_input[i];
      c.herald[block.ancilla_modes[i]] = block.herald[i];
    }
    ancilla_base += 4;
  };

  for (const QubitGate& g : qc.gates) {
    switch (g.kind) {
      case QubitGate::Kind::X:
        c.elements.push_back(PlacedElement::bs(
            2 * g.targets[0], 2 * g.targets[0] + 1, std::numbers::pi, 0.0));
        break;
      case QubitGate::Kind::H:
        for (const PlacedElement& e :
             h_gate_block(2 * g.targets[0], 2 * g.targets[0] + 1))
          c.elements.push_back(e);
        break;
      case QubitGate::Kind::CZ:
        add_cz(g.targets[0], g.targets[1]);
        break;
      case QubitGate::Kind::CX: {
        // CX = (I (x) H) CZ (I (x) H) on the target.
        const int t = g.targets[1];
        for (const PlacedElement& e : h_gate_block(2 * t, 2 * t + 1))
          c.elements.push_back(e);
        add_cz(g.targets[0], g.targets[1]);
        for (const PlacedElement& e : h_gate_block(2 * t, 2 * t + 1))
          c.elements.push_back(e);
        break;
      }
    }
  }
  c.validate();
  return reck ? reck_rewrite(c) : c;
}

inline QubitCircuit bell_circuit() {
  QubitCircuit qc;
  qc.n_qubits = 2;
  qc.gates = {{QubitGate::Kind::H, {0, 0}}, {QubitGate::Kind::CX, {0, 1}}};
  return qc;
}

// ---------------------------------------------------------------------------
// Bell-state experiment: the transpiled Bell circuit under depolarization
// only, loss only, and both, with Hellinger distances to the ideal output.
// States are normalized by the ideal heralding probability (a constant of
// the circuit), so loss-induced trace decay stays visible.
// ---------------------------------------------------------------------------
struct ScenarioResult {
  std::string scenario;
  DensityMatrix rho;
  double hellinger_to_ideal = 0.0;
};

inline std::array<ScenarioResult, 3> bell_experiment(const NoiseModel& noise,
                                                     const RunConfig& cfg,
                                                     int threads = 1) {
  const OpticalCircuit circuit = transpile(bell_circuit(), true);
  const DensityMatrix ideal_raw = run_trajectories(
      circuit, NoiseModel::none(), {1, cfg.master_seed, false}, threads);
  const double ideal_herald = ideal_raw.herald_probability();
  const DensityMatrix ideal = ideal_raw.scaled(1.0 / ideal_herald);

  const std::array<std::pair<std::string, NoiseModel>, 3> scenarios{
      {{"dep", NoiseModel{noise.p_dep, 0.0, 0.0}},
       {"loss", NoiseModel{0.0, noise.p_element, noise.p_detect}},
       {"both", noise}}};

  std::array<ScenarioResult, 3> results;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const DensityMatrix rho =
        run_trajectories(circuit, scenarios[i].second, cfg, threads)
            .scaled(1.0 / ideal_herald);
    results[i] = {scenarios[i].first, rho, hellinger(rho, ideal)};
  }
  return results;
}

}  // namespace nlo
