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

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlo/fock.hpp"

namespace nlo {

enum class ElementKind { PhaseShifter, BeamSplitter, DepolarizationLayer, LossChannel };

inline int element_mode_count(ElementKind k) {
  return (k == ElementKind::PhaseShifter || k == ElementKind::LossChannel) ? 1 : 2;
}

// One optical element placed on specific modes. `loss_p` is the element's
// noise probability (photon loss per physical mode for PS/BS/LossChannel,
// depolarization probability for a DepolarizationLayer); `active` marks it
// for noisy substitution by the engine. Angles are stored unreduced.
struct PlacedElement {
  ElementKind kind = ElementKind::PhaseShifter;
  std::array<int, 2> modes{0, 0};
  double theta = 0.0;
  double phi = 0.0;
  double loss_p = 0.0;
  bool active = false;

  int mode_count() const { return element_mode_count(kind); }

  static PlacedElement ps(int mode, double theta) {
    return {ElementKind::PhaseShifter, {mode, 0}, theta, 0.0, 0.0, false};
  }
  static PlacedElement bs(int m0, int m1, double theta, double phi) {
    return {ElementKind::BeamSplitter, {m0, m1}, theta, phi, 0.0, false};
  }
  static PlacedElement dep(int m0, int m1) {
    return {ElementKind::DepolarizationLayer, {m0, m1}, 0.0, 0.0, 0.0, false};
  }
  static PlacedElement loss(int mode) {
    return {ElementKind::LossChannel, {mode, 0}, 0.0, 0.0, 0.0, false};
  }
};

/// Phase shifter on one mode: a^dag -> e^{i theta} a^dag.
inline ModeTransfer ps_matrix(double theta) {
  if (!std::isfinite(theta))
    throw std::invalid_argument("ps_matrix: angle must be finite");
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = std::polar(1.0, theta);
  return ModeTransfer::unchecked(std::move(m), false);
}

/// Beam splitter on two modes, i*sin convention on the off-diagonals.
inline ModeTransfer bs_matrix(double theta, double phi) {
  if (!std::isfinite(theta) || !std::isfinite(phi))
    throw std::invalid_argument("bs_matrix: angles must be finite");
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const cdouble i(0.0, 1.0);
  Eigen::MatrixXcd m(2, 2);
  m << c, i * std::polar(1.0, -phi) * s, i * std::polar(1.0, phi) * s, c;
  return ModeTransfer::unchecked(std::move(m), false);
}

inline Eigen::Matrix2cd bs_matrix2(double theta, double phi) {
  return bs_matrix(theta, phi).matrix();
}

// A full optical circuit: placed elements in temporal order, the input
// occupation, the heralding pattern (exact photon counts on ancilla modes,
// nullopt elsewhere), and the dual-rail qubit map.
struct OpticalCircuit {
  int mode_count = 0;
  std::vector<PlacedElement> elements;
  std::vector<int> input;
  std::vector<std::optional<int>> herald;
  std::vector<std::pair<int, int>> qubit_map;

  OpticalCircuit() = default;
  explicit OpticalCircuit(int modes)
      : mode_count(modes), input(modes, 0), herald(modes, std::nullopt) {}

  int total_photons() const {
    int n = 0;
    for (int c : input) n += c;
    return n;
  }

  void validate() const {
    if (mode_count < 1) throw std::invalid_argument("circuit: no modes");
    if (static_cast<int>(input.size()) != mode_count)
      throw std::invalid_argument("circuit: input length mismatch");
    if (static_cast<int>(herald.size()) != mode_count)
      throw std::invalid_argument("circuit: herald length mismatch");
    for (int c : input)
      if (c < 0) throw std::invalid_argument("circuit: negative input count");
    for (const PlacedElement& e : elements) {
      for (int i = 0; i < e.mode_count(); ++i)
        if (e.modes[i] < 0 || e.modes[i] >= mode_count)
          throw std::invalid_argument("circuit: element mode out of range");
      if (e.mode_count() == 2 && e.modes[0] == e.modes[1])
        throw std::invalid_argument("circuit: duplicate element modes");
      if (!std::isfinite(e.theta) || !std::isfinite(e.phi))
        throw std::invalid_argument("circuit: non-finite angle");
      if (e.loss_p < 0.0 || e.loss_p >= 0.5)
        throw std::invalid_argument("circuit: loss_p out of [0, 0.5)");
    }
    std::vector<bool> used(mode_count, false);
    for (const auto& [a, b] : qubit_map) {
      if (a < 0 || b < 0 || a >= mode_count || b >= mode_count || a == b)
        throw std::invalid_argument("circuit: bad qubit pair");
      if (used[a] || used[b])
        throw std::invalid_argument("circuit: overlapping qubit pairs");
      used[a] = used[b] = true;
    }
  }
};

/// Embeds a small transfer matrix into `dim` modes at the given positions.
inline Eigen::MatrixXcd embed(const Eigen::MatrixXcd& small,
                              std::span<const int> at, int dim) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dim, dim);
  for (int r = 0; r < small.rows(); ++r)
    for (int c = 0; c < small.cols(); ++c) m(at[r], at[c]) = small(r, c);
  return m;
}

/// Ideal transfer matrix of an element; depolarization and loss markers
/// contribute identity here (noise is the engine's business).
inline Eigen::MatrixXcd element_matrix(const PlacedElement& e) {
  switch (e.kind) {
    case ElementKind::PhaseShifter:
      return ps_matrix(e.theta).matrix();
    case ElementKind::BeamSplitter:
      return bs_matrix(e.theta, e.phi).matrix();
    default:
      return Eigen::MatrixXcd::Identity(e.mode_count(), e.mode_count());
  }
}

/// Ideal composition of the whole circuit; later elements multiply on the left.
inline ModeTransfer transfer(const OpticalCircuit& circuit) {
  circuit.validate();
  Eigen::MatrixXcd acc =
      Eigen::MatrixXcd::Identity(circuit.mode_count, circuit.mode_count);
  for (const PlacedElement& e : circuit.elements) {
    if (e.kind == ElementKind::DepolarizationLayer ||
        e.kind == ElementKind::LossChannel)
      continue;
    const std::array<int, 2> at = e.modes;
    acc = embed(element_matrix(e),
                std::span<const int>(at.data(), e.mode_count()),
                circuit.mode_count) *
          acc;
  }
  return ModeTransfer::unchecked(std::move(acc), false);
}

}  // namespace nlo
