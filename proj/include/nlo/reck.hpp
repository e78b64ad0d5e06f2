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
#include <numbers>

#include "nlo/circuit.hpp"

namespace nlo {

// Triangular Reck decomposition. Off-diagonal entries of the target unitary
// are eliminated row by row from the bottom left, each by a beam splitter on
// an adjacent column pair; the residual diagonal phases come out as trailing
// phase shifters. m(m-1)/2 beam splitters for m modes.
inline OpticalCircuit reck_decompose(const ModeTransfer& u) {
  const int m = u.modes();
  Eigen::MatrixXcd v = u.matrix();
  const double unitary_dev =
      (v * v.adjoint() - Eigen::MatrixXcd::Identity(m, m)).cwiseAbs().maxCoeff();
  if (unitary_dev > 1e-8)
    throw std::invalid_argument("reck_decompose: input is not unitary");

  OpticalCircuit circuit(m);
  constexpr double kZero = 1e-14;

  for (int r = m - 1; r >= 1; --r) {
    for (int p = 0; p <= r - 1; ++p) {
      // Null v(r, p) by mixing columns (p, p+1): right-multiply by T^dagger
      // with T = bs(theta, phi) embedded on that pair.
      const cdouble a = v(r, p);
      const cdouble b = v(r, p + 1);
      double theta = 0.0, phi = 0.0;
      if (std::abs(a) <= kZero) {
        theta = 0.0;  // already null; emit the mesh element anyway
      } else if (std::abs(b) <= kZero) {
        theta = std::numbers::pi;
      } else {
        theta = 2.0 * std::atan2(std::abs(a), std::abs(b));
        phi = std::arg(a) - std::arg(b) - std::numbers::pi / 2.0;
      }
      const double c = std::cos(theta / 2.0);
      const double s = std::sin(theta / 2.0);
      const cdouble ie_pos = cdouble(0.0, 1.0) * std::polar(1.0, phi);
      const cdouble ie_neg = cdouble(0.0, 1.0) * std::polar(1.0, -phi);
      // v <- v * T^dagger, touching only columns p and p+1.
      for (int i = 0; i < m; ++i) {
        const cdouble cp = v(i, p);
        const cdouble cq = v(i, p + 1);
        v(i, p) = c * cp - ie_pos * s * cq;
        v(i, p + 1) = -ie_neg * s * cp + c * cq;
      }
      circuit.elements.push_back(PlacedElement::bs(p, p + 1, theta, phi));
    }
  }
  // v is now diagonal with unit-modulus entries; realize them as phases.
  for (int i = 0; i < m; ++i) {
    const double w = std::arg(v(i, i));
    if (std::abs(w) > 1e-12)
      circuit.elements.push_back(PlacedElement::ps(i, w));
  }
  return circuit;
}

/// Rewrites a circuit's linear part as a Reck triangle, keeping the input,
/// herald and qubit map. Noise markers are not preserved; rewrite first.
inline OpticalCircuit reck_rewrite(const OpticalCircuit& circuit) {
  OpticalCircuit out = reck_decompose(transfer(circuit));
  out.input = circuit.input;
  out.herald = circuit.herald;
  out.qubit_map = circuit.qubit_map;
  return out;
}

}  // namespace nlo
