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

#include "nlo/engine.hpp"

namespace nlo {

/// Hellinger distance between the readout distributions (diagonals):
/// H = sqrt(sum_k (sqrt(rho_kk) - sqrt(sigma_kk))^2) / sqrt(2).
inline double hellinger(const Eigen::VectorXd& rho_diag,
                        const Eigen::VectorXd& sigma_diag) {
  if (rho_diag.size() != sigma_diag.size())
    throw std::invalid_argument("hellinger: dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index k = 0; k < rho_diag.size(); ++k) {
    const double p = rho_diag(k);
    const double q = sigma_diag(k);
    if (p < -1e-12 || q < -1e-12)
      throw std::invalid_argument("hellinger: negative probability");
    const double d = std::sqrt(std::max(0.0, p)) - std::sqrt(std::max(0.0, q));
    sum += d * d;
  }
  return std::sqrt(sum / 2.0);
}

inline double hellinger(const DensityMatrix& rho, const DensityMatrix& sigma) {
  return hellinger(rho.diagonal(), sigma.diagonal());
}

/// F = (1 - H^2)^2.
inline double fidelity_from_hellinger(double h) {
  if (!(h >= 0.0 && h <= 1.0))
    throw std::invalid_argument("fidelity_from_hellinger: H must be in [0, 1]");
  const double t = 1.0 - h * h;
  return t * t;
}

}  // namespace nlo
