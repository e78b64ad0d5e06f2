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
#include <stdexcept>
#include <utility>

#include "nlo/circuit.hpp"
#include "nlo/rng.hpp"

namespace nlo {

// ---------------------------------------------------------------------------
// Noise-strength calibration. With the element duration normalized to
// dt = 1, the loss (or depolarization) probability p fixes the stochastic
// coupling as eps = sqrt(-ln(1 - 2p) / 2), i.e. E[sin^2(eps W)] = p for a
// standard normal W.
// ---------------------------------------------------------------------------
inline double epsilon_from_p(double p) {
  if (!(p >= 0.0 && p < 0.5))
    throw std::invalid_argument("epsilon_from_p: p must be in [0, 0.5)");
  return std::sqrt(-std::log1p(-2.0 * p) / 2.0);
}

struct EpsilonParams {
  double p = 0.0;
  double eps = 0.0;
  static EpsilonParams from_p(double p) { return {p, epsilon_from_p(p)}; }
};

// ---------------------------------------------------------------------------
// Covariance of the stochastic integrals I_C = int dW cos(theta_eff s) and
// I_S = int dW sin(theta_eff s) over s in [0, 1]:
//   Var[I_C] = 1/2 + sin(2t)/(4t),  Var[I_S] = 1/2 - sin(2t)/(4t),
//   Cov      = sin^2(t)/(2t),       with the (1, 0, 0) limit at t = 0.
// ---------------------------------------------------------------------------
struct IcsCovariance {
  double var_c;
  double var_s;
  double cov;
};

inline IcsCovariance ics_covariance(double theta_eff) {
  if (!std::isfinite(theta_eff))
    throw std::invalid_argument("ics_covariance: angle must be finite");
  const double t = theta_eff;
  if (std::abs(t) < 1e-6) {
    // Series around t = 0; keeps var_s >= 0 and the limits exact.
    return {1.0 - t * t / 3.0, t * t / 3.0, t / 2.0 - t * t * t / 6.0};
  }
  const double half_sinc = std::sin(2.0 * t) / (4.0 * t);
  const double s = std::sin(t);
  return {0.5 + half_sinc, 0.5 - half_sinc, s * s / (2.0 * t)};
}

/// Correlated draw of (I_C, I_S) via the 2x2 Cholesky factor of the
/// covariance above. Deterministic given the stream state.
inline std::pair<double, double> draw_ics(double theta_eff, double eps,
                                          DrawStream& stream) {
  if (eps < 0.0) throw std::invalid_argument("draw_ics: eps must be >= 0");
  const IcsCovariance c = ics_covariance(theta_eff);
  const double l00 = std::sqrt(c.var_c);
  const double l10 = c.cov / l00;
  const double l11 = std::sqrt(std::max(0.0, c.var_s - l10 * l10));
  const auto [z1, z2] = stream.normal_pair();
  return {l00 * z1, l10 * z1 + l11 * z2};
}

// Per-trajectory Gaussian values for one element. I_C/I_S pairs carry the
// ics covariance per physical mode of a lossy element; the Wiener values for
// depolarization and free loss are standard normals (dt = 1).
struct StochasticDraw {
  double ic0 = 0.0, is0 = 0.0;
  double ic1 = 0.0, is1 = 0.0;
  double wx = 0.0, wy = 0.0, wz = 0.0;
  double w = 0.0;
};

/// Samples the draw for one placed element; the number and order of stream
/// consumptions is fixed per element kind (reproducibility contract).
inline StochasticDraw sample_element_draw(ElementKind kind, double theta,
                                          double eps, DrawStream& stream) {
  StochasticDraw d;
  switch (kind) {
    case ElementKind::PhaseShifter:
      std::tie(d.ic0, d.is0) = draw_ics(theta, eps, stream);
      break;
    case ElementKind::BeamSplitter:
      // Half-angle inside the stochastic integrals, matching B_{j2}(s).
      std::tie(d.ic0, d.is0) = draw_ics(theta / 2.0, eps, stream);
      std::tie(d.ic1, d.is1) = draw_ics(theta / 2.0, eps, stream);
      break;
    case ElementKind::DepolarizationLayer:
      std::tie(d.wx, d.wy) = stream.normal_pair();
      d.wz = stream.normal();
      break;
    case ElementKind::LossChannel:
      d.w = stream.normal();
      break;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Rotation factors appearing in the noisy-gate products:
//   rot_b(x) = [[cos x, i sin x], [i sin x, cos x]]
//   rot_c(x) = [[cos x, -sin x], [sin x,  cos x]]
// ---------------------------------------------------------------------------
inline Eigen::Matrix2cd rot_b(double x) {
  const cdouble i(0.0, 1.0);
  Eigen::Matrix2cd m;
  m << std::cos(x), i * std::sin(x), i * std::sin(x), std::cos(x);
  return m;
}

inline Eigen::Matrix2cd rot_c(double x) {
  Eigen::Matrix2cd m;
  m << std::cos(x), -std::sin(x), std::sin(x), std::cos(x);
  return m;
}

// Scalar cores shared with the trajectory engine's fast path.

/// Traced noisy phase shifter entry: e^{i theta} cos(eps I_C) cos(eps I_S).
inline cdouble traced_ps_entry(double theta, double eps,
                               const StochasticDraw& d) {
  return std::polar(1.0, theta) * std::cos(eps * d.ic0) *
         std::cos(eps * d.is0);
}

/// Diagonal damping of the traced noisy beam splitter; note the cross pairing
/// of mode-1 integrals into the mode-0 factor and vice versa.
inline std::pair<double, double> traced_bs_damping(double eps0, double eps1,
                                                   const StochasticDraw& d) {
  return {std::cos(eps0 * d.ic0) * std::cos(eps1 * d.is1),
          std::cos(eps0 * d.is0) * std::cos(eps1 * d.ic1)};
}

// ---------------------------------------------------------------------------
// Noisy elements. The untraced forms carry an explicit virtual mode (last
// index) and are exactly unitary for any draws; the traced forms are the
// engine's defaults, with singular values <= 1.
// ---------------------------------------------------------------------------

/// Noisy phase shifter with virtual mode: diag(e^{i theta}, 1) *
/// rot_b(eps I_C) * rot_c(eps I_S).
inline ModeTransfer noisy_phase_shifter(double theta, double eps,
                                        const StochasticDraw& d) {
  Eigen::Matrix2cd phase = Eigen::Matrix2cd::Identity();
  phase(0, 0) = std::polar(1.0, theta);
  Eigen::MatrixXcd m = phase * rot_b(eps * d.ic0) * rot_c(eps * d.is0);
  return ModeTransfer::unchecked(std::move(m), false);
}

inline ModeTransfer noisy_phase_shifter_traced(double theta, double eps,
                                               const StochasticDraw& d) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = traced_ps_entry(theta, eps, d);
  return ModeTransfer::unchecked(std::move(m), true);
}

/// Noisy beam splitter with virtual mode 2, the five-factor product with the
/// leading block the ideal bs_matrix(theta, phi).
inline ModeTransfer noisy_beam_splitter(double theta, double phi, double eps0,
                                        double eps1, const StochasticDraw& d) {
  auto embed3 = [](const Eigen::Matrix2cd& b, int i, int j) {
    Eigen::Matrix3cd m = Eigen::Matrix3cd::Identity();
    m(i, i) = b(0, 0);
    m(i, j) = b(0, 1);
    m(j, i) = b(1, 0);
    m(j, j) = b(1, 1);
    return m;
  };
  Eigen::Matrix3cd ideal = Eigen::Matrix3cd::Identity();
  ideal.topLeftCorner<2, 2>() = bs_matrix2(theta, phi);
  Eigen::MatrixXcd m = ideal * embed3(rot_b(eps0 * d.ic0), 0, 2) *
                       embed3(rot_c(eps0 * d.is0), 1, 2) *
                       embed3(rot_b(eps1 * d.ic1), 1, 2) *
                       embed3(rot_c(eps1 * d.is1), 0, 2);
  return ModeTransfer::unchecked(std::move(m), false);
}

inline ModeTransfer noisy_beam_splitter_traced(double theta, double phi,
                                               double eps0, double eps1,
                                               const StochasticDraw& d) {
  const auto [d0, d1] = traced_bs_damping(eps0, eps1, d);
  Eigen::MatrixXcd m = bs_matrix2(theta, phi) *
                       Eigen::Vector2cd(d0, d1).asDiagonal().toDenseMatrix();
  return ModeTransfer::unchecked(std::move(m), true);
}

/// Depolarization layer on two physical modes (no virtual mode):
/// rot_b(eps W_x) * rot_c(eps W_y) * diag(1, e^{i eps W_z}).
inline Eigen::Matrix2cd depolarization_matrix(double eps_d,
                                              const StochasticDraw& d) {
  Eigen::Matrix2cd z = Eigen::Matrix2cd::Identity();
  z(1, 1) = std::polar(1.0, eps_d * d.wz);
  return rot_b(eps_d * d.wx) * rot_c(eps_d * d.wy) * z;
}

inline ModeTransfer depolarization_layer(double eps_d,
                                         const StochasticDraw& d) {
  return ModeTransfer::unchecked(depolarization_matrix(eps_d, d), false);
}

/// Traced lossy guide/detector: [cos(eps W)].
inline ModeTransfer loss_channel_traced(double eps, const StochasticDraw& d) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = std::cos(eps * d.w);
  return ModeTransfer::unchecked(std::move(m), true);
}

}  // namespace nlo
