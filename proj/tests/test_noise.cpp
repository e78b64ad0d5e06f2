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

#include <unsupported/Eigen/MatrixFunctions>

#include <catch2/catch_amalgamated.hpp>

#include "nlo/noise.hpp"
#include "nlo/oracle.hpp"

using namespace nlo;
using Catch::Approx;

namespace {

double unitarity_error(const Eigen::MatrixXcd& m) {
  return (m * m.adjoint() -
          Eigen::MatrixXcd::Identity(m.rows(), m.rows()))
      .cwiseAbs()
      .maxCoeff();
}

double max_singular_value(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().maxCoeff();
}

}  // namespace

TEST_CASE("epsilon_from_p: fixed values", "[noise]") {
  CHECK(epsilon_from_p(0.0) == 0.0);
  // Analytic inversion: p = (1 - e^{-2})/2 gives eps = 1.
  CHECK(epsilon_from_p(0.5 * (1.0 - std::exp(-2.0))) == Approx(1.0).margin(1e-12));
  // High-precision evaluation of sqrt(-ln(0.98)/2).
  CHECK(epsilon_from_p(0.01) == Approx(0.10050549068961220).margin(1e-9));
  CHECK_THROWS_AS(epsilon_from_p(0.5), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_from_p(-0.1), std::invalid_argument);
}

TEST_CASE("epsilon_from_p is monotone increasing", "[noise]") {
  double prev = -1.0;
  for (double p = 0.0; p < 0.5; p += 0.01) {
    const double e = epsilon_from_p(p);
    CHECK(e > prev);
    prev = e;
  }
}

TEST_CASE("ics_covariance: limits and fixed angles", "[noise]") {
  const IcsCovariance zero = ics_covariance(0.0);
  CHECK(zero.var_c == 1.0);
  CHECK(zero.var_s == 0.0);
  CHECK(zero.cov == 0.0);

  const IcsCovariance pi_cov = ics_covariance(std::numbers::pi);
  CHECK(pi_cov.var_c == Approx(0.5).margin(1e-12));
  CHECK(pi_cov.var_s == Approx(0.5).margin(1e-12));
  CHECK(pi_cov.cov == Approx(0.0).margin(1e-12));

  const IcsCovariance half = ics_covariance(std::numbers::pi / 2.0);
  CHECK(half.var_c == Approx(0.5).margin(1e-12));
  CHECK(half.var_s == Approx(0.5).margin(1e-12));
  CHECK(half.cov == Approx(1.0 / std::numbers::pi).margin(1e-12));
}

TEST_CASE("ics_covariance: var_c + var_s = 1 always", "[noise]") {
  for (double t : {-7.0, -1.3, -1e-7, 0.0, 1e-8, 0.3, 2.0, 11.0}) {
    const IcsCovariance c = ics_covariance(t);
    CHECK(c.var_c + c.var_s == Approx(1.0).margin(1e-12));
    CHECK(c.var_c * c.var_s - c.cov * c.cov >= -1e-12);
  }
}

TEST_CASE("draw_ics: zero normals give (0, 0); theta 0 pins I_S", "[noise]") {
  // At theta_eff = 0 the covariance is degenerate: I_S == 0 exactly.
  DrawStream stream(123, 7, 0);
  for (int i = 0; i < 100; ++i) {
    const auto [ic, is] = draw_ics(0.0, 0.5, stream);
    (void)ic;
    CHECK(is == 0.0);
  }
}

TEST_CASE("draw_ics: sample covariance matches analytic at theta = pi/2",
          "[noise][statistical]") {
  const double theta = std::numbers::pi / 2.0;
  const std::int64_t n = 1000000;
  double scc = 0.0, sss = 0.0, scs = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    DrawStream stream(55, static_cast<std::uint64_t>(i), 0);
    const auto [ic, is] = draw_ics(theta, 1.0, stream);
    scc += ic * ic;
    sss += is * is;
    scs += ic * is;
  }
  const IcsCovariance expect = ics_covariance(theta);
  const double se2 = std::sqrt(2.0 / n);  // relative error scale of moments
  CHECK(scc / n == Approx(expect.var_c).margin(3.0 * se2 * expect.var_c));
  CHECK(sss / n == Approx(expect.var_s).margin(3.0 * se2 * expect.var_s));
  CHECK(scs / n == Approx(expect.cov).margin(3.0 * se2));
}

TEST_CASE("noisy_phase_shifter: noiseless limit and direct substitution",
          "[noise]") {
  StochasticDraw d;
  const Eigen::MatrixXcd ideal = noisy_phase_shifter(0.9, 0.0, d).matrix();
  CHECK(std::abs(ideal(0, 0) - std::polar(1.0, 0.9)) < 1e-15);
  CHECK(std::abs(ideal(1, 1) - cdouble(1.0)) < 1e-15);
  CHECK(std::abs(ideal(0, 1)) == 0.0);

  // theta = 0, eps*I_C = pi/2, I_S = 0 swaps the photon into the virtual mode.
  d.ic0 = std::numbers::pi / 2.0;
  d.is0 = 0.0;
  const Eigen::MatrixXcd swap = noisy_phase_shifter(0.0, 1.0, d).matrix();
  CHECK(std::abs(swap(0, 0)) < 1e-12);
  CHECK(std::abs(swap(0, 1) - cdouble(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(swap(1, 0) - cdouble(0.0, 1.0)) < 1e-12);
}

TEST_CASE("noisy elements: unitary for any draws, ideal at eps = 0",
          "[noise]") {
  DrawStream stream(77, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    StochasticDraw d;
    std::tie(d.ic0, d.is0) = stream.normal_pair();
    std::tie(d.ic1, d.is1) = stream.normal_pair();
    std::tie(d.wx, d.wy) = stream.normal_pair();
    d.wz = stream.normal();
    d.w = stream.normal();
    const double theta = 6.0 * (stream.uniform() - 0.5);
    const double phi = 6.0 * (stream.uniform() - 0.5);
    const double eps = 0.4 * stream.uniform();

    CHECK(unitarity_error(noisy_phase_shifter(theta, eps, d).matrix()) < 1e-12);
    CHECK(unitarity_error(
              noisy_beam_splitter(theta, phi, eps, eps, d).matrix()) < 1e-12);
    CHECK(unitarity_error(depolarization_layer(eps, d).matrix()) < 1e-12);

    CHECK(max_singular_value(
              noisy_phase_shifter_traced(theta, eps, d).matrix()) <=
          1.0 + 1e-12);
    CHECK(max_singular_value(
              noisy_beam_splitter_traced(theta, phi, eps, eps, d).matrix()) <=
          1.0 + 1e-12);
    CHECK(std::abs(loss_channel_traced(eps, d).matrix()(0, 0)) <= 1.0);
  }

  // eps = 0 reproduces the ideal elements exactly.
  StochasticDraw d;
  std::tie(d.ic0, d.is0) = stream.normal_pair();
  std::tie(d.ic1, d.is1) = stream.normal_pair();
  d.w = stream.normal();
  CHECK((noisy_beam_splitter_traced(1.3, 0.4, 0.0, 0.0, d).matrix() -
         bs_matrix2(1.3, 0.4))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(noisy_phase_shifter_traced(0.7, 0.0, d).matrix()(0, 0) ==
        std::polar(1.0, 0.7));
  CHECK(loss_channel_traced(0.0, d).matrix()(0, 0) == cdouble(1.0));
  CHECK((depolarization_layer(0.0, d).matrix() -
         Eigen::MatrixXcd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("noisy_phase_shifter_traced: fixed draw values", "[noise]") {
  StochasticDraw d;
  d.ic0 = std::numbers::pi / 3.0;
  d.is0 = 0.0;
  CHECK(std::abs(noisy_phase_shifter_traced(0.0, 1.0, d).matrix()(0, 0) -
                 cdouble(0.5)) < 1e-12);
}

TEST_CASE("noisy_beam_splitter_traced: diagonal damping structure",
          "[noise]") {
  StochasticDraw d;
  d.ic0 = 0.3;
  d.is0 = 0.7;
  d.ic1 = -0.4;
  d.is1 = 1.1;
  const double eps0 = 0.2, eps1 = 0.3;
  const auto [d0, d1] = traced_bs_damping(eps0, eps1, d);
  CHECK(d0 == Approx(std::cos(eps0 * d.ic0) * std::cos(eps1 * d.is1)));
  CHECK(d1 == Approx(std::cos(eps0 * d.is0) * std::cos(eps1 * d.ic1)));
  // theta = 0: the traced matrix is exactly diag(d0, d1).
  const Eigen::MatrixXcd m =
      noisy_beam_splitter_traced(0.0, 0.0, eps0, eps1, d).matrix();
  CHECK(std::abs(m(0, 0) - cdouble(d0)) < 1e-15);
  CHECK(std::abs(m(1, 1) - cdouble(d1)) < 1e-15);
  CHECK(std::abs(m(0, 1)) == 0.0);
}

TEST_CASE("depolarization_layer: fixed draws give Pauli actions", "[noise]") {
  StochasticDraw d;
  d.wx = std::numbers::pi;  // eps = 1
  const Eigen::MatrixXcd flip = depolarization_layer(1.0, d).matrix();
  CHECK((flip + Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-12);  // -I: identity up to global phase

  StochasticDraw d2;
  d2.wx = std::numbers::pi / 2.0;
  const Eigen::MatrixXcd x = depolarization_layer(1.0, d2).matrix();
  CHECK(std::abs(x(0, 1) - cdouble(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(x(1, 0) - cdouble(0.0, 1.0)) < 1e-12);
  CHECK(std::abs(x(0, 0)) < 1e-12);
}

TEST_CASE("loss_channel_traced: fixed draws", "[noise]") {
  StochasticDraw d;
  CHECK(loss_channel_traced(0.0, d).matrix()(0, 0) == cdouble(1.0));
  d.w = std::numbers::pi / 2.0;
  CHECK(std::abs(loss_channel_traced(1.0, d).matrix()(0, 0)) < 1e-12);
}

TEST_CASE("loss calibration: E[cos^2(eps W)] = 1 - p", "[noise][statistical]") {
  for (double p : {0.01, 0.05, 0.1}) {
    const double eps = epsilon_from_p(p);
    const double expected = 0.5 * (1.0 + std::exp(-2.0 * eps * eps));
    CHECK(expected == Approx(1.0 - p).margin(1e-12));

    const std::int64_t n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      DrawStream stream(99, static_cast<std::uint64_t>(i), 0);
      const double c2 = std::pow(std::cos(eps * stream.normal()), 2);
      sum += c2;
      sum_sq += c2 * c2;
    }
    const double mean = sum / n;
    const double se = std::sqrt(
        std::max(0.0, sum_sq / n - mean * mean) / n);
    CHECK(mean == Approx(expected).margin(3.0 * se + 1e-12));
  }
}

TEST_CASE("traced PS second moment matches 1 - eps^2 at small eps",
          "[noise][statistical]") {
  const double theta = 1.1;
  const double eps = 0.05;
  const std::int64_t n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    DrawStream stream(7, static_cast<std::uint64_t>(i), 0);
    const auto [ic, is] = draw_ics(theta, eps, stream);
    const double a = std::cos(eps * ic) * std::cos(eps * is);
    sum += a * a;
    sum_sq += a * a * a * a;
  }
  const double mean = sum / n;
  const double se =
      std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n);
  // E[cos^2 cos^2] = 1 - eps^2 (var_c + var_s) + O(eps^4) = 1 - eps^2 + ...
  CHECK(mean == Approx(1.0 - eps * eps).margin(3.0 * se + 2e-5));
}

TEST_CASE("factored noise product: commutator-corrected cubic scaling",
          "[noise]") {
  // The perturbative split e^{eps(A+B)} ~ e^{eps A} e^{eps B} carries a BCH
  // error (eps^2/2)[A, B]; with A = i I_C X and B = -i I_S Y the raw
  // difference is eps^2 |I_C I_S| at leading order, and subtracting the
  // commutator term leaves a cubic residual.
  const double ic = 0.83, is = -0.62;
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 1, 1, 0;
  sy << 0, cdouble(0, -1), cdouble(0, 1), 0;
  sz << 1, 0, 0, -1;
  const cdouble i(0.0, 1.0);

  std::vector<double> eps_grid{0.01, 0.02, 0.05};
  std::vector<double> corrected;
  for (double eps : eps_grid) {
    const Eigen::Matrix2cd factored = rot_b(eps * ic) * rot_c(eps * is);
    const Eigen::Matrix2cd generator = i * eps * (ic * sx - is * sy);
    const Eigen::Matrix2cd direct = generator.exp();
    const double raw = (factored - direct).cwiseAbs().maxCoeff();
    const double predicted = eps * eps * std::abs(ic * is);
    CHECK(raw == Approx(predicted).epsilon(0.15));

    const Eigen::Matrix2cd commutator_term = i * eps * eps * ic * is * sz;
    corrected.push_back(
        (factored - direct - commutator_term).cwiseAbs().maxCoeff());
  }
  // Cubic scaling of the corrected residual: slope ~ 3 on the log-log grid.
  const double slope = std::log(corrected.back() / corrected.front()) /
                       std::log(eps_grid.back() / eps_grid.front());
  CHECK(slope > 2.7);
  CHECK(slope < 3.3);
}

TEST_CASE("gaussian_cos_moment agrees with quadrature", "[noise]") {
  const GaussHermiteRule rule = gauss_hermite_normal(41);
  const double vx = 0.23, vy = 0.11, c = 0.08;
  // Correlated pair via Cholesky of [[vx, c], [c, vy]].
  const double l00 = std::sqrt(vx);
  const double l10 = c / l00;
  const double l11 = std::sqrt(vy - l10 * l10);
  for (int a : {0, 1, 2, 3, 4}) {
    for (int b : {0, 1, 2, 4}) {
      double quad = 0.0;
      for (std::size_t p = 0; p < rule.nodes.size(); ++p) {
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double x = l00 * rule.nodes[p];
          const double y = l10 * rule.nodes[p] + l11 * rule.nodes[q];
          quad += rule.weights[p] * rule.weights[q] *
                  std::pow(std::cos(x), a) * std::pow(std::cos(y), b);
        }
      }
      CHECK(gaussian_cos_moment(a, b, vx, vy, c) ==
            Approx(quad).margin(1e-12));
    }
  }
}

TEST_CASE("sample_element_draw consumes a fixed layout per kind", "[noise]") {
  // Identical streams must give identical draws; different element indices
  // must decorrelate.
  DrawStream s1(42, 9, 3);
  DrawStream s2(42, 9, 3);
  const StochasticDraw a =
      sample_element_draw(ElementKind::BeamSplitter, 1.0, 0.1, s1);
  const StochasticDraw b =
      sample_element_draw(ElementKind::BeamSplitter, 1.0, 0.1, s2);
  CHECK(a.ic0 == b.ic0);
  CHECK(a.is1 == b.is1);
  DrawStream s3(42, 9, 4);
  const StochasticDraw c =
      sample_element_draw(ElementKind::BeamSplitter, 1.0, 0.1, s3);
  CHECK(a.ic0 != c.ic0);
}
