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

#include <sstream>

#include "nlo/oracle.hpp"

namespace nlo {

struct ValidationCase {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Standard two-mode validation circuits (one photon, one dual-rail qubit).
inline OpticalCircuit validation_ps_circuit() {
  OpticalCircuit c(2);
  c.elements.push_back(PlacedElement::ps(0, 0.7));
  c.elements.push_back(PlacedElement::bs(0, 1, std::numbers::pi / 3.0, 0.2));
  c.elements.push_back(PlacedElement::ps(1, -0.4));
  c.input = {1, 0};
  c.qubit_map = {{0, 1}};
  return c;
}

inline OpticalCircuit validation_bs_circuit() {
  OpticalCircuit c(2);
  c.elements.push_back(PlacedElement::bs(0, 1, 1.1, 0.0));
  c.input = {1, 0};
  c.qubit_map = {{0, 1}};
  return c;
}

inline OpticalCircuit validation_two_photon_circuit() {
  OpticalCircuit c(4);
  c.elements.push_back(PlacedElement::bs(0, 1, 0.9, 0.0));
  c.elements.push_back(PlacedElement::bs(1, 2, std::numbers::pi / 2.0, 0.0));
  c.elements.push_back(PlacedElement::bs(2, 3, 0.6, 0.0));
  c.input = {1, 0, 1, 0};
  c.qubit_map = {{0, 1}, {2, 3}};
  return c;
}

/// Monte-Carlo check of E[cos^2(eps W)] = (1 + e^{-2 eps^2})/2 = 1 - p.
inline ValidationCase check_loss_calibration(double p, std::int64_t draws,
                                             std::uint64_t seed) {
  const double eps = epsilon_from_p(p);
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    DrawStream stream(seed, static_cast<std::uint64_t>(i), 0);
    const double c = std::cos(eps * stream.normal());
    sum += c * c;
    sum_sq += c * c * c * c;
  }
  const double mean = sum / draws;
  const double var = std::max(0.0, sum_sq / draws - mean * mean);
  const double se = std::sqrt(var / draws);
  const double expected = 0.5 * (1.0 + std::exp(-2.0 * eps * eps));
  const double dev = std::abs(mean - expected);
  ValidationCase out;
  std::ostringstream os;
  os << "p=" << p << " mc=" << mean << " analytic=" << expected
     << " dev=" << dev << " 3se=" << 3.0 * se;
  out.name = "loss calibration E[cos^2]";
  out.detail = os.str();
  out.pass = dev <= 3.0 * se + 1e-12 &&
             std::abs(expected - (1.0 - p)) < 1e-12;
  return out;
}

/// Monte-Carlo check of the draw_ics sample covariance against the analytic
/// ics_covariance at a given effective angle.
inline ValidationCase check_ics_covariance(double theta, std::int64_t draws,
                                           std::uint64_t seed) {
  double sc = 0.0, ss = 0.0, scc = 0.0, sss_ = 0.0, scs = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    DrawStream stream(seed, static_cast<std::uint64_t>(i), 1);
    const auto [ic, is] = draw_ics(theta, 1.0, stream);
    sc += ic;
    ss += is;
    scc += ic * ic;
    sss_ += is * is;
    scs += ic * is;
  }
  const double n = static_cast<double>(draws);
  const double var_c = scc / n - (sc / n) * (sc / n);
  const double var_s = sss_ / n - (ss / n) * (ss / n);
  const double cov = scs / n - (sc / n) * (ss / n);
  const IcsCovariance expect = ics_covariance(theta);
  // Standard errors of second moments of Gaussians: Var[x^2] = 2 Vx^2,
  // Var[xy] = Vx Vy + Cxy^2.
  const double se_c = std::sqrt(2.0 * expect.var_c * expect.var_c / n) + 1e-15;
  const double se_s = std::sqrt(2.0 * expect.var_s * expect.var_s / n) + 1e-15;
  const double se_x =
      std::sqrt((expect.var_c * expect.var_s + expect.cov * expect.cov) / n) +
      1e-15;
  ValidationCase out;
  out.name = "draw_ics covariance";
  std::ostringstream os;
  os << "theta=" << theta << " var_c dev=" << std::abs(var_c - expect.var_c)
     << "/" << 3 * se_c << " var_s dev=" << std::abs(var_s - expect.var_s)
     << "/" << 3 * se_s << " cov dev=" << std::abs(cov - expect.cov) << "/"
     << 3 * se_x;
  out.detail = os.str();
  out.pass = std::abs(var_c - expect.var_c) <= 3.0 * se_c &&
             std::abs(var_s - expect.var_s) <= 3.0 * se_s &&
             std::abs(cov - expect.cov) <= 3.0 * se_x;
  return out;
}

inline ValidationCase check_oracle(const std::string& name,
                                   const OpticalCircuit& circuit,
                                   const NoiseModel& noise,
                                   std::int64_t samples, std::uint64_t seed,
                                   int threads) {
  const OracleComparison cmp =
      compare_with_oracle(circuit, noise, {samples, seed, false}, threads);
  ValidationCase out;
  out.name = "oracle equivalence: " + name;
  std::ostringstream os;
  os << "max|dev|=" << cmp.max_abs_dev
     << " dev/(3se)=" << cmp.max_sigma_ratio;
  out.detail = os.str();
  out.pass = cmp.within(0.01);
  return out;
}

inline std::vector<ValidationCase> run_validation_suite(std::int64_t samples,
                                                        std::uint64_t seed,
                                                        int threads = 1) {
  std::vector<ValidationCase> cases;
  for (double p : {0.01, 0.05, 0.1})
    cases.push_back(check_loss_calibration(p, 100000, derive_seed(seed, 11)));
  for (double theta : {0.0, std::numbers::pi / 2.0, std::numbers::pi})
    cases.push_back(check_ics_covariance(theta, 1000000, derive_seed(seed, 12)));
  cases.push_back(check_oracle("lossy phase shifter",
                               validation_ps_circuit(),
                               NoiseModel::loss_only(0.05), samples,
                               derive_seed(seed, 13), threads));
  cases.push_back(check_oracle("lossy beam splitter",
                               validation_bs_circuit(),
                               NoiseModel::loss_only(0.05), samples,
                               derive_seed(seed, 14), threads));
  cases.push_back(check_oracle("depolarization layer",
                               validation_bs_circuit(),
                               NoiseModel::dep_only(0.05), samples,
                               derive_seed(seed, 15), threads));
  cases.push_back(check_oracle("two-photon mixed noise",
                               validation_two_photon_circuit(),
                               NoiseModel{0.02, 0.02, 0.02}, samples / 2,
                               derive_seed(seed, 16), threads));
  return cases;
}

}  // namespace nlo
