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

#include "nlo/gbqc.hpp"

namespace nlo {

/// Measurement angle for an X-axis rotation by alpha given the first
/// outcome: theta = (-1)^(1+s1) * alpha.
inline double rotation_angle(double alpha, int s1) {
  return (s1 ? 1.0 : -1.0) * alpha;
}

// Single-qubit measurement specification. X is the XY-plane measurement at
// angle zero; XY(theta) measures in the eigenbasis of cos(theta) X +
// sin(theta) Y.
struct MeasurementStep {
  enum class Basis { X, XY };
  Basis basis = Basis::X;
  double angle = 0.0;

  static MeasurementStep x() { return {Basis::X, 0.0}; }
  static MeasurementStep xy(double angle) { return {Basis::XY, angle}; }
};

struct BranchOutcome {
  int outcome = 0;          // 0: photon on the first rail, 1: second rail
  double probability = 0.0; // squared norm of the unnormalized collapse
  FockState collapsed;      // measured pair removed; not renormalized
};

// ---------------------------------------------------------------------------
// Dual-rail measurement: rotate the pair into the computational basis
// (X basis: H block; XY(theta): PS(-theta) on the second rail then H), then
// detect the photon position. Terms outside the pair's dual-rail subspace
// are dropped; their weight is the difference between the input norm and the
// branch probabilities.
// ---------------------------------------------------------------------------
inline std::vector<BranchOutcome> measure_dual_rail(
    const FockState& state, std::pair<int, int> rails,
    const MeasurementStep& step) {
  Eigen::Matrix2cd h;
  h << 1.0, 1.0, 1.0, -1.0;
  h /= std::numbers::sqrt2;
  Eigen::Matrix2cd rot = h;
  if (step.basis == MeasurementStep::Basis::XY) {
    Eigen::Matrix2cd phase = Eigen::Matrix2cd::Identity();
    phase(1, 1) = std::polar(1.0, -step.angle);
    rot = h * phase;
  }

  FockState rotated = state;
  FockState scratch(state.mode_count());
  const int photons = state.total_photons().value_or(0);
  apply_pair(rotated, rails.first, rails.second, pair_lifts(rot, photons),
             scratch);

  std::vector<std::optional<int>> pattern(state.mode_count(), std::nullopt);
  std::vector<BranchOutcome> branches;
  for (int outcome : {0, 1}) {
    pattern[rails.first] = outcome == 0 ? 1 : 0;
    pattern[rails.second] = outcome == 0 ? 0 : 1;
    PostSelectResult sel = post_select(rotated, pattern);
    branches.push_back({outcome, sel.probability, std::move(sel.state)});
  }
  return branches;
}

// Sequential measurement bookkeeping over a cluster state: tracks which
// qubits are consumed and where the surviving pairs moved after each
// collapse removes two modes.
class ClusterRun {
 public:
  ClusterRun(FockState state, std::vector<std::pair<int, int>> pairs)
      : state_(std::move(state)),
        pairs_(std::move(pairs)),
        consumed_(pairs_.size(), false) {}

  std::vector<BranchOutcome> measure(int qubit, const MeasurementStep& step) const {
    check_live(qubit);
    return measure_dual_rail(state_, pairs_[qubit], step);
  }

  /// Adopts one branch: the measured pair's modes disappear and remaining
  /// pair indices shift down.
  void collapse(int qubit, BranchOutcome branch) {
    check_live(qubit);
    const auto [a, b] = pairs_[qubit];
    state_ = std::move(branch.collapsed);
    consumed_[qubit] = true;
    for (std::size_t q = 0; q < pairs_.size(); ++q) {
      if (consumed_[q]) continue;
      auto shift = [&](int m) { return m - (m > a) - (m > b); };
      pairs_[q] = {shift(pairs_[q].first), shift(pairs_[q].second)};
    }
  }

  const FockState& state() const { return state_; }
  std::pair<int, int> rails(int qubit) const {
    check_live(qubit);
    return pairs_[qubit];
  }

 private:
  void check_live(int qubit) const {
    if (qubit < 0 || qubit >= static_cast<int>(pairs_.size()))
      throw std::invalid_argument("ClusterRun: qubit out of range");
    if (consumed_[qubit])
      throw std::invalid_argument("ClusterRun: qubit already consumed");
  }

  FockState state_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<bool> consumed_;
};

// ---------------------------------------------------------------------------
// Cluster preparation for the MBQC X gate: q0 = |0>, q1 = q2 = |+>, heralded
// CZ(0,1) and CZ(1,2), with the linear part rewritten as a Reck triangle.
// 6 system modes plus 8 herald ancillas.
// ---------------------------------------------------------------------------
inline OpticalCircuit cluster_x_circuit() {
  OpticalCircuit c(14);
  for (int q = 0; q < 3; ++q) {
    c.input[2 * q] = 1;
    c.qubit_map.emplace_back(2 * q, 2 * q + 1);
  }
  for (const PlacedElement& e : h_gate_block(2, 3)) c.elements.push_back(e);
  for (const PlacedElement& e : h_gate_block(4, 5)) c.elements.push_back(e);
  int ancilla_base = 6;
  for (const auto& [qa, qb] : {std::pair{0, 1}, std::pair{1, 2}}) {
    const HeraldedCzBlock block =
        heralded_cz_block(2 * qa + 1, 2 * qb + 1, ancilla_base);
    for (const PlacedElement& e : block.elements) c.elements.push_back(e);
    for (int i = 0; i < 4; ++i) {
      c.input[block.ancilla_modes[i]] = block.ancilla_input[i];
      c.herald[block.ancilla_modes[i]] = block.herald[i];
    }
    ancilla_base += 4;
  }
  c.validate();
  return reck_rewrite(c);
}

// One fully-resolved measurement branch of the X-gate pattern, with the
// byproduct correction Z^{s1} X^{s2} already applied to the output qubit.
struct MbqcBranch {
  int s1 = 0, s2 = 0;
  double probability = 0.0;       // unnormalized branch weight
  Eigen::Vector2cd corrected;     // unnormalized corrected output amplitudes
  double discarded = 0.0;
};

namespace detail {

inline Eigen::Vector2cd correct_byproduct(Eigen::Vector2cd c, int s1, int s2) {
  if (s2) std::swap(c(0), c(1));           // X^{s2}
  if (s1) c(1) = -c(1);                    // then Z^{s1}
  return c;
}

inline MbqcBranch resolve_branch(const ClusterRun& base, int s1,
                                 const BranchOutcome& b1, int s2,
                                 const BranchOutcome& b2) {
  ClusterRun run = base;
  run.collapse(0, b1);
  ClusterRun run2 = run;
  run2.collapse(1, b2);
  const std::vector<std::pair<int, int>> out_pair{run2.rails(2)};
  DualRailDecoded dec = dual_rail_decode(run2.state(), out_pair);
  MbqcBranch branch;
  branch.s1 = s1;
  branch.s2 = s2;
  branch.probability = b2.probability;
  branch.corrected = correct_byproduct(
      Eigen::Vector2cd(dec.amplitudes(0), dec.amplitudes(1)), s1, s2);
  branch.discarded = dec.discarded_weight;
  return branch;
}

}  // namespace detail

/// All four (s1, s2) branches of the X-gate measurement pattern on a
/// heralded 6-mode cluster state. Exact; used for noiseless runs and tests.
inline std::vector<MbqcBranch> mbqc_x_branches(const FockState& heralded) {
  ClusterRun base(heralded, {{0, 1}, {2, 3}, {4, 5}});
  std::vector<MbqcBranch> out;
  const auto first = base.measure(0, MeasurementStep::x());
  for (const BranchOutcome& b1 : first) {
    ClusterRun after1 = base;
    after1.collapse(0, b1);
    const double theta = rotation_angle(std::numbers::pi, b1.outcome);
    const auto second = after1.measure(1, MeasurementStep::xy(theta));
    for (const BranchOutcome& b2 : second)
      out.push_back(detail::resolve_branch(base, b1.outcome, b1, b2.outcome, b2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MBQC X-gate experiment. Noisy cluster preparation per trajectory, herald,
// two adaptive measurements, byproduct correction, trajectory averaging.
// Noiseless runs enumerate all branches exactly; noisy runs sample one
// branch per measurement with unbiased reweighting.
// ---------------------------------------------------------------------------
inline DensityMatrix run_mbqc_x(const NoiseModel& noise, const RunConfig& cfg,
                                int threads = 1, RunStats* stats = nullptr) {
  static const OpticalCircuit base_circuit = cluster_x_circuit();
  const CompiledCircuit compiled(build_noisy_circuit(base_circuit, noise));
  const int n_elements = compiled.element_count();
  const std::int64_t n_effective = compiled.any_noise() ? cfg.n_samples : 1;

  auto per_traj = [&](std::int64_t t) -> TrajectoryContribution {
    FockState scratch(compiled.circuit().mode_count);
    FockState state = compiled.run_trajectory(cfg.master_seed,
                                              static_cast<std::uint64_t>(t),
                                              scratch);
    PostSelectResult sel = post_select(state, compiled.circuit().herald);
    TrajectoryContribution con;
    con.herald_weight = sel.probability;
    if (sel.probability <= 0.0) {
      con.amplitudes = Eigen::VectorXcd::Zero(2);
      return con;
    }

    if (!compiled.any_noise()) {
      // Exact branch enumeration.
      Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
      double discarded = 0.0;
      for (const MbqcBranch& b : mbqc_x_branches(sel.state)) {
        rho.noalias() += b.corrected * b.corrected.adjoint();
        discarded += b.discarded;
      }
      con.direct = std::move(rho);
      con.discarded = discarded;
      return con;
    }

    ClusterRun run(sel.state, {{0, 1}, {2, 3}, {4, 5}});
    DrawStream pick1(cfg.master_seed, static_cast<std::uint64_t>(t),
                     static_cast<std::uint32_t>(n_elements));
    DrawStream pick2(cfg.master_seed, static_cast<std::uint64_t>(t),
                     static_cast<std::uint32_t>(n_elements + 1));

    const auto first = run.measure(0, MeasurementStep::x());
    const double p1_total = first[0].probability + first[1].probability;
    con.discarded += std::max(0.0, sel.probability - p1_total);
    if (p1_total <= 0.0) {
      con.amplitudes = Eigen::VectorXcd::Zero(2);
      return con;
    }
    const int s1 = pick1.uniform() * p1_total < first[0].probability ? 0 : 1;
    const double q1 = first[s1].probability / p1_total;
    run.collapse(0, first[s1]);

    const double theta = rotation_angle(std::numbers::pi, s1);
    const auto second = run.measure(1, MeasurementStep::xy(theta));
    const double p2_total = second[0].probability + second[1].probability;
    con.discarded +=
        std::max(0.0, first[s1].probability - p2_total) / q1;
    if (p2_total <= 0.0) {
      con.amplitudes = Eigen::VectorXcd::Zero(2);
      return con;
    }
    const int s2 = pick2.uniform() * p2_total < second[0].probability ? 0 : 1;
    const double q2 = second[s2].probability / p2_total;
    run.collapse(1, second[s2]);

    const std::vector<std::pair<int, int>> out_pair{run.rails(2)};
    DualRailDecoded dec = dual_rail_decode(run.state(), out_pair);
    con.discarded += dec.discarded_weight / (q1 * q2);
    const Eigen::Vector2cd corrected = detail::correct_byproduct(
        Eigen::Vector2cd(dec.amplitudes(0), dec.amplitudes(1)), s1, s2);
    con.amplitudes = corrected / std::sqrt(q1 * q2);
    return con;
  };

  detail::ChunkAccum total;
  detail::run_chunked(n_effective, 2, threads, per_traj, total, stats);
  const double inv_n = 1.0 / static_cast<double>(total.count);
  Eigen::MatrixXcd rho = total.rho * inv_n;
  const double herald = total.herald * inv_n;
  if (herald <= 0.0)
    throw std::runtime_error("run_mbqc_x: heralding never succeeded");
  if (cfg.normalize) rho /= herald;
  return DensityMatrix(std::move(rho), herald, total.discarded * inv_n,
                       cfg.n_samples, cfg.master_seed);
}

}  // namespace nlo
