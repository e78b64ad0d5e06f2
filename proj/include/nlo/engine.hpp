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

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "nlo/circuit.hpp"
#include "nlo/noise.hpp"
#include "nlo/rng.hpp"

namespace nlo {

// ---------------------------------------------------------------------------
// Noise model: loss probability per optical element per physical mode, loss
// per mode at detection, and source depolarization per mode pair.
// ---------------------------------------------------------------------------
struct NoiseModel {
  double p_dep = 0.0;
  double p_element = 0.0;
  double p_detect = 0.0;
  bool dep_enabled = true;
  bool element_enabled = true;
  bool detect_enabled = true;

  double effective_dep() const { return dep_enabled ? p_dep : 0.0; }
  double effective_element() const { return element_enabled ? p_element : 0.0; }
  double effective_detect() const { return detect_enabled ? p_detect : 0.0; }

  bool any() const {
    return effective_dep() > 0.0 || effective_element() > 0.0 ||
           effective_detect() > 0.0;
  }

  void validate() const {
    for (double p : {p_dep, p_element, p_detect})
      if (!(p >= 0.0 && p < 0.5))
        throw std::invalid_argument("NoiseModel: probabilities must be in [0, 0.5)");
  }

  static NoiseModel none() { return {}; }
  static NoiseModel dep_only(double p) { return {p, 0.0, 0.0}; }
  static NoiseModel loss_only(double p) { return {0.0, p, p}; }
  static NoiseModel dep_and_loss(double p) { return {p, p, p}; }
};

struct RunConfig {
  std::int64_t n_samples = 500;
  std::uint64_t master_seed = 0;
  bool normalize = false;
};

// ---------------------------------------------------------------------------
// Trajectory-averaged density matrix on the decoded computational basis.
// Trace can fall below one under loss; herald_probability is the mean kept
// weight at the heralding step and discarded_weight the mean non-dual-rail
// weight dropped at decoding.
// ---------------------------------------------------------------------------
class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(Eigen::MatrixXcd entries, double herald_probability,
                double discarded_weight, std::int64_t n_samples,
                std::uint64_t seed)
      : entries_(std::move(entries)),
        herald_probability_(herald_probability),
        discarded_weight_(discarded_weight),
        n_samples_(n_samples),
        seed_(seed) {}

  const Eigen::MatrixXcd& entries() const { return entries_; }
  double herald_probability() const { return herald_probability_; }
  double discarded_weight() const { return discarded_weight_; }
  std::int64_t n_samples() const { return n_samples_; }
  std::uint64_t seed() const { return seed_; }

  int dim() const { return static_cast<int>(entries_.rows()); }
  double trace() const { return entries_.real().trace(); }

  Eigen::VectorXd diagonal() const { return entries_.diagonal().real(); }

  DensityMatrix scaled(double factor) const {
    return DensityMatrix(entries_ * factor, herald_probability_,
                         discarded_weight_, n_samples_, seed_);
  }

  /// Divides by the herald probability (postselection normalization).
  DensityMatrix herald_normalized() const {
    if (herald_probability_ <= 0.0)
      throw std::runtime_error("DensityMatrix: zero herald probability");
    return scaled(1.0 / herald_probability_);
  }

  /// Divides by the trace (full postselected normalization, trace one).
  DensityMatrix trace_normalized() const {
    const double t = trace();
    if (t <= 0.0) throw std::runtime_error("DensityMatrix: zero trace");
    return scaled(1.0 / t);
  }

  double hermiticity_error() const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        0.5 * (entries_ + entries_.adjoint()));
    return es.eigenvalues().minCoeff();
  }

 private:
  Eigen::MatrixXcd entries_;
  double herald_probability_ = 0.0;
  double discarded_weight_ = 0.0;
  std::int64_t n_samples_ = 0;
  std::uint64_t seed_ = 0;
};

// ---------------------------------------------------------------------------
// build_noisy_circuit: prepends a depolarization layer per source mode pair,
// marks every phase shifter and beam splitter for noisy substitution, and
// appends a lossy-detection channel per mode. With all probabilities zero
// the circuit comes back structurally identical.
// ---------------------------------------------------------------------------
namespace detail {

/// Source pairs: the qubit map plus consecutive unmapped pairs that carry
/// exactly one input photon (heralded-gate ancillas behave like sources).
inline std::vector<std::pair<int, int>> source_pairs(
    const OpticalCircuit& circuit) {
  std::vector<std::pair<int, int>> pairs = circuit.qubit_map;
  std::vector<bool> mapped(circuit.mode_count, false);
  for (const auto& [a, b] : pairs) mapped[a] = mapped[b] = true;
  for (int m = 0; m + 1 < circuit.mode_count; ++m) {
    if (mapped[m] || mapped[m + 1]) continue;
    if (circuit.input[m] + circuit.input[m + 1] == 1) {
      pairs.emplace_back(m, m + 1);
      mapped[m] = mapped[m + 1] = true;
    }
  }
  return pairs;
}

}  // namespace detail

inline OpticalCircuit build_noisy_circuit(const OpticalCircuit& circuit,
                                          const NoiseModel& noise) {
  circuit.validate();
  noise.validate();
  OpticalCircuit out = circuit;
  out.elements.clear();

  if (noise.effective_dep() > 0.0) {
    if (circuit.qubit_map.empty())
      throw std::invalid_argument(
          "build_noisy_circuit: depolarization requires a qubit_map");
    for (const auto& [a, b] : detail::source_pairs(circuit)) {
      PlacedElement dep = PlacedElement::dep(a, b);
      dep.loss_p = noise.effective_dep();
      dep.active = true;
      out.elements.push_back(dep);
    }
  }

  for (PlacedElement e : circuit.elements) {
    if (noise.effective_element() > 0.0 &&
        (e.kind == ElementKind::PhaseShifter ||
         e.kind == ElementKind::BeamSplitter)) {
      e.loss_p = noise.effective_element();
      e.active = true;
    }
    out.elements.push_back(e);
  }

  if (noise.effective_detect() > 0.0) {
    for (int m = 0; m < circuit.mode_count; ++m) {
      PlacedElement lc = PlacedElement::loss(m);
      lc.loss_p = noise.effective_detect();
      lc.active = true;
      out.elements.push_back(lc);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compiled circuit: element data laid out for the trajectory hot loop.
// Ideal beam-splitter lifts are cached once and shared across trajectories;
// a noisy beam splitter folds its per-draw diagonal damping into a scaled
// copy of those lifts. Runs of consecutive one-mode scalar elements (phase
// shifters, loss channels) collapse into a single pass over the state.
// Randomness stays addressed by the original element index.
// ---------------------------------------------------------------------------
class CompiledCircuit {
 public:
  explicit CompiledCircuit(OpticalCircuit noisy) : circuit_(std::move(noisy)) {
    circuit_.validate();
    photons_ = circuit_.total_photons();
    if (photons_ > kDefaultPhotonCap)
      throw std::invalid_argument("CompiledCircuit: photon number exceeds cap");

    const auto& elements = circuit_.elements;
    for (std::size_t idx = 0; idx < elements.size(); ++idx) {
      const PlacedElement& e = elements[idx];
      const bool is_scalar = e.kind == ElementKind::PhaseShifter ||
                             e.kind == ElementKind::LossChannel;
      const bool noisy = e.active && e.loss_p > 0.0;
      any_noise_ |= noisy;
      if (is_scalar) {
        if (ops_.empty() || ops_.back().kind != Op::Kind::ScalarRun)
          ops_.push_back(Op{Op::Kind::ScalarRun});
        ops_.back().scalars.push_back(
            {static_cast<std::uint32_t>(idx), e.kind, e.modes[0], e.theta,
             noisy ? epsilon_from_p(e.loss_p) : 0.0, noisy});
      } else {
        Op op{e.kind == ElementKind::BeamSplitter ? Op::Kind::BeamSplitter
                                                  : Op::Kind::Depolarization};
        op.element_index = static_cast<std::uint32_t>(idx);
        op.m0 = e.modes[0];
        op.m1 = e.modes[1];
        op.theta = e.theta;
        op.noisy = noisy;
        op.eps = noisy ? epsilon_from_p(e.loss_p) : 0.0;
        if (op.kind == Op::Kind::BeamSplitter)
          op.lifts = pair_lifts(bs_matrix2(e.theta, e.phi), photons_);
        ops_.push_back(std::move(op));
      }
    }
  }

  const OpticalCircuit& circuit() const { return circuit_; }
  int element_count() const {
    return static_cast<int>(circuit_.elements.size());
  }
  int photons() const { return photons_; }
  bool any_noise() const { return any_noise_; }

  /// Evolves the input through the per-trajectory noisy elements.
  FockState run_trajectory(std::uint64_t master_seed, std::uint64_t traj,
                           FockState& scratch) const {
    FockState state = FockState::basis(circuit_.input);
    std::vector<Eigen::MatrixXcd> noisy_lifts;
    for (const Op& op : ops_) {
      switch (op.kind) {
        case Op::Kind::ScalarRun:
          apply_scalar_run(op, master_seed, traj, state);
          break;
        case Op::Kind::BeamSplitter: {
          if (op.noisy) {
            DrawStream stream(master_seed, traj, op.element_index);
            const StochasticDraw d = sample_element_draw(
                ElementKind::BeamSplitter, op.theta, op.eps, stream);
            const auto [d0, d1] = traced_bs_damping(op.eps, op.eps, d);
            scaled_lifts(op.lifts, d0, d1, noisy_lifts);
            apply_pair(state, op.m0, op.m1, noisy_lifts, scratch);
          } else {
            apply_pair(state, op.m0, op.m1, op.lifts, scratch);
          }
          break;
        }
        case Op::Kind::Depolarization: {
          if (!op.noisy) break;
          DrawStream stream(master_seed, traj, op.element_index);
          const StochasticDraw d = sample_element_draw(
              ElementKind::DepolarizationLayer, 0.0, op.eps, stream);
          const auto lifts =
              pair_lifts(depolarization_matrix(op.eps, d), photons_);
          apply_pair(state, op.m0, op.m1, lifts, scratch);
          break;
        }
      }
    }
    return state;
  }

 private:
  struct ScalarElement {
    std::uint32_t element_index;
    ElementKind kind;
    int mode;
    double theta;
    double eps;
    bool noisy;
  };

  struct Op {
    enum class Kind { ScalarRun, BeamSplitter, Depolarization };
    Kind kind = Kind::ScalarRun;
    std::uint32_t element_index = 0;
    int m0 = 0, m1 = 0;
    double theta = 0.0;
    double eps = 0.0;
    bool noisy = false;
    std::vector<Eigen::MatrixXcd> lifts;     // BS only
    std::vector<ScalarElement> scalars;      // ScalarRun only
  };

  /// lifts'(k', k) = lifts(k', k) * d0^k * d1^(s-k): the traced damping acts
  /// on the input occupation before the ideal mix.
  static void scaled_lifts(const std::vector<Eigen::MatrixXcd>& base,
                           double d0, double d1,
                           std::vector<Eigen::MatrixXcd>& out) {
    out.resize(base.size());
    for (std::size_t s = 0; s < base.size(); ++s) {
      out[s] = base[s];
      for (int k = 0; k < out[s].cols(); ++k) {
        double w = 1.0;
        for (int i = 0; i < k; ++i) w *= d0;
        for (int i = k; i < static_cast<int>(s); ++i) w *= d1;
        out[s].col(k) *= w;
      }
    }
  }

  void apply_scalar_run(const Op& op, std::uint64_t master_seed,
                        std::uint64_t traj, FockState& state) const {
    // Accumulate one complex factor per mode across the run.
    std::array<cdouble, Occupation::kMaxModes> factor;
    factor.fill(cdouble(1.0));
    bool nontrivial = false;
    for (const ScalarElement& se : op.scalars) {
      cdouble f(1.0);
      if (se.kind == ElementKind::PhaseShifter) {
        f = std::polar(1.0, se.theta);
        if (se.noisy) {
          DrawStream stream(master_seed, traj, se.element_index);
          const StochasticDraw d = sample_element_draw(
              ElementKind::PhaseShifter, se.theta, se.eps, stream);
          f = traced_ps_entry(se.theta, se.eps, d);
        }
      } else if (se.noisy) {
        DrawStream stream(master_seed, traj, se.element_index);
        const StochasticDraw d = sample_element_draw(ElementKind::LossChannel,
                                                     0.0, se.eps, stream);
        f = std::cos(se.eps * d.w);
      }
      if (f != cdouble(1.0)) {
        factor[se.mode] *= f;
        nontrivial = true;
      }
    }
    if (!nontrivial) return;

    std::array<std::array<cdouble, 9>, Occupation::kMaxModes> pow;
    std::vector<int> active;
    for (int m = 0; m < circuit_.mode_count; ++m) {
      if (factor[m] == cdouble(1.0)) continue;
      active.push_back(m);
      pow[m][0] = cdouble(1.0);
      for (int n = 1; n <= photons_; ++n) pow[m][n] = pow[m][n - 1] * factor[m];
    }
    state.terms().for_each_mut([&](std::uint64_t key, cdouble& amp) {
      const Occupation occ(key);
      for (int m : active) amp *= pow[m][occ.count(m)];
    });
  }

  OpticalCircuit circuit_;
  std::vector<Op> ops_;
  int photons_ = 0;
  bool any_noise_ = false;
};

// ---------------------------------------------------------------------------
// Deterministic map-reduce over trajectories. Work is split into fixed-size
// chunks; each chunk is accumulated sequentially and chunks are merged in
// index order, so the result is bit-identical for any thread count.
// ---------------------------------------------------------------------------
struct TrajectoryContribution {
  Eigen::VectorXcd amplitudes;
  double herald_weight = 0.0;
  double discarded = 0.0;
  // When set, added to the accumulator instead of the amplitude projector
  // (used by branch-enumerating runners).
  Eigen::MatrixXcd direct;
};

/// Per-batch partial sums for Monte-Carlo error estimation (16 batches).
struct RunStats {
  std::vector<Eigen::MatrixXcd> batch_rho;
  std::vector<double> batch_herald;
  std::vector<double> batch_discarded;
  std::vector<std::int64_t> batch_count;
  static constexpr int kBatches = 16;
};

namespace detail {

inline constexpr std::int64_t kChunkSize = 64;

struct ChunkAccum {
  Eigen::MatrixXcd rho;
  double herald = 0.0;
  double discarded = 0.0;
  std::int64_t count = 0;
};

template <class PerTrajectory>
inline void run_chunked(std::int64_t n, int dim, int threads,
                        PerTrajectory&& per_traj, ChunkAccum& total,
                        RunStats* stats) {
  const std::int64_t n_chunks = (n + kChunkSize - 1) / kChunkSize;
  std::vector<ChunkAccum> chunks(static_cast<std::size_t>(n_chunks));

  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      for (;;) {
        const std::int64_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        ChunkAccum& acc = chunks[static_cast<std::size_t>(c)];
        acc.rho = Eigen::MatrixXcd::Zero(dim, dim);
        const std::int64_t begin = c * kChunkSize;
        const std::int64_t end = std::min(n, begin + kChunkSize);
        for (std::int64_t t = begin; t < end; ++t) {
          TrajectoryContribution con = per_traj(t);
          if (con.direct.size() > 0)
            acc.rho += con.direct;
          else
            acc.rho.noalias() += con.amplitudes * con.amplitudes.adjoint();
          acc.herald += con.herald_weight;
          acc.discarded += con.discarded;
          ++acc.count;
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, 64));
  if (threads == 1 || n_chunks == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  total.rho = Eigen::MatrixXcd::Zero(dim, dim);
  if (stats) {
    stats->batch_rho.assign(RunStats::kBatches,
                            Eigen::MatrixXcd::Zero(dim, dim));
    stats->batch_herald.assign(RunStats::kBatches, 0.0);
    stats->batch_discarded.assign(RunStats::kBatches, 0.0);
    stats->batch_count.assign(RunStats::kBatches, 0);
  }
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    const ChunkAccum& acc = chunks[static_cast<std::size_t>(c)];
    total.rho += acc.rho;
    total.herald += acc.herald;
    total.discarded += acc.discarded;
    total.count += acc.count;
    if (stats) {
      const int b = static_cast<int>(c * RunStats::kBatches / n_chunks);
      stats->batch_rho[b] += acc.rho;
      stats->batch_herald[b] += acc.herald;
      stats->batch_discarded[b] += acc.discarded;
      stats->batch_count[b] += acc.count;
    }
  }
}

/// Old-to-new mode index map after removing herald-constrained modes, plus
/// the decode pairs expressed on the surviving modes.
struct HeraldLayout {
  std::vector<std::optional<int>> pattern;
  std::vector<std::pair<int, int>> decode_pairs;
};

inline HeraldLayout herald_layout(const OpticalCircuit& circuit) {
  HeraldLayout l;
  l.pattern = circuit.herald;
  std::vector<int> new_index(circuit.mode_count, -1);
  int next = 0;
  for (int m = 0; m < circuit.mode_count; ++m)
    if (!circuit.herald[m]) new_index[m] = next++;
  for (const auto& [a, b] : circuit.qubit_map) {
    if (new_index[a] < 0 || new_index[b] < 0)
      throw std::invalid_argument("engine: herald constrains a qubit mode");
    l.decode_pairs.emplace_back(new_index[a], new_index[b]);
  }
  return l;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run_trajectories: sample every stochastic element per trajectory, evolve,
// herald, decode, and average the decoded projectors.
// ---------------------------------------------------------------------------
inline DensityMatrix run_trajectories(const OpticalCircuit& circuit,
                                      const NoiseModel& noise,
                                      const RunConfig& cfg, int threads = 1,
                                      RunStats* stats = nullptr) {
  if (cfg.n_samples < 1)
    throw std::invalid_argument("run_trajectories: n_samples must be >= 1");
  if (circuit.qubit_map.empty())
    throw std::invalid_argument("run_trajectories: circuit has no qubit_map");

  const CompiledCircuit compiled(build_noisy_circuit(circuit, noise));
  const detail::HeraldLayout layout = detail::herald_layout(compiled.circuit());
  const int dim = 1 << circuit.qubit_map.size();

  // A noiseless circuit makes every trajectory identical.
  const std::int64_t n_effective = compiled.any_noise() ? cfg.n_samples : 1;

  auto per_traj = [&](std::int64_t t) -> TrajectoryContribution {
    FockState local_scratch(compiled.circuit().mode_count);
    FockState state = compiled.run_trajectory(cfg.master_seed,
                                              static_cast<std::uint64_t>(t),
                                              local_scratch);
    PostSelectResult sel = post_select(state, layout.pattern);
    DualRailDecoded dec = dual_rail_decode(sel.state, layout.decode_pairs);
    return {std::move(dec.amplitudes), sel.probability, dec.discarded_weight};
  };

  detail::ChunkAccum total;
  detail::run_chunked(n_effective, dim, threads, per_traj, total, stats);

  const double inv_n = 1.0 / static_cast<double>(total.count);
  Eigen::MatrixXcd rho = total.rho * inv_n;
  const double herald = total.herald * inv_n;
  const double discarded = total.discarded * inv_n;
  if (herald <= 0.0)
    throw std::runtime_error("run_trajectories: heralding never succeeded");
  if (cfg.normalize) rho /= herald;
  return DensityMatrix(std::move(rho), herald, discarded, cfg.n_samples,
                       cfg.master_seed);
}

}  // namespace nlo
