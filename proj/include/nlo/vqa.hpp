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

#include <algorithm>
#include <string>

#include "nlo/engine.hpp"

namespace nlo {

// ---------------------------------------------------------------------------
// MAX-2-CUT cost Hamiltonian H_C = sum_<ij> Z_i Z_j, stored as its diagonal
// over the computational basis.
// ---------------------------------------------------------------------------
struct Graph {
  int n_vertices = 0;
  std::vector<std::pair<int, int>> edges;

  void validate() const {
    if (n_vertices < 1) throw std::invalid_argument("Graph: no vertices");
    for (const auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n_vertices || b >= n_vertices)
        throw std::invalid_argument("Graph: vertex out of range");
      if (a == b) throw std::invalid_argument("Graph: self-loop");
    }
  }

  static Graph square() { return {4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}}; }
};

struct CostOperator {
  Eigen::VectorXd diagonal;
  double ground_energy() const { return diagonal.minCoeff(); }
};

inline CostOperator maxcut_cost(const Graph& graph) {
  graph.validate();
  if (graph.n_vertices > 10)
    throw std::invalid_argument("maxcut_cost: more than 10 vertices");
  const std::int64_t dim = std::int64_t(1) << graph.n_vertices;
  CostOperator cost;
  cost.diagonal = Eigen::VectorXd::Zero(dim);
  for (std::int64_t b = 0; b < dim; ++b) {
    double e = 0.0;
    for (const auto& [i, j] : graph.edges) {
      // Qubit 0 is the most significant bit of the basis index.
      const int zi = (b >> (graph.n_vertices - 1 - i)) & 1 ? -1 : 1;
      const int zj = (b >> (graph.n_vertices - 1 - j)) & 1 ? -1 : 1;
      e += zi * zj;
    }
    cost.diagonal(b) = e;
  }
  return cost;
}

/// E = Tr(rho H_C) over the diagonal; expects a normalized rho.
inline double energy(const DensityMatrix& rho, const CostOperator& cost) {
  if (rho.dim() != cost.diagonal.size())
    throw std::invalid_argument("energy: dimension mismatch");
  return cost.diagonal.dot(rho.diagonal());
}

inline double approximation_ratio(double e_final, double e0) {
  if (e0 == 0.0) throw std::invalid_argument("approximation_ratio: E0 is zero");
  return e_final / e0;
}

// ---------------------------------------------------------------------------
// Photonic ansatz for the square graph: 8 modes (4 dual-rail qubits), a
// trainable rail-rotation layer BS(theta_q, 0) per qubit, a fixed entangling
// ring of BS(pi/2, 0) between neighboring rails of adjacent qubits (leaks
// outside the dual-rail subspace; recovered by postselection), and a second
// trainable rotation layer. Deliberately not expressed in Reck form.
// ---------------------------------------------------------------------------
struct AnsatzOptions {
  bool entangling = true;
};

inline constexpr int kAnsatzParams = 8;

inline OpticalCircuit ansatz_circuit(std::span<const double> params,
                                     const AnsatzOptions& options = {}) {
  if (params.size() != kAnsatzParams)
    throw std::invalid_argument("ansatz_circuit: expected 8 parameters");
  OpticalCircuit c(8);
  for (int q = 0; q < 4; ++q) {
    c.input[2 * q] = 1;
    c.qubit_map.emplace_back(2 * q, 2 * q + 1);
  }
  for (int q = 0; q < 4; ++q)
    c.elements.push_back(
        PlacedElement::bs(2 * q, 2 * q + 1, params[q], 0.0));
  if (options.entangling)
    for (int q = 0; q < 4; ++q)
      c.elements.push_back(PlacedElement::bs(
          2 * q + 1, (2 * q + 2) % 8, std::numbers::pi / 2.0, 0.0));
  for (int q = 0; q < 4; ++q)
    c.elements.push_back(
        PlacedElement::bs(2 * q, 2 * q + 1, params[4 + q], 0.0));
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Derivative-free optimization trace.
// ---------------------------------------------------------------------------
struct OptStep {
  int step = 0;
  std::vector<double> params;
  double energy = 0.0;
  double relative_error = 0.0;
};

struct OptConfig {
  int max_iters = 500;
  std::uint64_t seed = 0;
  std::int64_t n_samples = 500;
  int threads = 1;
  double simplex_tol = 1e-4;  // stop when the simplex radius shrinks below
  AnsatzOptions ansatz;
};

struct OptResult {
  std::vector<OptStep> trace;
  std::vector<double> best_params;
  double best_energy = 0.0;
  double e0 = 0.0;
  double approximation_ratio = 0.0;
  std::string termination;
};

namespace detail {

// Nelder-Mead with the standard coefficients. Stops when the simplex radius
// falls below tolerance or the iteration budget runs out.
template <class F>
inline OptResult nelder_mead(F&& f, std::vector<double> x0, double step0,
                             int max_iters, double tol) {
  const int n = static_cast<int>(x0.size());
  struct Vertex {
    std::vector<double> x;
    double fx;
  };
  std::vector<Vertex> simplex;

  auto make_simplex = [&](const std::vector<double>& center, double step) {
    simplex.clear();
    simplex.push_back({center, f(center)});
    for (int i = 0; i < n; ++i) {
      std::vector<double> x = center;
      x[i] += step;
      simplex.push_back({x, f(x)});
    }
  };
  auto by_value = [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; };

  OptResult result;
  make_simplex(x0, step0);
  std::string termination = "max_iters";

  for (int iter = 0; iter < max_iters; ++iter) {
    std::sort(simplex.begin(), simplex.end(), by_value);

    double radius = 0.0;
    for (int i = 1; i <= n; ++i)
      for (int d = 0; d < n; ++d)
        radius = std::max(radius,
                          std::abs(simplex[i].x[d] - simplex[0].x[d]));
    if (radius < tol) {
      termination = "converged";
      break;
    }

    std::vector<double> centroid(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int d = 0; d < n; ++d) centroid[d] += simplex[i].x[d] / n;

    auto blend = [&](double coeff) {
      std::vector<double> x(n);
      for (int d = 0; d < n; ++d)
        x[d] = centroid[d] + coeff * (simplex[n].x[d] - centroid[d]);
      return x;
    };

    const std::vector<double> xr = blend(-1.0);
    const double fr = f(xr);
    if (fr < simplex[0].fx) {
      const std::vector<double> xe = blend(-2.0);
      const double fe = f(xe);
      if (fe < fr)
        simplex[n] = {xe, fe};
      else
        simplex[n] = {xr, fr};
    } else if (fr < simplex[n - 1].fx) {
      simplex[n] = {xr, fr};
    } else {
      const std::vector<double> xc = blend(fr < simplex[n].fx ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, simplex[n].fx)) {
        simplex[n] = {xc, fc};
      } else {
        // Shrink toward the best vertex.
        for (int i = 1; i <= n; ++i) {
          for (int d = 0; d < n; ++d)
            simplex[i].x[d] =
                simplex[0].x[d] + 0.5 * (simplex[i].x[d] - simplex[0].x[d]);
          simplex[i].fx = f(simplex[i].x);
        }
      }
    }
  }

  std::sort(simplex.begin(), simplex.end(), by_value);
  result.best_params = simplex[0].x;
  result.best_energy = simplex[0].fx;
  result.termination = termination;
  return result;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// optimize: derivative-free minimization of E(theta) = Tr(rho(theta) H_C)
// over the ansatz parameters. Every evaluation runs a fresh, seed-derived
// trajectory ensemble; the energy uses the trace-normalized rho (dual-rail
// postselection). The returned trace has one row per evaluation.
// ---------------------------------------------------------------------------
inline OptResult optimize(const Graph& graph, const NoiseModel& noise,
                          const OptConfig& cfg,
                          std::span<const double> initial_params = {}) {
  const CostOperator cost = maxcut_cost(graph);
  const double e0 = cost.ground_energy();

  std::vector<double> x0(kAnsatzParams, 0.0);
  if (!initial_params.empty()) {
    if (initial_params.size() != kAnsatzParams)
      throw std::invalid_argument("optimize: expected 8 initial parameters");
    x0.assign(initial_params.begin(), initial_params.end());
  } else {
    DrawStream init(derive_seed(cfg.seed, 0x5eed), 0, 0);
    for (double& v : x0) v = 2.0 * std::numbers::pi * init.uniform();
  }

  std::vector<OptStep> trace;
  std::int64_t eval_index = 0;
  auto objective = [&](const std::vector<double>& params) {
    const OpticalCircuit circuit = ansatz_circuit(params, cfg.ansatz);
    const RunConfig rc{cfg.n_samples,
                       derive_seed(cfg.seed, 0x1000 + eval_index), false};
    ++eval_index;
    const DensityMatrix rho =
        run_trajectories(circuit, noise, rc, cfg.threads).trace_normalized();
    const double e = energy(rho, cost);
    trace.push_back({static_cast<int>(trace.size()), params, e,
                     std::abs((e0 - e) / e0)});
    return e;
  };

  OptResult result =
      detail::nelder_mead(objective, x0, 1.0, cfg.max_iters, cfg.simplex_tol);
  result.trace = std::move(trace);
  result.e0 = e0;
  result.approximation_ratio = approximation_ratio(result.best_energy, e0);
  return result;
}

}  // namespace nlo
