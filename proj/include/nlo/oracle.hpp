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

#include <map>

#include "nlo/engine.hpp"

namespace nlo {

// ---------------------------------------------------------------------------
// Gaussian cosine moments. For centered jointly-Gaussian (X, Y):
//   E[cos^a X cos^b Y] = 2^{-a-b} sum_{k,l} C(a,k) C(b,l)
//       exp(-((a-2k)^2 Vx + (b-2l)^2 Vy + 2 (a-2k)(b-2l) Cxy) / 2).
// Exact; used by the density-matrix oracle as the draw-averaged damping.
// ---------------------------------------------------------------------------
inline double gaussian_cos_moment(int a, int b, double var_x, double var_y,
                                  double cov) {
  const auto& fact = detail::factorials();
  auto binom = [&](int n, int k) { return fact[n] / (fact[k] * fact[n - k]); };
  double sum = 0.0;
  for (int k = 0; k <= a; ++k) {
    const double u = a - 2.0 * k;
    for (int l = 0; l <= b; ++l) {
      const double v = b - 2.0 * l;
      sum += binom(a, k) * binom(b, l) *
             std::exp(-0.5 * (u * u * var_x + v * v * var_y + 2.0 * u * v * cov));
    }
  }
  return std::ldexp(sum, -(a + b));
}

inline double gaussian_cos_moment(int a, double var) {
  return gaussian_cos_moment(a, 0, var, 0.0, 0.0);
}

// ---------------------------------------------------------------------------
// Gauss-Hermite rule mapped to a standard-normal weight:
//   E[f(W)] = sum_i weight[i] * f(node[i]).
// Nodes from the Golub-Welsch eigendecomposition of the Jacobi matrix.
// ---------------------------------------------------------------------------
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline GaussHermiteRule gauss_hermite_normal(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double off = std::sqrt(i / 2.0);
    jacobi(i, i - 1) = off;
    jacobi(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Physicists' nodes x_i carry weight v0^2 sqrt(pi); under the normal
    // weight the node becomes sqrt(2) x_i and the sqrt(pi) cancels.
    rule.nodes[i] = std::numbers::sqrt2 * es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = v0 * v0;
  }
  return rule;
}

namespace detail {

/// Fixed quadrature order for the depolarization average.
inline constexpr int kDepQuadratureNodes = 21;

struct OracleBasis {
  std::vector<Occupation> states;
  std::map<std::uint64_t, int> index;
};

inline OracleBasis oracle_basis(int modes, int photons) {
  OracleBasis b;
  enumerate_occupations(modes, photons, b.states);
  for (std::size_t i = 0; i < b.states.size(); ++i)
    b.index[b.states[i].packed()] = static_cast<int>(i);
  return b;
}

/// Full N-photon-sector lift of a mode matrix, built through the
/// permanent-based evolve (a route independent of the engine's convolution
/// lifts).
inline Eigen::MatrixXcd full_lift_of_matrix(const OracleBasis& basis,
                                            const Eigen::MatrixXcd& m,
                                            int modes) {
  const int dim = static_cast<int>(basis.states.size());
  Eigen::MatrixXcd lift = Eigen::MatrixXcd::Zero(dim, dim);
  const ModeTransfer mt = ModeTransfer::unchecked(m, true);
  for (int j = 0; j < dim; ++j) {
    FockState in(modes);
    in.add(basis.states[j], cdouble(1.0));
    const FockState out = evolve(in, mt);
    out.terms().for_each([&](std::uint64_t key, cdouble amp) {
      lift(basis.index.at(key), j) = amp;
    });
  }
  return lift;
}

inline Eigen::MatrixXcd full_lift(const OracleBasis& basis,
                                  const PlacedElement& e, int modes) {
  const std::array<int, 2> at = e.modes;
  const Eigen::MatrixXcd m =
      embed(element_matrix(e), std::span<const int>(at.data(), e.mode_count()),
            modes);
  return full_lift_of_matrix(basis, m, modes);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// kraus_oracle: deterministic reference for the trajectory average. Each
// noisy element is applied as its exactly draw-averaged channel -- closed-form
// Gaussian cosine moments for the diagonal loss factors, Gauss-Hermite
// quadrature over (W_x, W_y, W_z) for depolarization. The trajectory mean
// converges to precisely this channel, so comparisons are unbiased.
// ---------------------------------------------------------------------------
inline DensityMatrix kraus_oracle(const OpticalCircuit& circuit,
                                  const NoiseModel& noise) {
  circuit.validate();
  if (circuit.mode_count > 4)
    throw std::invalid_argument("kraus_oracle: more than 4 modes");
  const int photons = circuit.total_photons();
  if (photons > 2)
    throw std::invalid_argument("kraus_oracle: more than 2 photons");
  if (circuit.qubit_map.empty())
    throw std::invalid_argument("kraus_oracle: circuit has no qubit_map");

  const OpticalCircuit noisy = build_noisy_circuit(circuit, noise);
  const int modes = noisy.mode_count;
  const detail::OracleBasis basis = detail::oracle_basis(modes, photons);
  const int dim = static_cast<int>(basis.states.size());

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  {
    const Occupation in = Occupation::from_counts(noisy.input);
    const int i0 = basis.index.at(in.packed());
    rho(i0, i0) = 1.0;
  }

  auto damp_entrywise = [&](const std::function<double(const Occupation&,
                                                       const Occupation&)>& f) {
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        rho(a, b) *= f(basis.states[a], basis.states[b]);
  };

  for (const PlacedElement& e : noisy.elements) {
    const bool noisy_elem = e.active && e.loss_p > 0.0;
    const double eps = noisy_elem ? epsilon_from_p(e.loss_p) : 0.0;
    switch (e.kind) {
      case ElementKind::PhaseShifter: {
        if (noisy_elem) {
          const IcsCovariance c = ics_covariance(e.theta);
          const double e2 = eps * eps;
          damp_entrywise([&](const Occupation& a, const Occupation& b) {
            const int n = a.count(e.modes[0]) + b.count(e.modes[0]);
            return gaussian_cos_moment(n, n, e2 * c.var_c, e2 * c.var_s,
                                       e2 * c.cov);
          });
        }
        const Eigen::MatrixXcd u = detail::full_lift(basis, e, modes);
        rho = u * rho * u.adjoint();
        break;
      }
      case ElementKind::BeamSplitter: {
        if (noisy_elem) {
          const IcsCovariance c = ics_covariance(e.theta / 2.0);
          const double e2 = eps * eps;
          damp_entrywise([&](const Occupation& a, const Occupation& b) {
            const int alpha = a.count(e.modes[0]) + b.count(e.modes[0]);
            const int beta = a.count(e.modes[1]) + b.count(e.modes[1]);
            return gaussian_cos_moment(alpha, beta, e2 * c.var_c,
                                       e2 * c.var_s, e2 * c.cov) *
                   gaussian_cos_moment(beta, alpha, e2 * c.var_c,
                                       e2 * c.var_s, e2 * c.cov);
          });
        }
        const Eigen::MatrixXcd u = detail::full_lift(basis, e, modes);
        rho = u * rho * u.adjoint();
        break;
      }
      case ElementKind::DepolarizationLayer: {
        if (!noisy_elem) break;
        static const GaussHermiteRule rule =
            gauss_hermite_normal(detail::kDepQuadratureNodes);
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(dim, dim);
        const std::array<int, 2> at = e.modes;
        StochasticDraw d;
        for (int ix = 0; ix < detail::kDepQuadratureNodes; ++ix) {
          d.wx = rule.nodes[ix];
          for (int iy = 0; iy < detail::kDepQuadratureNodes; ++iy) {
            d.wy = rule.nodes[iy];
            for (int iz = 0; iz < detail::kDepQuadratureNodes; ++iz) {
              d.wz = rule.nodes[iz];
              const double w =
                  rule.weights[ix] * rule.weights[iy] * rule.weights[iz];
              const Eigen::MatrixXcd m =
                  embed(depolarization_matrix(eps, d),
                        std::span<const int>(at.data(), 2), modes);
              const Eigen::MatrixXcd u =
                  detail::full_lift_of_matrix(basis, m, modes);
              next.noalias() += w * (u * rho * u.adjoint());
            }
          }
        }
        rho = std::move(next);
        break;
      }
      case ElementKind::LossChannel: {
        if (!noisy_elem) break;
        const double e2 = eps * eps;
        damp_entrywise([&](const Occupation& a, const Occupation& b) {
          return gaussian_cos_moment(a.count(e.modes[0]) + b.count(e.modes[0]),
                                     e2);
        });
        break;
      }
    }
  }

  // Herald projection, then dual-rail decoding, mirroring the engine.
  double herald_probability = 0.0;
  std::vector<int> kept;
  std::vector<int> new_index(modes, -1);
  {
    int next = 0;
    for (int m = 0; m < modes; ++m)
      if (!noisy.herald[m]) new_index[m] = next++;
  }
  auto matches = [&](const Occupation& occ) {
    for (int m = 0; m < modes; ++m)
      if (noisy.herald[m] && occ.count(m) != *noisy.herald[m]) return false;
    return true;
  };
  for (int i = 0; i < dim; ++i)
    if (matches(basis.states[i])) {
      kept.push_back(i);
      herald_probability += rho(i, i).real();
    }

  const int q_count = static_cast<int>(noisy.qubit_map.size());
  const std::int64_t out_dim = std::int64_t(1) << q_count;
  Eigen::MatrixXcd decoded = Eigen::MatrixXcd::Zero(out_dim, out_dim);
  double discarded = 0.0;

  auto decode_index = [&](const Occupation& occ) -> std::int64_t {
    std::int64_t index = 0;
    for (const auto& [a, b] : noisy.qubit_map) {
      const int n0 = occ.count(a);
      const int n1 = occ.count(b);
      if (n0 == 1 && n1 == 0)
        index = index << 1;
      else if (n0 == 0 && n1 == 1)
        index = (index << 1) | 1;
      else
        return -1;
    }
    return index;
  };

  for (int ia : kept) {
    const std::int64_t da = decode_index(basis.states[ia]);
    if (da < 0) {
      discarded += rho(ia, ia).real();
      continue;
    }
    for (int ib : kept) {
      const std::int64_t db = decode_index(basis.states[ib]);
      if (db < 0) continue;
      decoded(da, db) += rho(ia, ib);
    }
  }

  return DensityMatrix(std::move(decoded), herald_probability, discarded, 0, 0);
}

// ---------------------------------------------------------------------------
// Trajectory-vs-oracle comparison with batch-means Monte-Carlo errors.
// ---------------------------------------------------------------------------
struct OracleComparison {
  double max_abs_dev = 0.0;
  double max_sigma_ratio = 0.0;  // max over entries of |dev| / (3 se)
  bool within(double abs_tol) const {
    return max_abs_dev <= abs_tol && max_sigma_ratio <= 1.0;
  }
};

inline OracleComparison compare_with_oracle(const OpticalCircuit& circuit,
                                            const NoiseModel& noise,
                                            const RunConfig& cfg,
                                            int threads = 1) {
  RunStats stats;
  const DensityMatrix traj = run_trajectories(circuit, noise, cfg, threads, &stats);
  const DensityMatrix ref = kraus_oracle(circuit, noise);

  OracleComparison cmp;
  const int dim = traj.dim();
  const int b_count = static_cast<int>(stats.batch_rho.size());
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const cdouble dev_c = traj.entries()(r, c) - ref.entries()(r, c);
      const double dev = std::abs(dev_c);
      // Batch means of the entry, for a Monte-Carlo standard error.
      double mr = 0.0, mi = 0.0, vr = 0.0, vi = 0.0;
      std::vector<cdouble> means(b_count);
      for (int b = 0; b < b_count; ++b) {
        means[b] = stats.batch_rho[b](r, c) /
                   static_cast<double>(stats.batch_count[b]);
        mr += means[b].real();
        mi += means[b].imag();
      }
      mr /= b_count;
      mi /= b_count;
      for (int b = 0; b < b_count; ++b) {
        vr += (means[b].real() - mr) * (means[b].real() - mr);
        vi += (means[b].imag() - mi) * (means[b].imag() - mi);
      }
      const double se =
          std::sqrt((vr + vi) / (b_count - 1) / b_count) + 1e-15;
      cmp.max_abs_dev = std::max(cmp.max_abs_dev, dev);
      cmp.max_sigma_ratio = std::max(cmp.max_sigma_ratio, dev / (3.0 * se));
    }
  }
  return cmp;
}

}  // namespace nlo
