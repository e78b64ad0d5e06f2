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
#include <sstream>

#include "nlo/mbqc.hpp"
#include "nlo/metrics.hpp"
#include "nlo/serialize.hpp"
#include "nlo/vqa.hpp"

namespace nlo {

inline NoiseModel noise_model_for(const std::string& type, double p) {
  if (type == "none") return NoiseModel::none();
  if (type == "dep") return NoiseModel::dep_only(p);
  if (type == "loss") return NoiseModel::loss_only(p);
  if (type == "both") return NoiseModel::dep_and_loss(p);
  throw std::invalid_argument("unknown noise type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Named experiments. Reported states follow the postselection convention:
// circuits with herald detectors are normalized by the ideal heralding
// probability; the heraldless X gate is reported raw, so loss-induced trace
// decay stays visible either way.
// ---------------------------------------------------------------------------
enum class Experiment { XGateGbqc, BellGbqc, XGateMbqc, Vqa };

inline Experiment experiment_from_name(const std::string& name) {
  if (name == "xgate-gbqc") return Experiment::XGateGbqc;
  if (name == "bell-gbqc") return Experiment::BellGbqc;
  if (name == "xgate-mbqc") return Experiment::XGateMbqc;
  if (name == "vqa") return Experiment::Vqa;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

inline std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::XGateGbqc: return "xgate-gbqc";
    case Experiment::BellGbqc: return "bell-gbqc";
    case Experiment::XGateMbqc: return "xgate-mbqc";
    case Experiment::Vqa: return "vqa";
  }
  throw std::logic_error("unknown experiment");
}

struct ExperimentRun {
  DensityMatrix reported;  // divided by the ideal heralding probability
  RunStats stats;
  double ideal_herald = 1.0;
};

inline bool circuit_has_heralds(const OpticalCircuit& c) {
  for (const auto& h : c.herald)
    if (h) return true;
  return false;
}

/// Heralding probability of the noiseless circuit: the design constant all
/// reported states are normalized against.
inline double ideal_herald_probability(Experiment experiment) {
  static std::map<Experiment, double> cache;
  auto it = cache.find(experiment);
  if (it != cache.end()) return it->second;
  double h = 1.0;
  switch (experiment) {
    case Experiment::XGateGbqc:
      h = run_trajectories(x_gate_circuit(), NoiseModel::none(), {1, 0, false})
              .herald_probability();
      break;
    case Experiment::BellGbqc:
      h = run_trajectories(transpile(bell_circuit(), true), NoiseModel::none(),
                           {1, 0, false})
              .herald_probability();
      break;
    case Experiment::XGateMbqc:
      h = run_mbqc_x(NoiseModel::none(), {1, 0, false}).herald_probability();
      break;
    case Experiment::Vqa:
      break;
  }
  cache[experiment] = h;
  return h;
}

inline ExperimentRun run_experiment(Experiment experiment,
                                    const NoiseModel& noise,
                                    const RunConfig& cfg, int threads = 1) {
  ExperimentRun out;
  out.ideal_herald = ideal_herald_probability(experiment);
  switch (experiment) {
    case Experiment::XGateGbqc: {
      const OpticalCircuit c = x_gate_circuit();
      out.reported = run_trajectories(c, noise, cfg, threads, &out.stats);
      break;
    }
    case Experiment::BellGbqc: {
      static const OpticalCircuit c = transpile(bell_circuit(), true);
      out.reported = run_trajectories(c, noise, cfg, threads, &out.stats);
      break;
    }
    case Experiment::XGateMbqc: {
      out.reported = run_mbqc_x(noise, cfg, threads, &out.stats);
      break;
    }
    case Experiment::Vqa:
      throw std::invalid_argument(
          "run_experiment: use run_vqa for the vqa experiment");
  }
  out.reported = out.reported.scaled(1.0 / out.ideal_herald);
  return out;
}

// ---------------------------------------------------------------------------
// Sweep specification and tabular results.
// ---------------------------------------------------------------------------
struct SweepSpec {
  Experiment experiment = Experiment::XGateGbqc;
  std::string noise_type = "loss";  // dep | loss | both
  std::vector<double> probabilities;
  std::int64_t n_samples = 10000;
  std::uint64_t seed = 0;

  void validate() const {
    if (probabilities.empty())
      throw std::invalid_argument("sweep: no probabilities");
    double prev = -1.0;
    for (double p : probabilities) {
      if (!(p >= 0.0 && p < 0.5))
        throw std::invalid_argument("sweep: p out of [0, 0.5)");
      if (p <= prev)
        throw std::invalid_argument("sweep: probabilities must ascend");
      prev = p;
    }
    if (n_samples < 1) throw std::invalid_argument("sweep: n_samples < 1");
  }
};

inline SweepSpec sweep_spec_from_json(const ordered_json& j) {
  SweepSpec s;
  s.experiment = experiment_from_name(j.at("experiment").get<std::string>());
  s.noise_type = j.at("noise_type").get<std::string>();
  s.probabilities = j.at("probabilities").get<std::vector<double>>();
  s.n_samples = j.value("n_samples", std::int64_t{10000});
  s.seed = j.value("seed", std::uint64_t{0});
  s.validate();
  return s;
}

struct SweepRow {
  double p = 0.0;
  std::string scenario;
  std::string observable;
  double value = 0.0;
  double stderr_est = 0.0;
};

namespace detail {

/// Batch means of an observable derived from per-batch density matrices,
/// all scaled by the same constant divisor (the ideal herald probability).
template <class F>
inline std::pair<double, double> batch_estimate(const RunStats& stats,
                                                double divisor,
                                                F&& observable) {
  const int b_count = static_cast<int>(stats.batch_rho.size());
  std::vector<double> values;
  values.reserve(b_count);
  for (int b = 0; b < b_count; ++b) {
    if (stats.batch_count[b] == 0) continue;
    const double inv =
        1.0 / (static_cast<double>(stats.batch_count[b]) * divisor);
    Eigen::MatrixXcd rho = stats.batch_rho[b] * inv;
    values.push_back(observable(rho, stats.batch_herald[b] * inv));
  }
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  if (values.size() > 1) var /= (values.size() - 1);
  return {mean, std::sqrt(var / values.size())};
}

}  // namespace detail

// One sweep: rows of (p, scenario, observable, value, stderr) per probability,
// deterministic under a fixed seed.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int threads = 1) {
  spec.validate();
  if (spec.experiment == Experiment::Vqa) {
    std::vector<SweepRow> rows;
    const Graph graph = Graph::square();
    for (double p : spec.probabilities) {
      OptConfig oc;
      oc.seed = derive_seed(spec.seed, std::hash<std::string>{}(spec.noise_type) ^
                                           std::bit_cast<std::uint64_t>(p));
      oc.n_samples = spec.n_samples;
      oc.threads = threads;
      const OptResult res =
          optimize(graph, noise_model_for(spec.noise_type, p), oc);
      rows.push_back({p, spec.noise_type, "final_energy", res.best_energy, 0.0});
      rows.push_back({p, spec.noise_type, "approximation_ratio",
                      res.approximation_ratio, 0.0});
      rows.push_back({p, spec.noise_type, "relative_error",
                      std::abs((res.e0 - res.best_energy) / res.e0), 0.0});
    }
    return rows;
  }

  const ExperimentRun ideal = run_experiment(
      spec.experiment, NoiseModel::none(), {1, spec.seed, false}, threads);
  const Eigen::VectorXd ideal_diag = ideal.reported.diagonal();

  std::vector<SweepRow> rows;
  for (double p : spec.probabilities) {
    const NoiseModel noise = noise_model_for(spec.noise_type, p);
    ExperimentRun run = run_experiment(spec.experiment, noise,
                                       {spec.n_samples, spec.seed, false},
                                       threads);
    const int dim = run.reported.dim();
    for (int k = 0; k < dim; ++k) {
      auto [v, se] = detail::batch_estimate(
          run.stats, run.ideal_herald,
          [&](const Eigen::MatrixXcd& rho, double) { return rho(k, k).real(); });
      std::ostringstream name;
      name << "rho_" << k << k;
      rows.push_back({p, spec.noise_type, name.str(),
                      run.reported.entries()(k, k).real(), se});
      (void)v;
    }
    auto [hv, hse] = detail::batch_estimate(
        run.stats, run.ideal_herald,
        [&](const Eigen::MatrixXcd& rho, double) {
          return hellinger(rho.diagonal().real().eval(), ideal_diag);
        });
    rows.push_back({p, spec.noise_type, "hellinger",
                    hellinger(run.reported, ideal.reported), hse});
    (void)hv;
    rows.push_back({p, spec.noise_type, "herald_probability",
                    run.reported.herald_probability(), 0.0});
    rows.push_back({p, spec.noise_type, "trace", run.reported.trace(), 0.0});
  }
  return rows;
}

inline std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "p,scenario,observable,value,stderr\n";
  for (const SweepRow& r : rows) {
    out += format_double(r.p);
    out += ',';
    out += r.scenario;
    out += ',';
    out += r.observable;
    out += ',';
    out += format_double(r.value);
    out += ',';
    out += format_double(r.stderr_est);
    out += '\n';
  }
  return out;
}

inline ordered_json sweep_rows_to_json(const std::vector<SweepRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const SweepRow& r : rows)
    arr.push_back(ordered_json{{"p", r.p},
                               {"scenario", r.scenario},
                               {"observable", r.observable},
                               {"value", r.value},
                               {"stderr", r.stderr_est}});
  return ordered_json{{"rows", std::move(arr)}};
}

// ---------------------------------------------------------------------------
// VQA experiment configuration (the `vqa` subcommand's input file).
// ---------------------------------------------------------------------------
struct VqaConfig {
  Graph graph = Graph::square();
  std::vector<std::string> noise_types{"dep", "loss", "both"};
  std::vector<double> probabilities{1e-4, 1e-3, 1e-2};
  int restarts = 5;
  std::uint64_t seed = 0;
  std::int64_t n_samples = 500;
  int max_iters = 500;
  bool include_noiseless = true;
};

inline VqaConfig vqa_config_from_json(const ordered_json& j) {
  VqaConfig c;
  if (j.contains("graph")) {
    c.graph.n_vertices = j.at("graph").at("vertices").get<int>();
    c.graph.edges.clear();
    for (const auto& e : j.at("graph").at("edges"))
      c.graph.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    c.graph.validate();
  }
  if (j.contains("noise_types"))
    c.noise_types = j.at("noise_types").get<std::vector<std::string>>();
  if (j.contains("probabilities"))
    c.probabilities = j.at("probabilities").get<std::vector<double>>();
  c.restarts = j.value("restarts", 5);
  c.seed = j.value("seed", std::uint64_t{0});
  c.n_samples = j.value("n_samples", std::int64_t{500});
  c.max_iters = j.value("max_iters", 500);
  c.include_noiseless = j.value("include_noiseless", true);
  return c;
}

struct VqaRun {
  std::string noise_type;
  double p = 0.0;
  int restart = 0;
  OptResult result;
};

inline std::vector<VqaRun> run_vqa(const VqaConfig& cfg, int threads = 1) {
  std::vector<VqaRun> runs;
  auto run_one = [&](const std::string& type, double p, int restart) {
    OptConfig oc;
    oc.seed = derive_seed(cfg.seed,
                          std::hash<std::string>{}(type) * 1000003 +
                              std::bit_cast<std::uint64_t>(p) + restart);
    oc.n_samples = cfg.n_samples;
    oc.max_iters = cfg.max_iters;
    oc.threads = threads;
    runs.push_back(
        {type, p, restart, optimize(cfg.graph, noise_model_for(type, p), oc)});
  };
  if (cfg.include_noiseless)
    for (int r = 0; r < cfg.restarts; ++r) run_one("none", 0.0, r);
  for (const std::string& type : cfg.noise_types)
    for (double p : cfg.probabilities)
      for (int r = 0; r < cfg.restarts; ++r) run_one(type, p, r);
  return runs;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::string opt_trace_to_csv(const OptResult& res) {
  std::string out = "step,energy,relative_error\n";
  for (const OptStep& s : res.trace) {
    out += std::to_string(s.step);
    out += ',';
    out += format_double(s.energy);
    out += ',';
    out += format_double(s.relative_error);
    out += '\n';
  }
  return out;
}

/// JSON summary with per-scenario final ratios and medians.
inline ordered_json vqa_summary_to_json(const std::vector<VqaRun>& runs) {
  ordered_json scenarios = ordered_json::array();
  // Group by (noise_type, p), preserving run order.
  std::vector<std::pair<std::string, double>> keys;
  for (const VqaRun& r : runs) {
    const std::pair<std::string, double> key{r.noise_type, r.p};
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      keys.push_back(key);
  }
  for (const auto& [type, p] : keys) {
    std::vector<double> ratios, rel_errors;
    ordered_json per_restart = ordered_json::array();
    for (const VqaRun& r : runs) {
      if (r.noise_type != type || r.p != p) continue;
      ratios.push_back(r.result.approximation_ratio);
      rel_errors.push_back(
          std::abs((r.result.e0 - r.result.best_energy) / r.result.e0));
      per_restart.push_back(
          ordered_json{{"restart", r.restart},
                       {"final_energy", r.result.best_energy},
                       {"approximation_ratio", r.result.approximation_ratio},
                       {"evaluations", r.result.trace.size()},
                       {"termination", r.result.termination}});
    }
    scenarios.push_back(
        ordered_json{{"noise_type", type},
                     {"p", p},
                     {"median_approximation_ratio", median(ratios)},
                     {"median_relative_error", median(rel_errors)},
                     {"restarts", std::move(per_restart)}});
  }
  return ordered_json{{"scenarios", std::move(scenarios)}};
}

}  // namespace nlo
