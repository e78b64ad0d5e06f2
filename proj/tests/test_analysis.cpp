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

#include <catch2/catch_amalgamated.hpp>

#include "nlo/metrics.hpp"
#include "nlo/serialize.hpp"
#include "nlo/sweep.hpp"

using namespace nlo;
using Catch::Approx;

namespace {

DensityMatrix diag_density(std::initializer_list<double> diag) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  int i = 0;
  for (double d : diag) m(i, i) = d, ++i;
  return DensityMatrix(m, 1.0, 0.0, 1, 0);
}

}  // namespace

TEST_CASE("hellinger: fixed values", "[analysis]") {
  CHECK(hellinger(diag_density({1.0, 0.0}), diag_density({1.0, 0.0})) == 0.0);
  CHECK(hellinger(diag_density({1.0, 0.0}), diag_density({0.0, 1.0})) ==
        Approx(1.0));
  // High-precision evaluation of H(diag(1,0), diag(1/2,1/2)).
  CHECK(hellinger(diag_density({1.0, 0.0}), diag_density({0.5, 0.5})) ==
        Approx(0.54119610014619698).margin(1e-12));
}

TEST_CASE("hellinger: dimension mismatch and clamping", "[analysis]") {
  CHECK_THROWS_AS(
      hellinger(diag_density({1.0, 0.0}), diag_density({1.0, 0.0, 0.0})),
      std::invalid_argument);
  // Tiny negative diagonals (roundoff) are clamped to zero.
  CHECK(hellinger(diag_density({1.0, -1e-13}), diag_density({1.0, 0.0})) ==
        Approx(0.0).margin(1e-6));
}

TEST_CASE("hellinger is a metric on diagonal distributions", "[analysis]") {
  DrawStream stream(17, 0, 0);
  for (int rep = 0; rep < 25; ++rep) {
    Eigen::VectorXd p(4), q(4), r(4);
    double sp = 0, sq = 0, sr = 0;
    for (int i = 0; i < 4; ++i) {
      p(i) = stream.uniform();
      q(i) = stream.uniform();
      r(i) = stream.uniform();
      sp += p(i);
      sq += q(i);
      sr += r(i);
    }
    p /= sp;
    q /= sq;
    r /= sr;
    CHECK(hellinger(p, q) == Approx(hellinger(q, p)).margin(1e-15));
    CHECK(hellinger(p, r) <= hellinger(p, q) + hellinger(q, r) + 1e-12);
    CHECK(hellinger(p, q) >= 0.0);
    CHECK(hellinger(p, q) <= 1.0 + 1e-12);
  }
}

TEST_CASE("fidelity_from_hellinger", "[analysis]") {
  CHECK(fidelity_from_hellinger(0.0) == 1.0);
  CHECK(fidelity_from_hellinger(1.0) == 0.0);
  CHECK(fidelity_from_hellinger(0.54119610014619698) ==
        Approx(0.5).margin(1e-12));
  CHECK_THROWS_AS(fidelity_from_hellinger(1.5), std::invalid_argument);
  CHECK_THROWS_AS(fidelity_from_hellinger(-0.1), std::invalid_argument);
}

TEST_CASE("fidelity of identical states is exactly one", "[analysis]") {
  const DensityMatrix rho = diag_density({0.3, 0.7});
  CHECK(fidelity_from_hellinger(hellinger(rho, rho)) == 1.0);
}

TEST_CASE("circuit JSON round-trip", "[analysis]") {
  const OpticalCircuit bell = transpile(bell_circuit(), true);
  const ordered_json j = circuit_to_json(bell);
  const OpticalCircuit back = circuit_from_json(j);
  CHECK(back.mode_count == bell.mode_count);
  CHECK(back.input == bell.input);
  CHECK(back.qubit_map == bell.qubit_map);
  REQUIRE(back.elements.size() == bell.elements.size());
  for (std::size_t i = 0; i < bell.elements.size(); ++i) {
    CHECK(back.elements[i].kind == bell.elements[i].kind);
    CHECK(back.elements[i].theta == bell.elements[i].theta);  // bit-exact
    CHECK(back.elements[i].phi == bell.elements[i].phi);
  }
  // Field order is fixed by the schema.
  auto it = j.begin();
  CHECK(it.key() == "modes");
  ++it;
  CHECK(it.key() == "input");
  ++it;
  CHECK(it.key() == "herald");
  ++it;
  CHECK(it.key() == "qubit_map");
  ++it;
  CHECK(it.key() == "elements");
}

TEST_CASE("qubit circuit JSON parses all gate kinds", "[analysis]") {
  const auto j = ordered_json::parse(R"({
    "qubits": 2,
    "gates": [
      {"kind": "h", "targets": [0]},
      {"kind": "x", "targets": [1]},
      {"kind": "cz", "targets": [0, 1]},
      {"kind": "cx", "targets": [0, 1]}
    ]
  })");
  const QubitCircuit qc = qubit_circuit_from_json(j);
  CHECK(qc.n_qubits == 2);
  REQUIRE(qc.gates.size() == 4);
  CHECK(qc.gates[3].kind == QubitGate::Kind::CX);
  CHECK_THROWS_AS(
      qubit_circuit_from_json(ordered_json::parse(
          R"({"qubits": 1, "gates": [{"kind": "t", "targets": [0]}]})")),
      std::invalid_argument);
}

TEST_CASE("result JSON round-trips the density matrix bit-exactly",
          "[analysis]") {
  const DensityMatrix rho = run_trajectories(
      x_gate_circuit(), NoiseModel::dep_and_loss(0.03), {500, 99, false});
  const ordered_json j = density_to_json(rho);
  const DensityMatrix back = density_from_json(j);
  CHECK(back.entries() == rho.entries());
  CHECK(back.herald_probability() == rho.herald_probability());
  CHECK(back.discarded_weight() == rho.discarded_weight());
  CHECK(back.n_samples() == rho.n_samples());
  CHECK(back.seed() == rho.seed());

  // Through text as the CLI writes it.
  const DensityMatrix again =
      density_from_json(ordered_json::parse(j.dump(2)));
  CHECK(again.entries() == rho.entries());
}

TEST_CASE("format_double round-trips through text", "[analysis]") {
  for (double v : {0.1, 1.0 / 3.0, 6.02e23, -1.7e-300, 0.0,
                   0.54119610014619698}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("sweep CSV has the pinned header and full precision", "[analysis]") {
  const std::vector<SweepRow> rows{{0.01, "loss", "rho_11", 1.0 / 3.0, 0.001}};
  const std::string csv = sweep_rows_to_csv(rows);
  CHECK(csv.starts_with("p,scenario,observable,value,stderr\n"));
  CHECK(csv.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("sweep spec JSON validation", "[analysis]") {
  const auto good = ordered_json::parse(
      R"({"experiment": "xgate-gbqc", "noise_type": "dep",
          "probabilities": [0.001, 0.01], "n_samples": 100, "seed": 4})");
  const SweepSpec spec = sweep_spec_from_json(good);
  CHECK(spec.experiment == Experiment::XGateGbqc);
  CHECK(spec.probabilities.size() == 2);

  auto bad = good;
  bad["probabilities"] = std::vector<double>{0.01, 0.001};  // not ascending
  CHECK_THROWS_AS(sweep_spec_from_json(bad), std::invalid_argument);
  bad["probabilities"] = std::vector<double>{0.7};
  CHECK_THROWS_AS(sweep_spec_from_json(bad), std::invalid_argument);
}

TEST_CASE("run_sweep: X-gate loss sweep shows the paper trends",
          "[analysis][statistical]") {
  SweepSpec spec;
  spec.experiment = Experiment::XGateGbqc;
  spec.noise_type = "loss";
  spec.probabilities = {0.001, 0.01, 0.1};
  spec.n_samples = 4000;
  spec.seed = 2;
  const std::vector<SweepRow> rows = run_sweep(spec);

  std::vector<double> rho11, hell;
  for (const SweepRow& r : rows) {
    if (r.observable == "rho_11") rho11.push_back(r.value);
    if (r.observable == "hellinger") hell.push_back(r.value);
  }
  REQUIRE(rho11.size() == 3);
  CHECK(rho11[0] > rho11[1]);
  CHECK(rho11[1] > rho11[2]);
  CHECK(hell[0] < hell[1]);
  CHECK(hell[1] < hell[2]);
}

TEST_CASE("run_sweep: determinism of output rows", "[analysis]") {
  SweepSpec spec;
  spec.experiment = Experiment::XGateGbqc;
  spec.noise_type = "both";
  spec.probabilities = {0.01};
  spec.n_samples = 500;
  spec.seed = 12;
  const auto a = run_sweep(spec, 1);
  const auto b = run_sweep(spec, 2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].value == b[i].value);
    CHECK(a[i].stderr_est == b[i].stderr_est);
  }
}

TEST_CASE("vqa config parsing and summary shape", "[analysis]") {
  const auto j = ordered_json::parse(R"({
    "graph": {"vertices": 4, "edges": [[0,1],[1,2],[2,3],[3,0]]},
    "noise_types": ["loss"],
    "probabilities": [0.001],
    "restarts": 2,
    "seed": 9,
    "n_samples": 50,
    "max_iters": 10,
    "include_noiseless": false
  })");
  const VqaConfig cfg = vqa_config_from_json(j);
  CHECK(cfg.restarts == 2);
  CHECK(cfg.max_iters == 10);
  const std::vector<VqaRun> runs = run_vqa(cfg);
  CHECK(runs.size() == 2);
  const ordered_json summary = vqa_summary_to_json(runs);
  REQUIRE(summary.at("scenarios").size() == 1);
  CHECK(summary.at("scenarios").at(0).at("noise_type") == "loss");
  CHECK(summary.at("scenarios").at(0).at("restarts").size() == 2);

  const std::string csv = opt_trace_to_csv(runs[0].result);
  CHECK(csv.starts_with("step,energy,relative_error\n"));
}

TEST_CASE("noise_model_for covers the scenario names", "[analysis]") {
  CHECK(noise_model_for("none", 0.1).any() == false);
  CHECK(noise_model_for("dep", 0.1).p_dep == 0.1);
  CHECK(noise_model_for("loss", 0.1).p_element == 0.1);
  CHECK(noise_model_for("loss", 0.1).p_detect == 0.1);
  CHECK(noise_model_for("both", 0.1).p_dep == 0.1);
  CHECK_THROWS_AS(noise_model_for("gamma", 0.1), std::invalid_argument);
}
