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

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "nlo/nlo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitSimulationError = 3;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::int64_t samples = 10000;
  int threads = 1;
  std::string out_dir = ".";
  std::string format = "csv";
};

std::filesystem::path out_path(const GlobalOptions& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return std::filesystem::path(g.out_dir) / name;
}

nlo::ordered_json load_config(const std::string& path) {
  try {
    return nlo::ordered_json::parse(nlo::read_text_file(path));
  } catch (const std::exception& e) {
    throw std::invalid_argument(e.what());
  }
}

void write_sweep_outputs(const GlobalOptions& g, const std::string& stem,
                         const std::vector<nlo::SweepRow>& rows) {
  if (g.format == "json") {
    nlo::write_text_file(out_path(g, stem + ".json").string(),
                         nlo::sweep_rows_to_json(rows).dump(2) + "\n");
  } else {
    nlo::write_text_file(out_path(g, stem + ".csv").string(),
                         nlo::sweep_rows_to_csv(rows));
  }
}

int cmd_run(const GlobalOptions& g, const std::string& experiment,
            const std::string& circuit_file, const std::string& qubit_file,
            const std::string& noise_type, double p, bool normalize) {
  nlo::OpticalCircuit circuit;
  std::string stem = "result";
  if (!experiment.empty()) {
    const nlo::Experiment e = nlo::experiment_from_name(experiment);
    stem = experiment;
    if (e == nlo::Experiment::Vqa)
      throw std::invalid_argument("run: use the vqa subcommand");
    if (e == nlo::Experiment::XGateMbqc) {
      const nlo::DensityMatrix rho = nlo::run_mbqc_x(
          nlo::noise_model_for(noise_type, p),
          {g.samples, g.seed, normalize}, g.threads);
      nlo::write_text_file(out_path(g, stem + ".json").string(),
                           nlo::density_to_json(rho).dump(2) + "\n");
      std::cout << "wrote " << out_path(g, stem + ".json").string() << "\n";
      return kExitOk;
    }
    circuit = e == nlo::Experiment::XGateGbqc
                  ? nlo::x_gate_circuit()
                  : nlo::transpile(nlo::bell_circuit(), true);
  } else if (!circuit_file.empty()) {
    circuit = nlo::circuit_from_json(load_config(circuit_file));
    stem = std::filesystem::path(circuit_file).stem().string() + "_result";
  } else if (!qubit_file.empty()) {
    circuit = nlo::transpile(nlo::qubit_circuit_from_json(load_config(qubit_file)));
    stem = std::filesystem::path(qubit_file).stem().string() + "_result";
  } else {
    throw std::invalid_argument(
        "run: one of --experiment, --circuit, --qubit-circuit is required");
  }

  const nlo::DensityMatrix rho =
      nlo::run_trajectories(circuit, nlo::noise_model_for(noise_type, p),
                            {g.samples, g.seed, normalize}, g.threads);
  nlo::write_text_file(out_path(g, stem + ".json").string(),
                       nlo::density_to_json(rho).dump(2) + "\n");
  std::cout << "wrote " << out_path(g, stem + ".json").string() << "\n";
  return kExitOk;
}

int cmd_sweep(const GlobalOptions& g, const std::string& spec_file) {
  const nlo::SweepSpec spec = nlo::sweep_spec_from_json(load_config(spec_file));
  const std::vector<nlo::SweepRow> rows = nlo::run_sweep(spec, g.threads);
  const std::string stem = "sweep_" + nlo::experiment_name(spec.experiment) +
                           "_" + spec.noise_type;
  write_sweep_outputs(g, stem, rows);
  std::cout << "wrote " << stem << (g.format == "json" ? ".json" : ".csv")
            << " (" << rows.size() << " rows) in " << g.out_dir << "\n";
  return kExitOk;
}

int cmd_vqa(const GlobalOptions& g, const std::string& config_file) {
  nlo::VqaConfig cfg;
  if (!config_file.empty())
    cfg = nlo::vqa_config_from_json(load_config(config_file));
  const std::vector<nlo::VqaRun> runs = nlo::run_vqa(cfg, g.threads);
  for (const nlo::VqaRun& r : runs) {
    std::ostringstream name;
    name << "vqa_trace_" << r.noise_type << "_p" << r.p << "_r" << r.restart
         << ".csv";
    nlo::write_text_file(out_path(g, name.str()).string(),
                         nlo::opt_trace_to_csv(r.result));
  }
  nlo::write_text_file(out_path(g, "vqa_summary.json").string(),
                       nlo::vqa_summary_to_json(runs).dump(2) + "\n");
  std::cout << "wrote vqa_summary.json and " << runs.size()
            << " trace files in " << g.out_dir << "\n";
  return kExitOk;
}

int cmd_validate(const GlobalOptions& g) {
  const std::vector<nlo::ValidationCase> cases =
      nlo::run_validation_suite(g.samples, g.seed, g.threads);
  bool all_pass = true;
  for (const nlo::ValidationCase& c : cases) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail
              << "\n";
    all_pass &= c.pass;
  }
  if (!all_pass) {
    std::cerr << "validation failed\n";
    return kExitSimulationError;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "nlosim: stochastic-trajectory simulator for noisy dual-rail "
      "linear-optical circuits"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--samples", g.samples, "trajectories per point");
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--format", g.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* run = app.add_subcommand("run", "run a single experiment");
  std::string experiment, circuit_file, qubit_file, noise_type = "none";
  double p = 0.0;
  bool normalize = false;
  run->add_option("--experiment", experiment,
                  "xgate-gbqc | bell-gbqc | xgate-mbqc");
  run->add_option("--circuit", circuit_file, "circuit JSON file");
  run->add_option("--qubit-circuit", qubit_file, "qubit circuit JSON file");
  run->add_option("--noise", noise_type, "none | dep | loss | both");
  run->add_option("--p", p, "error probability");
  run->add_flag("--normalize", normalize, "divide by herald probability");

  auto* sweep = app.add_subcommand("sweep", "run a sweep from a spec file");
  std::string spec_file;
  sweep->add_option("spec", spec_file, "SweepSpec JSON file")->required();

  auto* vqa = app.add_subcommand("vqa", "run the variational experiment");
  std::string vqa_config;
  vqa->add_option("config", vqa_config, "VQA config JSON file");

  auto* validate =
      app.add_subcommand("validate", "oracle-vs-trajectory validation suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run->parsed())
      return cmd_run(g, experiment, circuit_file, qubit_file, noise_type, p,
                     normalize);
    if (sweep->parsed()) return cmd_sweep(g, spec_file);
    if (vqa->parsed()) return cmd_vqa(g, vqa_config);
    if (validate->parsed()) return cmd_validate(g);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return kExitSimulationError;
  }
  return kExitConfigError;
}
