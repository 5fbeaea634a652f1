#include "dvrvqe/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace dvrvqe::runner;
  CLI::App app{"DVR Hamiltonians, measurement plans and VQE on a statevector simulator"};
  app.set_version_flag("--version", std::string("dvrvqe ") + DVRVQE_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;

  auto* run_cmd = app.add_subcommand("run", "Run the task named in the config");
  run_cmd->add_option("config", config_path, "YAML run configuration")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides `output`)");
  run_cmd->add_option("--seed", seed, "Master seed (overrides `seed`)");

  const char* tasks[] = {"diag", "decompose", "vqe", "excited", "search", "plan", "verify-plan", "measure"};
  const char* blurbs[] = {"Classical spectrum of the DVR Hamiltonian",
                          "Pauli decomposition of the DVR Hamiltonian",
                          "Ground-state VQE",
                          "Excited states by overlap deflation",
                          "Greedy entangler search",
                          "Build a measurement plan",
                          "Round-trip a measurement plan through its text export",
                          "Sampled expectation value from a measurement plan"};
  std::vector<CLI::App*> task_cmds;
  for (std::size_t i = 0; i < std::size(tasks); ++i) {
    auto* cmd = app.add_subcommand(tasks[i], blurbs[i]);
    cmd->add_option("config", config_path, "YAML run configuration")->required();
    cmd->add_option("--out", out_dir, "Output directory (overrides `output`)");
    cmd->add_option("--seed", seed, "Master seed (overrides `seed`)");
    task_cmds.push_back(cmd);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  Overrides overrides;
  CLI::App* chosen = app.get_subcommands().front();
  if (chosen != run_cmd) overrides.task = parse_task(chosen->get_name());
  if (chosen->count("--out")) overrides.output = out_dir;
  if (chosen->count("--seed")) overrides.seed = seed;
  return run(config_path, overrides, std::cout, std::cerr);
}
