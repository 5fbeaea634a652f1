#pragma once

// Config-driven runs: build the DVR Hamiltonian described by a YAML file,
// execute one task and write its artifacts plus a hashed manifest.

#include "dvrvqe/dvr.hpp"
#include "dvrvqe/measurement.hpp"
#include "dvrvqe/vqe.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dvrvqe::runner {

enum class Task { Diag, Decompose, Vqe, Excited, Search, Plan, VerifyPlan, Measure };

std::string to_string(Task task);
std::optional<Task> parse_task(const std::string& name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Malformed or inconsistent configuration; what() carries `file:line: field: message`.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemConfig {
  dvr::GridVariant variant = dvr::GridVariant::Infinite;
  int n_qubits = 4;
  double mass = 0.0;  // electron masses
  dvr::GridParams grid;
};

enum class EntanglerSource { Linear, Search, File };

struct TaskConfig {
  std::optional<Task> task;
  int levels = -1;  // diag: -1 writes every eigenvalue
  double tolerance = 1e-12;

  int blocks = 3;
  EntanglerSource entangler = EntanglerSource::Linear;
  std::filesystem::path entangler_file;
  int v_max = 2;
  vqe::OptimizerConfig optimizer;

  std::vector<double> thresholds{1.0, 0.01};
  int max_entanglers = 1000;
  int candidate_budget = 200;
  int escape_restarts = 5;

  meas::TruncationSpec truncation = meas::TruncationSpec::with_cutoffs(1, 0);
  std::optional<std::filesystem::path> plan_file;
  std::optional<std::filesystem::path> circuit_file;
  std::optional<std::filesystem::path> params_file;
  std::optional<std::uint64_t> basis_state;
  std::optional<std::uint64_t> shots;
};

struct RunConfig {
  std::filesystem::path source;
  std::uint64_t seed = 1;
  std::filesystem::path output = "out";
  SystemConfig system;
  dvr::PotentialModel potential;
  TaskConfig task;
};

/// Relative paths inside the config resolve against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                       const std::string& source_name = "<config>");
RunConfig load_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<Task> task;
  std::optional<std::filesystem::path> output;
  std::optional<std::uint64_t> seed;
};

/// Runs the configured task and writes artifacts; throws on failure.
/// Returns the artifact file names (manifest last).
std::vector<std::string> execute(const RunConfig& config, std::ostream& log);

/// Loads, applies overrides, executes; maps failures to exit codes with a
/// one-line diagnostic on `err`.
int run(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& log, std::ostream& err);

std::string sha256_hex(const std::string& data);

/// "c1" for 1 cm^-1, "c001" for 0.01 cm^-1.
std::string threshold_tag(double threshold_cm1);

/// One value per line, 17 significant digits.
void write_params(std::ostream& out, const std::vector<double>& params);
std::vector<double> read_params(std::istream& in);

}  // namespace dvrvqe::runner
