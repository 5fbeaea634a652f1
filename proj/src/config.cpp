#include "dvrvqe/runner.hpp"

#include "dvrvqe/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace dvrvqe::runner {

namespace {

class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string* source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& field, const std::string& message) const {
    std::ostringstream ss;
    ss << *source_;
    if (at.IsDefined() && at.Mark().line >= 0) ss << ':' << at.Mark().line + 1;
    ss << ": " << field << ": " << message;
    throw ConfigError(ss.str());
  }
  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    fail(has(key) ? node_[key] : node_, qualified(key), message);
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_[key].IsDefined() && !node_[key].IsNull(); }

  void allow_only(const std::set<std::string>& keys) const {
    if (!node_.IsMap()) fail(node_, path_.empty() ? "<root>" : path_, "expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, qualified(key), "unknown key");
    }
  }

  Section child(const std::string& key) const {
    if (!has(key)) fail(node_, qualified(key), "missing section");
    Section s(node_[key], qualified(key), source_);
    if (!s.node_.IsMap()) fail(s.node_, s.path_, "expected a mapping");
    return s;
  }

  template <class T>
  T get(const std::string& key) const {
    if (!has(key)) fail(node_, qualified(key), "missing required key");
    return convert<T>(key);
  }
  template <class T>
  T get_or(const std::string& key, T fallback) const {
    return has(key) ? convert<T>(key) : fallback;
  }

  double positive(const std::string& key) const {
    const auto v = get<double>(key);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }
  int int_in(const std::string& key, int fallback, int lo, int hi) const {
    const auto v = get_or<int>(key, fallback);
    if (v < lo || v > hi)
      fail(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(v));
    return v;
  }

  std::vector<double> doubles(const std::string& key) const {
    const auto& n = node_[key];
    if (!n.IsSequence()) fail(key, "expected a list of numbers");
    std::vector<double> out;
    for (const auto& item : n) {
      try {
        out.push_back(item.as<double>());
      } catch (const YAML::Exception&) {
        fail(item, qualified(key), "expected a number");
      }
    }
    return out;
  }

  const YAML::Node& node() const { return node_; }

 private:
  template <class T>
  T convert(const std::string& key) const {
    const auto& n = node_[key];
    if (!n.IsScalar()) fail(key, "expected a scalar value");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(key, "cannot parse '" + n.Scalar() + "'");
    }
  }

  YAML::Node node_;
  std::string path_;
  const std::string* source_;
};

std::filesystem::path existing_file(const Section& s, const std::string& key, const std::filesystem::path& base) {
  std::filesystem::path p = s.get<std::string>(key);
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::is_regular_file(p)) s.fail(key, "file not found: " + p.string());
  return p;
}

SystemConfig parse_system(const Section& s) {
  s.allow_only({"grid", "n_qubits", "mass_amu", "mass_me", "x_min", "dx", "a", "b"});
  SystemConfig out;
  try {
    out.variant = dvr::parse_variant(s.get<std::string>("grid"));
  } catch (const InvalidArgument& e) {
    s.fail("grid", e.what());
  }
  out.n_qubits = s.int_in("n_qubits", 0, 1, kMaxQubits);
  if (s.has("mass_amu") == s.has("mass_me")) s.fail(s.node(), s.qualified("mass_amu"), "give exactly one of mass_amu, mass_me");
  out.mass = s.has("mass_amu") ? units::amu_to_me(s.positive("mass_amu")) : s.positive("mass_me");

  auto forbid = [&](const std::string& key) {
    if (s.has(key)) s.fail(key, "not used by grid '" + dvr::to_string(out.variant) + "'");
  };
  switch (out.variant) {
    case dvr::GridVariant::Infinite:
      out.grid.x_min = s.get<double>("x_min");
      out.grid.dx = s.positive("dx");
      forbid("a");
      forbid("b");
      break;
    case dvr::GridVariant::HalfInfinite:
      out.grid.dx = s.positive("dx");
      forbid("x_min");
      forbid("a");
      forbid("b");
      break;
    case dvr::GridVariant::Finite:
      out.grid.a = s.get<double>("a");
      out.grid.b = s.get<double>("b");
      if (!(out.grid.b > out.grid.a)) s.fail("b", "must exceed a");
      forbid("x_min");
      forbid("dx");
      break;
  }
  return out;
}

dvr::PotentialModel parse_potential(const Section& s, const std::filesystem::path& base) {
  const auto type = s.get<std::string>("type");
  if (type == "harmonic") {
    s.allow_only({"type", "force_constant", "center"});
    return dvr::Harmonic{s.positive("force_constant"), s.get_or<double>("center", 0.0)};
  }
  if (type == "morse") {
    s.allow_only({"type", "well_depth", "range", "equilibrium"});
    return dvr::Morse{s.positive("well_depth"), s.positive("range"), s.get<double>("equilibrium")};
  }
  if (type == "tabulated") {
    s.allow_only({"type", "file"});
    const auto path = existing_file(s, "file", base);
    try {
      return dvr::read_tabulated_file(path.string());
    } catch (const InvalidArgument& e) {
      s.fail("file", e.what());
    }
  }
  s.fail("type", "expected harmonic, morse or tabulated, got '" + type + "'");
}

TaskConfig parse_task(const Section& s, const std::filesystem::path& base) {
  s.allow_only({"name", "levels", "tolerance", "blocks", "entangler", "v_max", "method", "restarts",
                "max_iterations", "gradient_tolerance", "init_scale", "threads", "thresholds", "max_entanglers",
                "candidate_budget", "escape_restarts", "epsilon", "s", "r", "alpha", "beta", "streamlined", "plan",
                "circuit", "params", "basis", "shots"});
  TaskConfig t;
  if (s.has("name")) {
    const auto name = s.get<std::string>("name");
    t.task = runner::parse_task(name);
    if (!t.task)
      s.fail("name", "unknown task '" + name + "' (expected diag, decompose, vqe, excited, search, plan, verify-plan, measure)");
  }
  t.levels = s.int_in("levels", -1, -1, 1 << kMaxQubits);
  t.tolerance = s.get_or<double>("tolerance", 1e-12);
  if (!(t.tolerance >= 0.0)) s.fail("tolerance", "must be non-negative");

  t.blocks = s.int_in("blocks", 3, 0, 64);
  const auto entangler = s.get_or<std::string>("entangler", "linear");
  if (entangler == "linear") {
    t.entangler = EntanglerSource::Linear;
  } else if (entangler == "search") {
    t.entangler = EntanglerSource::Search;
  } else {
    t.entangler = EntanglerSource::File;
    t.entangler_file = existing_file(s, "entangler", base);
  }
  t.v_max = s.int_in("v_max", 2, 0, 1 << kMaxQubits);

  const auto method = s.get_or<std::string>("method", "quasi-newton");
  if (method == "quasi-newton") {
    t.optimizer.method = vqe::Method::QuasiNewton;
  } else if (method == "simplex") {
    t.optimizer.method = vqe::Method::Simplex;
  } else {
    s.fail("method", "expected quasi-newton or simplex, got '" + method + "'");
  }
  t.optimizer.restarts = s.int_in("restarts", 5, 1, 100000);
  t.optimizer.max_iterations = s.int_in("max_iterations", 2000, 1, 100000000);
  t.optimizer.gradient_tolerance = s.has("gradient_tolerance") ? s.positive("gradient_tolerance") : 1e-8;
  t.optimizer.init_scale = s.has("init_scale") ? s.positive("init_scale") : 0.1;
  t.optimizer.threads = static_cast<unsigned>(s.int_in("threads", 0, 0, 4096));

  if (s.has("thresholds")) {
    t.thresholds = s.doubles("thresholds");
    if (t.thresholds.empty()) s.fail("thresholds", "must not be empty");
    for (std::size_t i = 0; i < t.thresholds.size(); ++i) {
      if (!(t.thresholds[i] > 0.0)) s.fail("thresholds", "must be positive");
      if (i > 0 && !(t.thresholds[i] < t.thresholds[i - 1])) s.fail("thresholds", "must be strictly decreasing");
    }
  }
  t.max_entanglers = s.int_in("max_entanglers", 1000, 0, 1000000);
  t.candidate_budget = s.int_in("candidate_budget", 200, 1, 100000000);
  t.escape_restarts = s.int_in("escape_restarts", 5, 0, 100000);

  const bool streamlined = s.get_or<bool>("streamlined", false);
  if (s.has("epsilon")) {
    if (s.has("s") || s.has("r")) s.fail("epsilon", "give either epsilon or s and r, not both");
    const double eps = s.positive("epsilon");
    const double alpha = s.has("alpha") ? s.positive("alpha") : 1.0;
    const double beta = s.has("beta") ? s.positive("beta") : 1.0;
    t.truncation = meas::TruncationSpec::from_epsilon(eps, 1, alpha, beta);  // resized once n is known
    t.truncation.streamlined = streamlined;
  } else {
    if (s.has("alpha") || s.has("beta")) s.fail(s.has("alpha") ? "alpha" : "beta", "only meaningful with epsilon");
    t.truncation.s = s.get_or<int>("s", -1);  // -1: keep everything, resolved once n is known
    t.truncation.r = s.get_or<int>("r", -1);
    t.truncation.streamlined = streamlined;
  }

  if (s.has("plan")) t.plan_file = existing_file(s, "plan", base);
  if (s.has("circuit")) t.circuit_file = existing_file(s, "circuit", base);
  if (s.has("params")) t.params_file = existing_file(s, "params", base);
  if (s.has("basis")) {
    const auto b = s.get<long long>("basis");
    if (b < 0) s.fail("basis", "must be non-negative");
    t.basis_state = static_cast<std::uint64_t>(b);
  }
  if (s.has("shots")) {
    const auto shots = s.get<long long>("shots");
    if (shots < 1) s.fail("shots", "must be positive");
    t.shots = static_cast<std::uint64_t>(shots);
  }
  return t;
}

}  // namespace

std::string to_string(Task task) {
  switch (task) {
    case Task::Diag: return "diag";
    case Task::Decompose: return "decompose";
    case Task::Vqe: return "vqe";
    case Task::Excited: return "excited";
    case Task::Search: return "search";
    case Task::Plan: return "plan";
    case Task::VerifyPlan: return "verify-plan";
    case Task::Measure: return "measure";
  }
  return "?";
}

std::optional<Task> parse_task(const std::string& name) {
  for (auto t : {Task::Diag, Task::Decompose, Task::Vqe, Task::Excited, Task::Search, Task::Plan, Task::VerifyPlan,
                 Task::Measure})
    if (to_string(t) == name) return t;
  return std::nullopt;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source_name + ":" + std::to_string(e.mark.line + 1) + ": <syntax>: " + e.msg);
  }
  const Section top(root, "", &source_name);
  if (!root.IsMap()) top.fail(root, "<root>", "expected a mapping with system, potential and task sections");
  top.allow_only({"seed", "output", "system", "potential", "task"});

  RunConfig cfg;
  cfg.source = source_name;
  if (top.has("seed")) {
    const auto seed = top.get<long long>("seed");
    if (seed < 0) top.fail("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (top.has("output")) {
    cfg.output = top.get<std::string>("output");
    if (cfg.output.is_relative()) cfg.output = base_dir / cfg.output;
  } else {
    cfg.output = base_dir / "out";
  }
  cfg.system = parse_system(top.child("system"));
  cfg.potential = parse_potential(top.child("potential"), base_dir);
  cfg.task = parse_task(top.child("task"), base_dir);

  const int dim = 1 << cfg.system.n_qubits;
  auto& tr = cfg.task.truncation;
  const Section task = top.child("task");
  if (tr.epsilon > 0.0) {
    const bool streamlined = tr.streamlined;
    tr = meas::TruncationSpec::from_epsilon(tr.epsilon, cfg.system.n_qubits, tr.alpha, tr.beta);
    tr.streamlined = streamlined;
  } else {
    if (tr.s == -1) tr.s = dim;
    if (tr.r == -1) tr.r = dim;
    if (tr.s < 1 || tr.s > dim) task.fail("s", "must lie in [1, " + std::to_string(dim) + "]");
    if (tr.r < 0 || tr.r > dim) task.fail("r", "must lie in [0, " + std::to_string(dim) + "]");
  }
  if (cfg.task.basis_state && *cfg.task.basis_state >= static_cast<std::uint64_t>(dim))
    task.fail("basis", "index exceeds the grid size " + std::to_string(dim));
  if (cfg.task.circuit_file.has_value() != cfg.task.params_file.has_value())
    task.fail(cfg.task.circuit_file ? "circuit" : "params", "circuit and params must be given together");
  if (cfg.task.circuit_file && cfg.task.basis_state) task.fail("basis", "give either basis or circuit, not both");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const InvalidArgument& e) {
    throw ConfigError(path.string() + ": <file>: " + e.what());
  }
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_config(text, base, path.string());
}

}  // namespace dvrvqe::runner
