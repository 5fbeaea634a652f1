#include "dvrvqe/runner.hpp"

#include "dvrvqe/ansatz_search.hpp"
#include "dvrvqe/io.hpp"
#include "dvrvqe/pauli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace dvrvqe::runner {

namespace {

using Artifacts = std::map<std::string, std::string>;

std::string fmt(double v) { return io::format_double(v); }
std::string cm1(double hartree) { return fmt(units::to_wavenumber(hartree)); }

std::string spectrum_csv(const Vector& spectrum) {
  std::ostringstream out;
  out << "v,energy_hartree,energy_cm1,excitation_cm1\n";
  for (Eigen::Index v = 0; v < spectrum.size(); ++v)
    out << v << ',' << fmt(spectrum(v)) << ',' << cm1(spectrum(v)) << ',' << cm1(spectrum(v) - spectrum(0)) << '\n';
  return out.str();
}

std::string circuit_text(const sv::Circuit& c) {
  std::ostringstream out;
  sv::write_circuit(out, c);
  return out.str();
}

std::string params_text(const std::vector<double>& params) {
  std::ostringstream out;
  write_params(out, params);
  return out.str();
}

std::string trace_text(const vqe::VqeResult& r) {
  std::ostringstream out;
  vqe::write_trace_csv(out, r);
  return out.str();
}

struct Context {
  const RunConfig& cfg;
  std::ostream& log;
  dvr::DvrHamiltonian ham;
  Artifacts out;
};

Task require_task(const RunConfig& cfg) {
  if (!cfg.task.task) throw ConfigError(cfg.source.string() + ": task.name: no task given in the config or on the command line");
  return *cfg.task.task;
}

vqe::OptimizerConfig optimizer_for(const RunConfig& cfg) {
  auto opt = cfg.task.optimizer;
  opt.seed = cfg.seed;
  return opt;
}

search::SearchConfig search_config(const RunConfig& cfg) {
  search::SearchConfig sc;
  sc.blocks = cfg.task.blocks;
  sc.thresholds_cm1 = cfg.task.thresholds;
  sc.max_entanglers = cfg.task.max_entanglers;
  sc.candidate_budget = cfg.task.candidate_budget;
  sc.escape_restarts = cfg.task.escape_restarts;
  sc.optimizer = optimizer_for(cfg);
  return sc;
}

void emit_search(Context& ctx, const search::SearchResult& result) {
  std::ostringstream trace;
  search::write_trace_csv(trace, result);
  ctx.out["search_trace.csv"] = trace.str();
  for (const auto& snap : result.snapshots) {
    const auto tag = threshold_tag(snap.threshold_cm1);
    ctx.out[tag + ".circuit"] = circuit_text(snap.ansatz.circuit());
    ctx.out[tag + ".params"] = params_text(snap.params);
    ctx.log << "snapshot " << tag << ": " << snap.ansatz.num_entanglers() << " entanglers, error "
            << fmt(snap.error_cm1) << " cm-1\n";
  }
}

vqe::AnsatzSpec resolve_ansatz(Context& ctx) {
  const auto& t = ctx.cfg.task;
  const int n = ctx.cfg.system.n_qubits;
  switch (t.entangler) {
    case EntanglerSource::Linear:
      return vqe::AnsatzSpec::linear(n, t.blocks);
    case EntanglerSource::File: {
      auto spec = vqe::AnsatzSpec::from_circuit(sv::read_circuit_file(t.entangler_file.string()));
      if (spec.n_qubits != n)
        throw ConfigError(ctx.cfg.source.string() + ": task.entangler: circuit acts on " +
                          std::to_string(spec.n_qubits) + " qubits, system has " + std::to_string(n));
      return spec;
    }
    case EntanglerSource::Search: {
      if (t.blocks < 1) throw ConfigError(ctx.cfg.source.string() + ": task.blocks: search needs at least one block");
      const auto result = search::greedy_search(ctx.ham.full, n, search_config(ctx.cfg));
      emit_search(ctx, result);
      return result.snapshots.empty() ? result.final_ansatz : result.snapshots.back().ansatz;
    }
  }
  return vqe::AnsatzSpec::linear(n, t.blocks);
}

std::string vqe_result_csv(const std::vector<vqe::VqeResult>& results, const Vector& spectrum) {
  std::ostringstream out;
  out << "v,energy_hartree,energy_cm1,reference_hartree,reference_cm1,error_cm1,converged,max_overlap\n";
  for (std::size_t v = 0; v < results.size(); ++v) {
    const auto& r = results[v];
    const double ref = spectrum(static_cast<Eigen::Index>(v));
    double overlap = 0.0;
    for (double o : r.overlaps) overlap = std::max(overlap, o);
    out << v << ',' << fmt(r.energy) << ',' << cm1(r.energy) << ',' << fmt(ref) << ',' << cm1(ref) << ','
        << cm1(r.energy - ref) << ',' << (r.converged ? 1 : 0) << ',' << fmt(overlap) << '\n';
  }
  return out.str();
}

void task_diag(Context& ctx) {
  const int dim = static_cast<int>(ctx.ham.grid.size());
  const int levels = ctx.cfg.task.levels < 0 ? dim : std::min(ctx.cfg.task.levels, dim);
  const auto spectrum = dvr::classical_spectrum(ctx.ham.full, levels);
  ctx.out["spectrum.csv"] = spectrum_csv(spectrum);
  ctx.log << "ground state " << fmt(spectrum(0)) << " hartree (" << cm1(spectrum(0)) << " cm-1)\n";
}

void task_decompose(Context& ctx) {
  const auto sum = pauli::decompose(ctx.ham.full, ctx.cfg.task.tolerance);
  std::ostringstream terms;
  pauli::write_terms(terms, sum);
  ctx.out["pauli.txt"] = terms.str();
  const double err = (pauli::reconstruct(sum) - ctx.ham.full).cwiseAbs().maxCoeff();
  std::ostringstream res;
  res << "terms,max_abs_reconstruction_error\n" << pauli::term_count(sum) << ',' << fmt(err) << '\n';
  ctx.out["result.csv"] = res.str();
  ctx.log << pauli::term_count(sum) << " Pauli terms, reconstruction error " << fmt(err) << '\n';
}

void task_vqe(Context& ctx, bool excited) {
  const int dim = static_cast<int>(ctx.ham.grid.size());
  const int levels = excited ? ctx.cfg.task.v_max + 1 : 1;
  if (levels > dim)
    throw ConfigError(ctx.cfg.source.string() + ": task.v_max: exceeds the number of grid points");
  const auto spectrum = dvr::classical_spectrum(ctx.ham.full, dim);
  ctx.out["spectrum.csv"] = spectrum_csv(spectrum);

  const auto ansatz = resolve_ansatz(ctx);
  const auto opt = optimizer_for(ctx.cfg);
  std::vector<vqe::VqeResult> results;
  if (excited) {
    results = vqe::excited_states(ansatz, ctx.ham.full, ctx.cfg.task.v_max, opt);
  } else {
    results.push_back(vqe::minimize(ansatz, vqe::ObjectiveConfig{ctx.ham.full, {}}, opt));
  }
  ctx.out["ansatz.circuit"] = circuit_text(ansatz.circuit());
  for (std::size_t v = 0; v < results.size(); ++v) {
    const auto suffix = v == 0 ? std::string() : "_v" + std::to_string(v);
    ctx.out["vqe_trace" + suffix + ".csv"] = trace_text(results[v]);
    ctx.out["params" + suffix + ".txt"] = params_text(results[v].params);
    ctx.log << "v=" << v << ": " << fmt(results[v].energy) << " hartree, error "
            << cm1(results[v].energy - spectrum(static_cast<Eigen::Index>(v))) << " cm-1"
            << (results[v].converged ? "" : " (not converged)") << '\n';
  }
  ctx.out["result.csv"] = vqe_result_csv(results, spectrum);
}

void task_search(Context& ctx) {
  if (ctx.cfg.task.blocks < 1) throw ConfigError(ctx.cfg.source.string() + ": task.blocks: search needs at least one block");
  const auto spectrum = dvr::classical_spectrum(ctx.ham.full, static_cast<int>(ctx.ham.grid.size()));
  ctx.out["spectrum.csv"] = spectrum_csv(spectrum);
  auto sc = search_config(ctx.cfg);
  sc.reference_energy = spectrum(0);
  const auto result = search::greedy_search(ctx.ham.full, ctx.cfg.system.n_qubits, sc);
  emit_search(ctx, result);
  std::ostringstream res;
  res << "threshold_cm1,step,entanglers,energy_hartree,energy_cm1,error_cm1\n";
  for (const auto& snap : result.snapshots)
    res << fmt(snap.threshold_cm1) << ',' << snap.step << ',' << snap.ansatz.num_entanglers() << ','
        << fmt(snap.energy) << ',' << cm1(snap.energy) << ',' << fmt(snap.error_cm1) << '\n';
  ctx.out["result.csv"] = res.str();
  if (result.snapshots.size() < sc.thresholds_cm1.size())
    ctx.log << "search stopped at " << fmt(result.trace.back().error_cm1) << " cm-1 before reaching every threshold\n";
}

meas::MeasurementPlan configured_plan(Context& ctx) {
  if (ctx.cfg.task.plan_file) {
    std::ifstream in(*ctx.cfg.task.plan_file);
    auto plan = meas::read_plan(in);
    if (plan.n_qubits != ctx.cfg.system.n_qubits)
      throw ConfigError(ctx.cfg.source.string() + ": task.plan: plan acts on " + std::to_string(plan.n_qubits) +
                        " qubits, system has " + std::to_string(ctx.cfg.system.n_qubits));
    return plan;
  }
  return meas::full_plan(ctx.ham.profile, ctx.cfg.task.truncation);
}

std::string plan_text(const meas::MeasurementPlan& plan) {
  std::ostringstream out;
  meas::write_plan(out, plan);
  return out.str();
}

std::string complexity_csv(const meas::PlanComplexity& c) {
  std::ostringstream out;
  auto yes = [](bool b) { return b ? 1 : 0; };
  out << "quantity,actual,bound,within_bound\n";
  out << "bases," << c.num_bases << ',' << fmt(c.bound_num_bases) << ',' << yes(c.total_within_bound) << '\n';
  out << "band_bases," << c.band_bases << ',' << fmt(c.bound_band) << ',' << yes(c.bands_within_bound) << '\n';
  out << "antidiagonal_bases," << c.antidiag_bases << ',' << fmt(c.bound_antidiag) << ','
      << yes(c.antidiag_within_bound) << '\n';
  out << "max_circuit_depth," << c.max_circuit_depth << ",," << yes(c.depth_within_bound) << '\n';
  return out.str();
}

void task_plan(Context& ctx) {
  const auto plan = configured_plan(ctx);
  ctx.out["plan.txt"] = plan_text(plan);
  const auto c = meas::plan_complexity(plan);
  ctx.out["result.csv"] = complexity_csv(c);
  ctx.log << "plan s=" << plan.spec.s << " r=" << plan.spec.r << ": " << c.num_bases << " bases (bound "
          << fmt(c.bound_num_bases) << ")\n";
}

void task_verify_plan(Context& ctx) {
  const auto plan = configured_plan(ctx);
  const auto text = plan_text(plan);
  ctx.out["plan.txt"] = text;
  std::istringstream in(text);
  const auto restored = meas::read_plan(in);
  const Matrix op = plan.operator_matrix();
  const double roundtrip = (restored.operator_matrix() - op).cwiseAbs().maxCoeff();
  const Matrix target = dvr::truncate(ctx.ham.profile, plan.spec.s, plan.spec.r, plan.spec.window());
  const double truncation = (op - target).cwiseAbs().maxCoeff();
  std::ostringstream res;
  res << "roundtrip_max_abs,truncation_max_abs\n" << fmt(roundtrip) << ',' << fmt(truncation) << '\n';
  ctx.out["result.csv"] = res.str();
  ctx.log << "round-trip deviation " << fmt(roundtrip) << ", deviation from truncated matrix " << fmt(truncation)
          << '\n';
  const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
  if (roundtrip != 0.0 || truncation > 1e-12 * scale)
    throw InvariantViolation("plan verification failed: round-trip " + fmt(roundtrip) + ", truncation " +
                             fmt(truncation));
}

void task_measure(Context& ctx) {
  const auto& t = ctx.cfg.task;
  const int n = ctx.cfg.system.n_qubits;
  if (!t.circuit_file && !t.basis_state)
    throw ConfigError(ctx.cfg.source.string() + ": task.circuit: measure needs circuit and params, or basis");
  const auto plan = configured_plan(ctx);
  sv::QuantumState state(n);
  if (t.basis_state) {
    state = sv::QuantumState::basis(n, *t.basis_state);
  } else {
    const auto circuit = sv::read_circuit_file(t.circuit_file->string());
    if (circuit.num_qubits() != n)
      throw ConfigError(ctx.cfg.source.string() + ": task.circuit: circuit acts on " +
                        std::to_string(circuit.num_qubits()) + " qubits, system has " + std::to_string(n));
    std::ifstream pin(*t.params_file);
    const auto params = read_params(pin);
    if (static_cast<int>(params.size()) != circuit.num_slots())
      throw ConfigError(ctx.cfg.source.string() + ": task.params: " + std::to_string(params.size()) +
                        " values for " + std::to_string(circuit.num_slots()) + " circuit parameters");
    state = sv::run(circuit, params);
  }
  const std::uint64_t shots =
      t.shots ? *t.shots : (plan.spec.epsilon > 0.0 ? meas::default_shots(plan.spec.epsilon) : 10000);

  const double exact = meas::evaluate_exact(plan, state);
  const double expectation = sv::expectation_dense(state, ctx.ham.full);
  const double bound = dvr::truncation_error_bound(ctx.ham.profile, plan.spec.s, plan.spec.r, plan.spec.window());
  const auto sampled = meas::evaluate_sampled(plan, state, shots, ctx.cfg.seed);
  const auto c = meas::plan_complexity(plan);

  std::ostringstream rep;
  rep << "plan s " << plan.spec.s << " r " << plan.spec.r << " streamlined " << (plan.spec.streamlined ? 1 : 0)
      << '\n';
  rep << "exact_tau " << fmt(exact) << " hartree " << cm1(exact) << " cm-1\n";
  rep << "expectation " << fmt(expectation) << " hartree " << cm1(expectation) << " cm-1\n";
  rep << "truncation_bound " << fmt(bound) << " hartree " << cm1(bound) << " cm-1\n";
  rep << "estimate " << fmt(sampled.estimate) << " hartree " << cm1(sampled.estimate) << " cm-1\n";
  rep << "standard_error " << fmt(sampled.standard_error) << " hartree " << cm1(sampled.standard_error) << " cm-1\n";
  for (std::size_t b = 0; b < sampled.shots_per_basis.size(); ++b) {
    rep << "basis " << b << ' ';
    if (b == 0) {
      rep << "diagonal";
    } else if (b <= plan.band_bases.size()) {
      rep << "band " << plan.band_bases[b - 1].label;
    } else {
      rep << "antidiag " << plan.antidiag_bases[b - 1 - plan.band_bases.size()].label;
    }
    rep << " shots " << sampled.shots_per_basis[b] << '\n';
  }
  auto yes = [](bool v) { return v ? "yes" : "no"; };
  rep << "complexity bases " << c.num_bases << " bound " << fmt(c.bound_num_bases) << " within "
      << yes(c.total_within_bound) << '\n';
  rep << "complexity band_bases " << c.band_bases << " bound " << fmt(c.bound_band) << " within "
      << yes(c.bands_within_bound) << '\n';
  rep << "complexity antidiagonal_bases " << c.antidiag_bases << " bound " << fmt(c.bound_antidiag) << " within "
      << yes(c.antidiag_within_bound) << '\n';
  rep << "complexity max_depth " << c.max_circuit_depth << " within " << yes(c.depth_within_bound) << '\n';
  ctx.out["measure.txt"] = rep.str();

  std::ostringstream res;
  res << "exact_tau_hartree,exact_tau_cm1,estimate_hartree,estimate_cm1,standard_error_hartree,standard_error_cm1,"
         "expectation_hartree,expectation_cm1,shots_per_basis\n";
  res << fmt(exact) << ',' << cm1(exact) << ',' << fmt(sampled.estimate) << ',' << cm1(sampled.estimate) << ','
      << fmt(sampled.standard_error) << ',' << cm1(sampled.standard_error) << ',' << fmt(expectation) << ','
      << cm1(expectation) << ',' << shots << '\n';
  ctx.out["result.csv"] = res.str();
  ctx.out["plan.txt"] = plan_text(plan);
  ctx.log << "tau exact " << fmt(exact) << ", estimate " << fmt(sampled.estimate) << " +- "
          << fmt(sampled.standard_error) << '\n';
}

}  // namespace

std::string threshold_tag(double threshold_cm1) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", threshold_cm1);
  std::string tag = "c";
  for (const char* p = buf; *p; ++p)
    if (*p != '.') tag += *p;
  return tag;
}

void write_params(std::ostream& out, const std::vector<double>& params) {
  for (double p : params) out << io::format_double(p) << '\n';
}

std::vector<double> read_params(std::istream& in) {
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double v = 0.0;
    std::string rest;
    if (!(ls >> v) || (ls >> rest)) throw InvalidArgument("params line " + std::to_string(lineno) + ": expected one number");
    out.push_back(v);
  }
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::vector<std::string> execute(const RunConfig& config, std::ostream& log) {
  const auto task = require_task(config);
  const auto grid = dvr::build_grid(config.system.variant, config.system.grid, config.system.n_qubits, config.system.mass);
  Context ctx{config, log, dvr::assemble(grid, config.potential), {}};
  log << "task " << to_string(task) << ", " << grid.size() << " grid points, seed " << config.seed << '\n';
  switch (task) {
    case Task::Diag: task_diag(ctx); break;
    case Task::Decompose: task_decompose(ctx); break;
    case Task::Vqe: task_vqe(ctx, false); break;
    case Task::Excited: task_vqe(ctx, true); break;
    case Task::Search: task_search(ctx); break;
    case Task::Plan: task_plan(ctx); break;
    case Task::VerifyPlan: task_verify_plan(ctx); break;
    case Task::Measure: task_measure(ctx); break;
  }

  std::filesystem::create_directories(config.output);
  std::vector<std::string> names;
  std::ostringstream manifest;
  for (const auto& [name, content] : ctx.out) {
    io::write_file_atomic(config.output / name, content);
    manifest << sha256_hex(content) << "  " << name << '\n';
    names.push_back(name);
  }
  io::write_file_atomic(config.output / "manifest", manifest.str());
  names.push_back("manifest");
  log << "wrote " << names.size() << " files to " << config.output.string() << '\n';
  return names;
}

int run(const std::filesystem::path& config_path, const Overrides& overrides, std::ostream& log, std::ostream& err) {
  try {
    auto config = load_config(config_path);
    if (overrides.task) config.task.task = overrides.task;
    if (overrides.output) config.output = *overrides.output;
    if (overrides.seed) config.seed = *overrides.seed;
    execute(config, log);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace dvrvqe::runner
