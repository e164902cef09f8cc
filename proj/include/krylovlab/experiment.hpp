#pragma once

// Experiment runner behind the command-line tool: configuration, task
// dispatch and report emission.
//
// Exit codes: 0 success, 2 validation failure (bad config, wrong operator
// class), 3 numerical failure (non-convergence, failed or inconclusive
// diagnostics).

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "krylovlab/cg.hpp"
#include "krylovlab/gallery.hpp"
#include "krylovlab/krylov.hpp"
#include "krylovlab/report.hpp"
#include "krylovlab/spectral.hpp"

namespace krylovlab {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3 };

struct ExperimentConfig {
  std::string task;
  std::string problem;
  ProblemParams params;
  std::string method = "auto";
  Index max_iter = 2000;
  double rtol = 1e-10;
  std::vector<Index> orders{5, 10, 20};
  double tol = 1e-8;
  Index boundary_margin = kDefaultBoundaryMargin;
  int k_max = 40;
  std::string output;
  std::string format = "json";
  std::uint64_t seed = 0;
  bool include_timestamp = true;
};

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "task", "problem", "M",      "n_grid",          "n_quad", "decay",  "method", "max_iter",
      "rtol", "Ns",      "tol",    "boundary_margin", "k_max",  "output", "format", "seed"};
  return keys;
}

inline std::vector<Index> parse_orders(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw ParameterError("Ns: '" + item + "' is not an integer");
    }
    if (used != item.size() || v < 1) throw ParameterError("Ns: '" + item + "' is not a positive integer");
    out.push_back(static_cast<Index>(v));
  }
  if (out.empty()) throw ParameterError("Ns: empty list");
  return out;
}

/// Seed from KRYLOVLAB_SEED, or 0.
inline std::uint64_t env_seed() {
  const char* s = std::getenv("KRYLOVLAB_SEED");
  if (s == nullptr || *s == '\0') return 0;
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ParameterError(std::string("KRYLOVLAB_SEED: '") + s + "' is not an unsigned integer");
  }
}

/// Applies a flat key-value JSON document on top of `cfg`. Unknown keys and
/// ill-typed values raise ParameterError.
inline void apply_config_json(ExperimentConfig& cfg, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParameterError("config: top level must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& [key, value] : doc.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ParameterError("config: unknown key '" + key + "'");
    }
    if (value.is_object() || value.is_null()) {
      throw ParameterError("config: key '" + key + "' must be a scalar or list");
    }
  }
  auto get_int = [&](const char* k) -> std::optional<long long> {
    if (!doc.contains(k)) return std::nullopt;
    const auto& v = doc.at(k);
    if (!v.is_number_integer()) throw ParameterError(std::string("config: '") + k + "' must be an integer");
    return v.get<long long>();
  };
  auto get_num = [&](const char* k) -> std::optional<double> {
    if (!doc.contains(k)) return std::nullopt;
    const auto& v = doc.at(k);
    if (!v.is_number()) throw ParameterError(std::string("config: '") + k + "' must be a number");
    return v.get<double>();
  };
  auto get_str = [&](const char* k) -> std::optional<std::string> {
    if (!doc.contains(k)) return std::nullopt;
    const auto& v = doc.at(k);
    if (!v.is_string()) throw ParameterError(std::string("config: '") + k + "' must be a string");
    return v.get<std::string>();
  };
  if (auto v = get_str("task")) cfg.task = *v;
  if (auto v = get_str("problem")) cfg.problem = *v;
  if (auto v = get_int("M")) cfg.params.M = static_cast<Index>(*v);
  if (auto v = get_int("n_grid")) cfg.params.n_grid = static_cast<int>(*v);
  if (auto v = get_int("n_quad")) cfg.params.n_quad = static_cast<int>(*v);
  if (auto v = get_num("decay")) cfg.params.decay = *v;
  if (auto v = get_str("method")) cfg.method = *v;
  if (auto v = get_int("max_iter")) cfg.max_iter = static_cast<Index>(*v);
  if (auto v = get_num("rtol")) cfg.rtol = *v;
  if (auto v = get_num("tol")) cfg.tol = *v;
  if (auto v = get_int("boundary_margin")) cfg.boundary_margin = static_cast<Index>(*v);
  if (auto v = get_int("k_max")) cfg.k_max = static_cast<int>(*v);
  if (auto v = get_str("output")) cfg.output = *v;
  if (auto v = get_str("format")) cfg.format = *v;
  if (auto v = get_int("seed")) {
    if (*v < 0) throw ParameterError("config: 'seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(*v);
  }
  if (doc.contains("Ns")) {
    const auto& v = doc.at("Ns");
    if (v.is_string()) {
      cfg.orders = parse_orders(v.get<std::string>());
    } else if (v.is_array()) {
      cfg.orders.clear();
      for (const auto& e : v) {
        if (!e.is_number_integer() || e.get<long long>() < 1) {
          throw ParameterError("config: 'Ns' entries must be positive integers");
        }
        cfg.orders.push_back(static_cast<Index>(e.get<long long>()));
      }
      if (cfg.orders.empty()) throw ParameterError("config: 'Ns' is empty");
    } else {
      throw ParameterError("config: 'Ns' must be a list or comma-separated string");
    }
  }
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("config: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  apply_config_json(cfg, doc);
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.format != "json" && cfg.format != "csv") {
    throw ParameterError("format must be 'json' or 'csv', got '" + cfg.format + "'");
  }
  if (cfg.max_iter < 1) throw ParameterError("max_iter must be positive");
  if (!(cfg.rtol > 0.0)) throw ParameterError("rtol must be positive");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw ParameterError("tol must lie in (0, 1)");
  if (cfg.boundary_margin < 0) throw ParameterError("boundary_margin must be nonnegative");
  if (cfg.k_max < 1) throw ParameterError("k_max must be positive");
  if (cfg.method != "auto" && !parse_solve_method(cfg.method)) {
    throw ParameterError("unknown method '" + cfg.method + "'");
  }
}

namespace detail {

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline report::json header(const ExperimentConfig& cfg) {
  report::json j;
  j["schema_version"] = report::kSchemaVersion;
  j["tool"] = "krylovlab";
  j["task"] = cfg.task;
  j["seed"] = cfg.seed;
  return j;
}

inline GalleryProblem build(const ExperimentConfig& cfg) {
  if (cfg.problem.empty()) throw ParameterError("--problem is required for task " + cfg.task);
  return make_problem(cfg.problem, cfg.params);
}

inline SolveMethod choose_method(const ExperimentConfig& cfg, const Operator& op) {
  if (cfg.method != "auto") return *parse_solve_method(cfg.method);
  if (op.is_domain_extension()) {
    throw WrongClassError("operator '" + op.name() + "' is a domain extension; no CG driver applies");
  }
  if (structure_defect(op, 1.0) <= 1e-10) {
    std::mt19937_64 rng(cfg.seed);
    for (int t = 0; t < 8; ++t) {
      const Vector v = random_coords(op.dim(), rng);
      const Vector av = op.apply(v);
      if (v.dot(av).real() < -1e-10 * v.norm() * av.norm()) return SolveMethod::selfadjoint_square;
    }
    return SolveMethod::cg_psd;
  }
  if (structure_defect(op, -1.0) <= 1e-10) return SolveMethod::skewadjoint_square;
  throw WrongClassError("operator '" + op.name() +
                        "' is neither self-adjoint nor skew-adjoint; no CG driver applies");
}

struct TaskResult {
  int code = kExitOk;
  report::json doc;
  std::string csv;
};

inline TaskResult run_solve(const ExperimentConfig& cfg) {
  const GalleryProblem p = build(cfg);
  const SolveMethod method = choose_method(cfg, p.op);
  CgOptions opts;
  opts.max_iter = cfg.max_iter;
  opts.rtol = cfg.rtol;
  if (p.known_solution && p.known_solution->mu == Complex{}) opts.known_solution = p.known_solution->t;
  SolveReport rep;
  switch (method) {
    case SolveMethod::cg_psd: rep = cg_solve(p.op, p.g, opts); break;
    case SolveMethod::selfadjoint_square: rep = solve_selfadjoint(p.op, p.g, opts); break;
    case SolveMethod::skewadjoint_square: rep = solve_skewadjoint(p.op, p.g, opts); break;
  }
  TaskResult out;
  out.doc = header(cfg);
  out.doc["problem"] = p.id;
  out.doc["params"] = report::params_json(p);
  out.doc["solve"] = report::to_json(rep, p.op.dim() <= 256);
  if (p.known_solution) {
    const HVector f = embed(p.op, *p.known_solution);
    out.doc["error_vs_known_solution"] = report::number((rep.solution - f).norm());
  }
  const KrylovBasis basis = build_krylov_basis(p.op, p.g, std::min<Index>(p.op.dim(), 400));
  out.doc["solution_distance_to_krylov"] = report::number(distance_to_krylov(basis, rep.solution));
  std::ostringstream csv;
  csv.precision(17);
  csv << "iteration,residual_norm\n";
  for (size_t i = 0; i < rep.residual_norms.size(); ++i) csv << i << ',' << rep.residual_norms[i] << '\n';
  out.csv = csv.str();
  if (!rep.converged) out.code = kExitNumerical;
  return out;
}

inline TaskResult run_diagnose(const ExperimentConfig& cfg) {
  const GalleryProblem p = build(cfg);
  DiagnoseInputs in{p.g, p.known_solution, std::nullopt, std::nullopt};
  if (auto it = p.vectors.find("x0"); it != p.vectors.end()) in.escape_candidate = it->second;
  if (auto it = p.vectors.find("core-test"); it != p.vectors.end()) in.core_vector = it->second;
  DiagnoseOptions opts;
  opts.orders = cfg.orders;
  opts.tol = cfg.tol;
  opts.boundary_margin = cfg.boundary_margin;
  DiagnosticsReport rep = diagnose(p.op, in, opts);
  for (const auto& n : p.notes) rep.notes.push_back(n);
  TaskResult out;
  out.doc = header(cfg);
  out.doc["problem"] = p.id;
  out.doc["params"] = report::params_json(p);
  out.doc["diagnostics"] = report::to_json(rep);
  std::ostringstream csv;
  csv.precision(17);
  csv << "N,distance,core_graph_distance\n";
  std::vector<Index> orders = cfg.orders;
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
  for (size_t i = 0; i < orders.size(); ++i) {
    csv << orders[i] << ',';
    if (i < rep.distances.size()) csv << rep.distances[i].value;
    csv << ',';
    if (i < rep.core_decay.size()) csv << rep.core_decay[i].value;
    csv << '\n';
  }
  out.csv = csv.str();
  if (rep.escape && rep.escape->inconclusive) out.code = kExitNumerical;
  return out;
}

inline TaskResult run_profile(const ExperimentConfig& cfg) {
  const GalleryProblem p = build(cfg);
  const SpectralMeasure mu = spectral_measure(p.op, p.g);
  const GrowthSeries growth = bounded_vector_growth(p.op, p.g, cfg.k_max);
  const IsometryResult iso = isometry_check(p.op, p.g, 10, 50, cfg.seed);
  const double g2 = p.g.coords().squaredNorm();
  double moment_defect = 0.0;
  Vector v = p.g.coords();
  for (int k = 0; k <= 6; ++k) {
    const double direct = p.g.coords().dot(v).real();
    moment_defect = std::max(moment_defect,
                             std::abs(mu.moment(k) - direct) / std::max(1.0, std::abs(direct)));
    v = p.op.apply(v);
  }
  TaskResult out;
  out.doc = header(cfg);
  out.doc["problem"] = p.id;
  out.doc["params"] = report::params_json(p);
  out.doc["measure"] = report::to_json(mu);
  out.doc["parseval_defect"] = report::number(std::abs(mu.total_mass() - g2));
  out.doc["moment_defect"] = report::number(moment_defect);
  out.doc["growth"] = report::to_json(growth);
  out.doc["isometry"] = {{"discrepancy", report::number(iso.discrepancy)},
                         {"scale", report::number(iso.scale)}};
  std::ostringstream csv;
  write_measure_csv(csv, mu);
  out.csv = csv.str();
  const bool ok = std::abs(mu.total_mass() - g2) <= 1e-10 * std::max(1.0, g2) &&
                  iso.discrepancy <= 1e-9 * std::max(1.0, iso.scale);
  if (!ok) out.code = kExitNumerical;
  return out;
}

struct FactRow {
  std::string problem;
  std::string fact;
  std::string claim;
  std::string source;
  FactOutcome outcome;
};

inline std::vector<FactRow> evaluate_problem(const GalleryEntry& entry, std::uint64_t seed) {
  std::vector<FactRow> rows;
  GalleryProblem p = entry.build({});
  for (const auto& f : p.facts) {
    FactOutcome o;
    try {
      o = f.check(p);
    } catch (const std::exception& e) {
      o = {false, 0.0, 0.0, std::string("exception: ") + e.what()};
    }
    rows.push_back({p.id, f.id, f.claim, f.source, o});
  }
  std::mt19937_64 rng(seed ^ std::hash<std::string>{}(p.id));
  const double defect = adjoint_consistency_defect(p.op, rng, 100);
  rows.push_back({p.id, "adjoint-consistency", "<Au,v> = <u,A*v> on 100 random pairs",
                  "operator adjoint rule", {defect <= 1e-12, defect, 1e-12, ""}});
  return rows;
}

inline TaskResult run_reproduce(const ExperimentConfig& cfg) {
  const auto& catalog = gallery_catalog();
  std::vector<std::future<std::vector<FactRow>>> jobs;
  for (const auto& entry : catalog) {
    jobs.push_back(std::async(std::launch::async,
                              [&entry, seed = cfg.seed] { return evaluate_problem(entry, seed); }));
  }
  TaskResult out;
  out.doc = header(cfg);
  report::json rows = report::json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "problem,fact,status,value,threshold,source\n";
  int pass = 0;
  int fail = 0;
  for (auto& job : jobs) {
    for (const auto& r : job.get()) {
      const bool ok = r.outcome.pass;
      (ok ? pass : fail) += 1;
      rows.push_back({{"problem", r.problem},
                      {"fact", r.fact},
                      {"claim", r.claim},
                      {"source", r.source},
                      {"status", ok ? "PASS" : "FAIL"},
                      {"value", report::number(r.outcome.value)},
                      {"threshold", report::number(r.outcome.threshold)},
                      {"detail", r.outcome.detail}});
      csv << r.problem << ',' << r.fact << ',' << (ok ? "PASS" : "FAIL") << ',' << r.outcome.value
          << ',' << r.outcome.threshold << ",\"" << r.source << "\"\n";
    }
  }
  out.doc["rows"] = rows;
  out.doc["summary"] = {{"pass", pass}, {"fail", fail}};
  out.csv = csv.str();
  if (fail > 0) out.code = kExitNumerical;
  return out;
}

}  // namespace detail

/// Gallery table: ids, parameters with defaults, references.
inline report::json list_gallery_json() {
  report::json arr = report::json::array();
  for (const auto& e : gallery_catalog()) {
    report::json params = report::json::object();
    for (const auto& [k, v] : e.defaults) params[k] = report::param_value(v);
    arr.push_back({{"id", e.id}, {"title", e.title}, {"parameters", params}, {"reference", e.source}});
  }
  return arr;
}

inline std::string list_gallery_text() {
  std::ostringstream os;
  os << std::left << std::setw(16) << "id" << std::setw(26) << "parameters" << "reference\n";
  for (const auto& e : gallery_catalog()) {
    std::string params;
    for (const auto& [k, v] : e.defaults) {
      std::ostringstream pv;
      pv << k << '=' << v;
      params += (params.empty() ? "" : " ") + pv.str();
    }
    os << std::setw(16) << e.id << std::setw(26) << params << e.source << '\n';
  }
  return os.str();
}

/// Runs one task and writes its report. Returns the process exit code.
inline int run(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  detail::TaskResult result;
  try {
    validate(cfg);
    if (cfg.task == "solve") {
      result = detail::run_solve(cfg);
    } else if (cfg.task == "diagnose") {
      result = detail::run_diagnose(cfg);
    } else if (cfg.task == "profile") {
      result = detail::run_profile(cfg);
    } else if (cfg.task == "reproduce-examples") {
      result = detail::run_reproduce(cfg);
    } else if (cfg.task == "list") {
      if (cfg.format == "json") {
        result.doc = list_gallery_json();
      } else {
        result.csv = list_gallery_text();
      }
    } else {
      throw ParameterError("unknown task '" + cfg.task + "'");
    }
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const WrongClassError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UnsupportedOperation& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IndefiniteOperatorError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }

  if (cfg.include_timestamp && result.doc.is_object()) {
    result.doc["timestamp"] = detail::utc_timestamp();
  }
  std::string text;
  if (cfg.format == "csv" || result.doc.is_null()) {
    text = result.csv;
  } else {
    text = result.doc.dump(2) + "\n";
  }
  if (cfg.output.empty()) {
    out << text;
  } else {
    std::ofstream file(cfg.output, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << cfg.output << "'\n";
      return kExitValidation;
    }
    file << text;
  }
  if (result.code == kExitNumerical) {
    err << "numerical failure: see report for non-converged or failed items\n";
  }
  return result.code;
}

}  // namespace krylovlab
