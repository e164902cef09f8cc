#pragma once

// JSON encodings of solver and diagnostics results.

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "krylovlab/cg.hpp"
#include "krylovlab/gallery.hpp"
#include "krylovlab/krylov.hpp"
#include "krylovlab/spectral.hpp"

namespace krylovlab::report {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Non-finite values are encoded as strings so reports stay valid JSON.
inline json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

/// Integral parameters print as integers.
inline json param_value(double v) {
  if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<long long>(v);
  return number(v);
}

inline json series(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

inline json series(const std::vector<SeriesPoint>& v, const char* value_key) {
  json out = json::array();
  for (const auto& p : v) out.push_back({{"N", p.n}, {value_key, number(p.value)}});
  return out;
}

inline json coords(const HVector& v) {
  json re = json::array();
  json im = json::array();
  for (Index i = 0; i < v.dim(); ++i) {
    re.push_back(v.coords()(i).real());
    im.push_back(v.coords()(i).imag());
  }
  return {{"re", re}, {"im", im}};
}

inline json to_json(const SolveReport& r, bool include_solution) {
  json j;
  j["method"] = to_string(r.method);
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["final_mismatch"] = number(r.final_mismatch);
  j["solution_norm"] = number(r.solution.norm());
  j["residual_norms"] = series(r.residual_norms);
  if (!r.energy_errors.empty()) j["energy_errors"] = series(r.energy_errors);
  if (!r.note.empty()) j["note"] = r.note;
  if (include_solution) j["solution"] = coords(r.solution);
  return j;
}

inline json to_json(const IntersectionResult& r) {
  return {{"dim", r.dim}, {"angles", series(r.angles)}, {"notes", r.notes}};
}

inline json to_json(const DiagnosticsReport& r) {
  json j;
  j["basis_size"] = r.basis_size;
  j["breakdown_at"] = r.breakdown_at ? json(*r.breakdown_at) : json(nullptr);
  j["distances"] = series(r.distances, "distance");
  j["intersection_dim"] = r.intersection.dim;
  j["principal_angles"] = series(r.intersection.angles);
  j["reducibility_defects"] = {{"d1", number(r.reducibility.d1)},
                               {"d2", number(r.reducibility.d2)}};
  if (r.escape) {
    j["escape"] = {{"indicator", number(r.escape->indicator)},
                   {"membership_distance", number(r.escape->membership_distance)},
                   {"inconclusive", r.escape->inconclusive},
                   {"note", r.escape->note}};
  }
  j["core_decay"] = series(r.core_decay, "graph_distance");
  j["notes"] = r.notes;
  return j;
}

inline json to_json(const SpectralMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms) atoms.push_back({{"lambda", a.lambda}, {"weight", a.weight}});
  return {{"operator", mu.operator_id}, {"vector", mu.vector_id}, {"atoms", atoms}};
}

inline json to_json(const GrowthSeries& g) {
  return {{"r_k", series(g.values)}, {"truncated", g.truncated}, {"reason", g.reason}};
}

inline json params_json(const GalleryProblem& p) {
  json j = json::object();
  for (const auto& [k, v] : p.params) j[k] = param_value(v);
  return j;
}

}  // namespace krylovlab::report
