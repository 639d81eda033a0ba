#pragma once

// JSON forms of parameter sets and reports. Indices are 1-based on disk,
// matrices are nested row-major arrays, and keys keep insertion order so that
// equal inputs give byte-identical output.

#include <Eigen/Dense>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "charvar/embed.hpp"
#include "charvar/error.hpp"
#include "charvar/limits.hpp"
#include "charvar/params.hpp"
#include "charvar/reduce.hpp"
#include "charvar/scan.hpp"
#include "charvar/singular.hpp"
#include "json.hpp"

namespace charvar {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

inline Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

inline Json to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Json one_based(const std::vector<int>& idx) {
  Json a = Json::array();
  for (int k : idx) a.push_back(k + 1);
  return a;
}

// ---------------------------------------------------------------------------
// ParamSet

inline Json to_json(const ParamSet& c) {
  Json entries = Json::array();
  for (int i = 0; i < c.n(); ++i)
    for (int k = 0; k < c.n(); ++k)
      for (int j = k + 1; j < c.n(); ++j)
        entries.push_back({{"i", i + 1}, {"k", k + 1}, {"j", j + 1}, {"value", c(i, k, j)}});
  return {{"format_version", kFormatVersion}, {"n", c.n()}, {"entries", std::move(entries)}};
}

/// Strict reader: every free entry must appear exactly once with k < j.
inline ParamSet param_set_from_json(const Json& doc) {
  auto fail = [](const std::string& why) -> void { throw Error(ErrorCode::ParseError, why); };
  if (!doc.is_object()) fail("parameter file must hold a JSON object");
  if (doc.contains("format_version") && doc["format_version"] != kFormatVersion)
    fail("unsupported format_version");
  if (!doc.contains("n") || !doc["n"].is_number_integer()) fail("missing integer field n");
  const int n = doc["n"].get<int>();
  if (n < 3) throw Error(ErrorCode::InvalidDimension, "n must be >= 3");
  if (!doc.contains("entries") || !doc["entries"].is_array()) fail("missing array field entries");
  ParamSet c(n);
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& e : doc["entries"]) {
    for (const char* key : {"i", "k", "j"})
      if (!e.contains(key) || !e[key].is_number_integer()) fail(std::string("entry lacks integer ") + key);
    if (!e.contains("value") || !e["value"].is_number()) fail("entry lacks numeric value");
    const int i = e["i"].get<int>(), k = e["k"].get<int>(), j = e["j"].get<int>();
    if (i < 1 || i > n || k < 1 || k > n || j < 1 || j > n) fail("entry index out of range");
    if (k >= j) fail("entries must have k < j (diagonal entries are implied)");
    if (!seen.insert({i, k, j}).second) fail("duplicate entry");
    const double v = e["value"].get<double>();
    if (!std::isfinite(v)) fail("non-finite value");
    c.set(i - 1, k - 1, j - 1, v);
  }
  if (seen.size() != c.free_count())
    fail("expected " + std::to_string(c.free_count()) + " entries, got " + std::to_string(seen.size()));
  return c;
}

inline ParamSet load_param_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return param_set_from_json(doc);
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const GenericReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations)
    v.push_back({{"condition", x.condition}, {"indices", one_based(x.indices)}, {"lhs", x.lhs}, {"rhs", x.rhs}});
  return {{"n", r.n}, {"passed", r.passed}, {"min_margin", r.min_margin}, {"violations", std::move(v)}};
}

inline Json to_json(const LimitPoint& p) {
  Json j = {{"case", p.case_id}, {"zeros", one_based(p.zeros)}, {"coords", to_json(p.coords)},
            {"roots", p.root_count}};
  if (!p.zbar.empty()) {
    Json z = Json::array();
    for (const auto& row : p.zbar) z.push_back(row);
    j["zbar"] = std::move(z);
  }
  return j;
}

inline Json to_json(const Degeneracy& d) {
  return {{"code", std::string(to_string(d.code))}, {"pattern", one_based(d.pattern)}, {"detail", d.detail}};
}

inline Json to_json(const LimitSet& s) {
  Json pts = Json::array(), fails = Json::array();
  for (const auto& p : s.points) pts.push_back(to_json(p));
  for (const auto& f : s.failures) fails.push_back(to_json(f));
  return {{"points", std::move(pts)}, {"failures", std::move(fails)}};
}

inline Json to_json(const SingularPoint& p) {
  return {{"xi", to_json(p.xi)},
          {"rank", p.rank_cert.rank},
          {"rank_tolerance", p.rank_cert.tolerance},
          {"singular_values", to_json(p.rank_cert.singular_values)},
          {"minor_residual", p.minor_residual},
          {"minor_tolerance", p.minor_tolerance},
          {"newton_residual", p.newton_residual},
          {"seed_distance", p.seed_distance},
          {"seed", to_json(p.seed)},
          {"root", p.root},
          {"iters", p.newton_iters}};
}

inline Json to_json(const DetectionResult& r) {
  Json pts = Json::array(), fails = Json::array(), lim = Json::array();
  for (const auto& p : r.points) pts.push_back(to_json(p));
  for (const auto& f : r.failures)
    fails.push_back({{"seed", to_json(f.seed)}, {"root", f.root}, {"code", std::string(to_string(f.code))},
                     {"detail", f.detail}});
  for (const auto& d : r.limit_failures) lim.push_back(to_json(d));
  return {{"t", r.t},         {"count", r.count},           {"duplicates", r.duplicates},
          {"points", pts},    {"failures", std::move(fails)}, {"limit_failures", std::move(lim)}};
}

inline Json to_json(const SmoothnessReport& r) {
  return {{"t", r.t},
          {"circles", r.circles},
          {"samples", r.samples},
          {"requested", r.requested},
          {"coverage_ok", r.coverage_ok},
          {"min_grad", r.min_grad},
          {"grad_threshold", r.grad_threshold},
          {"min_grad_raw", r.min_grad_raw},
          {"min_sigma_ratio", r.min_sigma_ratio},
          {"min_rank", r.min_rank},
          {"rank_tolerance", r.rank_tol},
          {"pattern_hits", r.pattern_hits},
          {"singular_found", r.singular_found},
          {"worst_xi", to_json(r.worst_xi)}};
}

inline Json to_json(const Witness& w) {
  return {{"xi", to_json(w.xi)}, {"residual", w.residual}, {"method", w.method}, {"attempts", w.attempts}};
}

inline Json to_json(const CurvatureTensor& R) {
  return {{"format_version", kFormatVersion}, {"n", R.n}, {"R", R.r}, {"invariant_residual", R.invariant_residual()}};
}

inline Json to_json(const SecondFundamentalForm& h) {
  Json rows = Json::array();
  for (int i = 0; i < h.n; ++i)
    for (int j = 0; j < h.n; ++j) rows.push_back(to_json(h(i, j)));
  return {{"n", h.n}, {"h", std::move(rows)}};
}

inline Json to_json(const EmbeddingJet& jet) {
  return {{"format_version", kFormatVersion}, {"n", jet.n}, {"alpha", jet.alpha}, {"h", to_json(jet.h)}};
}

inline Json to_json(const ReducedSystem& rs) {
  Json a = Json::array();
  for (const auto& m : rs.A) a.push_back(to_json(m));
  return {{"format_version", kFormatVersion}, {"n", rs.n}, {"x", rs.x},           {"A", std::move(a)},
          {"B", to_json(rs.B)},               {"F", to_json(rs.F)}, {"h_cond", rs.h_cond}};
}

inline Json to_json(const SurfaceTrace& tr) {
  Json nodes = Json::array();
  for (const auto& nd : tr.nodes) {
    Json j = {{"param", nd.param}, {"seed", to_json(nd.seed)}};
    if (nd.point) {
      j["xi"] = to_json(nd.point->xi);
      j["rank"] = nd.point->rank_cert.rank;
      j["minor_residual"] = nd.point->minor_residual;
      j["minor_tolerance"] = nd.point->minor_tolerance;
    } else {
      j["failure"] = nd.failure;
    }
    nodes.push_back(std::move(j));
  }
  return {{"pair", one_based({tr.i, tr.j})},
          {"t", tr.t},
          {"spacing", tr.spacing},
          {"converged", tr.converged()},
          {"max_gap", max_consecutive_gap(tr)},
          {"nodes", std::move(nodes)}};
}

}  // namespace charvar
