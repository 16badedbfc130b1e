#pragma once

// Problem files: JSON descriptions of algebras, TROs, corners and direct
// sums, plus the materialization into certified objects.
//
// Matrix schema:  {"rows": h, "cols": k, "re": [[...]], "im": [[...]]}
// Problem schema: {"kind": "algebra"|"tro"|"corner"|"direct_sum",
//                  "matrices": {"name": matrix, ...},
//                  "projection": "name",             (corner only)
//                  "summands": [["a","b"], ["c"]],   (direct_sum, optional)
//                  "options": {"tol": float, "unitize": bool}}

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trolab/derivations.hpp"
#include "trolab/star_algebra.hpp"
#include "trolab/tro.hpp"

namespace trolab {

using Json = nlohmann::json;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Json matrix_to_json(const CMat& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json rrow = Json::array(), irow = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(rrow);
    im.push_back(irow);
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

inline CMat matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("re") || !j.contains("im"))
    throw ParseError(where + ": matrix needs fields rows, cols, re, im");
  Eigen::Index rows = j["rows"].get<Eigen::Index>();
  Eigen::Index cols = j["cols"].get<Eigen::Index>();
  if (rows <= 0 || cols <= 0)
    throw ParseError(where + ": matrix dimensions must be positive");
  const Json& re = j["re"];
  const Json& im = j["im"];
  if (!re.is_array() || !im.is_array() ||
      static_cast<Eigen::Index>(re.size()) != rows ||
      static_cast<Eigen::Index>(im.size()) != rows)
    throw ParseError(where + ": re/im row count mismatch");
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& rrow = re[i];
    const Json& irow = im[i];
    if (static_cast<Eigen::Index>(rrow.size()) != cols ||
        static_cast<Eigen::Index>(irow.size()) != cols)
      throw ParseError(where + ": re/im column count mismatch in row " +
                       std::to_string(i));
    for (Eigen::Index jx = 0; jx < cols; ++jx) {
      double a = rrow[jx].get<double>(), b = irow[jx].get<double>();
      if (!std::isfinite(a) || !std::isfinite(b))
        throw ParseError(where + ": non-finite entry at (" + std::to_string(i) +
                         ", " + std::to_string(jx) + ")");
      m(i, jx) = Complex(a, b);
    }
  }
  return m;
}

struct ProblemFile {
  std::string kind;
  std::vector<std::pair<std::string, CMat>> matrices;  // sorted by name
  std::optional<std::string> projection;
  std::vector<std::vector<std::string>> summands;
  struct Options {
    std::optional<double> tol;
    bool unitize = true;
  } options;

  const CMat* find(const std::string& name) const {
    for (const auto& [n, m] : matrices)
      if (n == name) return &m;
    return nullptr;
  }
};

inline ProblemFile parse_problem(const Json& j) {
  ProblemFile p;
  if (!j.is_object()) throw ParseError("problem: top level must be an object");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw ParseError("problem: missing string field 'kind'");
  p.kind = j["kind"].get<std::string>();
  if (p.kind != "algebra" && p.kind != "tro" && p.kind != "corner" &&
      p.kind != "direct_sum")
    throw ParseError("problem: unknown kind '" + p.kind + "'");
  if (!j.contains("matrices") || !j["matrices"].is_object() ||
      j["matrices"].empty())
    throw ParseError("problem: 'matrices' must be a nonempty object");
  for (const auto& [name, jm] : j["matrices"].items())
    p.matrices.emplace_back(name, matrix_from_json(jm, "matrices." + name));
  std::sort(p.matrices.begin(), p.matrices.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  if (j.contains("projection")) {
    if (!j["projection"].is_string())
      throw ParseError("problem: 'projection' must be a matrix name");
    p.projection = j["projection"].get<std::string>();
    if (!p.find(*p.projection))
      throw ParseError("problem: projection '" + *p.projection +
                       "' does not name a matrix");
  }
  if (p.kind == "corner" && !p.projection)
    throw ParseError("problem: kind 'corner' requires 'projection'");
  if (j.contains("summands")) {
    for (const auto& group : j["summands"]) {
      std::vector<std::string> names;
      for (const auto& n : group) {
        names.push_back(n.get<std::string>());
        if (!p.find(names.back()))
          throw ParseError("problem: summand matrix '" + names.back() +
                           "' does not exist");
      }
      if (names.empty()) throw ParseError("problem: empty summand group");
      p.summands.push_back(std::move(names));
    }
  }
  if (j.contains("options")) {
    const Json& o = j["options"];
    if (o.contains("tol")) p.options.tol = o["tol"].get<double>();
    if (o.contains("unitize")) p.options.unitize = o["unitize"].get<bool>();
  }
  return p;
}

inline Json problem_to_json(const ProblemFile& p) {
  Json jm = Json::object();
  for (const auto& [name, m] : p.matrices) jm[name] = matrix_to_json(m);
  Json j{{"kind", p.kind}, {"matrices", jm}};
  if (p.projection) j["projection"] = *p.projection;
  if (!p.summands.empty()) {
    Json js = Json::array();
    for (const auto& group : p.summands) js.push_back(group);
    j["summands"] = js;
  }
  Json jo = Json::object();
  if (p.options.tol) jo["tol"] = *p.options.tol;
  jo["unitize"] = p.options.unitize;
  j["options"] = jo;
  return j;
}

/// Materialized problem: certified objects built from the file.
struct BuiltProblem {
  ProblemFile file;
  double tol = 1e-9;
  std::optional<StarAlgebra> algebra;   // algebra and corner kinds
  std::optional<Projection> projection; // corner kind
  std::optional<TRO> tro;               // tro, corner (the corner TRO), direct_sum
};

inline BuiltProblem build_problem(ProblemFile file, double global_tol = 1e-9) {
  BuiltProblem b;
  b.tol = file.options.tol.value_or(global_tol);
  if (file.kind == "algebra" || file.kind == "corner") {
    std::vector<CMat> gens;
    for (const auto& [name, m] : file.matrices) {
      if (m.rows() != m.cols())
        throw ParseError("algebra generators must be square (matrix '" + name +
                         "')");
      gens.push_back(m);
    }
    b.algebra = make_star_algebra(gens, b.tol);
    if (file.kind == "corner") {
      const CMat* pm = file.find(*file.projection);
      Projection p = certify_projection(*b.algebra, *pm, 1e-7);
      Eigen::Index n = b.algebra->ambient();
      Projection q = certify_projection(
          *b.algebra, CMat(CMat::Identity(n, n) - p.matrix), 1e-7);
      MatrixSubspace c = corner(p, *b.algebra, q);
      b.tro = make_tro(c.basis, n, n, b.tol);
      b.projection = std::move(p);
    }
  } else if (file.kind == "tro") {
    std::vector<CMat> gens;
    for (const auto& [name, m] : file.matrices) gens.push_back(m);
    b.tro = make_tro(gens, -1, -1, b.tol);
  } else {  // direct_sum
    std::vector<std::vector<std::string>> groups = file.summands;
    if (groups.empty())
      for (const auto& [name, m] : file.matrices) groups.push_back({name});
    std::vector<TRO> parts;
    for (const auto& group : groups) {
      std::vector<CMat> gens;
      for (const auto& name : group) gens.push_back(*file.find(name));
      parts.push_back(make_tro(gens, -1, -1, b.tol));
    }
    b.tro = direct_sum(parts);
  }
  b.file = std::move(file);
  return b;
}

}  // namespace trolab
