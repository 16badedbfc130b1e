// trolab: batch front-end for derivation-space computations and theorem
// certification on matrix algebras and TROs.
//
//   trolab derivations <file.json>
//   trolab check --theorem <tag> <file.json>
//   trolab corpus <dir>
//
// TROLAB_TOL sets the global tolerance default; --tol overrides it; a
// problem file's options.tol overrides both for that file.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "trolab/pipelines.hpp"

namespace {

using namespace trolab;

double global_tolerance(const std::optional<double>& cli_tol) {
  if (cli_tol) return *cli_tol;
  if (const char* env = std::getenv("TROLAB_TOL")) {
    try {
      return std::stod(env);
    } catch (...) {
      throw ParseError("TROLAB_TOL is not a number");
    }
  }
  return 1e-9;
}

BuiltProblem load(const std::string& path, double tol,
                  const std::optional<bool>& unitize) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& ex) {
    throw ParseError(path + ": " + ex.what());
  }
  ProblemFile file = parse_problem(j);
  if (unitize) file.options.unitize = *unitize;
  return build_problem(std::move(file), tol);
}

int emit(const Report& rep, const std::string& out_path, bool json_only) {
  Json j = rep.to_json();
  std::string dumped = j.dump(2);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << dumped << "\n";
  }
  std::cout << dumped << "\n";
  if (!json_only) {
    std::cout << "\n" << verdict_table(rep.results);
    std::cout << (rep.all_pass ? "ALL PASS" : "FAILED") << "\n";
  }
  return rep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"derivation spaces and certification for matrix *-algebras and TROs"};
  app.require_subcommand(1);

  std::optional<double> tol;
  std::optional<bool> unitize;
  std::string out_path;
  bool json_only = false;
  app.add_option("--tol", tol, "global tolerance (overrides TROLAB_TOL)");
  app.add_option("--unitize", unitize,
                 "override the problem file's unitize option");
  app.add_option("--out", out_path, "also write the JSON report to this path");
  app.add_flag("--json-only", json_only, "suppress the human-readable table");

  std::string file_arg, dir_arg, theorem;
  auto* cmd_der = app.add_subcommand("derivations",
                                     "compute all applicable derivation spaces");
  cmd_der->add_option("file", file_arg, "problem file")->required();

  auto* cmd_check = app.add_subcommand("check", "run one certification pipeline");
  cmd_check->add_option("--theorem", theorem, "one of: lemma_1_4, lemma_2_1, "
                        "thm_2_2, prop_2_4, lemma_3_1, thm_3_2, thm_3_4_iii_1, "
                        "prop_3_11_finite")
      ->required();
  cmd_check->add_option("file", file_arg, "problem file")->required();

  auto* cmd_corpus = app.add_subcommand("corpus", "run a directory of problems");
  cmd_corpus->add_option("dir", dir_arg, "directory of problem files")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    double gtol = global_tolerance(tol);
    if (cmd_der->parsed()) {
      BuiltProblem b = load(file_arg, gtol, unitize);
      return emit(run_derivations(b, std::filesystem::path(file_arg)
                                         .filename()
                                         .string()),
                  out_path, json_only);
    }
    if (cmd_check->parsed()) {
      BuiltProblem b = load(file_arg, gtol, unitize);
      return emit(run_check(b, theorem, std::filesystem::path(file_arg)
                                            .filename()
                                            .string()),
                  out_path, json_only);
    }
    CorpusResult res = run_corpus(dir_arg, gtol);
    Json j = res.aggregate.to_json();
    std::string dumped = j.dump(2);
    if (!out_path.empty()) {
      std::ofstream out(out_path);
      out << dumped << "\n";
    }
    std::cout << dumped << "\n";
    if (!json_only) {
      const Json& counts = res.aggregate.results["counts"];
      std::cout << "\nfiles: " << counts["total"] << "  pass: "
                << counts["pass"] << "  fail: " << counts["fail"] << "\n";
    }
    return res.failures == 0 ? 0 : 1;
  } catch (const ParseError& ex) {
    std::cerr << "parse error: " << ex.what() << "\n";
    return 2;
  } catch (const HypothesisError& ex) {
    std::cerr << "hypothesis mismatch: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 3;
  }
}
