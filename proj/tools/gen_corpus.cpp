// Regenerates the bundled problem corpus (deterministic, seeded).
// Usage: gen_corpus [output-dir]   (default: ./corpus)

#include <filesystem>
#include <fstream>
#include <iostream>

#include "trolab/instances.hpp"
#include "trolab/problem.hpp"

using namespace trolab;

namespace {

void write(const std::filesystem::path& dir, const std::string& name,
           const ProblemFile& p) {
  std::ofstream out(dir / name);
  out << problem_to_json(p).dump(2) << "\n";
  std::cout << "wrote " << (dir / name).string() << "\n";
}

ProblemFile algebra_problem(const std::vector<CMat>& gens) {
  ProblemFile p;
  p.kind = "algebra";
  for (std::size_t i = 0; i < gens.size(); ++i)
    p.matrices.emplace_back("g" + std::to_string(i / 10) +
                                std::to_string(i % 10),
                            gens[i]);
  return p;
}

ProblemFile tro_problem(const std::vector<CMat>& gens) {
  ProblemFile p;
  p.kind = "tro";
  for (std::size_t i = 0; i < gens.size(); ++i)
    p.matrices.emplace_back("x" + std::to_string(i / 10) +
                                std::to_string(i % 10),
                            gens[i]);
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path dir = argc > 1 ? argv[1] : "corpus";
  std::filesystem::create_directories(dir);
  Rng rng(0xC0 );

  // Worked corner examples: M2 at e11 and M5 at a rank-2 projection.
  {
    ProblemFile p = algebra_problem(full_matrix_gens(2));
    p.kind = "corner";
    p.matrices.emplace_back("p", matrix_unit(2, 0, 0));
    p.projection = "p";
    write(dir, "corner_m2_e11.json", p);
  }
  {
    ProblemFile p = algebra_problem(full_matrix_gens(5));
    CMat pm = CMat::Zero(5, 5);
    pm(0, 0) = pm(1, 1) = 1.0;
    p.kind = "corner";
    p.matrices.emplace_back("p", pm);
    p.projection = "p";
    write(dir, "corner_m5_rank2.json", p);
  }

  // Plain TROs.
  {
    CMat one(1, 1);
    one << 1.0;
    write(dir, "tro_scalar.json", tro_problem({one}));
  }
  {
    std::vector<CMat> col = {CMat::Zero(2, 1), CMat::Zero(2, 1)};
    col[0](0, 0) = 1.0;
    col[1](1, 0) = 1.0;
    write(dir, "tro_column_2x1.json", tro_problem(col));
  }
  {
    std::vector<CMat> gens;
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 2; ++j) gens.push_back(matrix_unit(2, i, j));
    write(dir, "tro_full_2x2.json", tro_problem(gens));
  }
  {
    std::vector<CMat> gens;
    for (Eigen::Index i = 0; i < 2; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) {
        CMat e = CMat::Zero(2, 3);
        e(i, j) = 1.0;
        gens.push_back(e);
      }
    write(dir, "tro_full_2x3.json", tro_problem(gens));
  }
  {
    CMat d1 = CMat::Zero(2, 2), d2 = CMat::Zero(2, 2);
    d1(0, 0) = 1.0;
    d2(1, 1) = 1.0;
    write(dir, "tro_diagonal_2x2.json", tro_problem({d1, d2}));
  }
  write(dir, "tro_random_2x2.json", tro_problem({rng.cmatrix(2, 2)}));
  write(dir, "tro_random_3x2.json", tro_problem({rng.cmatrix(3, 2)}));
  write(dir, "tro_random_3x3.json", tro_problem({rng.cmatrix(3, 3)}));

  // Algebras for the triple-derivation checks.
  write(dir, "alg_m2.json", algebra_problem(full_matrix_gens(2)));
  write(dir, "alg_diagonal_c2.json",
        algebra_problem({matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)}));
  {
    auto a = block_algebra({2, 3}, {1, 1});
    write(dir, "alg_m2_plus_m3.json", algebra_problem(a.carrier.basis));
  }
  {
    auto a = block_algebra({2}, {2});
    write(dir, "alg_m2_multiplicity2.json", algebra_problem(a.carrier.basis));
  }

  // Direct sums.
  {
    ProblemFile p;
    p.kind = "direct_sum";
    CMat one(1, 1);
    one << 1.0;
    p.matrices.emplace_back("a", one);
    p.matrices.emplace_back("b", CMat::Zero(2, 1));
    p.matrices.emplace_back("c", CMat::Zero(2, 1));
    p.matrices[1].second(0, 0) = 1.0;
    p.matrices[2].second(1, 0) = 1.0;
    p.summands = {{"a"}, {"b", "c"}};
    write(dir, "dsum_scalar_column.json", p);
  }
  {
    ProblemFile p;
    p.kind = "direct_sum";
    p.matrices.emplace_back("a", rng.cmatrix(2, 2));
    p.matrices.emplace_back("b", rng.cmatrix(1, 2));
    p.matrices.emplace_back("c", rng.cmatrix(2, 1));
    write(dir, "dsum_three_random.json", p);
  }
  return 0;
}
