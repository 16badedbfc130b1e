#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "trolab/instances.hpp"
#include "trolab/tro.hpp"

using namespace trolab;

TEST_CASE("make_tro closures") {
  CMat one(1, 1);
  one << 1.0;
  auto scalar = make_tro({one});
  CHECK(scalar.dim() == 1);
  CHECK(scalar.nondegenerate);

  std::vector<CMat> full32;
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) {
      CMat e = CMat::Zero(3, 2);
      e(i, j) = 1.0;
      full32.push_back(e);
    }
  CHECK(make_tro(full32).dim() == 6);

  CMat d1 = CMat::Zero(2, 2), d2 = CMat::Zero(2, 2);
  d1(0, 0) = 1.0;
  d2(1, 1) = 1.0;
  auto diag = make_tro({d1, d2});
  CHECK(diag.dim() == 2);  // the diagonal TRO is already ternary closed

  auto empty = make_tro({}, 2, 3);
  CHECK(empty.dim() == 0);
}

TEST_CASE("triple products") {
  CMat one(1, 1);
  one << 1.0;
  CHECK(std::abs(triple_product(one, one, one, TripleMode::Jordan)(0, 0) -
                 Complex(1, 0)) < 1e-15);

  CMat e12 = matrix_unit(2, 0, 1);
  CHECK(hs_norm(triple_product(e12, e12, e12) - e12) < 1e-15);

  Rng rng(3);
  CMat x = rng.cmatrix(2, 3), y = rng.cmatrix(2, 3), z = rng.cmatrix(2, 3);
  CHECK(hs_norm(triple_product(x, y, z, TripleMode::Jordan) -
                triple_product(z, y, x, TripleMode::Jordan)) < 1e-13);
  // Jordan product is the symmetrization of the TRO product.
  CHECK(hs_norm(triple_product(x, y, z, TripleMode::Jordan) -
                0.5 * (triple_product(x, y, z) + triple_product(z, y, x))) <
        1e-13);
  CHECK_THROWS_AS(triple_product(x, y, CMat(CMat::Zero(3, 2))), DimensionError);
}

TEST_CASE("linking algebra of the scalar TRO is M2") {
  CMat one(1, 1);
  one << 1.0;
  auto x = make_tro({one});
  auto link0 = linking_algebra(x, false);
  CHECK(link0.algebra.dim() == 4);  // (XX*, X; X*, X*X) = M2
  auto link = linking_algebra(x, true);
  CHECK(link.algebra.dim() == 4);
  CHECK(link.algebra.unital);
  REQUIRE(link.corner_coeffs.has_value());

  // The corner e A (1-e) reproduces the embedded copy of X.
  CMat e = link.left_corner;
  CMat f = CMat::Identity(2, 2) - e;
  std::vector<CMat> corner_elems;
  for (Eigen::Index i = 0; i < link.algebra.dim(); ++i)
    corner_elems.push_back(e * link.algebra.basis(i) * f);
  auto corner_span = orthonormalize(corner_elems, Field::Complex, 0.0, 2, 2, 1.0);
  CHECK(corner_span.dim() == 1);
  CHECK(membership(link.embed(one), corner_span).member);
}

TEST_CASE("linking algebra block count for a 2x1 column TRO") {
  std::vector<CMat> gens = {CMat::Zero(2, 1), CMat::Zero(2, 1)};
  gens[0](0, 0) = 1.0;
  gens[1](1, 0) = 1.0;
  auto x = make_tro(gens);
  REQUIRE(x.dim() == 2);
  auto link = linking_algebra(x, true);
  // Four blocks: M2 (4) + X (2) + X* (2) + C (1).
  CHECK(link.algebra.dim() == 9);
  CHECK(link.left_block.dim() == 4);
  CHECK(link.right_block.dim() == 1);
}

TEST_CASE("linking algebra of the zero TRO is the diagonal") {
  auto x = make_tro({}, 1, 1);
  auto link = linking_algebra(x, true);
  CHECK(link.algebra.dim() == 2);
  CHECK(link.algebra.unital);
}

TEST_CASE("corner TROs certify with no span growth") {
  Rng rng(19);
  for (int trial = 0; trial < 3; ++trial) {
    auto inst = random_algebra_with_idempotent(rng, true);
    Eigen::Index n = inst.algebra.ambient();
    CMat q = CMat::Identity(n, n) - inst.e.matrix;
    auto qp = certify_projection(inst.algebra, q, 1e-7);
    MatrixSubspace c = corner(inst.e, inst.algebra, qp);
    auto x = make_tro(c.basis, n, n);
    CHECK(x.dim() == c.dim());
  }
}

TEST_CASE("direct sums") {
  CMat one(1, 1);
  one << 1.0;
  auto c1 = make_tro({one});
  auto d1 = direct_sum({c1});
  CHECK(d1.dim() == 1);
  CHECK(d1.summands.size() == 1);

  auto d2 = direct_sum({c1, c1});
  CHECK(d2.dim() == 2);
  CHECK(d2.h() == 2);
  CHECK(d2.k() == 2);

  std::vector<CMat> col_gens = {CMat::Zero(2, 1), CMat::Zero(2, 1)};
  col_gens[0](0, 0) = 1.0;
  col_gens[1](1, 0) = 1.0;
  auto col = make_tro(col_gens);          // B(C, C^2), shape 2x1
  std::vector<CMat> row_gens = {CMat::Zero(1, 2), CMat::Zero(1, 2)};
  row_gens[0](0, 0) = 1.0;
  row_gens[1](0, 1) = 1.0;
  auto row = make_tro(row_gens);          // B(C^2, C), shape 1x2
  auto d3 = direct_sum({col, row});
  CHECK(d3.h() == 3);
  CHECK(d3.k() == 3);
  CHECK(d3.dim() == 4);
  // Closure survives the direct sum.
  auto recheck = make_tro(d3.carrier.basis, 3, 3);
  CHECK(recheck.dim() == 4);
}

TEST_CASE("block spans of products") {
  Rng rng(29);
  auto x = random_tro(rng, 2, 3, 1);
  auto l = left_products(x), r = right_products(x);
  for (const auto& a : x.carrier.basis)
    for (const auto& b : x.carrier.basis) {
      CHECK(membership(CMat(a * b.adjoint()), l).member);
      CHECK(membership(CMat(a.adjoint() * b), r).member);
    }
}
