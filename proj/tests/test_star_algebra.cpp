#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "trolab/instances.hpp"
#include "trolab/star_algebra.hpp"

using namespace trolab;

namespace {

StarAlgebra m_n(Eigen::Index n) { return make_star_algebra(full_matrix_gens(n)); }

StarAlgebra diag2() {
  return make_star_algebra({matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)});
}

StarAlgebra m2_plus_m3() {
  return block_algebra({2, 3}, {1, 1});
}

}  // namespace

TEST_CASE("make_star_algebra closures") {
  auto from_e12 = make_star_algebra({matrix_unit(2, 0, 1)});
  CHECK(from_e12.dim() == 4);  // e12 generates M2
  CHECK(from_e12.unital);

  auto scalars = make_star_algebra({CMat(CMat::Identity(2, 2))});
  CHECK(scalars.dim() == 1);
  CHECK(scalars.unital);

  CMat p = matrix_unit(2, 0, 0);
  auto just_p = make_star_algebra({p});
  CHECK(just_p.dim() == 1);  // p idempotent self-adjoint: span{p} is closed
  CHECK_FALSE(just_p.unital);
}

TEST_CASE("structure constants reproduce products and associate") {
  Rng rng(31);
  auto inst = random_algebra_with_idempotent(rng, true);
  const StarAlgebra& a = inst.algebra;
  Eigen::Index d = a.dim();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      CMat recon = a.from_coords(CVec(a.prod[i].col(j)));
      CHECK(hs_norm(recon - a.basis(i) * a.basis(j)) < 1e-9);
    }
  // Associativity: sum_m c[i][j][m] c[m][k][l] = sum_m c[j][k][m] c[i][m][l].
  double worst = 0.0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k) {
        CVec lhs = CVec::Zero(d), rhs = CVec::Zero(d);
        for (Eigen::Index m = 0; m < d; ++m) {
          lhs += a.prod[i](m, j) * a.prod[m].col(k);
          rhs += a.prod[j](m, k) * a.prod[i].col(m);
        }
        worst = std::max(worst, (lhs - rhs).norm());
      }
  CHECK(worst < 1e-9);
}

TEST_CASE("center computations") {
  CHECK(center(m_n(2)).dim() == 1);
  CHECK(center(diag2()).dim() == 2);

  auto blocks = m2_plus_m3();
  MatrixSubspace z = center(blocks);
  CHECK(z.dim() == 2);
  CMat i2o5 = CMat::Zero(5, 5), o2i3 = CMat::Zero(5, 5);
  i2o5.topLeftCorner(2, 2).setIdentity();
  o2i3.bottomRightCorner(3, 3).setIdentity();
  CHECK(membership(i2o5, z).member);
  CHECK(membership(o2i3, z).member);
  // Oracle: kernel of the commuting system via LU on the 13-dim algebra.
  Eigen::Index d = blocks.dim(), n = blocks.ambient();
  CMat sys = CMat::Zero(d * n * n, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index m = 0; m < d; ++m) {
      CMat comm = blocks.basis(m) * blocks.basis(i) -
                  blocks.basis(i) * blocks.basis(m);
      sys.block(i * n * n, m, n * n, 1) = vec(comm);
    }
  CHECK(oracle::lu_kernel(sys).cols() == 2);
}

TEST_CASE("commutant and bicommutant") {
  auto scalars = orthonormalize({CMat(CMat::Identity(2, 2))}, Field::Complex);
  CHECK(commutant(scalars, 2).dim() == 4);

  auto full = m_n(2);
  CHECK(commutant(full.carrier, 2).dim() == 1);  // Schur

  // bicommutant(span{e11}) is the diagonal algebra (derived via the oracle:
  // two independent LU-kernel applications give the same dimension).
  auto e11span = orthonormalize({matrix_unit(2, 0, 0)}, Field::Complex);
  auto bc = bicommutant(e11span, 2);
  CHECK(bc.dim() == 2);
  CHECK(membership(matrix_unit(2, 0, 0), bc.carrier).member);
  CHECK(membership(matrix_unit(2, 1, 1), bc.carrier).member);

  // Inclusion-reversing, on *-closed spans.
  auto small = orthonormalize({matrix_unit(3, 0, 0)}, Field::Complex);
  std::vector<CMat> bigger = {matrix_unit(3, 0, 0), matrix_unit(3, 0, 1),
                              matrix_unit(3, 1, 0), matrix_unit(3, 1, 1)};
  auto big = orthonormalize(bigger, Field::Complex);
  auto cs = commutant(small, 3), cb = commutant(big, 3);
  for (const auto& b : cb.carrier.basis)
    CHECK(membership(b, cs.carrier).member);

  // commutant^3 = commutant.
  auto c1 = commutant(e11span, 2);
  auto c3 = commutant(bicommutant(e11span, 2).carrier, 2);
  CHECK(same_span(c1.carrier, c3.carrier, 1e-9));
}

TEST_CASE("corners") {
  auto m2 = m_n(2);
  auto p = certify_projection(m2, matrix_unit(2, 0, 0));
  auto q = certify_projection(m2, CMat(CMat::Identity(2, 2) - matrix_unit(2, 0, 0)));
  auto x = corner(p, m2, q);
  CHECK(x.dim() == 1);
  CHECK(membership(matrix_unit(2, 0, 1), x).member);

  auto m5 = m_n(5);
  CMat pm = CMat::Zero(5, 5);
  pm(0, 0) = pm(1, 1) = 1.0;
  auto p5 = certify_projection(m5, pm);
  CHECK(corner(p5, m5, p5).dim() == 4);

  auto zero = certify_projection(m2, CMat(CMat::Zero(2, 2)));
  CHECK(corner(zero, m2, q).dim() == 0);
}

TEST_CASE("split_self_adjoint") {
  CMat h = CMat::Identity(2, 2);
  auto [b1, c1] = split_self_adjoint(h);
  CHECK(hs_norm(b1 - h) < 1e-15);
  CHECK(hs_norm(c1) < 1e-15);

  auto [b2, c2] = split_self_adjoint(CMat(Complex(0, 1) * CMat::Identity(2, 2)));
  CHECK(hs_norm(b2) < 1e-15);
  CHECK(hs_norm(c2 - CMat::Identity(2, 2)) < 1e-15);

  CMat e12 = matrix_unit(2, 0, 1);
  auto [b3, c3] = split_self_adjoint(e12);
  CHECK(hs_norm(b3 - 0.5 * (e12 + e12.adjoint())) < 1e-15);
  CHECK(hs_norm(CMat(b3 + Complex(0, 1) * c3) - e12) < 1e-15);
}

TEST_CASE("projections certify and reject") {
  auto m2 = m_n(2);
  CHECK_THROWS_AS(certify_idempotent(m2, CMat(2.0 * CMat::Identity(2, 2))),
                  CertificationError);
  CMat e(2, 2);
  e << 1.0, 0.5, 0.0, 0.0;  // idempotent, not hermitian
  auto idem = certify_idempotent(m2, e);
  CHECK_FALSE(idem.hermitian);
  CHECK_THROWS_AS(certify_projection(m2, e), CertificationError);
}

TEST_CASE("central decomposition identifies blocks and multiplicities") {
  auto blocks = central_decomposition(m2_plus_m3());
  REQUIRE(blocks.size() == 2);
  std::vector<Eigen::Index> dims = {blocks[0].block_dim, blocks[1].block_dim};
  std::sort(dims.begin(), dims.end());
  CHECK(dims[0] == 2);
  CHECK(dims[1] == 3);
  CHECK(blocks[0].multiplicity == 1);
  CHECK(blocks[1].multiplicity == 1);

  // Multiplicity two: M2 tensor I2 inside M4.
  auto mult = block_algebra({2}, {2});
  auto bl = central_decomposition(mult);
  REQUIRE(bl.size() == 1);
  CHECK(bl[0].block_dim == 2);
  CHECK(bl[0].multiplicity == 2);
  // Matrix units behave like units: e_{jl} e_{lm} = e_{jm}.
  const auto& u = bl[0].units;
  Eigen::Index k = bl[0].block_dim;
  CHECK(hs_norm(CMat(u[0 * k + 1] * u[1 * k + 0]) - u[0 * k + 0]) < 1e-9);
  // Round trip through the small picture.
  Rng rng(41);
  CMat small = rng.cmatrix(2, 2);
  CHECK(hs_norm(bl[0].to_small(bl[0].from_small(small)) - small) < 1e-9);
}

TEST_CASE("commutator_decompose on spec instances") {
  auto m2 = m_n(2);
  auto dec1 = commutator_decompose(CMat(CMat::Identity(2, 2)), m2);
  CHECK(dec1.pairs.empty());
  CHECK(hs_norm(dec1.central - CMat::Identity(2, 2)) < 1e-10);

  CMat tr0 = matrix_unit(2, 0, 0) - matrix_unit(2, 1, 1);
  auto dec2 = commutator_decompose(tr0, m2);
  REQUIRE(dec2.pairs.size() == 1);
  CHECK(hs_norm(dec2.central) < 1e-10);
  const auto& [u, v] = dec2.pairs[0];
  CHECK(hs_norm(CMat(u * v - v * u) - tr0) < 1e-10);
  CHECK(dec2.residual < 1e-10);

  auto m23 = m2_plus_m3();
  CMat a = CMat::Zero(5, 5);
  a.diagonal() << 1.0, -1.0, 2.0, -1.0, -1.0;  // traceless per block
  auto dec3 = commutator_decompose(a, m23);
  CHECK(hs_norm(dec3.central) < 1e-9);
  CHECK(dec3.residual < 1e-9);
  CMat recon = dec3.central;
  for (const auto& [uu, vv] : dec3.pairs) recon += uu * vv - vv * uu;
  CHECK(hs_norm(recon - a) < 1e-9);

  CHECK_THROWS_AS(commutator_decompose(matrix_unit(5, 0, 2), m23),
                  CertificationError);  // e_{13} is not in M2 (+) M3
}

TEST_CASE("commutator_decompose on random algebra elements") {
  Rng rng(53);
  for (int trial = 0; trial < 5; ++trial) {
    auto inst = random_algebra_with_idempotent(rng, true);
    const StarAlgebra& alg = inst.algebra;
    CVec c(alg.dim());
    for (Eigen::Index i = 0; i < alg.dim(); ++i) c(i) = rng.cgaussian();
    CMat a = alg.from_coords(c);
    auto dec = commutator_decompose(a, alg, 1e-9);
    CHECK(dec.residual < 1e-8 * std::max(1.0, hs_norm(a)));
    MatrixSubspace z = center(alg);
    CHECK(membership(dec.central, z, 1e-7).member);
    // Commutators have zero trace against every central projection.
    auto blocks = central_decomposition(alg);
    for (const auto& [u, v] : dec.pairs) {
      CMat comm = u * v - v * u;
      for (const auto& blk : blocks)
        CHECK(std::abs((comm * blk.projection).trace()) < 1e-8);
    }
  }
}
