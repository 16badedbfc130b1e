#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "trolab/instances.hpp"
#include "trolab/linalg.hpp"

using namespace trolab;

namespace {
CMat unit2(Eigen::Index i, Eigen::Index j) { return matrix_unit(2, i, j); }
}  // namespace

TEST_CASE("hs_inner basics") {
  CMat id = CMat::Identity(2, 2);
  CHECK(hs_inner(id, id).real() == Catch::Approx(2.0));
  CHECK(std::abs(hs_inner(unit2(0, 0), unit2(1, 1))) < 1e-15);
  CMat a = unit2(0, 1);
  CHECK(hs_inner(a, a).real() == Catch::Approx(1.0));
  // Conjugate symmetry on a random pair.
  Rng rng(11);
  CMat u = rng.cmatrix(3, 2), v = rng.cmatrix(3, 2);
  CHECK(std::abs(hs_inner(u, v) - std::conj(hs_inner(v, u))) < 1e-12);
  CHECK_THROWS_AS(hs_inner(u, CMat::Zero(2, 2)), DimensionError);
}

TEST_CASE("null_space trivial examples") {
  CHECK(null_space(CMat(CMat::Identity(3, 3))).empty());
  auto z = null_space(CMat(CMat::Zero(2, 2)));
  REQUIRE(z.size() == 2);
  CHECK(std::abs(z[0].dot(z[1])) < 1e-14);
  CHECK(z[0].norm() == Catch::Approx(1.0));

  CMat line(1, 2);
  line << 1.0, 1.0;
  auto k = null_space(line);
  REQUIRE(k.size() == 1);
  CVec expect(2);
  expect << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  CHECK((k[0] - expect).norm() < 1e-12);

  CHECK_THROWS_AS(null_space(CMat(0, 3)), DimensionError);
}

TEST_CASE("null_space invariants on random rank-deficient systems") {
  Rng rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    Eigen::Index rows = 5 + trial, cols = 7, rank = 3;
    CMat m = rng.cmatrix(rows, rank) * rng.cmatrix(rank, cols);
    double tol = detail::auto_rank_tol(op_norm(m), rows, cols);
    CMat kernel = null_space_matrix(m);
    CHECK(kernel.cols() + numerical_rank(m) == cols);
    CHECK(kernel.cols() == cols - rank);
    for (Eigen::Index c = 0; c < kernel.cols(); ++c)
      CHECK((m * kernel.col(c)).norm() <= 10 * std::max(tol, 1e-14) * op_norm(m));
    // Against the independent LU oracle.
    CHECK(oracle::lu_kernel(m).cols() == kernel.cols());
  }
}

TEST_CASE("orthonormalize spans and fields") {
  CMat e11 = unit2(0, 0);
  auto s1 = orthonormalize({e11, 2.0 * e11}, Field::Complex);
  CHECK(s1.dim() == 1);
  auto s2 = orthonormalize({e11, unit2(0, 1), unit2(1, 0), unit2(1, 1)},
                           Field::Complex);
  CHECK(s2.dim() == 4);
  // i*a is real-independent of a.
  Rng rng(5);
  CMat a = rng.cmatrix(2, 2);
  auto s3 = orthonormalize({a, Complex(0, 1) * a}, Field::Real);
  CHECK(s3.dim() == 2);
  auto s3c = orthonormalize({a, Complex(0, 1) * a}, Field::Complex);
  CHECK(s3c.dim() == 1);
}

TEST_CASE("orthonormalize is idempotent") {
  Rng rng(7);
  std::vector<CMat> mats;
  for (int i = 0; i < 3; ++i) mats.push_back(rng.cmatrix(3, 3));
  auto s = orthonormalize(mats, Field::Complex);
  auto again = orthonormalize(s.basis, Field::Complex);
  CHECK(same_span(s, again, 1e-10));
  // Gram matrix of the basis is the identity.
  for (Eigen::Index i = 0; i < s.dim(); ++i)
    for (Eigen::Index j = 0; j < s.dim(); ++j) {
      Complex g = hs_inner(s.basis[i], s.basis[j]);
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
}

TEST_CASE("membership accepts and rejects") {
  CMat id = CMat::Identity(2, 2);
  auto span_id = orthonormalize({id}, Field::Complex);
  auto m = membership(unit2(0, 0) + unit2(1, 1), span_id);
  CHECK(m.member);
  CHECK((span_id.from_coeffs(m.coeffs) - id).norm() < 1e-12);

  auto span_e11 = orthonormalize({unit2(0, 0)}, Field::Complex);
  auto r = membership(unit2(0, 1), span_e11);
  CHECK_FALSE(r.member);
  CHECK(r.residual == Catch::Approx(1.0));

  auto span_real = orthonormalize({unit2(0, 0)}, Field::Real);
  auto ri = membership(Complex(0, 1) * unit2(0, 0), span_real);
  CHECK_FALSE(ri.member);
}

TEST_CASE("realification round-trip is exact") {
  Rng rng(9);
  CMat m = rng.cmatrix(4, 3);
  RealifiedSystem sys = realify_linear_map(m);
  CHECK((derealify_linear_map(sys) - m).norm() == 0.0);
  // Action agrees with complex multiplication.
  CVec v = rng.cmatrix(3, 1).col(0);
  RVec rv = realify(v);
  CHECK((derealify(RVec(sys.real_matrix * rv)) - m * v).norm() < 1e-13);
}

TEST_CASE("realify_constraints encodes conjugate-linear terms") {
  Rng rng(13);
  Eigen::Index n = 4;
  CMat a = rng.cmatrix(2, n), b = rng.cmatrix(2, n);
  CVec t = rng.cmatrix(n, 1).col(0);
  CVec lhs = a * t + b * t.conjugate();
  RMat rr = realify_constraints(a, b);
  RVec out = rr * realify(t);
  CHECK((out.head(2) - lhs.real()).norm() < 1e-13);
  CHECK((out.tail(2) - lhs.imag()).norm() < 1e-13);
}

TEST_CASE("KernelRefiner matches one-shot kernels") {
  Rng rng(17);
  Eigen::Index cols = 20;
  CMat m = rng.cmatrix(9, 4) * rng.cmatrix(4, cols);
  CMat oneshot = null_space_matrix(m);
  KernelRefiner<Complex> refiner(cols);
  for (Eigen::Index r = 0; r < m.rows(); r += 3)
    refiner.constrain(m.middleRows(r, std::min<Eigen::Index>(3, m.rows() - r)));
  CMat staged = refiner.take_canonical();
  REQUIRE(staged.cols() == oneshot.cols());
  // Same subspace: stacked rank does not grow.
  CMat both(cols, staged.cols() + oneshot.cols());
  both << staged, oneshot;
  CHECK(numerical_rank(both) == staged.cols());
  for (Eigen::Index c = 0; c < staged.cols(); ++c)
    CHECK((m * staged.col(c)).norm() < 1e-10);
}

TEST_CASE("least_norm_solve picks the minimum-norm solution") {
  CMat a(1, 2);
  a << 1.0, 1.0;
  CVec b(1);
  b << 2.0;
  CVec x = least_norm_solve(a, b);
  CHECK((a * x - b).norm() < 1e-12);
  CHECK(std::abs(x(0) - x(1)) < 1e-12);  // least-norm on the affine line
}
