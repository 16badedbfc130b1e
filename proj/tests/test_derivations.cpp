#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "trolab/derivations.hpp"
#include "trolab/instances.hpp"

using namespace trolab;

namespace {

StarAlgebra m_n(Eigen::Index n) { return make_star_algebra(full_matrix_gens(n)); }

TRO column_tro() {  // B(C, C^2), shape 2x1
  std::vector<CMat> gens = {CMat::Zero(2, 1), CMat::Zero(2, 1)};
  gens[0](0, 0) = 1.0;
  gens[1](1, 0) = 1.0;
  return make_tro(gens);
}

TRO scalar_tro() {
  CMat one(1, 1);
  one << 1.0;
  return make_tro({one});
}

/// Oracle for dim D(M_n): the span of {ad a} over a basis of M_n, measured
/// with Gram eigenvalues, entirely outside the solver path.
Eigen::Index ad_span_oracle(const StarAlgebra& a) {
  std::vector<CMat> ops;
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    ops.push_back(ad_operator(a.carrier, a.basis(i)));
  return oracle::span_dim(ops);
}

}  // namespace

TEST_CASE("derivation spaces of matrix algebras") {
  for (Eigen::Index n = 1; n <= 4; ++n) {
    auto a = m_n(n);
    auto d = derivation_space(a);
    CHECK(d.dim() == n * n - 1);
    CHECK(d.dim() == ad_span_oracle(a));
    for (const auto& op : d.ops) CHECK(assoc_defect(a, op) < 1e-9);
  }
  CHECK(derivation_space(make_star_algebra({CMat(CMat::Identity(2, 2))})).dim() ==
        0);
  auto diag = make_star_algebra({matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)});
  CHECK(derivation_space(diag).dim() == 0);  // commutative semisimple
}

TEST_CASE("star derivation spaces") {
  auto m2 = m_n(2);
  auto ds = star_derivation_space(m2);
  CHECK(ds.field == Field::Real);
  CHECK(ds.dim() == 3);  // ad of skew-hermitian mod center
  for (const auto& op : ds.ops) {
    CHECK(assoc_defect(m2, op) < 1e-9);
    CHECK(star_defect(m2, op) < 1e-9);
  }
  auto scalars = make_star_algebra({CMat(CMat::Identity(1, 1))});
  CHECK(star_derivation_space(scalars).dim() == 0);
}

TEST_CASE("s-invariant derivation spaces") {
  auto m2 = m_n(2);
  auto full = derivation_space(m2);

  // s = a gives the full space.
  auto all = s_derivation_space(m2, m2.carrier);
  CHECK(all.dim() == full.dim());

  // s = {0} gives the full space.
  MatrixSubspace zero;
  zero.ambient_rows = zero.ambient_cols = 2;
  auto none = s_derivation_space(m2, zero);
  CHECK(none.dim() == full.dim());

  // s = C p equals the idempotent space at p (Lemma 1.3 forces delta(p) = 0).
  auto p = certify_projection(m2, matrix_unit(2, 0, 0));
  auto sp = orthonormalize({p.matrix}, Field::Complex);
  auto via_s = s_derivation_space(m2, sp);
  auto via_p = p_derivation_space(m2, p, false);
  REQUIRE(via_s.dim() == via_p.dim());
  for (const auto& op : via_s.ops) CHECK(op_membership(op, via_p).member);
}

TEST_CASE("p-derivation spaces reproduce the worked examples") {
  auto m2 = m_n(2);
  auto p = certify_projection(m2, matrix_unit(2, 0, 0));

  auto dp = p_derivation_space(m2, p, false);
  CHECK(dp.field == Field::Complex);
  CHECK(dp.dim() == 1);

  auto gen = generator_realization(m2, &p, false);
  CHECK(gen.space.dim() == 2);  // the diagonal algebra
  CHECK(membership(matrix_unit(2, 0, 0), gen.space).member);
  CHECK(membership(matrix_unit(2, 1, 1), gen.space).member);
  CHECK(gen.operator_dim == 1);

  auto dps = p_derivation_space(m2, p, true);
  CHECK(dps.field == Field::Real);
  CHECK(dps.dim() == 1);

  auto gens = generator_realization(m2, &p, true);
  CHECK(gens.space.dim() == 3);  // diag(alpha, beta) with Re alpha = Re beta
  CHECK(membership(CMat(Complex(0, 1) * matrix_unit(2, 0, 0)), gens.space).member);
  CHECK(membership(CMat(Complex(0, 1) * matrix_unit(2, 1, 1)), gens.space).member);
  CHECK(membership(CMat(CMat::Identity(2, 2)), gens.space).member);
  CHECK_FALSE(membership(matrix_unit(2, 0, 0), gens.space).member);
  CHECK(gens.operator_dim == 1);
}

TEST_CASE("p-derivations of M5 at a rank-2 projection") {
  auto m5 = m_n(5);
  CMat pm = CMat::Zero(5, 5);
  pm(0, 0) = pm(1, 1) = 1.0;
  auto p = certify_projection(m5, pm);

  auto gen = generator_realization(m5, &p, false);
  CHECK(gen.space.dim() == 13);  // M2 (+) M3
  auto dp = p_derivation_space(m5, p, false);
  CHECK(dp.dim() == 12);
  CHECK(gen.operator_dim == 12);

  // Oracle: {t : [t, p] = 0} via the independent LU kernel has dim 13.
  CMat sys = CMat::Zero(25, 25);
  for (Eigen::Index c = 0; c < 5; ++c)
    for (Eigen::Index r = 0; r < 5; ++r) {
      Eigen::Index row = c * 5 + r;
      for (Eigen::Index k = 0; k < 5; ++k) {
        sys(row, k * 5 + r) += pm(k, c);
        sys(row, c * 5 + k) -= pm(r, k);
      }
    }
  CHECK(oracle::lu_kernel(sys).cols() == 13);

  // Self-adjoint generator condition: skew2 (+) skew3 (+) R I5, dim 14.
  auto gens = generator_realization(m5, &p, true);
  CHECK(gens.space.dim() == 14);
}

TEST_CASE("TRO derivation spaces") {
  auto c = scalar_tro();
  auto dc = tro_derivation_space(c);
  REQUIRE(dc.dim() == 1);
  // The basis is tau(x) = i x up to real sign.
  CHECK(std::abs(std::abs(dc.ops[0](0, 0).imag()) - 1.0) < 1e-12);
  CHECK(std::abs(dc.ops[0](0, 0).real()) < 1e-12);

  auto col = column_tro();
  auto dcol = tro_derivation_space(col);
  CHECK(dcol.dim() == 4);
  // Oracle: spatial maps x -> alpha x + x beta, alpha in u(2), beta in u(1),
  // with a one-dimensional overlap.
  std::vector<CMat> gen_ops;
  std::vector<CMat> u2 = {Complex(0, 1) * matrix_unit(2, 0, 0),
                          Complex(0, 1) * matrix_unit(2, 1, 1),
                          matrix_unit(2, 0, 1) - matrix_unit(2, 1, 0),
                          Complex(0, 1) * (matrix_unit(2, 0, 1) + matrix_unit(2, 1, 0))};
  for (const auto& al : u2)
    gen_ops.push_back(left_right_operator(col.carrier, al, CMat::Zero(1, 1)));
  CMat ibeta(1, 1);
  ibeta << Complex(0, 1);
  gen_ops.push_back(left_right_operator(col.carrier, CMat::Zero(2, 2), ibeta));
  CHECK(oracle::real_span_dim(gen_ops) == 4);

  auto zero = make_tro({}, 2, 2);
  CHECK(tro_derivation_space(zero).dim() == 0);

  TripleTensor t = triple_tensor(col.carrier);
  for (const auto& op : dcol.ops) CHECK(tro_defect(t, op) < 1e-9);
}

TEST_CASE("triple derivation spaces coincide with TRO derivations") {
  auto c = scalar_tro();
  CHECK(triple_derivation_space(c).dim() == 1);
  CHECK(triple_derivation_space(make_tro({}, 2, 2)).dim() == 0);

  Rng rng(37);
  for (int trial = 0; trial < 3; ++trial) {
    auto x = random_tro(rng, 2, 2 + trial % 2, 1);
    auto dt = tro_derivation_space(x);
    auto dj = triple_derivation_space(x);
    REQUIRE(dt.dim() == dj.dim());
    for (const auto& op : dt.ops) CHECK(op_membership(op, dj, 1e-8).member);
    for (const auto& op : dj.ops) CHECK(op_membership(op, dt, 1e-8).member);
  }
}

TEST_CASE("scalar field of TRO derivations is real, not complex") {
  auto c = scalar_tro();
  auto dc = tro_derivation_space(c);
  TripleTensor t = triple_tensor(c.carrier);
  REQUIRE(dc.dim() == 1);
  CHECK(tro_defect(t, dc.ops[0]) < 1e-12);
  // Multiplying by i leaves the real span and breaks the identity.
  CHECK(tro_defect(t, CMat(Complex(0, 1) * dc.ops[0])) > 1e-2);
}

TEST_CASE("inner spaces and membership") {
  auto m2 = m_n(2);
  auto inner = inner_assoc_space(m2);
  auto full = derivation_space(m2);
  REQUIRE(inner.space.dim() == 3);
  for (const auto& op : full.ops) CHECK(op_membership(op, inner.space).member);

  // delta(a, a) = 0.
  Rng rng(43);
  auto x = random_tro(rng, 2, 3, 1);
  CMat a = x.carrier.from_coeffs(CVec(rng.cmatrix(x.dim(), 1).col(0)));
  CHECK(inner_triple_operator(x.carrier, a, a).norm() < 1e-12);

  // Inner triple and inner TRO spans coincide.
  auto itro = inner_tro_space(x);
  auto itriple = inner_triple_space(x);
  REQUIRE(itro.space.dim() == itriple.space.dim());
  for (const auto& op : itro.space.ops)
    CHECK(op_membership(op, itriple.space, 1e-8).member);

  // Witness for an inner triple derivation, by construction.
  CMat b = x.carrier.from_coeffs(CVec(rng.cmatrix(x.dim(), 1).col(0)));
  CMat dab = inner_triple_operator(x.carrier, a, b);
  auto res = is_inner(dab, itriple, 1e-9);
  REQUIRE(res.inner);
  CHECK(res.witness.residual < 1e-10);
  CMat recon = CMat::Zero(x.dim(), x.dim());
  for (const auto& [wa, wb] : res.witness.pairs)
    recon += inner_triple_operator(x.carrier, wa, wb);
  CHECK((recon - dab).norm() < 1e-9);

  // ad of a central element has the zero least-norm witness.
  auto ia = inner_assoc_space(m2);
  CMat zop = CMat::Zero(4, 4);
  auto zres = is_inner(zop, ia, 1e-9);
  REQUIRE(zres.inner);
  CHECK(hs_norm(zres.witness.element) < 1e-10);

  // A TRO derivation of a full rectangular TRO is inner.
  std::vector<CMat> f23;
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      CMat e = CMat::Zero(2, 3);
      e(i, j) = 1.0;
      f23.push_back(e);
    }
  auto full23 = make_tro(f23);
  auto d23 = tro_derivation_space(full23);
  auto in23 = inner_tro_space(full23);
  CVec coeff(d23.dim());
  for (Eigen::Index i = 0; i < d23.dim(); ++i) coeff(i) = rng.gaussian();
  CMat random_d = CMat::Zero(6, 6);
  for (Eigen::Index i = 0; i < d23.dim(); ++i)
    random_d += coeff(i).real() * d23.ops[i];
  auto r23 = is_inner(random_d, in23, 1e-8);
  CHECK(r23.inner);
  CHECK(hs_norm(r23.witness.alpha + r23.witness.alpha.adjoint()) < 1e-10);
  CHECK(hs_norm(r23.witness.beta + r23.witness.beta.adjoint()) < 1e-10);
}

TEST_CASE("lie brackets") {
  auto m2 = m_n(2);
  auto d = derivation_space(m2);
  CHECK(lie_bracket(d.ops[0], d.ops[0]).norm() < 1e-15);

  // [ad a, ad b] = ad [a, b].
  Rng rng(47);
  CMat a = rng.cmatrix(2, 2), b = rng.cmatrix(2, 2);
  CMat ada = ad_operator(m2.carrier, a), adb = ad_operator(m2.carrier, b);
  CMat adc = ad_operator(m2.carrier, CMat(a * b - b * a));
  CHECK((lie_bracket(ada, adb) - adc).norm() < 1e-10);

  // D_TRO is closed under brackets.
  auto x = random_tro(rng, 2, 2, 1);
  auto dt = tro_derivation_space(x);
  for (Eigen::Index i = 0; i < dt.dim(); ++i)
    for (Eigen::Index j = i + 1; j < dt.dim(); ++j) {
      CMat br = lie_bracket(dt.ops[i], dt.ops[j]);
      CHECK(op_membership(br, dt, 1e-7).member);
    }
}

TEST_CASE("derivation spaces of random block algebras satisfy their identities") {
  Rng rng(59);
  for (int trial = 0; trial < 3; ++trial) {
    auto inst = random_algebra_with_idempotent(rng, true);
    const StarAlgebra& alg = inst.algebra;
    auto d = derivation_space(alg);
    for (const auto& op : d.ops) CHECK(assoc_defect(alg, op) < 1e-8);
    auto ds = star_derivation_space(alg);
    for (const auto& op : ds.ops) {
      CHECK(assoc_defect(alg, op) < 1e-8);
      CHECK(star_defect(alg, op) < 1e-8);
    }
    auto dp = p_derivation_space(alg, inst.e, false);
    for (const auto& op : dp.ops) {
      CHECK(assoc_defect(alg, op) < 1e-8);
      CHECK((op * inst.e.coeffs).norm() < 1e-8);
    }
  }
}
