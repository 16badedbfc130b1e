#pragma once

// Derivation spaces as null spaces of explicit linear systems: associative,
// self-adjoint, S-invariant and idempotent-fixing derivations of *-algebras,
// TRO- and Jordan-triple derivations, their inner subspaces, and innerness
// (membership + witness) tests.
//
// Unknown operators are d x d complex matrices T in domain coordinates,
// vectorized column-major (column k = coordinates of the image of e_k).
// Complex-linear constraint sets are solved over C; constraints involving
// the adjoint of the unknown's values are conjugate-linear and are solved
// over the realified coordinates [Re T; Im T].

#include <cstdint>
#include <utility>
#include <vector>

#include "trolab/tro.hpp"

namespace trolab {

enum class DerivationKind {
  Assoc,
  Star,
  SInvariant,
  Idempotent,
  Tro,
  Triple,
  InnerAssoc,
  InnerTro,
  InnerTriple
};

/// A (real or complex) linear space of operators on a matrix subspace,
/// stored as d x d operator matrices in domain coordinates, orthonormal for
/// the operator HS inner product (its real part for real-field spaces).
struct DerivationSpace {
  MatrixSubspace domain;
  Field field = Field::Complex;
  DerivationKind kind = DerivationKind::Assoc;
  std::vector<CMat> ops;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(ops.size()); }
};

inline CMat apply_op(const MatrixSubspace& domain, const CMat& op,
                     const CMat& v, double tol = 1e-9) {
  Membership m = membership(v, domain, tol);
  if (!m.member) throw DimensionError("apply_op: element not in domain");
  return domain.from_coeffs(op * m.coeffs);
}

inline CMat lie_bracket(const CMat& d1, const CMat& d2) {
  if (d1.rows() != d2.rows() || d1.cols() != d2.cols())
    throw DimensionError("lie_bracket: shape mismatch");
  return d1 * d2 - d2 * d1;
}

/// Membership of an operator in a derivation space (HS geometry on operator
/// matrices, real coefficients for real-field spaces).
inline Membership op_membership(const CMat& op, const DerivationSpace& sp,
                                double tol = 1e-9) {
  MatrixSubspace view;
  view.ambient_rows = sp.domain.dim();
  view.ambient_cols = sp.domain.dim();
  view.field = sp.field;
  view.basis = sp.ops;
  return membership(op, view, tol);
}

// ---------------------------------------------------------------------------
// Operator constructors
// ---------------------------------------------------------------------------

namespace detail {

inline CVec coords_or_throw(const MatrixSubspace& s, const CMat& v,
                            const char* what, double tol = 1e-8) {
  Membership m = membership(v, s, tol);
  if (!m.member)
    throw CertificationError(std::string(what) + ": value escapes the domain "
                             "(residual " + std::to_string(m.residual) + ")");
  return m.coeffs;
}

}  // namespace detail

/// ad t : v -> t v - v t as an operator matrix on the subspace.
inline CMat ad_operator(const MatrixSubspace& domain, const CMat& t,
                        double tol = 1e-8) {
  CMat op(domain.dim(), domain.dim());
  for (Eigen::Index j = 0; j < domain.dim(); ++j) {
    CMat img = t * domain.basis[j] - domain.basis[j] * t;
    op.col(j) = detail::coords_or_throw(domain, img, "ad_operator", tol);
  }
  return op;
}

/// v -> alpha v + v beta as an operator matrix on the subspace.
inline CMat left_right_operator(const MatrixSubspace& domain, const CMat& alpha,
                                const CMat& beta, double tol = 1e-8) {
  CMat op(domain.dim(), domain.dim());
  for (Eigen::Index j = 0; j < domain.dim(); ++j) {
    CMat img = alpha * domain.basis[j] + domain.basis[j] * beta;
    op.col(j) = detail::coords_or_throw(domain, img, "left_right_operator", tol);
  }
  return op;
}

/// delta(a, b) : v -> (a b* v + v b* a - b a* v - v a* b) / 2.
inline CMat inner_triple_operator(const MatrixSubspace& domain, const CMat& a,
                                  const CMat& b, double tol = 1e-8) {
  CMat ab = a * b.adjoint() - b * a.adjoint();
  CMat ba = b.adjoint() * a - a.adjoint() * b;
  CMat op(domain.dim(), domain.dim());
  for (Eigen::Index j = 0; j < domain.dim(); ++j) {
    CMat img = 0.5 * (ab * domain.basis[j] + domain.basis[j] * ba);
    op.col(j) = detail::coords_or_throw(domain, img, "inner_triple_operator", tol);
  }
  return op;
}

/// v -> s o v = (s v + v s) / 2.
inline CMat jordan_mult_operator(const MatrixSubspace& domain, const CMat& s,
                                 double tol = 1e-8) {
  CMat op(domain.dim(), domain.dim());
  for (Eigen::Index j = 0; j < domain.dim(); ++j) {
    CMat img = 0.5 * (s * domain.basis[j] + domain.basis[j] * s);
    op.col(j) = detail::coords_or_throw(domain, img, "jordan_mult_operator", tol);
  }
  return op;
}

// ---------------------------------------------------------------------------
// Triple structure constants
// ---------------------------------------------------------------------------

/// Coordinates of e_i e_j* e_k in the carrier basis, for all triples;
/// certifies ternary closure while building.
struct TripleTensor {
  Eigen::Index d = 0;
  std::vector<Complex> data;  // (((i * d + j) * d + k) * d + m)

  Complex tro(Eigen::Index i, Eigen::Index j, Eigen::Index k,
              Eigen::Index m) const {
    return data[(((i * d + j) * d + k) * d + m)];
  }
  Complex jordan(Eigen::Index i, Eigen::Index j, Eigen::Index k,
                 Eigen::Index m) const {
    return 0.5 * (tro(i, j, k, m) + tro(k, j, i, m));
  }
  Eigen::Map<const CVec> tro_vec(Eigen::Index i, Eigen::Index j,
                                 Eigen::Index k) const {
    return Eigen::Map<const CVec>(data.data() + (((i * d + j) * d + k) * d), d);
  }
  CVec jordan_vec(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return 0.5 * (tro_vec(i, j, k) + tro_vec(k, j, i));
  }
};

inline TripleTensor triple_tensor(const MatrixSubspace& x, double tol = 1e-9) {
  TripleTensor t;
  t.d = x.dim();
  t.data.assign(static_cast<std::size_t>(t.d) * t.d * t.d * t.d, Complex(0, 0));
  for (Eigen::Index i = 0; i < t.d; ++i)
    for (Eigen::Index j = 0; j < t.d; ++j)
      for (Eigen::Index k = 0; k < t.d; ++k) {
        CMat p = x.basis[i] * x.basis[j].adjoint() * x.basis[k];
        Membership m = membership(p, x, tol);
        if (!m.member)
          throw CertificationError(
              "triple_tensor: ternary closure failed at (" + std::to_string(i) +
              ", " + std::to_string(j) + ", " + std::to_string(k) +
              ") (residual " + std::to_string(m.residual) + ")");
        for (Eigen::Index mm = 0; mm < t.d; ++mm)
          t.data[(((i * t.d + j) * t.d + k) * t.d + mm)] = m.coeffs(mm);
      }
  return t;
}

// ---------------------------------------------------------------------------
// Kernel solvers
// ---------------------------------------------------------------------------

namespace detail {

// Relative sigma-threshold for Gram-based kernel extraction.  Forming C^H C
// squares singular values, so eigen-noise eps * ||G|| corresponds to
// sqrt(eps) * sigma_max in constraint units; structural singular values of
// the certified systems sit orders of magnitude higher.
constexpr double kGramSigmaTol = 1e-7;

/// One complex constraint row  sum_j linear_j t_{c_j} + conj_j conj(t_{c_j}),
/// stored sparsely.
struct SparseConstraintRow {
  std::vector<std::pair<Eigen::Index, Complex>> linear, conj;
  void clear() {
    linear.clear();
    conj.clear();
  }
};

/// Kernel of a complex-linear constraint system via the accumulated Gram
/// matrix G = C^H C; one hermitian eigensolve replaces the staged SVDs.
class GramKernelComplex {
 public:
  explicit GramKernelComplex(Eigen::Index unknowns)
      : gram_(CMat::Zero(unknowns, unknowns)) {}

  void add_row(const SparseConstraintRow& row) {
    for (const auto& [ca, va] : row.linear)
      for (const auto& [cb, vb] : row.linear)
        gram_(ca, cb) += std::conj(va) * vb;
  }

  CMat kernel() const {
    Eigen::SelfAdjointEigenSolver<CMat> es(gram_);
    double smax = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    double t = kGramSigmaTol * std::max(1.0, smax);
    Eigen::Index keep = 0;
    while (keep < es.eigenvalues().size() && es.eigenvalues()(keep) <= t * t)
      ++keep;
    CMat k = es.eigenvectors().leftCols(keep);
    canonicalize_columns(k);
    return k;
  }

 private:
  CMat gram_;
};

/// Kernel of a real-linear (conjugate-linear terms allowed) system over the
/// realified unknowns [Re t; Im t], again via one Gram eigensolve.
class GramKernelRealified {
 public:
  explicit GramKernelRealified(Eigen::Index complex_unknowns)
      : n_(complex_unknowns), gram_(RMat::Zero(2 * n_, 2 * n_)) {}

  void add_row(const SparseConstraintRow& row) {
    // Real/imaginary parts of the complex constraint give two real rows:
    //   top:    Re(a)+Re(b) on Re t,  -Im(a)+Im(b) on Im t
    //   bottom: Im(a)+Im(b) on Re t,   Re(a)-Re(b) on Im t
    top_.clear();
    bot_.clear();
    for (const auto& [c, v] : row.linear) {
      push(top_, c, v.real());
      push(top_, c + n_, -v.imag());
      push(bot_, c, v.imag());
      push(bot_, c + n_, v.real());
    }
    for (const auto& [c, v] : row.conj) {
      push(top_, c, v.real());
      push(top_, c + n_, v.imag());
      push(bot_, c, v.imag());
      push(bot_, c + n_, -v.real());
    }
    rank_one(top_);
    rank_one(bot_);
  }

  RMat kernel() const {
    Eigen::SelfAdjointEigenSolver<RMat> es(gram_);
    double smax = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    double t = kGramSigmaTol * std::max(1.0, smax);
    Eigen::Index keep = 0;
    while (keep < es.eigenvalues().size() && es.eigenvalues()(keep) <= t * t)
      ++keep;
    RMat k = es.eigenvectors().leftCols(keep);
    canonicalize_columns(k);
    return k;
  }

 private:
  static void push(std::vector<std::pair<Eigen::Index, double>>& entries,
                   Eigen::Index col, double v) {
    if (v != 0.0) entries.emplace_back(col, v);
  }
  void rank_one(const std::vector<std::pair<Eigen::Index, double>>& entries) {
    for (const auto& [ca, va] : entries)
      for (const auto& [cb, vb] : entries) gram_(ca, cb) += va * vb;
  }

  Eigen::Index n_;
  RMat gram_;
  std::vector<std::pair<Eigen::Index, double>> top_, bot_;
};

inline std::vector<CMat> ops_from_kernel(const CMat& kernel, Eigen::Index d) {
  std::vector<CMat> ops;
  ops.reserve(kernel.cols());
  for (Eigen::Index c = 0; c < kernel.cols(); ++c)
    ops.push_back(unvec(kernel.col(c), d, d));
  return ops;
}

inline std::vector<CMat> ops_from_real_kernel(const RMat& kernel,
                                              Eigen::Index d) {
  std::vector<CMat> ops;
  ops.reserve(kernel.cols());
  for (Eigen::Index c = 0; c < kernel.cols(); ++c)
    ops.push_back(unvec(derealify(kernel.col(c)), d, d));
  return ops;
}

}  // namespace detail

/// Null space of the Leibniz system over all basis pairs (complex field).
inline DerivationSpace derivation_space(const StarAlgebra& a) {
  Eigen::Index d = a.dim();
  DerivationSpace sp;
  sp.domain = a.carrier;
  sp.field = Field::Complex;
  sp.kind = DerivationKind::Assoc;
  if (d == 0) return sp;
  detail::GramKernelComplex gram(d * d);
  detail::SparseConstraintRow row;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      CVec pij = a.prod[i].col(j);
      for (Eigen::Index m = 0; m < d; ++m) {
        row.clear();
        for (Eigen::Index k = 0; k < d; ++k)
          if (pij(k) != Complex(0, 0))
            row.linear.emplace_back(k * d + m, pij(k));
        for (Eigen::Index l = 0; l < d; ++l) {
          Complex c1 = a.prod[l](m, j);
          if (c1 != Complex(0, 0)) row.linear.emplace_back(i * d + l, -c1);
          Complex c2 = a.prod[i](m, l);
          if (c2 != Complex(0, 0)) row.linear.emplace_back(j * d + l, -c2);
        }
        gram.add_row(row);
      }
    }
  sp.ops = detail::ops_from_kernel(gram.kernel(), d);
  return sp;
}

// ---------------------------------------------------------------------------
// Defect evaluators (certification and refinement)
// ---------------------------------------------------------------------------

/// Residual coordinates of the Leibniz identity on pair (i, j).
inline CVec assoc_defect_coords(const StarAlgebra& a, const CMat& op,
                                Eigen::Index i, Eigen::Index j) {
  CVec defect = op * a.prod[i].col(j);
  for (Eigen::Index l = 0; l < a.dim(); ++l) {
    if (op(l, i) != Complex(0, 0)) defect -= op(l, i) * a.prod[l].col(j);
    if (op(l, j) != Complex(0, 0)) defect -= op(l, j) * a.prod[i].col(l);
  }
  return defect;
}

inline double assoc_defect(const StarAlgebra& a, const CMat& op) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    for (Eigen::Index j = 0; j < a.dim(); ++j)
      worst = std::max(worst, assoc_defect_coords(a, op, i, j).norm());
  return worst;
}

/// vec of the defect of delta(x*)* = delta(x), column per basis element.
inline CMat star_defect_matrix(const StarAlgebra& a, const CMat& op) {
  Eigen::Index d = a.dim();
  CMat defect(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    defect.col(j) = a.star * (op * a.star.col(j)).conjugate() - op.col(j);
  return defect;
}

inline double star_defect(const StarAlgebra& a, const CMat& op) {
  return star_defect_matrix(a, op).norm();
}

/// Defect of the TRO-derivation identity on triple (i, j, k).
inline CVec tro_defect_coords(const TripleTensor& t, const CMat& op,
                              Eigen::Index i, Eigen::Index j, Eigen::Index k) {
  Eigen::Index d = t.d;
  CVec defect = op * t.tro_vec(i, j, k);
  for (Eigen::Index l = 0; l < d; ++l) {
    if (op(l, i) != Complex(0, 0)) defect -= op(l, i) * t.tro_vec(l, j, k);
    if (op(l, j) != Complex(0, 0))
      defect -= std::conj(op(l, j)) * t.tro_vec(i, l, k);
    if (op(l, k) != Complex(0, 0)) defect -= op(l, k) * t.tro_vec(i, j, l);
  }
  return defect;
}

inline double tro_defect(const TripleTensor& t, const CMat& op) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < t.d; ++i)
    for (Eigen::Index j = 0; j < t.d; ++j)
      for (Eigen::Index k = 0; k < t.d; ++k)
        worst = std::max(worst, tro_defect_coords(t, op, i, j, k).norm());
  return worst;
}

inline CVec triple_defect_coords(const TripleTensor& t, const CMat& op,
                                 Eigen::Index i, Eigen::Index j,
                                 Eigen::Index k) {
  Eigen::Index d = t.d;
  CVec defect = op * t.jordan_vec(i, j, k);
  for (Eigen::Index l = 0; l < d; ++l) {
    if (op(l, i) != Complex(0, 0)) defect -= op(l, i) * t.jordan_vec(l, j, k);
    if (op(l, j) != Complex(0, 0))
      defect -= std::conj(op(l, j)) * t.jordan_vec(i, l, k);
    if (op(l, k) != Complex(0, 0)) defect -= op(l, k) * t.jordan_vec(i, j, l);
  }
  return defect;
}

inline double triple_defect(const TripleTensor& t, const CMat& op) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < t.d; ++i)
    for (Eigen::Index j = 0; j < t.d; ++j)
      for (Eigen::Index k = 0; k < t.d; ++k)
        worst = std::max(worst, triple_defect_coords(t, op, i, j, k).norm());
  return worst;
}

// ---------------------------------------------------------------------------
// Refinements of the associative derivation space
// ---------------------------------------------------------------------------

namespace detail {

/// Real-field subspace of a complex derivation space cut out by real-linear
/// defect maps: parameters are [delta_s, i delta_s], and each defect function
/// maps an operator to a complex defect matrix (entry-wise real-linear in T).
template <typename DefectFn>
DerivationSpace refine_real(const DerivationSpace& base, DefectFn&& defect,
                            DerivationKind kind) {
  Eigen::Index d = base.domain.dim();
  DerivationSpace out;
  out.domain = base.domain;
  out.field = Field::Real;
  out.kind = kind;
  if (base.dim() == 0) return out;
  std::vector<CMat> params;
  params.reserve(2 * base.ops.size());
  for (const auto& o : base.ops) {
    params.push_back(o);
    params.push_back(Complex(0, 1) * o);
  }
  Eigen::Index p = static_cast<Eigen::Index>(params.size());
  RMat cols(0, 0);
  for (Eigen::Index s = 0; s < p; ++s) {
    CMat dm = defect(params[s]);
    RVec col = realify(vec(dm));
    if (cols.size() == 0) cols.resize(col.size(), p);
    cols.col(s) = col;
  }
  RMat kernel = structural_kernel(cols);
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    CMat op = CMat::Zero(d, d);
    for (Eigen::Index s = 0; s < p; ++s) op += kernel(s, c) * params[s];
    out.ops.push_back(op);
  }
  return out;
}

/// Refine an already real-field space by further real-linear defect maps.
template <typename DefectFn>
DerivationSpace refine_real_space(const DerivationSpace& base,
                                  DefectFn&& defect, DerivationKind kind) {
  Eigen::Index d = base.domain.dim();
  DerivationSpace out;
  out.domain = base.domain;
  out.field = Field::Real;
  out.kind = kind;
  if (base.dim() == 0) return out;
  Eigen::Index p = base.dim();
  RMat cols(0, 0);
  for (Eigen::Index s = 0; s < p; ++s) {
    CMat dm = defect(base.ops[s]);
    RVec col = realify(vec(dm));
    if (cols.size() == 0) cols.resize(col.size(), p);
    cols.col(s) = col;
  }
  RMat kernel = structural_kernel(cols);
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    CMat op = CMat::Zero(d, d);
    for (Eigen::Index s = 0; s < p; ++s) op += kernel(s, c) * base.ops[s];
    out.ops.push_back(op);
  }
  return out;
}

/// Complex-field subspace cut out by complex-linear defect maps.
template <typename DefectFn>
DerivationSpace refine_complex(const DerivationSpace& base, DefectFn&& defect,
                               DerivationKind kind) {
  Eigen::Index d = base.domain.dim();
  DerivationSpace out;
  out.domain = base.domain;
  out.field = Field::Complex;
  out.kind = kind;
  if (base.dim() == 0) return out;
  Eigen::Index p = base.dim();
  CMat cols(0, 0);
  for (Eigen::Index s = 0; s < p; ++s) {
    CMat dm = defect(base.ops[s]);
    CVec col = vec(dm);
    if (cols.size() == 0) cols.resize(col.size(), p);
    cols.col(s) = col;
  }
  CMat kernel = structural_kernel(cols);
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    CMat op = CMat::Zero(d, d);
    for (Eigen::Index s = 0; s < p; ++s) op += kernel(s, c) * base.ops[s];
    out.ops.push_back(op);
  }
  return out;
}

}  // namespace detail

/// Self-adjoint derivations (real Lie algebra): Leibniz + delta(x*)* = delta(x).
/// A precomputed derivation_space(a) may be passed to avoid re-solving.
inline DerivationSpace star_derivation_space(const StarAlgebra& a,
                                             const DerivationSpace* base_in =
                                                 nullptr) {
  DerivationSpace base = base_in ? *base_in : derivation_space(a);
  return detail::refine_real(
      base, [&](const CMat& op) { return star_defect_matrix(a, op); },
      DerivationKind::Star);
}

/// Derivations leaving the subspace s of a invariant.
inline DerivationSpace s_derivation_space(const StarAlgebra& a,
                                          const MatrixSubspace& s,
                                          double tol = 1e-9,
                                          const DerivationSpace* base_in =
                                              nullptr) {
  Eigen::Index d = a.dim();
  // Coordinates (in a) of the s basis, and the projector onto their span.
  CMat sigma(d, std::max<Eigen::Index>(s.dim(), 1));
  CMat proj = CMat::Zero(d, d);
  for (Eigen::Index r = 0; r < s.dim(); ++r) {
    CVec c = a.coords(s.basis[r], tol);  // throws when s is not inside a
    sigma.col(r) = c;
  }
  if (s.dim() > 0) {
    // Orthonormalize the coordinate vectors before building the projector.
    Eigen::HouseholderQR<CMat> qr(sigma.leftCols(s.dim()));
    CMat q = qr.householderQ() * CMat::Identity(d, s.dim());
    proj = q * q.adjoint();
  }
  CMat comp = CMat::Identity(d, d) - proj;
  DerivationSpace base = base_in ? *base_in : derivation_space(a);
  return detail::refine_complex(
      base,
      [&](const CMat& op) -> CMat {
        if (s.dim() == 0) return CMat::Zero(d, 1);
        return comp * (op * sigma.leftCols(s.dim()));
      },
      DerivationKind::SInvariant);
}

/// Derivations with delta(e) = 0; real field with the self-adjoint constraint.
inline DerivationSpace p_derivation_space(const StarAlgebra& a,
                                          const Projection& e,
                                          bool self_adjoint,
                                          const DerivationSpace* base_in =
                                              nullptr) {
  DerivationSpace base = base_in ? *base_in : derivation_space(a);
  if (!self_adjoint) {
    return detail::refine_complex(
        base, [&](const CMat& op) -> CMat { return op * e.coeffs; },
        DerivationKind::Idempotent);
  }
  Eigen::Index d = a.dim();
  return detail::refine_real(
      base,
      [&](const CMat& op) -> CMat {
        CMat defect(d, d + 1);
        defect.leftCols(d) = star_defect_matrix(a, op);
        defect.col(d) = op * e.coeffs;
        return defect;
      },
      DerivationKind::Idempotent);
}

// ---------------------------------------------------------------------------
// TRO and triple derivation spaces (realified solves)
// ---------------------------------------------------------------------------

namespace detail {

inline DerivationSpace ternary_space(const MatrixSubspace& carrier,
                                     bool jordan, double tol) {
  Eigen::Index d = carrier.dim();
  DerivationSpace sp;
  sp.domain = carrier;
  sp.field = Field::Real;
  sp.kind = jordan ? DerivationKind::Triple : DerivationKind::Tro;
  if (d == 0) return sp;
  TripleTensor t = triple_tensor(carrier, tol);
  GramKernelRealified gram(d * d);
  SparseConstraintRow row;
  CVec lhs(d);
  auto tvec = [&](Eigen::Index p, Eigen::Index q, Eigen::Index r) -> CVec {
    return jordan ? t.jordan_vec(p, q, r) : CVec(t.tro_vec(p, q, r));
  };
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index k = 0; k < d; ++k) {
        lhs = tvec(i, j, k);
        std::vector<CVec> term1(d), term2(d), term3(d);
        for (Eigen::Index l = 0; l < d; ++l) {
          term1[l] = tvec(l, j, k);
          term2[l] = tvec(i, l, k);
          term3[l] = tvec(i, j, l);
        }
        for (Eigen::Index m = 0; m < d; ++m) {
          row.clear();
          for (Eigen::Index l = 0; l < d; ++l) {
            if (lhs(l) != Complex(0, 0))
              row.linear.emplace_back(l * d + m, lhs(l));
            if (term1[l](m) != Complex(0, 0))
              row.linear.emplace_back(i * d + l, -term1[l](m));
            if (term2[l](m) != Complex(0, 0))
              row.conj.emplace_back(j * d + l, -term2[l](m));
            if (term3[l](m) != Complex(0, 0))
              row.linear.emplace_back(k * d + l, -term3[l](m));
          }
          gram.add_row(row);
        }
      }
  sp.ops = ops_from_real_kernel(gram.kernel(), d);
  return sp;
}

}  // namespace detail

/// TRO-derivations: tau(x y* z) = tau(x) y* z + x tau(y)* z + x y* tau(z).
/// The middle slot is conjugate-linear in tau, so the space is real.
inline DerivationSpace tro_derivation_space(const TRO& x, double tol = 1e-9) {
  return detail::ternary_space(x.carrier, false, tol);
}

/// Jordan-triple derivations of the symmetrized product {x y* z}.
inline DerivationSpace triple_derivation_space(const TRO& x,
                                               double tol = 1e-9) {
  return detail::ternary_space(x.carrier, true, tol);
}

inline DerivationSpace triple_derivation_space(const StarAlgebra& a,
                                               double tol = 1e-9) {
  return detail::ternary_space(a.carrier, true, tol);
}

// ---------------------------------------------------------------------------
// Inner spaces and witnesses
// ---------------------------------------------------------------------------

/// Real-orthonormal basis of the skew-hermitian part of a *-closed subspace.
inline std::vector<CMat> skew_basis(const MatrixSubspace& s) {
  std::vector<CMat> cand;
  for (const auto& b : s.basis) {
    cand.push_back(0.5 * (b - b.adjoint()));
    cand.push_back(Complex(0, 0.5) * (b + b.adjoint()));
  }
  return orthonormalize(cand, Field::Real, 0.0, s.ambient_rows,
                        s.ambient_cols, 1.0)
      .basis;
}

/// An inner derivation space together with its generating parametrization,
/// kept so that witnesses can be reconstructed from coefficient solves.
struct InnerSpace {
  DerivationSpace space;
  // InnerAssoc: parameter m ranges over the algebra basis (phi col = vec ad e_m).
  // InnerTro:   parameters are skew alpha then skew beta generators.
  // InnerTriple: parameters are ordered real-basis pairs (u_a, u_b), a < b.
  std::vector<CMat> alpha_basis, beta_basis;
  std::vector<std::pair<CMat, CMat>> pair_basis;
  // phi maps parameter coefficients to vec'd (InnerAssoc) or realified vec'd
  // operators (InnerTro / InnerTriple).
  CMat phi_complex;
  RMat phi_real;
};

inline InnerSpace inner_assoc_space(const StarAlgebra& a) {
  InnerSpace in;
  Eigen::Index d = a.dim();
  std::vector<CMat> ops;
  in.phi_complex.resize(d * d, d);
  for (Eigen::Index m = 0; m < d; ++m) {
    CMat op(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
      op.col(j) = a.prod[m].col(j) - a.prod[j].col(m);
    ops.push_back(op);
    in.phi_complex.col(m) = vec(op);
  }
  MatrixSubspace span = orthonormalize(ops, Field::Complex, 0.0, d, d, 1.0);
  in.space.domain = a.carrier;
  in.space.field = Field::Complex;
  in.space.kind = DerivationKind::InnerAssoc;
  in.space.ops = span.basis;
  return in;
}

inline InnerSpace inner_tro_space(const TRO& x, double tol = 1e-8) {
  InnerSpace in;
  Eigen::Index d = x.dim();
  in.alpha_basis = skew_basis(left_products(x));
  in.beta_basis = skew_basis(right_products(x));
  std::vector<CMat> ops;
  for (const auto& al : in.alpha_basis)
    ops.push_back(
        left_right_operator(x.carrier, al, CMat::Zero(x.k(), x.k()), tol));
  for (const auto& be : in.beta_basis)
    ops.push_back(
        left_right_operator(x.carrier, CMat::Zero(x.h(), x.h()), be, tol));
  in.phi_real.resize(2 * d * d,
                     static_cast<Eigen::Index>(ops.size()));
  for (std::size_t s = 0; s < ops.size(); ++s)
    in.phi_real.col(static_cast<Eigen::Index>(s)) = realify(vec(ops[s]));
  MatrixSubspace span = orthonormalize(ops, Field::Real, 0.0, d, d, 1.0);
  in.space.domain = x.carrier;
  in.space.field = Field::Real;
  in.space.kind = DerivationKind::InnerTro;
  in.space.ops = span.basis;
  return in;
}

inline InnerSpace inner_triple_space(const TRO& x, double tol = 1e-8) {
  InnerSpace in;
  Eigen::Index d = x.dim();
  std::vector<CMat> real_basis;
  for (const auto& b : x.carrier.basis) {
    real_basis.push_back(b);
    real_basis.push_back(Complex(0, 1) * b);
  }
  std::vector<CMat> ops;
  for (std::size_t a = 0; a < real_basis.size(); ++a)
    for (std::size_t b = a + 1; b < real_basis.size(); ++b) {
      in.pair_basis.emplace_back(real_basis[a], real_basis[b]);
      ops.push_back(
          inner_triple_operator(x.carrier, real_basis[a], real_basis[b], tol));
    }
  if (!ops.empty()) {
    in.phi_real.resize(2 * d * d, static_cast<Eigen::Index>(ops.size()));
    for (std::size_t s = 0; s < ops.size(); ++s)
      in.phi_real.col(static_cast<Eigen::Index>(s)) = realify(vec(ops[s]));
  }
  MatrixSubspace span = orthonormalize(ops, Field::Real, 0.0, d, d, 1.0);
  in.space.domain = x.carrier;
  in.space.field = Field::Real;
  in.space.kind = DerivationKind::InnerTriple;
  in.space.ops = span.basis;
  return in;
}

inline InnerSpace inner_triple_space(const StarAlgebra& a, double tol = 1e-8) {
  return inner_triple_space(as_tro(a), tol);
}

struct InnerWitness {
  DerivationKind kind = DerivationKind::InnerAssoc;
  CMat element;                              // InnerAssoc: delta = ad element
  CMat alpha, beta;                          // InnerTro: x -> alpha x + x beta
  std::vector<std::pair<CMat, CMat>> pairs;  // InnerTriple: sum delta(a, b)
  double residual = 0.0;
};

struct InnerResult {
  bool inner = false;
  double distance = 0.0;  // residual of the projection onto the inner space
  InnerWitness witness;
};

/// Membership of an operator in an inner space; on success reconstructs a
/// least-norm witness in the generating parameters and certifies it.
inline InnerResult is_inner(const CMat& op, const InnerSpace& in,
                            double tol = 1e-9) {
  InnerResult res;
  Membership m = op_membership(op, in.space, tol);
  res.distance = m.residual;
  res.inner = m.member;
  if (!res.inner) return res;
  res.witness.kind = in.space.kind;
  Eigen::Index d = in.space.domain.dim();
  CMat recon = CMat::Zero(d, d);
  switch (in.space.kind) {
    case DerivationKind::InnerAssoc: {
      CVec c = least_norm_solve(in.phi_complex, CVec(vec(op)));
      res.witness.element = in.space.domain.from_coeffs(c);
      recon = unvec(in.phi_complex * c, d, d);
      break;
    }
    case DerivationKind::InnerTro: {
      RVec c = least_norm_solve(in.phi_real, RVec(realify(vec(op))));
      Eigen::Index na = static_cast<Eigen::Index>(in.alpha_basis.size());
      CMat alpha = CMat::Zero(in.space.domain.ambient_rows,
                              in.space.domain.ambient_rows);
      CMat beta = CMat::Zero(in.space.domain.ambient_cols,
                             in.space.domain.ambient_cols);
      for (Eigen::Index s = 0; s < na; ++s) alpha += c(s) * in.alpha_basis[s];
      for (Eigen::Index s = na; s < c.size(); ++s)
        beta += c(s) * in.beta_basis[s - na];
      // Skewness holds by construction of the bases; enforce and record.
      res.witness.alpha = 0.5 * (alpha - alpha.adjoint());
      res.witness.beta = 0.5 * (beta - beta.adjoint());
      recon = unvec(derealify(in.phi_real * c), d, d);
      break;
    }
    case DerivationKind::InnerTriple: {
      RVec c = least_norm_solve(in.phi_real, RVec(realify(vec(op))));
      double cmax = c.size() > 0 ? c.cwiseAbs().maxCoeff() : 0.0;
      for (Eigen::Index s = 0; s < c.size(); ++s)
        if (std::abs(c(s)) > 1e-12 * std::max(1.0, cmax))
          res.witness.pairs.emplace_back(c(s) * in.pair_basis[s].first,
                                         in.pair_basis[s].second);
      recon = unvec(derealify(in.phi_real * c), d, d);
      break;
    }
    default:
      throw DimensionError("is_inner: not an inner space");
  }
  res.witness.residual = (recon - op).norm();
  if (res.witness.residual > 10 * tol * std::max(1.0, op.norm()))
    throw CertificationError("is_inner: witness reconstruction residual " +
                             std::to_string(res.witness.residual));
  return res;
}

// ---------------------------------------------------------------------------
// Generator realizations
// ---------------------------------------------------------------------------

/// The matrices t realizing a derivation space as delta = ad t, as in the
/// worked examples: {t in A : [t, p] = 0} for the idempotent constraint and
/// additionally t + t* in Z(A) for the self-adjoint one.  The quotient onto
/// operators has the center as kernel.
struct GeneratorRealization {
  MatrixSubspace space;       // complex for plain, real for self-adjoint
  MatrixSubspace quotient_kernel;  // center of A inside the realization
  Eigen::Index operator_dim = 0;   // rank of t -> ad t on the realization
};

inline GeneratorRealization generator_realization(const StarAlgebra& a,
                                                  const Projection* p,
                                                  bool self_adjoint,
                                                  double tol = 1e-9) {
  Eigen::Index d = a.dim();
  GeneratorRealization out;
  MatrixSubspace z = center(a);

  // Constraint rows over coordinates t in C^d.
  // [t, p] = 0 (complex-linear); t + t* in Z(A) (conjugate-linear).
  std::vector<CMat> lin_blocks, conj_blocks;
  if (p) {
    CMat rows = CMat::Zero(d, d);
    for (Eigen::Index l = 0; l < d; ++l) {
      CVec tp = a.prod[l] * p->coeffs;          // coords of e_l p
      CVec pt = CVec::Zero(d);
      for (Eigen::Index i = 0; i < d; ++i)
        pt += p->coeffs(i) * a.prod[i].col(l);  // coords of p e_l
      rows.col(l) = tp - pt;
    }
    lin_blocks.push_back(rows);
    conj_blocks.push_back(CMat::Zero(d, d));
  }
  if (self_adjoint) {
    // t + t* must lie in the center: complement projector applied to
    // coords(t) + star * conj(coords(t)).
    CMat zproj = CMat::Zero(d, d);
    if (z.dim() > 0) {
      CMat zc(d, z.dim());
      for (Eigen::Index r = 0; r < z.dim(); ++r)
        zc.col(r) = a.coords(z.basis[r], tol);
      Eigen::HouseholderQR<CMat> qr(zc);
      CMat q = qr.householderQ() * CMat::Identity(d, z.dim());
      zproj = q * q.adjoint();
    }
    CMat comp = CMat::Identity(d, d) - zproj;
    lin_blocks.push_back(comp);
    conj_blocks.push_back(comp * a.star);
  }

  std::vector<CMat> mats;
  if (self_adjoint) {
    std::vector<RMat> blocks;
    Eigen::Index total = 0;
    for (std::size_t b = 0; b < lin_blocks.size(); ++b) {
      blocks.push_back(realify_constraints(lin_blocks[b], conj_blocks[b]));
      total += blocks.back().rows();
    }
    RMat kernel;
    if (total > 0) {
      RMat rows(total, 2 * d);
      Eigen::Index at = 0;
      for (const auto& blk : blocks) {
        rows.middleRows(at, blk.rows()) = blk;
        at += blk.rows();
      }
      kernel = structural_kernel(rows);
    } else {
      kernel = RMat::Identity(2 * d, 2 * d);
    }
    for (Eigen::Index c = 0; c < kernel.cols(); ++c)
      mats.push_back(a.from_coords(derealify(kernel.col(c))));
    out.space = orthonormalize(mats, Field::Real, 0.0, a.ambient(), a.ambient());
  } else {
    CMat kernel;
    if (!lin_blocks.empty()) {
      Eigen::Index total = 0;
      for (const auto& blk : lin_blocks) total += blk.rows();
      CMat rows(total, d);
      Eigen::Index at = 0;
      for (const auto& blk : lin_blocks) {
        rows.middleRows(at, blk.rows()) = blk;
        at += blk.rows();
      }
      kernel = structural_kernel(rows);
    } else {
      kernel = CMat::Identity(d, d);
    }
    for (Eigen::Index c = 0; c < kernel.cols(); ++c)
      mats.push_back(a.from_coords(kernel.col(c)));
    out.space =
        orthonormalize(mats, Field::Complex, 0.0, a.ambient(), a.ambient());
  }

  // The quotient kernel is the center (certified by mutual membership in
  // tests); record it in the field of the realization.
  out.quotient_kernel = out.space.field == Field::Real
                            ? orthonormalize(z.basis, Field::Real, 0.0,
                                             a.ambient(), a.ambient())
                            : z;
  // Rank of t -> ad t over the realization.
  if (out.space.dim() > 0) {
    RMat cols(2 * d * d, out.space.dim());
    for (Eigen::Index s = 0; s < out.space.dim(); ++s)
      cols.col(s) = realify(vec(ad_operator(a.carrier, out.space.basis[s], tol)));
    out.operator_dim = numerical_rank(cols);
  }
  return out;
}

}  // namespace trolab
