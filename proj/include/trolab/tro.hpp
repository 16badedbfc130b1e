#pragma once

// Rectangular ternary rings of operators: triple products, nondegeneracy,
// linking algebras, corner embeddings and finite direct sums.

#include <optional>
#include <vector>

#include "trolab/star_algebra.hpp"

namespace trolab {

/// Subspace of h x k matrices closed under (x, y, z) -> x y* z.
struct TRO {
  MatrixSubspace carrier;  // complex field, h x k ambient
  bool nondegenerate = true;

  // Populated by direct_sum: block layout and basis ranges per summand.
  struct Summand {
    Eigen::Index row_off, col_off, rows, cols;
    Eigen::Index basis_begin, basis_count;
  };
  std::vector<Summand> summands;

  Eigen::Index h() const { return carrier.ambient_rows; }
  Eigen::Index k() const { return carrier.ambient_cols; }
  Eigen::Index dim() const { return carrier.dim(); }
  const CMat& basis(Eigen::Index i) const { return carrier.basis[i]; }
};

enum class TripleMode { Tro, Jordan };

/// x y* z, or the symmetrized (x y* z + z y* x) / 2.
inline CMat triple_product(const CMat& x, const CMat& y, const CMat& z,
                           TripleMode mode = TripleMode::Tro) {
  if (x.rows() != y.rows() || x.cols() != y.cols() || x.rows() != z.rows() ||
      x.cols() != z.cols())
    throw DimensionError("triple_product: shape mismatch");
  CMat t = x * y.adjoint() * z;
  if (mode == TripleMode::Jordan) t = 0.5 * (t + z * y.adjoint() * x);
  return t;
}

namespace detail {

inline bool check_ternary_closure(const MatrixSubspace& span, double tol) {
  for (const auto& x : span.basis)
    for (const auto& y : span.basis)
      for (const auto& z : span.basis) {
        CMat p = x * y.adjoint() * z;
        if (!membership(p, span, tol).member) return false;
      }
  return true;
}

inline bool check_nondegenerate(const MatrixSubspace& span) {
  if (span.dim() == 0) return true;
  std::vector<CMat> products;
  for (const auto& x : span.basis)
    for (const auto& y : span.basis)
      for (const auto& z : span.basis)
        products.push_back(x * y.adjoint() * z);
  return orthonormalize(products, Field::Complex, 0.0, span.ambient_rows,
                        span.ambient_cols, 1.0)
             .dim() == span.dim();
}

}  // namespace detail

/// Close the span of the generators under x y* z until stable; certify.
inline TRO make_tro(const std::vector<CMat>& gens, Eigen::Index h = -1,
                    Eigen::Index k = -1, double tol = 1e-9) {
  if (gens.empty() && (h < 0 || k < 0))
    throw DimensionError("make_tro: empty generators need an explicit shape");
  MatrixSubspace span = orthonormalize(gens, Field::Complex, 0.0, h, k);
  Eigen::Index cap = span.ambient_rows * span.ambient_cols;
  for (Eigen::Index round = 0; round <= cap + 1; ++round) {
    std::vector<CMat> extended = span.basis;
    for (const auto& x : span.basis)
      for (const auto& y : span.basis)
        for (const auto& z : span.basis)
          extended.push_back(x * y.adjoint() * z);
    MatrixSubspace next = orthonormalize(extended, Field::Complex, 0.0,
                                         span.ambient_rows, span.ambient_cols);
    if (next.dim() > cap)
      throw InstabilityError("make_tro: span exceeded ambient dimension");
    if (next.dim() == span.dim()) {
      span = std::move(next);
      if (!detail::check_ternary_closure(span, tol))
        throw CertificationError("make_tro: ternary closure certification failed");
      TRO x;
      x.nondegenerate = detail::check_nondegenerate(span);
      x.carrier = std::move(span);
      return x;
    }
    span = std::move(next);
  }
  throw InstabilityError("make_tro: span failed to stabilize");
}

/// View a *-algebra as a square TRO on the same carrier.
inline TRO as_tro(const StarAlgebra& a) {
  TRO x;
  x.carrier = a.carrier;
  x.nondegenerate = detail::check_nondegenerate(x.carrier);
  return x;
}

/// span X X* (h x h) and span X* X (k x k).
inline MatrixSubspace left_products(const TRO& x) {
  std::vector<CMat> mats;
  for (const auto& a : x.carrier.basis)
    for (const auto& b : x.carrier.basis) mats.push_back(a * b.adjoint());
  return orthonormalize(mats, Field::Complex, 0.0, x.h(), x.h(), 1.0);
}

inline MatrixSubspace right_products(const TRO& x) {
  std::vector<CMat> mats;
  for (const auto& a : x.carrier.basis)
    for (const auto& b : x.carrier.basis) mats.push_back(a.adjoint() * b);
  return orthonormalize(mats, Field::Complex, 0.0, x.k(), x.k(), 1.0);
}

// ---------------------------------------------------------------------------
// Linking algebra
// ---------------------------------------------------------------------------

/// Block *-algebra [span XX*, X; X*, span X*X] on C^{h+k}, optionally
/// unitized by the two block identities, with X embedded as the upper-right
/// corner.
struct LinkingAlgebra {
  StarAlgebra algebra;
  CMat left_corner;                  // e = [[1_h, 0], [0, 0]]
  std::optional<CVec> corner_coeffs; // expansion of e when e lies in the algebra
  MatrixSubspace left_block;         // span XX* (ambient h)
  MatrixSubspace right_block;        // span X*X (ambient k)
  Eigen::Index h = 0, k = 0;
  bool unitized = true;

  CMat embed(const CMat& x) const {
    CMat out = CMat::Zero(h + k, h + k);
    out.topRightCorner(h, k) = x;
    return out;
  }
  CMat top_right(const CMat& g) const { return g.topRightCorner(h, k); }
  CMat top_left(const CMat& g) const { return g.topLeftCorner(h, h); }
  CMat bottom_right(const CMat& g) const { return g.bottomRightCorner(k, k); }
};

inline LinkingAlgebra linking_algebra(const TRO& x, bool unitize = true,
                                      double tol = 1e-9) {
  LinkingAlgebra link;
  link.h = x.h();
  link.k = x.k();
  link.unitized = unitize;
  link.left_block = left_products(x);
  link.right_block = right_products(x);
  Eigen::Index n = link.h + link.k;

  std::vector<CMat> gens;
  for (const auto& a : link.left_block.basis) {
    CMat g = CMat::Zero(n, n);
    g.topLeftCorner(link.h, link.h) = a;
    gens.push_back(g);
  }
  for (const auto& v : x.carrier.basis) gens.push_back(link.embed(v));
  for (const auto& v : x.carrier.basis) gens.push_back(link.embed(v).adjoint());
  for (const auto& b : link.right_block.basis) {
    CMat g = CMat::Zero(n, n);
    g.bottomRightCorner(link.k, link.k) = b;
    gens.push_back(g);
  }
  if (unitize) {
    CMat eh = CMat::Zero(n, n), ek = CMat::Zero(n, n);
    eh.topLeftCorner(link.h, link.h).setIdentity();
    ek.bottomRightCorner(link.k, link.k).setIdentity();
    gens.push_back(eh);
    gens.push_back(ek);
  }

  // The block span is already closed; make_star_algebra certifies and must
  // stabilize without growth.
  Eigen::Index pre_dim =
      orthonormalize(gens, Field::Complex, 0.0, n, n).dim();
  link.algebra = make_star_algebra(gens, tol);
  if (link.algebra.dim() != pre_dim)
    throw CertificationError("linking_algebra: block span was not closed");

  link.left_corner = CMat::Zero(n, n);
  link.left_corner.topLeftCorner(link.h, link.h).setIdentity();
  Membership me = membership(link.left_corner, link.algebra.carrier, tol);
  if (me.member) link.corner_coeffs = me.coeffs;
  return link;
}

/// Block-diagonal direct sum; records the summand layout for fiber
/// restriction.
inline TRO direct_sum(const std::vector<TRO>& parts) {
  if (parts.empty()) throw DimensionError("direct_sum: empty list");
  Eigen::Index h = 0, k = 0;
  for (const auto& p : parts) {
    h += p.h();
    k += p.k();
  }
  TRO out;
  out.carrier.ambient_rows = h;
  out.carrier.ambient_cols = k;
  out.carrier.field = Field::Complex;
  Eigen::Index ro = 0, co = 0;
  bool nondeg = true;
  for (const auto& p : parts) {
    TRO::Summand s{ro, co, p.h(), p.k(),
                   static_cast<Eigen::Index>(out.carrier.basis.size()), p.dim()};
    for (const auto& b : p.carrier.basis) {
      CMat big = CMat::Zero(h, k);
      big.block(ro, co, p.h(), p.k()) = b;
      out.carrier.basis.push_back(big);
    }
    out.summands.push_back(s);
    nondeg = nondeg && p.nondegenerate;
    ro += p.h();
    co += p.k();
  }
  out.nondegenerate = nondeg;
  return out;
}

}  // namespace trolab
