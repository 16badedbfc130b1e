#pragma once

// Finite-dimensional *-algebras of square complex matrices: closure
// certification, structure constants, center, commutant, corners, and the
// center-plus-commutators decomposition of a semisimple algebra.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "trolab/linalg.hpp"

namespace trolab {

struct StarAlgebra {
  MatrixSubspace carrier;  // complex field, n x n ambient
  bool unital = false;
  CVec identity_coeffs;    // expansion of the ambient identity, when unital
  // prod[i](m, j) = <e_i e_j, e_m>: column j holds the coordinates of e_i e_j.
  std::vector<CMat> prod;
  // star(m, j) = <e_j*, e_m>: column j holds the coordinates of e_j*.
  CMat star;

  Eigen::Index dim() const { return carrier.dim(); }
  Eigen::Index ambient() const { return carrier.ambient_rows; }
  const CMat& basis(Eigen::Index i) const { return carrier.basis[i]; }

  CVec coords(const CMat& v, double tol = 1e-9) const {
    Membership m = membership(v, carrier, tol);
    if (!m.member)
      throw CertificationError("element not in algebra (residual " +
                               std::to_string(m.residual) + ")");
    return m.coeffs;
  }

  CMat from_coords(const CVec& c) const { return carrier.from_coeffs(c); }

  /// Coordinates of the product of two coordinate vectors.
  CVec product_coords(const CVec& a, const CVec& b) const {
    CVec out = CVec::Zero(dim());
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (a(i) != Complex(0, 0)) out += a(i) * (prod[i] * b);
    return out;
  }

  /// Coordinates of the adjoint of a coordinate vector.
  CVec star_coords(const CVec& a) const { return star * a.conjugate(); }

  CMat identity() const {
    return CMat::Identity(ambient(), ambient());
  }
};

namespace detail {

/// Fill structure constants and adjoint coefficients, certifying product and
/// adjoint closure of the span.
inline void certify_tables(StarAlgebra& a, double tol) {
  Eigen::Index d = a.dim();
  a.prod.assign(d, CMat::Zero(d, d));
  a.star = CMat::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    CMat adj = a.basis(j).adjoint();
    Membership ms = membership(adj, a.carrier, tol);
    if (!ms.member)
      throw CertificationError("adjoint closure failed at basis " +
                               std::to_string(j) + " (residual " +
                               std::to_string(ms.residual) + ")");
    a.star.col(j) = ms.coeffs;
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      CMat p = a.basis(i) * a.basis(j);
      Membership mp = membership(p, a.carrier, tol);
      if (!mp.member)
        throw CertificationError("product closure failed at pair (" +
                                 std::to_string(i) + ", " + std::to_string(j) +
                                 ") (residual " + std::to_string(mp.residual) +
                                 ")");
      a.prod[i].col(j) = mp.coeffs;
    }
  }
  Membership mi = membership(a.identity(), a.carrier, tol);
  a.unital = mi.member;
  if (a.unital) a.identity_coeffs = mi.coeffs;
}

}  // namespace detail

/// Certify an already-closed span as a *-algebra (no growth allowed).
inline StarAlgebra certify_star_algebra(MatrixSubspace span, double tol = 1e-9) {
  if (span.ambient_rows != span.ambient_cols)
    throw DimensionError("star algebra carrier must be square");
  if (span.field != Field::Complex)
    throw DimensionError("star algebra carrier must be a complex subspace");
  StarAlgebra a;
  a.carrier = std::move(span);
  detail::certify_tables(a, tol);
  return a;
}

/// Close the generators under products and adjoints until the span
/// stabilizes, then certify.
inline StarAlgebra make_star_algebra(const std::vector<CMat>& gens,
                                     double tol = 1e-9) {
  if (gens.empty()) throw DimensionError("make_star_algebra: no generators");
  Eigen::Index n = gens[0].rows();
  if (gens[0].cols() != n)
    throw DimensionError("make_star_algebra: generators must be square");
  MatrixSubspace span = orthonormalize(gens, Field::Complex, 0.0, n, n);
  for (Eigen::Index round = 0; round <= n * n + 1; ++round) {
    std::vector<CMat> extended = span.basis;
    for (const auto& b : span.basis) extended.push_back(b.adjoint());
    for (const auto& x : span.basis)
      for (const auto& y : span.basis) extended.push_back(x * y);
    MatrixSubspace next = orthonormalize(extended, Field::Complex, 0.0, n, n);
    if (next.dim() > n * n)
      throw InstabilityError("make_star_algebra: span exceeded ambient dim");
    if (next.dim() == span.dim()) {
      span = std::move(next);
      return certify_star_algebra(std::move(span), tol);
    }
    span = std::move(next);
  }
  throw InstabilityError("make_star_algebra: span failed to stabilize");
}

// ---------------------------------------------------------------------------
// Center, commutant, corners
// ---------------------------------------------------------------------------

/// {z in A : [z, e_i] = 0 for all basis e_i}, as a null space in coordinates.
inline MatrixSubspace center(const StarAlgebra& a) {
  Eigen::Index d = a.dim();
  MatrixSubspace out;
  out.ambient_rows = a.ambient();
  out.ambient_cols = a.ambient();
  out.field = Field::Complex;
  if (d == 0) return out;
  CMat rows(d * d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index k = 0; k < d; ++k)
      for (Eigen::Index m = 0; m < d; ++m)
        rows(i * d + k, m) = a.prod[m](k, i) - a.prod[i](k, m);
  CMat kernel = structural_kernel(rows);
  for (Eigen::Index c = 0; c < kernel.cols(); ++c)
    out.basis.push_back(a.from_coords(kernel.col(c)));
  return out;
}

/// {t in M_n : t s = s t for every s in the span}; certified as a unital
/// *-algebra (the spans this is applied to are *-closed).
inline StarAlgebra commutant(const MatrixSubspace& s, Eigen::Index ambient,
                             double tol = 1e-9) {
  Eigen::Index n = ambient;
  std::vector<CMat> mats;
  if (s.dim() == 0) {
    // Commutant of the zero space is everything.
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        CMat e = CMat::Zero(n, n);
        e(i, j) = 1.0;
        mats.push_back(e);
      }
  } else {
    if (s.ambient_rows != n || s.ambient_cols != n)
      throw DimensionError("commutant: ambient mismatch");
    CMat rows = CMat::Zero(s.dim() * n * n, n * n);
    for (Eigen::Index b = 0; b < s.dim(); ++b) {
      const CMat& sb = s.basis[b];
      // vec([t, sb]) = (sb^T kron I - I kron sb) vec(t)
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) {
          Eigen::Index row = b * n * n + c * n + r;
          for (Eigen::Index k = 0; k < n; ++k) {
            rows(row, k * n + r) += sb(k, c);   // (t sb)_{rc}
            rows(row, c * n + k) -= sb(r, k);   // -(sb t)_{rc}
          }
        }
    }
    CMat kernel = structural_kernel(rows);
    for (Eigen::Index c = 0; c < kernel.cols(); ++c)
      mats.push_back(unvec(kernel.col(c), n, n));
  }
  return certify_star_algebra(orthonormalize(mats, Field::Complex, 0.0, n, n),
                              tol);
}

inline StarAlgebra bicommutant(const MatrixSubspace& s, Eigen::Index ambient,
                               double tol = 1e-9) {
  return commutant(commutant(s, ambient, tol).carrier, ambient, tol);
}

/// Idempotent (optionally self-adjoint) certified inside an algebra.
struct Projection {
  CMat matrix;
  CVec coeffs;     // expansion in the algebra basis
  bool hermitian = false;
};

inline Projection certify_idempotent(const StarAlgebra& a, const CMat& e,
                                     double tol = 1e-9) {
  if (e.rows() != a.ambient() || e.cols() != a.ambient())
    throw DimensionError("certify_idempotent: shape mismatch");
  if (hs_norm(e * e - e) > tol * std::max(1.0, hs_norm(e)))
    throw CertificationError("not idempotent within tolerance");
  Projection p;
  p.matrix = e;
  p.coeffs = a.coords(e, tol);
  p.hermitian = hs_norm(e - e.adjoint()) <= tol * std::max(1.0, hs_norm(e));
  return p;
}

inline Projection certify_projection(const StarAlgebra& a, const CMat& e,
                                     double tol = 1e-9) {
  Projection p = certify_idempotent(a, e, tol);
  if (!p.hermitian)
    throw CertificationError("not self-adjoint within tolerance");
  return p;
}

/// Orthonormal basis of p A q.
inline MatrixSubspace corner(const Projection& p, const StarAlgebra& a,
                             const Projection& q) {
  std::vector<CMat> mats;
  mats.reserve(a.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    mats.push_back(p.matrix * a.basis(i) * q.matrix);
  return orthonormalize(mats, Field::Complex, 0.0, a.ambient(), a.ambient(), 1.0);
}

/// u = b + ic with b, c self-adjoint.
inline std::pair<CMat, CMat> split_self_adjoint(const CMat& u) {
  if (u.rows() != u.cols())
    throw DimensionError("split_self_adjoint: matrix must be square");
  CMat b = 0.5 * (u + u.adjoint());
  CMat c = (u - u.adjoint()) / Complex(0, 2);
  return {b, c};
}

// ---------------------------------------------------------------------------
// Central (Wedderburn) decomposition
// ---------------------------------------------------------------------------

/// One simple block of a semisimple algebra: M p = M_k tensor I_m on the
/// range of the minimal central projection p.
struct CentralBlock {
  CMat projection;            // minimal central projection, n x n
  Eigen::Index block_dim = 0;     // k
  Eigen::Index multiplicity = 0;  // m
  std::vector<CMat> units;    // matrix units e_{jl} as n x n, index j*k + l

  CMat to_small(const CMat& x) const {
    CMat out(block_dim, block_dim);
    for (Eigen::Index j = 0; j < block_dim; ++j)
      for (Eigen::Index l = 0; l < block_dim; ++l)
        out(j, l) = (units[l * block_dim + j] * x).trace() /
                    static_cast<double>(multiplicity);
    return out;
  }

  CMat from_small(const CMat& small) const {
    CMat out = CMat::Zero(projection.rows(), projection.cols());
    for (Eigen::Index j = 0; j < block_dim; ++j)
      for (Eigen::Index l = 0; l < block_dim; ++l)
        out += small(j, l) * units[j * block_dim + l];
    return out;
  }
};

namespace detail {

/// Split a list of orthonormal-column subspaces by the eigenspaces of
/// hermitian elements of the given matrices, compressed to each subspace.
inline bool refine_by_eigenspaces(std::vector<CMat>& spaces, const CMat& h,
                                  double cluster_tol) {
  bool split_any = false;
  std::vector<CMat> next;
  for (const auto& q : spaces) {
    CMat compressed = q.adjoint() * h * q;
    compressed = 0.5 * (compressed + compressed.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(compressed);
    const RVec& ev = es.eigenvalues();
    double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= ev.size(); ++i) {
      if (i == ev.size() || ev(i) - ev(i - 1) > cluster_tol * scale) {
        clusters.emplace_back(start, i - start);
        start = i;
      }
    }
    if (clusters.size() == 1) {
      next.push_back(q);
      continue;
    }
    split_any = true;
    for (auto [s, len] : clusters)
      next.push_back(q * es.eigenvectors().middleCols(s, len));
  }
  spaces = std::move(next);
  return split_any;
}

inline std::vector<CMat> hermitian_generators(const MatrixSubspace& s) {
  std::vector<CMat> out;
  for (const auto& b : s.basis) {
    out.push_back(0.5 * (b + b.adjoint()));
    out.push_back((b - b.adjoint()) / Complex(0, 2));
  }
  return out;
}

}  // namespace detail

/// Decompose a certified unital *-algebra into its simple blocks with matrix
/// units; throws CertificationError when the numerical structure checks fail.
inline std::vector<CentralBlock> central_decomposition(const StarAlgebra& m,
                                                       double tol = 1e-9) {
  if (!m.unital)
    throw HypothesisError("central_decomposition: algebra must be unital");
  Eigen::Index n = m.ambient();
  double cluster_tol = 1e-7;

  MatrixSubspace z = center(m);
  // Common eigenspaces of the (commuting) hermitian center generators.
  std::vector<CMat> central_spaces = {CMat::Identity(n, n)};
  for (const auto& h : detail::hermitian_generators(z))
    detail::refine_by_eigenspaces(central_spaces, h, cluster_tol);
  if (static_cast<Eigen::Index>(central_spaces.size()) != z.dim())
    throw CertificationError(
        "central_decomposition: block count does not match center dimension");

  std::vector<CMat> block_herms = detail::hermitian_generators(m.carrier);
  std::vector<CentralBlock> blocks;
  for (const auto& q : central_spaces) {
    CentralBlock blk;
    blk.projection = q * q.adjoint();
    Membership pz = membership(blk.projection, z, tol * 10);
    if (!pz.member)
      throw CertificationError(
          "central_decomposition: central projection not in center (residual " +
          std::to_string(pz.residual) + ")");

    // Block algebra dimension k^2.
    std::vector<CMat> block_elems;
    for (Eigen::Index i = 0; i < m.dim(); ++i)
      block_elems.push_back(m.basis(i) * blk.projection);
    MatrixSubspace block_span =
        orthonormalize(block_elems, Field::Complex, 0.0, n, n, 1.0);
    auto k = static_cast<Eigen::Index>(
        std::llround(std::sqrt(static_cast<double>(block_span.dim()))));
    if (k * k != block_span.dim())
      throw CertificationError(
          "central_decomposition: block dimension is not a square");
    Eigen::Index d_block = q.cols();
    if (d_block % k != 0)
      throw CertificationError(
          "central_decomposition: block rank not divisible by k");
    blk.block_dim = k;
    blk.multiplicity = d_block / k;

    // Minimal projections inside the block by eigenspace refinement.
    std::vector<CMat> sub = {q};
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& h : block_herms)
        if (detail::refine_by_eigenspaces(sub, h, cluster_tol)) changed = true;
    }
    if (static_cast<Eigen::Index>(sub.size()) != k)
      throw CertificationError(
          "central_decomposition: minimal projection count mismatch");
    for (const auto& s : sub) {
      if (s.cols() != blk.multiplicity)
        throw CertificationError(
            "central_decomposition: multiplicity mismatch across projections");
      // Minimality: the compressed corner must be scalar.
      std::vector<CMat> corner_elems;
      CMat sp = s * s.adjoint();
      for (Eigen::Index i = 0; i < m.dim(); ++i)
        corner_elems.push_back(sp * m.basis(i) * sp);
      if (orthonormalize(corner_elems, Field::Complex, 0.0, n, n, 1.0).dim() != 1)
        throw CertificationError(
            "central_decomposition: projection not minimal");
    }

    // Matrix units: partial isometries out of the first minimal projection.
    std::vector<CMat> row_units(k);  // e_{1l}
    CMat q1 = sub[0] * sub[0].adjoint();
    row_units[0] = q1;
    for (Eigen::Index l = 1; l < k; ++l) {
      CMat ql = sub[l] * sub[l].adjoint();
      std::vector<CMat> corner_elems;
      for (Eigen::Index i = 0; i < m.dim(); ++i)
        corner_elems.push_back(q1 * m.basis(i) * ql);
      MatrixSubspace c1l = orthonormalize(corner_elems, Field::Complex, 0.0, n, n, 1.0);
      if (c1l.dim() != 1)
        throw CertificationError(
            "central_decomposition: corner between minimal projections not "
            "one-dimensional");
      CMat w = c1l.basis[0];
      double lambda = (w * w.adjoint()).trace().real() /
                      static_cast<double>(blk.multiplicity);
      if (lambda <= 0)
        throw CertificationError("central_decomposition: degenerate isometry");
      CMat v = w / std::sqrt(lambda);
      if (hs_norm(v * v.adjoint() - q1) > 1e-7 * std::max(1.0, hs_norm(q1)) ||
          hs_norm(v.adjoint() * v - ql) > 1e-7 * std::max(1.0, hs_norm(ql)))
        throw CertificationError(
            "central_decomposition: partial isometry certification failed");
      row_units[l] = v;
    }
    blk.units.assign(k * k, CMat());
    for (Eigen::Index j = 0; j < k; ++j)
      for (Eigen::Index l = 0; l < k; ++l)
        blk.units[j * k + l] = row_units[j].adjoint() * row_units[l];
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

// ---------------------------------------------------------------------------
// a = z' + sum of commutators
// ---------------------------------------------------------------------------

namespace detail {

/// Similarity P with P A P^{-1} of zero diagonal, for traceless A.
inline void zero_diagonal_similarity(const CMat& a, CMat& p, CMat& p_inv) {
  Eigen::Index k = a.rows();
  p = CMat::Identity(k, k);
  p_inv = CMat::Identity(k, k);
  if (k <= 1) return;
  double scale = hs_norm(a);
  if (scale <= 0) return;
  if (a.diagonal().cwiseAbs().maxCoeff() <= 1e-14 * scale) return;

  // Pick v maximizing the angle between v and A v.
  CVec best_v;
  double best_score = -1.0;
  auto consider = [&](const CVec& v) {
    CVec av = a * v;
    double nav = av.norm();
    if (nav <= 1e-14 * scale) return;
    Complex overlap = v.dot(av);  // conj(v) . av
    double ortho = std::sqrt(std::max(0.0, nav * nav - std::norm(overlap)));
    double score = ortho / nav;
    if (score > best_score + 1e-15) {
      best_score = score;
      best_v = v;
    }
  };
  for (Eigen::Index i = 0; i < k; ++i) consider(CVec::Unit(k, i));
  if (best_score < 1e-8) {
    // A acts diagonally on the standard basis; mix two coordinates with
    // distinct diagonal entries.
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = i + 1; j < k; ++j) {
        CVec v = (CVec::Unit(k, i) + CVec::Unit(k, j)) / std::sqrt(2.0);
        consider(v);
      }
  }
  if (best_score < 1e-10)
    throw CertificationError("zero_diagonal_similarity: no independent vector");

  CVec v = best_v.normalized();
  CVec w = (a * v).normalized();
  CMat pair(k, 2);
  pair.col(0) = v;
  pair.col(1) = w;
  Eigen::HouseholderQR<CMat> qr(pair);
  CMat qfull = qr.householderQ();
  CMat c(k, k);
  c.col(0) = v;
  c.col(1) = w;
  c.rightCols(k - 2) = qfull.rightCols(k - 2);
  CMat c_inv = c.inverse();
  CMat b = c_inv * a * c;
  b(0, 0) = 0.0;  // exact by construction, clear roundoff

  CMat p_sub, p_sub_inv;
  zero_diagonal_similarity(b.bottomRightCorner(k - 1, k - 1), p_sub, p_sub_inv);
  CMat grow = CMat::Identity(k, k), grow_inv = CMat::Identity(k, k);
  grow.bottomRightCorner(k - 1, k - 1) = p_sub;
  grow_inv.bottomRightCorner(k - 1, k - 1) = p_sub_inv;
  p = grow * c_inv;
  p_inv = c * grow_inv;
}

}  // namespace detail

struct CommutatorDecomposition {
  CMat central;                                // z' in Z(m)
  std::vector<std::pair<CMat, CMat>> pairs;    // (u_j, v_j), one per block
  double residual = 0.0;  // || a - z' - sum [u_j, v_j] ||_HS
};

/// Write a = z' + sum_j [u_j, v_j] with z' central and u_j, v_j in m.
/// Per central block the central part is the normalized block trace; the
/// traceless remainder becomes a single commutator via a zero-diagonal
/// similarity and the distinct-diagonal solve v_ij = r_ij / (d_i - d_j).
inline CommutatorDecomposition commutator_decompose(const CMat& a_in,
                                                    const StarAlgebra& m,
                                                    double tol = 1e-9) {
  CVec coords = m.coords(a_in, tol);  // throws when a_in is not in m
  (void)coords;
  auto blocks = central_decomposition(m, tol);
  CommutatorDecomposition out;
  Eigen::Index n = m.ambient();
  out.central = CMat::Zero(n, n);
  CMat recon = CMat::Zero(n, n);
  double scale = std::max(1.0, hs_norm(a_in));
  for (const auto& blk : blocks) {
    CMat ap = a_in * blk.projection;
    double dblk = blk.projection.trace().real();
    Complex mean = ap.trace() / dblk;
    CMat zpart = mean * blk.projection;
    out.central += zpart;
    CMat r = blk.to_small(ap - zpart);
    if (hs_norm(r) <= tol * scale) continue;
    Eigen::Index k = blk.block_dim;
    CMat p, p_inv;
    detail::zero_diagonal_similarity(r, p, p_inv);
    CMat z = p * r * p_inv;
    RVec dvals(k);
    for (Eigen::Index i = 0; i < k; ++i) dvals(i) = static_cast<double>(i + 1);
    CMat vtil = CMat::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        if (i != j) vtil(i, j) = z(i, j) / (dvals(i) - dvals(j));
    CMat u_small = p_inv * dvals.asDiagonal().toDenseMatrix().cast<Complex>() * p;
    CMat v_small = p_inv * vtil * p;
    out.pairs.emplace_back(blk.from_small(u_small), blk.from_small(v_small));
  }
  for (const auto& [u, v] : out.pairs) recon += u * v - v * u;
  out.residual = hs_norm(a_in - out.central - recon);
  if (out.residual > 10 * tol * scale)
    throw CertificationError("commutator_decompose: reconstruction residual " +
                             std::to_string(out.residual));
  return out;
}

}  // namespace trolab
