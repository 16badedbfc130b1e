#pragma once

// Deterministic sample instances: seeded random matrices, unitaries, block
// *-algebras with idempotents, and random TROs.  Used by the test suites and
// the bundled corpus generator; all randomness flows through the fixed
// xorshift-free mt19937_64 stream below, so outputs are reproducible.

#include <cstdint>
#include <random>
#include <vector>

#include "trolab/star_algebra.hpp"
#include "trolab/tro.hpp"

namespace trolab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  // Box-Muller; avoids std::normal_distribution's unspecified sequences.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Complex cgaussian() { return Complex(gaussian(), gaussian()); }

  CMat cmatrix(Eigen::Index rows, Eigen::Index cols) {
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cgaussian();
    return m;
  }

  /// Haar-ish unitary: QR of a Gaussian matrix with phase-fixed diagonal.
  CMat unitary(Eigen::Index n) {
    CMat a = cmatrix(n, n);
    Eigen::HouseholderQR<CMat> qr(a);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
      Complex d = r(i, i);
      if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
    }
    return q;
  }

  Eigen::Index pick(Eigen::Index n) {
    return static_cast<Eigen::Index>(eng_() % static_cast<std::uint64_t>(n));
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline CMat matrix_unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  CMat e = CMat::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

inline std::vector<CMat> full_matrix_gens(Eigen::Index n) {
  // A single generator with distinct diagonal plus a cyclic shift generates
  // M_n; passing the unit matrices directly keeps closure immediate.
  std::vector<CMat> gens;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gens.push_back(matrix_unit(n, i, j));
  return gens;
}

/// Block algebra (+) M_{sizes[i]} with the given multiplicities, embedded in
/// M_n with n = sum sizes[i] * mult[i], conjugated by u when provided.
inline StarAlgebra block_algebra(const std::vector<Eigen::Index>& sizes,
                                 const std::vector<Eigen::Index>& mult,
                                 const CMat* u = nullptr, double tol = 1e-9) {
  Eigen::Index n = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) n += sizes[b] * mult[b];
  std::vector<CMat> gens;
  Eigen::Index off = 0;
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    Eigen::Index k = sizes[b], m = mult[b];
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) {
        CMat g = CMat::Zero(n, n);
        for (Eigen::Index c = 0; c < m; ++c)
          g(off + i * m + c, off + j * m + c) = 1.0;  // E_ij tensor I_m
        gens.push_back(g);
      }
    off += k * m;
  }
  if (u) {
    for (auto& g : gens) g = (*u) * g * u->adjoint();
  }
  return make_star_algebra(gens, tol);
}

struct AlgebraInstance {
  StarAlgebra algebra;
  Projection e;  // idempotent (projection when hermitian)
};

/// Random semisimple algebra in M_n (n <= 5) with a nontrivial idempotent
/// inside it; hermitian_e selects a projection instead of a generic
/// idempotent.
inline AlgebraInstance random_algebra_with_idempotent(Rng& rng, bool hermitian_e,
                                                      double tol = 1e-9) {
  // Catalog of block shapes (sizes; multiplicities) within n <= 5 that admit
  // a nontrivial idempotent.
  struct Shape {
    std::vector<Eigen::Index> sizes, mult;
  };
  static const std::vector<Shape> shapes = {
      {{2}, {1}},        {{3}, {1}},         {{2}, {2}},
      {{4}, {1}},        {{2, 3}, {1, 1}},   {{2, 2}, {1, 1}},
      {{5}, {1}},        {{3, 2}, {1, 1}},   {{2, 1}, {2, 1}},
      {{3, 1}, {1, 2}},  {{1, 1}, {2, 3}},   {{2, 1}, {1, 3}}};
  const Shape& sh = shapes[rng.pick(static_cast<Eigen::Index>(shapes.size()))];
  Eigen::Index n = 0;
  for (std::size_t b = 0; b < sh.sizes.size(); ++b)
    n += sh.sizes[b] * sh.mult[b];
  CMat u = rng.unitary(n);
  StarAlgebra a = block_algebra(sh.sizes, sh.mult, &u, tol);

  // Model idempotent: inside each block pick a rank 0 < r <= k pattern, with
  // an upper-triangular mixing part when a non-hermitian idempotent is
  // wanted.  Ensure at least one block has 0 < r < k.
  CMat e0 = CMat::Zero(n, n);
  bool nontrivial = false;
  Eigen::Index off = 0;
  for (std::size_t b = 0; b < sh.sizes.size(); ++b) {
    Eigen::Index k = sh.sizes[b], m = sh.mult[b];
    Eigen::Index r = rng.pick(k + 1);
    if (b + 1 == sh.sizes.size() && !nontrivial && r == k && k > 1) r = k - 1;
    if (r > 0 && r < k) nontrivial = true;
    CMat small = CMat::Zero(k, k);
    for (Eigen::Index i = 0; i < r; ++i) small(i, i) = 1.0;
    if (!hermitian_e && r > 0 && r < k)
      for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = r; j < k; ++j)
          small(i, j) = 0.5 * rng.cgaussian();
    // small is idempotent: [[I, B], [0, 0]].
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        if (small(i, j) != Complex(0, 0))
          for (Eigen::Index c = 0; c < m; ++c)
            e0(off + i * m + c, off + j * m + c) = small(i, j);
    off += k * m;
  }
  CMat e = u * e0 * u.adjoint();
  AlgebraInstance inst{std::move(a), {}};
  inst.e = hermitian_e ? certify_projection(inst.algebra, e, 1e-7)
                       : certify_idempotent(inst.algebra, e, 1e-7);
  return inst;
}

/// Random TRO in h x k: ternary closure of a few Gaussian generators.
inline TRO random_tro(Rng& rng, Eigen::Index h, Eigen::Index k,
                      int n_gens = 1, double tol = 1e-9) {
  std::vector<CMat> gens;
  for (int g = 0; g < n_gens; ++g) gens.push_back(rng.cmatrix(h, k));
  return make_tro(gens, h, k, tol);
}

/// The TRO p B(C^n) for the rank-r coordinate projection: row space cut to
/// the first r rows.
inline TRO corner_tro_pm(Eigen::Index n, Eigen::Index r, double tol = 1e-9) {
  std::vector<CMat> gens;
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gens.push_back(matrix_unit(n, i, j));
  return make_tro(gens, n, n, tol);
}

}  // namespace trolab
