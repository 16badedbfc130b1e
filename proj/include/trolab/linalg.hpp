#pragma once

// Dense complex matrix arithmetic, Hilbert-Schmidt geometry, rank-revealing
// null spaces and realification of conjugate-linear constraints.  Everything
// downstream (algebras, TROs, derivation solvers) is built on these.

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace trolab {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

enum class Field { Real, Complex };

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerically certified precondition failed (closure, idempotency, ...).
struct CertificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Span iteration failed to stabilize; signals numerical instability.
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input does not satisfy the hypothesis of the requested pipeline.
struct HypothesisError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Hilbert-Schmidt geometry
// ---------------------------------------------------------------------------

/// <a, b> = trace(b* a); linear in a, conjugate-linear in b.
inline Complex hs_inner(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("hs_inner: shape mismatch");
  return (b.adjoint() * a).trace();
}

inline double hs_norm(const CMat& a) { return a.norm(); }

/// Largest singular value.
inline double op_norm(const CMat& a) {
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<CMat>(a).singularValues()(0);
}

/// Cheap upper bound for the largest singular value (Frobenius norm).
template <typename Mat>
double op_norm_bound(const Mat& a) {
  return a.norm();
}

inline CVec vec(const CMat& m) {
  return Eigen::Map<const CVec>(m.data(), m.size());
}

inline CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: size mismatch");
  return Eigen::Map<const CMat>(v.data(), rows, cols);
}

/// [Re; Im] encoding of a complex vector.
inline RVec realify(const CVec& v) {
  RVec r(2 * v.size());
  r.head(v.size()) = v.real();
  r.tail(v.size()) = v.imag();
  return r;
}

inline CVec derealify(const RVec& r) {
  if (r.size() % 2 != 0) throw DimensionError("derealify: odd length");
  Eigen::Index n = r.size() / 2;
  CVec v(n);
  v.real() = r.head(n);
  v.imag() = r.tail(n);
  return v;
}

// ---------------------------------------------------------------------------
// Realification of linear maps
// ---------------------------------------------------------------------------

/// Real encoding of a real-linear map on realified coordinates.
struct RealifiedSystem {
  Eigen::Index complex_dim = 0;  // the map acts on C^complex_dim
  RMat real_matrix;              // 2m x 2n
};

/// Encode a complex-linear map M as [[Re M, -Im M], [Im M, Re M]].
inline RealifiedSystem realify_linear_map(const CMat& m) {
  RealifiedSystem s;
  s.complex_dim = m.cols();
  s.real_matrix.resize(2 * m.rows(), 2 * m.cols());
  s.real_matrix.topLeftCorner(m.rows(), m.cols()) = m.real();
  s.real_matrix.topRightCorner(m.rows(), m.cols()) = -m.imag();
  s.real_matrix.bottomLeftCorner(m.rows(), m.cols()) = m.imag();
  s.real_matrix.bottomRightCorner(m.rows(), m.cols()) = m.real();
  return s;
}

inline CMat derealify_linear_map(const RealifiedSystem& s) {
  Eigen::Index m = s.real_matrix.rows() / 2, n = s.real_matrix.cols() / 2;
  CMat out(m, n);
  out.real() = 0.5 * (s.real_matrix.topLeftCorner(m, n) +
                      s.real_matrix.bottomRightCorner(m, n));
  out.imag() = 0.5 * (s.real_matrix.bottomLeftCorner(m, n) -
                      s.real_matrix.topRightCorner(m, n));
  return out;
}

/// Realify a chunk of complex constraints  sum_j A_ij t_j + B_ij conj(t_j) = 0
/// over complex unknowns t into real rows over [Re t; Im t].
inline RMat realify_constraints(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("realify_constraints: shape mismatch");
  Eigen::Index m = a.rows(), n = a.cols();
  RMat r(2 * m, 2 * n);
  r.topLeftCorner(m, n) = a.real() + b.real();
  r.topRightCorner(m, n) = -a.imag() + b.imag();
  r.bottomLeftCorner(m, n) = a.imag() + b.imag();
  r.bottomRightCorner(m, n) = a.real() - b.real();
  return r;
}

// ---------------------------------------------------------------------------
// Deterministic basis canonicalization
// ---------------------------------------------------------------------------

namespace detail {

inline void canonicalize_column(Eigen::Ref<CVec> v) {
  double mx = v.cwiseAbs().maxCoeff();
  if (mx <= 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-10 * mx) {
      Complex phase = std::conj(v(i)) / std::abs(v(i));
      v *= phase;
      return;
    }
  }
}

inline void canonicalize_column(Eigen::Ref<RVec> v) {
  double mx = v.cwiseAbs().maxCoeff();
  if (mx <= 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-10 * mx) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

template <typename Mat>
void canonicalize_columns(Mat& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) canonicalize_column(m.col(c));
}

inline double auto_rank_tol(double smax, Eigen::Index rows, Eigen::Index cols) {
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(rows, cols)) * smax;
}

// Rank tolerance for systems whose entries are themselves computed (products,
// projections, earlier kernels): their noise floor sits a couple of orders
// above one ulp, while the structural singular values of certified systems
// are many orders higher still.
constexpr double kComputedDataSlack = 256.0;

inline double computed_rank_tol(double scale, Eigen::Index rows,
                                Eigen::Index cols) {
  return kComputedDataSlack * auto_rank_tol(scale, rows, cols);
}

// SVD with full V (kernel extraction).  Always Jacobi: it is accurate to
// machine precision, and the dispatch in null_space_matrix routes anything
// too large for it to the pivoted-QR kernel instead.  (BDCSVD is avoided
// here: its deflation leaves ~1e-10 errors in kernel vectors, which staged
// refinement then misreads as rank.)
template <typename Mat>
struct SvdKernelResult {
  RVec sv;
  Mat v;  // full right singular vectors
};

template <typename Mat>
SvdKernelResult<Mat> svd_full_v(const Mat& m) {
  SvdKernelResult<Mat> out;
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  out.sv = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

constexpr Eigen::Index kJacobiKernelLimit = 150 * 150;

/// Orthonormal kernel basis via column-pivoted QR; machine-precision
/// accurate for the well-gapped systems this library assembles, and much
/// faster than a Jacobi SVD on large chunks.
template <typename Mat>
Mat kernel_via_cpqr(const Mat& m, double tol) {
  Eigen::Index rows = m.rows(), n = m.cols();
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  Eigen::Index maxr = std::min(rows, n);
  Mat rmat = qr.matrixQR().topRows(maxr);
  double r00 = maxr > 0 ? std::abs(rmat(0, 0)) : 0.0;
  double t = tol > 0.0 ? tol : auto_rank_tol(r00, rows, n);
  Eigen::Index rank = 0;
  while (rank < maxr && std::abs(rmat(rank, rank)) > t) ++rank;
  if (rank == n) return Mat(n, 0);
  Mat kperm = Mat::Zero(n, n - rank);
  if (rank > 0) {
    Mat r12 = rmat.block(0, rank, rank, n - rank);
    kperm.topRows(rank) =
        -rmat.topLeftCorner(rank, rank)
             .template triangularView<Eigen::Upper>()
             .solve(r12);
  }
  kperm.bottomRows(n - rank).setIdentity();
  Mat k = qr.colsPermutation() * kperm;
  {
    Eigen::HouseholderQR<Mat> oqr(k);
    k = oqr.householderQ() * Mat::Identity(n, n - rank);
  }
  // One step of iterative refinement: the raw kernel is accurate only to
  // eps * cond(R11), which staged refinement would later misread as rank.
  // Re-solving the residual through the same factorization reaches eps.
  if (rank > 0) {
    for (int pass = 0; pass < 2; ++pass) {
      Mat resid = m * k;
      if (resid.norm() <= 1e-15 * std::max(1.0, m.norm())) break;
      Mat qtr = (qr.householderQ().adjoint() * resid).topRows(rank);
      Mat cperm = Mat::Zero(n, k.cols());
      cperm.topRows(rank) = rmat.topLeftCorner(rank, rank)
                                .template triangularView<Eigen::Upper>()
                                .solve(qtr);
      k -= Mat(qr.colsPermutation() * cperm);
      Eigen::HouseholderQR<Mat> oqr(k);
      k = oqr.householderQ() * Mat::Identity(n, n - rank);
    }
  }
  return k;
}

template <typename Mat>
struct SvdRangeResult {
  RVec sv;
  Mat u;  // thin left singular vectors
};

template <typename Mat>
SvdRangeResult<Mat> svd_thin_u(const Mat& m) {
  SvdRangeResult<Mat> out;
  if (m.rows() * m.cols() <= 64 * 64) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
    out.sv = svd.singularValues();
    out.u = svd.matrixU();
  } else {
    Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU);
    out.sv = svd.singularValues();
    out.u = svd.matrixU();
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Null spaces
// ---------------------------------------------------------------------------

/// Orthonormal kernel basis as matrix columns, ordered by the underlying
/// factorization, each column phase/sign normalized.  tol = 0 selects the
/// standard rank heuristic eps * max(rows, cols) * sigma_max.  Small systems
/// use a Jacobi SVD (singular-value order); large systems a column-pivoted
/// QR kernel (pivot order), both deterministic.
template <typename Mat>
Mat null_space_matrix(const Mat& m, double tol = 0.0) {
  if (m.rows() == 0 || m.cols() == 0)
    throw DimensionError("null_space: empty matrix");
  if (tol < 0.0) throw DimensionError("null_space: negative tolerance");
  if (m.rows() * m.cols() > detail::kJacobiKernelLimit) {
    Mat kernel = detail::kernel_via_cpqr(m, tol);
    detail::canonicalize_columns(kernel);
    return kernel;
  }
  auto svd = detail::svd_full_v(m);
  double smax = svd.sv.size() > 0 ? svd.sv(0) : 0.0;
  double t = tol > 0.0 ? tol : detail::auto_rank_tol(smax, m.rows(), m.cols());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.sv.size(); ++i)
    if (svd.sv(i) > t) ++rank;
  Mat kernel = svd.v.rightCols(m.cols() - rank);
  detail::canonicalize_columns(kernel);
  return kernel;
}

template <typename Mat>
std::vector<Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1>> null_space(
    const Mat& m, double tol = 0.0) {
  Mat k = null_space_matrix(m, tol);
  std::vector<Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1>> out;
  out.reserve(k.cols());
  for (Eigen::Index c = 0; c < k.cols(); ++c) out.push_back(k.col(c));
  return out;
}

/// Kernel of a constraint system assembled from orthonormal-basis data: the
/// rank tolerance references max(1, sigma_max), so an all-noise system reads
/// as rank zero instead of full rank.
template <typename Mat>
Mat structural_kernel(const Mat& m, double scale_floor = 1.0) {
  if (m.rows() == 0 || m.cols() == 0)
    throw DimensionError("structural_kernel: empty matrix");
  double smax = std::max(scale_floor, op_norm_bound(m));
  return null_space_matrix(m,
                           detail::computed_rank_tol(smax, m.rows(), m.cols()));
}

template <typename Mat>
Eigen::Index numerical_rank(const Mat& m, double tol = 0.0) {
  if (m.size() == 0) return 0;
  if (m.rows() * m.cols() > detail::kJacobiKernelLimit)
    return m.cols() - detail::kernel_via_cpqr(m, tol).cols();
  auto svd = detail::svd_full_v(m);
  double smax = svd.sv.size() > 0 ? svd.sv(0) : 0.0;
  double t = tol > 0.0 ? tol : detail::auto_rank_tol(smax, m.rows(), m.cols());
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.sv.size(); ++i)
    if (svd.sv(i) > t) ++rank;
  return rank;
}

// ---------------------------------------------------------------------------
// Matrix subspaces
// ---------------------------------------------------------------------------

/// Ordered HS-orthonormal basis of a subspace of rows x cols complex
/// matrices.  For Field::Real the span is over real coefficients and the
/// basis is orthonormal for Re<.,.>.
struct MatrixSubspace {
  Eigen::Index ambient_rows = 0;
  Eigen::Index ambient_cols = 0;
  Field field = Field::Complex;
  std::vector<CMat> basis;

  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }

  /// Stacked coordinates of v in the basis (complex or real per field).
  CVec raw_coeffs(const CMat& v) const {
    CVec c(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      Complex ip = hs_inner(v, basis[i]);
      c(i) = field == Field::Real ? Complex(ip.real(), 0.0) : ip;
    }
    return c;
  }

  CMat from_coeffs(const CVec& c) const {
    CMat out = CMat::Zero(ambient_rows, ambient_cols);
    for (Eigen::Index i = 0; i < dim(); ++i) out += c(i) * basis[i];
    return out;
  }
};

/// HS-orthonormal basis of the (real or complex) span of mats.  Shape is
/// taken from the inputs unless rows/cols are given (required when mats is
/// empty).  scale_floor > 0 anchors the rank decision at that scale, for
/// inputs that are products of unit-norm structural data and may be pure
/// roundoff; the default keeps the sigma_max-relative heuristic.
inline MatrixSubspace orthonormalize(const std::vector<CMat>& mats, Field field,
                                     double tol = 0.0, Eigen::Index rows = -1,
                                     Eigen::Index cols = -1,
                                     double scale_floor = 0.0) {
  MatrixSubspace s;
  s.field = field;
  if (mats.empty()) {
    if (rows < 0 || cols < 0)
      throw DimensionError("orthonormalize: empty input needs explicit shape");
    s.ambient_rows = rows;
    s.ambient_cols = cols;
    return s;
  }
  s.ambient_rows = rows >= 0 ? rows : mats[0].rows();
  s.ambient_cols = cols >= 0 ? cols : mats[0].cols();
  for (const auto& m : mats)
    if (m.rows() != s.ambient_rows || m.cols() != s.ambient_cols)
      throw DimensionError("orthonormalize: shape mismatch");
  Eigen::Index n = s.ambient_rows * s.ambient_cols;
  if (field == Field::Complex) {
    CMat stacked(n, static_cast<Eigen::Index>(mats.size()));
    for (std::size_t j = 0; j < mats.size(); ++j)
      stacked.col(static_cast<Eigen::Index>(j)) = vec(mats[j]);
    auto svd = detail::svd_thin_u(stacked);
    double smax = std::max(scale_floor, svd.sv.size() > 0 ? svd.sv(0) : 0.0);
    double t =
        tol > 0.0 ? tol : detail::auto_rank_tol(smax, n, stacked.cols());
    for (Eigen::Index i = 0; i < svd.sv.size(); ++i) {
      if (svd.sv(i) <= t) break;
      CVec col = svd.u.col(i);
      detail::canonicalize_column(col);
      s.basis.push_back(unvec(col, s.ambient_rows, s.ambient_cols));
    }
  } else {
    RMat stacked(2 * n, static_cast<Eigen::Index>(mats.size()));
    for (std::size_t j = 0; j < mats.size(); ++j)
      stacked.col(static_cast<Eigen::Index>(j)) = realify(vec(mats[j]));
    auto svd = detail::svd_thin_u(stacked);
    double smax = std::max(scale_floor, svd.sv.size() > 0 ? svd.sv(0) : 0.0);
    double t =
        tol > 0.0 ? tol : detail::auto_rank_tol(smax, 2 * n, stacked.cols());
    for (Eigen::Index i = 0; i < svd.sv.size(); ++i) {
      if (svd.sv(i) <= t) break;
      RVec col = svd.u.col(i);
      detail::canonicalize_column(col);
      s.basis.push_back(unvec(derealify(col), s.ambient_rows, s.ambient_cols));
    }
  }
  return s;
}

struct Membership {
  bool member = false;
  CVec coeffs;          // expansion in the subspace basis (real parts only
                        // carry data for real-field spaces)
  double residual = 0.0;
};

/// Orthogonal projection test: member when the residual is at most
/// tol * max(1, ||v||).
inline Membership membership(const CMat& v, const MatrixSubspace& s,
                             double tol = 1e-9) {
  if (v.rows() != s.ambient_rows || v.cols() != s.ambient_cols)
    throw DimensionError("membership: shape mismatch");
  Membership m;
  m.coeffs = s.raw_coeffs(v);
  m.residual = hs_norm(v - s.from_coeffs(m.coeffs));
  m.member = m.residual <= tol * std::max(1.0, hs_norm(v));
  return m;
}

/// Mutual membership of the two bases: same span over the same field.
inline bool same_span(const MatrixSubspace& a, const MatrixSubspace& b,
                      double tol = 1e-9) {
  if (a.dim() != b.dim()) return false;
  for (const auto& m : a.basis)
    if (!membership(m, b, tol).member) return false;
  for (const auto& m : b.basis)
    if (!membership(m, a, tol).member) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Staged kernel refinement
// ---------------------------------------------------------------------------

/// Kernel of a tall constraint system fed in chunks: maintains an orthonormal
/// basis K of the kernel of all rows seen so far; each chunk A updates
/// K <- K * ker(A K).  Equivalent to one big null space, with bounded memory.
template <typename Scalar>
class KernelRefiner {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  explicit KernelRefiner(Eigen::Index unknowns)
      : basis_(Mat::Identity(unknowns, unknowns)) {}

  explicit KernelRefiner(Mat initial_orthonormal_basis)
      : basis_(std::move(initial_orthonormal_basis)) {}

  Eigen::Index dim() const { return basis_.cols(); }
  const Mat& basis() const { return basis_; }

  void constrain(const Mat& rows, double tol = 0.0) {
    if (rows.rows() == 0 || basis_.cols() == 0) return;
    if (rows.cols() != basis_.rows())
      throw DimensionError("KernelRefiner: column count mismatch");
    Mat reduced = rows * basis_;
    // The noise floor of the reduced rows is set by the scale of the
    // unreduced chunk; without this a chunk nearly contained in the span of
    // earlier constraints would have its roundoff counted as rank.
    double t = tol > 0.0
                   ? tol
                   : detail::computed_rank_tol(std::max(1.0, rows.norm()),
                                               rows.rows(), basis_.rows());
    Mat kernel = null_space_matrix(reduced, t);
    basis_ = basis_ * kernel;
  }

  /// Final basis with the deterministic phase/sign rule applied.
  Mat take_canonical() {
    detail::canonicalize_columns(basis_);
    return std::move(basis_);
  }

 private:
  Mat basis_;
};

/// Least-norm least-squares solution via SVD pseudo-inverse.
template <typename Mat>
Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1> least_norm_solve(
    const Mat& a, const Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1>& b,
    double tol = 0.0) {
  using Vec = Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1>;
  if (a.cols() == 0) return Vec::Zero(0);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  double t = tol > 0.0 ? tol : detail::auto_rank_tol(smax, a.rows(), a.cols());
  Vec y = svd.matrixU().adjoint() * b;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > t)
      y(i) /= svd.singularValues()(i);
    else
      y(i) = typename Mat::Scalar(0);
  }
  return svd.matrixV() * y;
}

}  // namespace trolab
