#pragma once

#include <Eigen/Dense>

namespace appca {

using Eigen::Index;

inline constexpr double kRankTol = 1e-10;

/// Leading r singular triplets, singular values nonincreasing. Each left
/// singular vector is signed so that its entry of largest magnitude is
/// positive (ties broken by the lowest row index); the matching right vector
/// is flipped with it.
struct TruncatedSVD {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd V;
};

/// Top-r SVD.
///
/// Small problems (min dimension <= dense_cutoff, or r close to it) use a full
/// dense divide-and-conquer SVD followed by truncation. Larger problems use a
/// block subspace iteration with Rayleigh-Ritz extraction, started from a
/// fixed pseudo-random block, iterated until every retained Ritz pair has
/// residual ||X v_j - s_j u_j|| <= 1e-12 * s_1; if that does not happen within
/// the iteration budget the dense path is used. Both paths are deterministic.
///
/// Throws DomainError for r outside [1, min(rows, cols)] and DataError for
/// non-finite input.
TruncatedSVD svd_top_r(const Eigen::MatrixXd& x, Index r);

namespace detail {
TruncatedSVD svd_top_r_dense(const Eigen::MatrixXd& x, Index r);
/// Returns false if the iteration did not converge within max_iter.
bool svd_top_r_iterative(const Eigen::MatrixXd& x, Index r, int max_iter, TruncatedSVD& out);
inline constexpr Index kDenseCutoff = 300;
}  // namespace detail

/// Orthogonal projector P = basis * basis^T, applied without forming it.
class Projector {
 public:
  /// `basis` must have orthonormal columns.
  explicit Projector(Eigen::MatrixXd basis) : basis_(std::move(basis)) {}
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }

 private:
  Eigen::MatrixXd basis_;
};

/// basis * (basis^T * X). Throws DomainError on row-count mismatch.
Eigen::MatrixXd project_rows(const Projector& p, const Eigen::MatrixXd& x);

/// W minimising ||B W - A||_F. Uses an SVD of B; singular values below
/// kRankTol * s_max are treated as zero (Moore-Penrose) unless
/// allow_pseudo_inverse is false, in which case ConditioningError is thrown.
Eigen::MatrixXd ls_transform(const Eigen::MatrixXd& b, const Eigen::MatrixXd& a,
                             bool allow_pseudo_inverse = true);

/// Orthonormal basis of span(X) through the SVD route. Throws
/// ConditioningError if X is numerically rank deficient.
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& x);

/// Leading k singular values, nonincreasing, from the eigenvalues of the
/// smaller Gram matrix. Values only; relative accuracy of the small ones is
/// limited to about eps * s_1^2 / s_k^2.
Eigen::VectorXd top_singular_values(const Eigen::MatrixXd& x, Index k);

/// Flips column signs of u (and v alongside) to the canonical convention.
void canonicalize_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v);

}  // namespace appca
