#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "appca/block_model.hpp"
#include "appca/embedding.hpp"

namespace appca {

/// PCA on the shared columns only: sqrt(n) times the top-r left singular
/// vectors of X[:, T].
Embedding shared_pca_fit(const MaskedMatrix& x, Index r);

/// Two-step embedding alignment. Each group is factored separately,
/// Theta_g = sqrt(n_g) U_g and Phi_g = V_g diag(S_g) / sqrt(n_g); groups are
/// then mapped into the reference group's coordinates by least-squares
/// matching of their feature embeddings on shared columns,
///   W = argmin || Phi_ref[T] W^T - Phi_g[T] ||_F,   Theta_g <- Theta_g W.
/// With more than two groups the alignments are chained along a greedy tree
/// grown from the reference (largest shared feature set first, ties to the
/// lowest group index).
Embedding two_step_fit(const MaskedMatrix& x, Index r, std::size_t reference = 0);

/// PCA on a fully observed matrix (simulation only). Throws DomainError if
/// any cell is masked or non-finite.
Embedding oracle_fit(const Eigen::MatrixXd& x_full, Index r);

}  // namespace appca
