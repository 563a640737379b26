#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "appca/block_model.hpp"
#include "appca/embedding.hpp"

namespace appca {

/// Per-group orthonormal bases (|U_g| x r), ordered by group index of the
/// group list they were computed for.
struct GroupSubspaces {
  std::vector<std::size_t> groups;
  std::vector<Eigen::MatrixXd> bases;
};

/// Top-r left singular vectors of X[U_g, V_(g)] for every group.
/// Throws FeasibilityError naming the group when |U_g| < r or |V_(g)| < r.
GroupSubspaces groupwise_subspaces(const MaskedMatrix& x, Index r);
GroupSubspaces groupwise_subspaces(const MaskedMatrix& x, const std::vector<std::size_t>& groups,
                                   Index r);

/// Rows P_g X[U_g, anchor] stacked in the order of `subspaces.groups`.
Eigen::MatrixXd projected_anchor_matrix(const MaskedMatrix& x, const GroupSubspaces& subspaces,
                                        const FeatureSet& anchor);

/// Orthonormal output of anchor projected PCA on a subset of groups, with the
/// original subject index of every row.
struct AnchoredBasis {
  Eigen::MatrixXd basis;
  IndexList subjects;
};

/// Anchor projected PCA restricted to `groups`, anchored on their common
/// observed features. Throws FeasibilityError if that set is empty or has
/// fewer than r columns.
AnchoredBasis anchored_basis(const MaskedMatrix& x, const std::vector<std::size_t>& groups,
                             Index r);

/// Two-stage anchor projected PCA over all groups: groupwise subspaces from
/// every observed feature, then the top-r left singular vectors of the
/// projected shared block. Returns sqrt(n) * U_hat.
Embedding appca_fit(const MaskedMatrix& x, Index r);

/// Cross-fitted variant. The anchor columns are split into two seeded halves
/// T_a, T_b; subspaces estimated without T_b project X[U_g, T_b] and vice
/// versa, and the two projected halves are concatenated column-wise before the
/// final SVD. Requires |T| >= 2r.
Embedding appca_crossfit(const MaskedMatrix& x, Index r, std::uint64_t fold_seed);

/// The seeded split used by appca_crossfit: {T_a, T_b}, |T_a| = floor(|T|/2).
std::pair<FeatureSet, FeatureSet> crossfit_folds(const FeatureSet& anchor,
                                                 std::uint64_t fold_seed);

}  // namespace appca
