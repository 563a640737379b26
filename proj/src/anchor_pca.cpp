#include "appca/anchor_pca.hpp"

#include <cmath>
#include <sstream>

#include "appca/error.hpp"
#include "appca/linalg.hpp"
#include "appca/random.hpp"

namespace appca {

namespace {

constexpr std::uint64_t kFoldStream = 0xC0FFEE;

std::vector<std::size_t> all_groups(const BlockLayout& layout) {
  std::vector<std::size_t> g(layout.group_count());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = i;
  return g;
}

void require_group_rank(const BlockLayout& layout, std::size_t g, std::size_t cols, Index r) {
  const auto rows = static_cast<Index>(layout.groups[g].size());
  if (rows < r || static_cast<Index>(cols) < r) {
    std::ostringstream msg;
    msg << "group " << (g + 1) << " has " << rows << " subjects and " << cols
        << " observed features; rank " << r << " needs at least " << r << " of each";
    throw FeasibilityError(msg.str());
  }
}

Eigen::MatrixXd group_basis(const MaskedMatrix& x, std::size_t g, const FeatureSet& cols,
                            Index r) {
  require_group_rank(x.layout(), g, cols.size(), r);
  const Eigen::MatrixXd sub = x.observed_block(x.layout().groups[g], cols.indices());
  return svd_top_r(sub, r).U;
}

FeatureSet require_anchor(const BlockLayout& layout, const std::vector<std::size_t>& groups,
                          Index r, Index min_multiple) {
  FeatureSet anchor = shared_feature_set(layout, groups);
  if (anchor.empty()) {
    throw FeasibilityError("no shared anchor feature set across the groups; use the chain method (chain_fit)");
  }
  if (static_cast<Index>(anchor.size()) < min_multiple * r) {
    std::ostringstream msg;
    msg << "shared anchor set has " << anchor.size() << " features; rank " << r << " needs at least "
        << min_multiple * r;
    throw FeasibilityError(msg.str());
  }
  return anchor;
}

IndexList stacked_subjects(const BlockLayout& layout, const std::vector<std::size_t>& groups) {
  IndexList rows;
  for (std::size_t g : groups) rows.insert(rows.end(), layout.groups[g].begin(), layout.groups[g].end());
  return rows;
}

Embedding scaled_embedding(TruncatedSVD svd, IndexList subjects, Index r, Method method) {
  Embedding e;
  e.theta_hat = std::sqrt(static_cast<double>(svd.U.rows())) * svd.U;
  e.rank = r;
  e.method = method;
  e.row_index = std::move(subjects);
  return e;
}

}  // namespace

GroupSubspaces groupwise_subspaces(const MaskedMatrix& x, const std::vector<std::size_t>& groups,
                                   Index r) {
  GroupSubspaces out;
  out.groups = groups;
  out.bases.reserve(groups.size());
  for (std::size_t g : groups) {
    out.bases.push_back(group_basis(x, g, observed_features(x.layout(), g), r));
  }
  return out;
}

GroupSubspaces groupwise_subspaces(const MaskedMatrix& x, Index r) {
  return groupwise_subspaces(x, all_groups(x.layout()), r);
}

Eigen::MatrixXd projected_anchor_matrix(const MaskedMatrix& x, const GroupSubspaces& subspaces,
                                        const FeatureSet& anchor) {
  Index total = 0;
  for (std::size_t g : subspaces.groups) total += static_cast<Index>(x.layout().groups[g].size());
  Eigen::MatrixXd stacked(total, static_cast<Index>(anchor.size()));
  Index offset = 0;
  for (std::size_t i = 0; i < subspaces.groups.size(); ++i) {
    const std::size_t g = subspaces.groups[i];
    const Eigen::MatrixXd block = x.observed_block(x.layout().groups[g], anchor.indices());
    stacked.middleRows(offset, block.rows()) = project_rows(Projector(subspaces.bases[i]), block);
    offset += block.rows();
  }
  return stacked;
}

AnchoredBasis anchored_basis(const MaskedMatrix& x, const std::vector<std::size_t>& groups,
                             Index r) {
  const FeatureSet anchor = require_anchor(x.layout(), groups, r, 1);
  const GroupSubspaces subspaces = groupwise_subspaces(x, groups, r);
  const Eigen::MatrixXd stacked = projected_anchor_matrix(x, subspaces, anchor);
  return {svd_top_r(stacked, r).U, stacked_subjects(x.layout(), groups)};
}

Embedding appca_fit(const MaskedMatrix& x, Index r) {
  const auto groups = all_groups(x.layout());
  const FeatureSet anchor = require_anchor(x.layout(), groups, r, 1);
  const GroupSubspaces subspaces = groupwise_subspaces(x, groups, r);
  const Eigen::MatrixXd stacked = projected_anchor_matrix(x, subspaces, anchor);
  return scaled_embedding(svd_top_r(stacked, r), stacked_subjects(x.layout(), groups), r,
                          Method::appca);
}

std::pair<FeatureSet, FeatureSet> crossfit_folds(const FeatureSet& anchor,
                                                 std::uint64_t fold_seed) {
  const auto perm = seeded_permutation(anchor.size(), fold_seed, kFoldStream);
  const std::size_t half = anchor.size() / 2;
  IndexList a, b;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    (i < half ? a : b).push_back(anchor.indices()[perm[i]]);
  }
  return {FeatureSet(std::move(a)), FeatureSet(std::move(b))};
}

Embedding appca_crossfit(const MaskedMatrix& x, Index r, std::uint64_t fold_seed) {
  const BlockLayout& layout = x.layout();
  const auto groups = all_groups(layout);
  FeatureSet anchor = shared_feature_set(layout, groups);
  if (anchor.empty()) {
    throw FeasibilityError("no shared anchor feature set across the groups; use the chain method (chain_fit)");
  }
  if (static_cast<Index>(anchor.size()) < 2 * r) {
    std::ostringstream msg;
    msg << "cross-fitting needs at least " << 2 * r << " anchor features for rank " << r
        << "; have " << anchor.size();
    throw FeasibilityError(msg.str());
  }
  const auto [fold_a, fold_b] = crossfit_folds(anchor, fold_seed);

  const IndexList subjects = stacked_subjects(layout, groups);
  Eigen::MatrixXd stacked(static_cast<Index>(subjects.size()), static_cast<Index>(anchor.size()));
  Index offset = 0;
  for (std::size_t g : groups) {
    const FeatureSet private_cols = observed_features(layout, g).minus(anchor);
    const IndexList& rows = layout.groups[g];
    const auto nrows = static_cast<Index>(rows.size());
    // Subspace fitted without fold B projects fold B, and symmetrically.
    const Eigen::MatrixXd basis_a = group_basis(x, g, private_cols.unite(fold_a), r);
    const Eigen::MatrixXd basis_b = group_basis(x, g, private_cols.unite(fold_b), r);
    stacked.block(offset, 0, nrows, static_cast<Index>(fold_b.size())) =
        project_rows(Projector(basis_a), x.observed_block(rows, fold_b.indices()));
    stacked.block(offset, static_cast<Index>(fold_b.size()), nrows,
                  static_cast<Index>(fold_a.size())) =
        project_rows(Projector(basis_b), x.observed_block(rows, fold_a.indices()));
    offset += nrows;
  }
  return scaled_embedding(svd_top_r(stacked, r), subjects, r, Method::appca_crossfit);
}

}  // namespace appca
