#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace appca {

using Index = Eigen::Index;
using IndexList = std::vector<Index>;

/// Sorted, duplicate-free set of column (or row) indices.
class FeatureSet {
 public:
  FeatureSet() = default;
  /// Sorts and deduplicates.
  explicit FeatureSet(IndexList indices);

  const IndexList& indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  bool contains(Index i) const;

  FeatureSet intersect(const FeatureSet& other) const;
  FeatureSet unite(const FeatureSet& other) const;
  FeatureSet minus(const FeatureSet& other) const;

  friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

 private:
  IndexList indices_;
};

/// Partition of subjects into groups and features into blocks, plus the
/// group-by-block observation indicator. Plain data; call validate_layout
/// (or require_valid_layout) before relying on the partition invariants.
struct BlockLayout {
  Index n = 0;
  Index p = 0;
  std::vector<IndexList> groups;
  std::vector<IndexList> blocks;
  std::vector<std::vector<bool>> indicator;  // G x B

  std::size_t group_count() const noexcept { return groups.size(); }
  std::size_t block_count() const noexcept { return blocks.size(); }
  bool observes(std::size_t g, std::size_t b) const { return indicator[g][b]; }
};

struct Diagnostic {
  std::string code;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

/// Lists every invariant violation of the layout; an empty result means valid.
///
/// Codes: "indicator_shape", "index_out_of_range", "overlapping_groups",
/// "uncovered_subjects", "overlapping_blocks", "uncovered_features",
/// "empty_group", "empty_block", "group_observes_nothing", "orphan_block".
Diagnostics validate_layout(const BlockLayout& layout);

/// Throws DomainError summarising the diagnostics if the layout is invalid.
void require_valid_layout(const BlockLayout& layout);

/// Union of the blocks observed by group g.
FeatureSet observed_features(const BlockLayout& layout, std::size_t g);

/// Intersection of observed feature sets over all groups. May be empty.
FeatureSet shared_feature_set(const BlockLayout& layout);

/// Intersection of observed feature sets over a subset of groups.
FeatureSet shared_feature_set(const BlockLayout& layout, const std::vector<std::size_t>& groups);

/// Dense values with a blockwise observation mask. Cells in unobserved
/// (group, block) pairs are overwritten with NaN at construction and are
/// never read by any fitting or evaluation routine.
class MaskedMatrix {
 public:
  /// Validates the layout and the shape, masks unobserved blocks, and rejects
  /// non-finite values inside observed blocks.
  MaskedMatrix(Eigen::MatrixXd values, BlockLayout layout);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const BlockLayout& layout() const noexcept { return layout_; }
  Index rows() const noexcept { return values_.rows(); }
  Index cols() const noexcept { return values_.cols(); }

  /// Copy of values[rows, cols]. Every requested cell must be observed.
  Eigen::MatrixXd observed_block(const IndexList& rows, const IndexList& cols) const;

  /// Rows of group g restricted to its observed features.
  Eigen::MatrixXd group_submatrix(std::size_t g) const;

  bool is_observed(Index row, Index col) const;

 private:
  Eigen::MatrixXd values_;
  BlockLayout layout_;
  std::vector<std::size_t> row_group_;
  std::vector<std::size_t> col_block_;
};

/// Copy of X[rows, cols] with no mask checks.
Eigen::MatrixXd gather(const Eigen::MatrixXd& x, const IndexList& rows, const IndexList& cols);

/// Layout with contiguous equal-size groups and blocks.
BlockLayout contiguous_layout(Index rows_per_group, Index cols_per_block,
                              const std::vector<std::vector<bool>>& indicator);

}  // namespace appca
