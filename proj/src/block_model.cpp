#include "appca/block_model.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

#include "appca/error.hpp"

namespace appca {

FeatureSet::FeatureSet(IndexList indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

bool FeatureSet::contains(Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

FeatureSet FeatureSet::intersect(const FeatureSet& other) const {
  IndexList out;
  std::set_intersection(indices_.begin(), indices_.end(), other.indices_.begin(),
                        other.indices_.end(), std::back_inserter(out));
  FeatureSet fs;
  fs.indices_ = std::move(out);
  return fs;
}

FeatureSet FeatureSet::unite(const FeatureSet& other) const {
  IndexList out;
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(out));
  FeatureSet fs;
  fs.indices_ = std::move(out);
  return fs;
}

FeatureSet FeatureSet::minus(const FeatureSet& other) const {
  IndexList out;
  std::set_difference(indices_.begin(), indices_.end(), other.indices_.begin(),
                      other.indices_.end(), std::back_inserter(out));
  FeatureSet fs;
  fs.indices_ = std::move(out);
  return fs;
}

namespace {

// Checks that `sets` partition {0..extent-1}; appends diagnostics.
void check_partition(const std::vector<IndexList>& sets, Index extent, const char* what,
                     const char* overlap_code, const char* uncovered_code,
                     const char* empty_code, Diagnostics& out) {
  std::vector<int> owner(static_cast<std::size_t>(std::max<Index>(extent, 0)), -1);
  std::vector<std::vector<bool>> overlap_pair(sets.size(), std::vector<bool>(sets.size(), false));
  bool out_of_range = false;

  for (std::size_t s = 0; s < sets.size(); ++s) {
    if (sets[s].empty()) {
      std::ostringstream msg;
      msg << what << " " << (s + 1) << " is empty";
      out.push_back({empty_code, msg.str()});
    }
    for (Index i : sets[s]) {
      if (i < 0 || i >= extent) {
        if (!out_of_range) {
          std::ostringstream msg;
          msg << what << " " << (s + 1) << " references index " << i << " outside [0, " << extent
              << ")";
          out.push_back({"index_out_of_range", msg.str()});
          out_of_range = true;
        }
        continue;
      }
      int& o = owner[static_cast<std::size_t>(i)];
      if (o < 0) {
        o = static_cast<int>(s);
      } else {
        overlap_pair[static_cast<std::size_t>(o)][s] = true;
      }
    }
  }
  for (std::size_t a = 0; a < sets.size(); ++a) {
    for (std::size_t b = 0; b < sets.size(); ++b) {
      if (!overlap_pair[a][b]) continue;
      std::ostringstream msg;
      if (a == b) {
        msg << what << " " << (a + 1) << " lists an index more than once";
      } else {
        msg << what << "s " << (a + 1) << " and " << (b + 1) << " share an index";
      }
      out.push_back({overlap_code, msg.str()});
    }
  }
  const auto uncovered = std::count(owner.begin(), owner.end(), -1);
  if (uncovered > 0) {
    std::ostringstream msg;
    msg << uncovered << " of " << extent << " indices belong to no " << what;
    out.push_back({uncovered_code, msg.str()});
  }
}

}  // namespace

Diagnostics validate_layout(const BlockLayout& layout) {
  Diagnostics out;
  if (layout.n < 0 || layout.p < 0) {
    out.push_back({"index_out_of_range", "negative matrix dimension"});
    return out;
  }
  check_partition(layout.groups, layout.n, "group", "overlapping_groups", "uncovered_subjects",
                  "empty_group", out);
  check_partition(layout.blocks, layout.p, "block", "overlapping_blocks", "uncovered_features",
                  "empty_block", out);

  const std::size_t G = layout.groups.size();
  const std::size_t B = layout.blocks.size();
  bool shape_ok = layout.indicator.size() == G;
  for (const auto& row : layout.indicator) shape_ok = shape_ok && row.size() == B;
  if (!shape_ok) {
    std::ostringstream msg;
    msg << "indicator must be " << G << " x " << B;
    out.push_back({"indicator_shape", msg.str()});
    return out;
  }
  for (std::size_t g = 0; g < G; ++g) {
    if (std::none_of(layout.indicator[g].begin(), layout.indicator[g].end(),
                     [](bool v) { return v; })) {
      std::ostringstream msg;
      msg << "group " << (g + 1) << " observes no block";
      out.push_back({"group_observes_nothing", msg.str()});
    }
  }
  for (std::size_t b = 0; b < B; ++b) {
    bool seen = false;
    for (std::size_t g = 0; g < G; ++g) seen = seen || layout.indicator[g][b];
    if (!seen) {
      std::ostringstream msg;
      msg << "block " << (b + 1) << " is observed by no group";
      out.push_back({"orphan_block", msg.str()});
    }
  }
  return out;
}

void require_valid_layout(const BlockLayout& layout) {
  const auto diags = validate_layout(layout);
  if (diags.empty()) return;
  std::ostringstream msg;
  msg << "invalid block layout:";
  for (const auto& d : diags) msg << " [" << d.code << "] " << d.message << ";";
  throw DomainError(msg.str());
}

FeatureSet observed_features(const BlockLayout& layout, std::size_t g) {
  if (g >= layout.groups.size()) {
    throw DomainError("group index " + std::to_string(g) + " out of range (G = " +
                      std::to_string(layout.groups.size()) + ")");
  }
  IndexList cols;
  for (std::size_t b = 0; b < layout.blocks.size(); ++b) {
    if (layout.indicator[g][b]) {
      cols.insert(cols.end(), layout.blocks[b].begin(), layout.blocks[b].end());
    }
  }
  return FeatureSet(std::move(cols));
}

FeatureSet shared_feature_set(const BlockLayout& layout, const std::vector<std::size_t>& groups) {
  if (groups.empty()) return {};
  FeatureSet shared = observed_features(layout, groups.front());
  for (std::size_t i = 1; i < groups.size() && !shared.empty(); ++i) {
    shared = shared.intersect(observed_features(layout, groups[i]));
  }
  return shared;
}

FeatureSet shared_feature_set(const BlockLayout& layout) {
  std::vector<std::size_t> all(layout.groups.size());
  for (std::size_t g = 0; g < all.size(); ++g) all[g] = g;
  return shared_feature_set(layout, all);
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& x, const IndexList& rows, const IndexList& cols) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index j = 0; j < out.cols(); ++j) {
    const Index src = cols[static_cast<std::size_t>(j)];
    for (Index i = 0; i < out.rows(); ++i) {
      out(i, j) = x(rows[static_cast<std::size_t>(i)], src);
    }
  }
  return out;
}

MaskedMatrix::MaskedMatrix(Eigen::MatrixXd values, BlockLayout layout)
    : values_(std::move(values)), layout_(std::move(layout)) {
  require_valid_layout(layout_);
  if (values_.rows() != layout_.n || values_.cols() != layout_.p) {
    std::ostringstream msg;
    msg << "matrix is " << values_.rows() << " x " << values_.cols() << " but layout expects "
        << layout_.n << " x " << layout_.p;
    throw DomainError(msg.str());
  }
  row_group_.assign(static_cast<std::size_t>(layout_.n), 0);
  col_block_.assign(static_cast<std::size_t>(layout_.p), 0);
  for (std::size_t g = 0; g < layout_.groups.size(); ++g)
    for (Index i : layout_.groups[g]) row_group_[static_cast<std::size_t>(i)] = g;
  for (std::size_t b = 0; b < layout_.blocks.size(); ++b)
    for (Index j : layout_.blocks[b]) col_block_[static_cast<std::size_t>(j)] = b;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (Index j = 0; j < values_.cols(); ++j) {
    const std::size_t b = col_block_[static_cast<std::size_t>(j)];
    for (Index i = 0; i < values_.rows(); ++i) {
      const std::size_t g = row_group_[static_cast<std::size_t>(i)];
      double& v = values_(i, j);
      if (!layout_.indicator[g][b]) {
        v = nan;
      } else if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite value at observed cell (" << i << ", " << j
            << "); entry-level missingness is not supported";
        throw DataError(msg.str());
      }
    }
  }
}

bool MaskedMatrix::is_observed(Index row, Index col) const {
  if (row < 0 || row >= layout_.n || col < 0 || col >= layout_.p) return false;
  return layout_.indicator[row_group_[static_cast<std::size_t>(row)]]
                          [col_block_[static_cast<std::size_t>(col)]];
}

Eigen::MatrixXd MaskedMatrix::observed_block(const IndexList& rows, const IndexList& cols) const {
  std::vector<bool> row_groups(layout_.group_count(), false);
  std::vector<bool> col_blocks(layout_.block_count(), false);
  for (Index i : rows) {
    if (i < 0 || i >= layout_.n) throw DomainError("row index " + std::to_string(i) + " out of range");
    row_groups[row_group_[static_cast<std::size_t>(i)]] = true;
  }
  for (Index j : cols) {
    if (j < 0 || j >= layout_.p) throw DomainError("column index " + std::to_string(j) + " out of range");
    col_blocks[col_block_[static_cast<std::size_t>(j)]] = true;
  }
  for (std::size_t g = 0; g < row_groups.size(); ++g) {
    for (std::size_t b = 0; b < col_blocks.size(); ++b) {
      if (row_groups[g] && col_blocks[b] && !layout_.indicator[g][b]) {
        std::ostringstream msg;
        msg << "requested cells of group " << (g + 1) << " in block " << (b + 1)
            << " are not observed";
        throw DomainError(msg.str());
      }
    }
  }
  return gather(values_, rows, cols);
}

Eigen::MatrixXd MaskedMatrix::group_submatrix(std::size_t g) const {
  const FeatureSet cols = observed_features(layout_, g);
  return gather(values_, layout_.groups[g], cols.indices());
}

BlockLayout contiguous_layout(Index rows_per_group, Index cols_per_block,
                              const std::vector<std::vector<bool>>& indicator) {
  BlockLayout layout;
  const std::size_t G = indicator.size();
  const std::size_t B = G == 0 ? 0 : indicator.front().size();
  layout.n = rows_per_group * static_cast<Index>(G);
  layout.p = cols_per_block * static_cast<Index>(B);
  for (std::size_t g = 0; g < G; ++g) {
    IndexList rows(static_cast<std::size_t>(rows_per_group));
    for (Index i = 0; i < rows_per_group; ++i)
      rows[static_cast<std::size_t>(i)] = static_cast<Index>(g) * rows_per_group + i;
    layout.groups.push_back(std::move(rows));
  }
  for (std::size_t b = 0; b < B; ++b) {
    IndexList cols(static_cast<std::size_t>(cols_per_block));
    for (Index j = 0; j < cols_per_block; ++j)
      cols[static_cast<std::size_t>(j)] = static_cast<Index>(b) * cols_per_block + j;
    layout.blocks.push_back(std::move(cols));
  }
  layout.indicator = indicator;
  return layout;
}

}  // namespace appca
