#pragma once

#include <optional>
#include <string>
#include <vector>

#include "appca/block_model.hpp"
#include "appca/embedding.hpp"

namespace appca {

/// Ordered super-groups, each a set of group indices (0-based).
struct ChainPlan {
  std::vector<std::vector<std::size_t>> supergroups;

  std::size_t size() const noexcept { return supergroups.size(); }
  friend bool operator==(const ChainPlan&, const ChainPlan&) = default;
};

/// Violations of the chain conditions, one diagnostic per failing step.
///
/// Codes: "invalid_group", "empty_supergroup", "anchoring" (super-group k has
/// no common observed feature), "sequential_overlap" (super-group k shares no
/// subject with the earlier ones), "global_coverage".
Diagnostics validate_chain(const BlockLayout& layout, const ChainPlan& plan);

struct ChainDiscovery {
  std::optional<ChainPlan> plan;
  std::string reason;  // set when no valid chain exists
};

/// Greedy chain construction. A layout with a global shared set yields a
/// single super-group. Otherwise the chain starts from the pair of groups
/// with the most common features, then repeatedly either absorbs an uncovered
/// group into an existing super-group whose anchor it still intersects
/// (largest remaining anchor first), or, if none can be absorbed, opens a new
/// super-group pairing an uncovered group with the covered group it shares
/// the most features with. Ties go to the lowest group index, then the lowest
/// super-group index.
ChainDiscovery discover_chain(const BlockLayout& layout);

/// Double-anchor chain linking. Runs anchor projected PCA on each super-group,
/// aligns super-group k to the running basis through its overlap subjects
/// with a least-squares transform, appends the new subjects and
/// re-orthonormalizes after every step. Returns sqrt(n) * U_hat.
///
/// Throws FeasibilityError for an invalid plan or an overlap smaller than r,
/// and ConditioningError tagged with the step index.
Embedding chain_fit(const MaskedMatrix& x, const ChainPlan& plan, Index r);

}  // namespace appca
