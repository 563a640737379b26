#include "appca/chain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "appca/anchor_pca.hpp"
#include "appca/error.hpp"
#include "appca/linalg.hpp"

namespace appca {

namespace {

std::vector<std::size_t> as_set(const std::vector<std::size_t>& groups) {
  std::vector<std::size_t> out = groups;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t subject_count(const BlockLayout& layout, const std::vector<std::size_t>& groups) {
  std::size_t n = 0;
  for (std::size_t g : groups) n += layout.groups[g].size();
  return n;
}

}  // namespace

Diagnostics validate_chain(const BlockLayout& layout, const ChainPlan& plan) {
  Diagnostics out;
  const std::size_t G = layout.group_count();
  if (plan.supergroups.empty()) {
    out.push_back({"global_coverage", "plan has no super-groups"});
    return out;
  }
  for (std::size_t k = 0; k < plan.size(); ++k) {
    for (std::size_t g : plan.supergroups[k]) {
      if (g >= G) {
        std::ostringstream msg;
        msg << "super-group " << (k + 1) << " references group " << (g + 1) << " but G = " << G;
        out.push_back({"invalid_group", msg.str()});
      }
    }
  }
  if (!out.empty()) return out;

  std::set<std::size_t> covered;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto groups = as_set(plan.supergroups[k]);
    if (groups.empty()) {
      std::ostringstream msg;
      msg << "super-group " << (k + 1) << " is empty";
      out.push_back({"empty_supergroup", msg.str()});
      continue;
    }
    if (shared_feature_set(layout, groups).empty()) {
      std::ostringstream msg;
      msg << "super-group " << (k + 1) << " has no feature observed by all of its groups";
      out.push_back({"anchoring", msg.str()});
    }
    if (k > 0) {
      std::vector<std::size_t> overlap;
      for (std::size_t g : groups)
        if (covered.count(g)) overlap.push_back(g);
      if (subject_count(layout, overlap) == 0) {
        std::ostringstream msg;
        msg << "super-group " << (k + 1) << " shares no subject with super-groups 1.." << k;
        out.push_back({"sequential_overlap", msg.str()});
      }
    }
    covered.insert(groups.begin(), groups.end());
  }
  std::vector<std::size_t> missing;
  for (std::size_t g = 0; g < G; ++g)
    if (!covered.count(g) && !layout.groups[g].empty()) missing.push_back(g);
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "groups not covered by any super-group:";
    for (std::size_t g : missing) msg << " " << (g + 1);
    out.push_back({"global_coverage", msg.str()});
  }
  return out;
}

ChainDiscovery discover_chain(const BlockLayout& layout) {
  require_valid_layout(layout);
  const std::size_t G = layout.group_count();
  std::vector<FeatureSet> observed(G);
  for (std::size_t g = 0; g < G; ++g) observed[g] = observed_features(layout, g);

  ChainPlan plan;
  if (G == 0) return {std::nullopt, "layout has no groups"};
  if (!shared_feature_set(layout).empty()) {
    plan.supergroups.push_back(as_set([&] {
      std::vector<std::size_t> all(G);
      for (std::size_t g = 0; g < G; ++g) all[g] = g;
      return all;
    }()));
    return {plan, {}};
  }

  // Seed with the pair sharing the most features.
  std::size_t best_a = 0, best_b = 0, best_shared = 0;
  for (std::size_t a = 0; a < G; ++a) {
    for (std::size_t b = a + 1; b < G; ++b) {
      const std::size_t shared = observed[a].intersect(observed[b]).size();
      if (shared > best_shared) {
        best_shared = shared;
        best_a = a;
        best_b = b;
      }
    }
  }
  if (best_shared == 0) return {std::nullopt, "no two groups share an observed feature"};

  std::vector<bool> covered(G, false);
  std::vector<FeatureSet> anchors;
  plan.supergroups.push_back({best_a, best_b});
  anchors.push_back(observed[best_a].intersect(observed[best_b]));
  covered[best_a] = covered[best_b] = true;

  for (;;) {
    if (std::all_of(covered.begin(), covered.end(), [](bool c) { return c; })) break;

    // Absorb: uncovered h joins super-group k keeping a nonempty anchor.
    std::size_t abs_h = G, abs_k = 0, abs_score = 0;
    for (std::size_t h = 0; h < G; ++h) {
      if (covered[h]) continue;
      for (std::size_t k = 0; k < anchors.size(); ++k) {
        const std::size_t score = anchors[k].intersect(observed[h]).size();
        if (score > abs_score) {
          abs_score = score;
          abs_h = h;
          abs_k = k;
        }
      }
    }
    if (abs_h < G) {
      plan.supergroups[abs_k].push_back(abs_h);
      std::sort(plan.supergroups[abs_k].begin(), plan.supergroups[abs_k].end());
      anchors[abs_k] = anchors[abs_k].intersect(observed[abs_h]);
      covered[abs_h] = true;
      continue;
    }

    // Open a new super-group {g, h} with covered g as the outer anchor.
    std::size_t new_h = G, new_g = 0, new_score = 0;
    for (std::size_t h = 0; h < G; ++h) {
      if (covered[h]) continue;
      for (std::size_t g = 0; g < G; ++g) {
        if (!covered[g]) continue;
        const std::size_t score = observed[g].intersect(observed[h]).size();
        if (score > new_score) {
          new_score = score;
          new_h = h;
          new_g = g;
        }
      }
    }
    if (new_h == G) {
      std::ostringstream msg;
      msg << "no valid chain: uncovered groups";
      for (std::size_t h = 0; h < G; ++h)
        if (!covered[h]) msg << " " << (h + 1);
      msg << " share no observed feature with the covered groups";
      return {std::nullopt, msg.str()};
    }
    plan.supergroups.push_back(as_set({new_g, new_h}));
    anchors.push_back(observed[new_g].intersect(observed[new_h]));
    covered[new_h] = true;
  }
  return {plan, {}};
}

Embedding chain_fit(const MaskedMatrix& x, const ChainPlan& plan, Index r) {
  const BlockLayout& layout = x.layout();
  const Diagnostics diags = validate_chain(layout, plan);
  if (!diags.empty()) {
    std::ostringstream msg;
    msg << "invalid chain plan:";
    for (const auto& d : diags) msg << " [" << d.code << "] " << d.message << ";";
    throw FeasibilityError(msg.str());
  }

  auto with_step = [](std::size_t k, const ConditioningError& e) {
    std::ostringstream msg;
    msg << "chain step " << (k + 1) << ": " << e.what();
    return ConditioningError(msg.str(), e.smallest_singular_value());
  };

  std::vector<Index> position(static_cast<std::size_t>(layout.n), -1);
  IndexList subjects;
  Eigen::MatrixXd running;
  {
    const AnchoredBasis first = anchored_basis(x, as_set(plan.supergroups[0]), r);
    try {
      running = orthonormal_basis(first.basis);
    } catch (const ConditioningError& e) {
      throw with_step(0, e);
    }
    subjects = first.subjects;
  }
  for (std::size_t i = 0; i < subjects.size(); ++i)
    position[static_cast<std::size_t>(subjects[i])] = static_cast<Index>(i);

  for (std::size_t k = 1; k < plan.size(); ++k) {
    const AnchoredBasis local = anchored_basis(x, as_set(plan.supergroups[k]), r);
    Eigen::MatrixXd local_basis;
    try {
      local_basis = orthonormal_basis(local.basis);
    } catch (const ConditioningError& e) {
      throw with_step(k, e);
    }

    IndexList overlap_running, overlap_local, fresh_local;
    for (std::size_t i = 0; i < local.subjects.size(); ++i) {
      const Index pos = position[static_cast<std::size_t>(local.subjects[i])];
      if (pos >= 0) {
        overlap_running.push_back(pos);
        overlap_local.push_back(static_cast<Index>(i));
      } else {
        fresh_local.push_back(static_cast<Index>(i));
      }
    }
    if (static_cast<Index>(overlap_local.size()) < r) {
      std::ostringstream msg;
      msg << "chain step " << (k + 1) << ": overlap has " << overlap_local.size()
          << " subjects; rank " << r << " needs at least " << r;
      throw FeasibilityError(msg.str());
    }

    const IndexList all_cols = identity_index(r);
    const Eigen::MatrixXd a = gather(running, overlap_running, all_cols);
    const Eigen::MatrixXd b = gather(local_basis, overlap_local, all_cols);
    Eigen::MatrixXd w;
    try {
      w = ls_transform(b, a);
    } catch (const ConditioningError& e) {
      throw with_step(k, e);
    }

    const Eigen::MatrixXd appended = gather(local_basis, fresh_local, all_cols) * w;
    Eigen::MatrixXd grown(running.rows() + appended.rows(), r);
    grown.topRows(running.rows()) = running;
    grown.bottomRows(appended.rows()) = appended;
    for (Index i : fresh_local) {
      const Index subject = local.subjects[static_cast<std::size_t>(i)];
      position[static_cast<std::size_t>(subject)] = static_cast<Index>(subjects.size());
      subjects.push_back(subject);
    }
    try {
      running = orthonormal_basis(grown);
    } catch (const ConditioningError& e) {
      throw with_step(k, e);
    }
  }

  Embedding e;
  e.theta_hat = std::sqrt(static_cast<double>(running.rows())) * running;
  e.rank = r;
  e.method = Method::chain;
  e.row_index = std::move(subjects);
  return e;
}

}  // namespace appca
