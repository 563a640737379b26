#include "appca/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "appca/error.hpp"
#include "appca/linalg.hpp"

namespace appca {

Embedding shared_pca_fit(const MaskedMatrix& x, Index r) {
  const FeatureSet anchor = shared_feature_set(x.layout());
  if (static_cast<Index>(anchor.size()) < r || x.rows() < r) {
    std::ostringstream msg;
    msg << "shared-block PCA needs at least " << r << " shared features and subjects; have "
        << anchor.size() << " shared features";
    throw FeasibilityError(msg.str());
  }
  const Eigen::MatrixXd sub = x.observed_block(identity_index(x.rows()), anchor.indices());
  Embedding e;
  e.theta_hat = std::sqrt(static_cast<double>(x.rows())) * svd_top_r(sub, r).U;
  e.rank = r;
  e.method = Method::shared_pca;
  e.row_index = identity_index(x.rows());
  return e;
}

namespace {

struct LocalFactor {
  Eigen::MatrixXd theta;  // n_g x r
  Eigen::MatrixXd phi;    // |V_(g)| x r
  FeatureSet features;
};

LocalFactor local_pca(const MaskedMatrix& x, std::size_t g, Index r) {
  LocalFactor f;
  f.features = observed_features(x.layout(), g);
  const auto rows = static_cast<Index>(x.layout().groups[g].size());
  if (rows < r || static_cast<Index>(f.features.size()) < r) {
    std::ostringstream msg;
    msg << "group " << (g + 1) << " has " << rows << " subjects and " << f.features.size()
        << " observed features; rank " << r << " needs at least " << r << " of each";
    throw FeasibilityError(msg.str());
  }
  const TruncatedSVD svd = svd_top_r(x.group_submatrix(g), r);
  const double root_n = std::sqrt(static_cast<double>(rows));
  f.theta = root_n * svd.U;
  f.phi = svd.V * (svd.S / root_n).asDiagonal();
  return f;
}

// Rows of `phi` (indexed by `features`) for the columns in `subset`.
Eigen::MatrixXd rows_for(const LocalFactor& f, const FeatureSet& subset) {
  const IndexList& all = f.features.indices();
  IndexList pos;
  pos.reserve(subset.size());
  for (Index c : subset.indices()) {
    pos.push_back(std::lower_bound(all.begin(), all.end(), c) - all.begin());
  }
  return gather(f.phi, pos, identity_index(f.phi.cols()));
}

}  // namespace

Embedding two_step_fit(const MaskedMatrix& x, Index r, std::size_t reference) {
  const BlockLayout& layout = x.layout();
  const std::size_t G = layout.group_count();
  if (reference >= G) {
    throw DomainError("reference group " + std::to_string(reference + 1) + " out of range (G = " +
                      std::to_string(G) + ")");
  }
  std::vector<LocalFactor> local;
  local.reserve(G);
  for (std::size_t g = 0; g < G; ++g) local.push_back(local_pca(x, g, r));

  std::vector<Eigen::MatrixXd> to_reference(G);
  std::vector<bool> aligned(G, false);
  to_reference[reference] = Eigen::MatrixXd::Identity(r, r);
  aligned[reference] = true;

  for (std::size_t step = 1; step < G; ++step) {
    std::size_t best_h = G, best_g = 0, best_shared = 0;
    for (std::size_t h = 0; h < G; ++h) {
      if (aligned[h]) continue;
      for (std::size_t g = 0; g < G; ++g) {
        if (!aligned[g]) continue;
        const std::size_t shared = local[g].features.intersect(local[h].features).size();
        if (shared > best_shared) {
          best_shared = shared;
          best_h = h;
          best_g = g;
        }
      }
    }
    if (best_h == G) {
      throw FeasibilityError("two-step alignment infeasible: some groups share no features with "
                             "the groups already aligned to the reference");
    }
    const FeatureSet shared = local[best_g].features.intersect(local[best_h].features);
    // W^T solves min || Phi_g[T] W^T - Phi_h[T] ||.
    const Eigen::MatrixXd w_t = ls_transform(rows_for(local[best_g], shared),
                                             rows_for(local[best_h], shared));
    to_reference[best_h] = w_t.transpose() * to_reference[best_g];
    aligned[best_h] = true;
  }

  Embedding e;
  e.theta_hat.resize(layout.n, r);
  e.rank = r;
  e.method = Method::two_step;
  Index offset = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const Index rows = local[g].theta.rows();
    e.theta_hat.middleRows(offset, rows) = local[g].theta * to_reference[g];
    e.row_index.insert(e.row_index.end(), layout.groups[g].begin(), layout.groups[g].end());
    offset += rows;
  }
  return e;
}

Embedding oracle_fit(const Eigen::MatrixXd& x_full, Index r) {
  if (!x_full.allFinite()) {
    throw DomainError("oracle fit needs a fully observed matrix; found masked or non-finite cells");
  }
  Embedding e;
  e.theta_hat = std::sqrt(static_cast<double>(x_full.rows())) * svd_top_r(x_full, r).U;
  e.rank = r;
  e.method = Method::oracle;
  e.row_index = identity_index(x_full.rows());
  return e;
}

}  // namespace appca
