#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "appca/block_model.hpp"

namespace appca {

enum class Method { appca, appca_crossfit, chain, shared_pca, two_step, oracle };

/// Canonical names: "appca", "appca-crossfit", "chain", "shared-pca",
/// "two-step", "oracle".
std::string_view method_name(Method m) noexcept;
/// Accepts canonical names and their underscore spellings.
std::optional<Method> parse_method(std::string_view name) noexcept;

/// Subject representation. Row i of theta_hat belongs to subject row_index[i];
/// fitting routines stack rows group by group, so row_index records the
/// permutation back to the original subject order.
struct Embedding {
  Eigen::MatrixXd theta_hat;
  Index rank = 0;
  Method method = Method::appca;
  IndexList row_index;

  Index rows() const noexcept { return theta_hat.rows(); }
  /// theta_hat with rows permuted into original subject order.
  Eigen::MatrixXd in_subject_order() const;
};

/// Identity row_index of length n.
IndexList identity_index(Index n);

/// Throws DomainError unless row_index is a bijection on {0..rows-1}.
void check_row_index(const Embedding& e);

}  // namespace appca
