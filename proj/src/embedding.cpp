#include "appca/embedding.hpp"

#include <numeric>

#include "appca/error.hpp"

namespace appca {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::data: return "data error";
    case ErrorKind::feasibility: return "feasibility error";
    case ErrorKind::conditioning: return "conditioning error";
    case ErrorKind::config: return "config error";
    case ErrorKind::io: return "io error";
    case ErrorKind::numerical: return "numerical error";
  }
  return "error";
}

std::string_view method_name(Method m) noexcept {
  switch (m) {
    case Method::appca: return "appca";
    case Method::appca_crossfit: return "appca-crossfit";
    case Method::chain: return "chain";
    case Method::shared_pca: return "shared-pca";
    case Method::two_step: return "two-step";
    case Method::oracle: return "oracle";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  std::string canon(name);
  for (char& c : canon)
    if (c == '_') c = '-';
  for (Method m : {Method::appca, Method::appca_crossfit, Method::chain, Method::shared_pca,
                   Method::two_step, Method::oracle}) {
    if (canon == method_name(m)) return m;
  }
  return std::nullopt;
}

IndexList identity_index(Index n) {
  IndexList idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

void check_row_index(const Embedding& e) {
  const auto n = static_cast<std::size_t>(e.theta_hat.rows());
  if (e.row_index.size() != n) {
    throw DomainError("embedding row_index has " + std::to_string(e.row_index.size()) +
                      " entries for " + std::to_string(n) + " rows");
  }
  std::vector<bool> seen(n, false);
  for (Index i : e.row_index) {
    if (i < 0 || static_cast<std::size_t>(i) >= n || seen[static_cast<std::size_t>(i)]) {
      throw DomainError("embedding row_index is not a permutation");
    }
    seen[static_cast<std::size_t>(i)] = true;
  }
}

Eigen::MatrixXd Embedding::in_subject_order() const {
  check_row_index(*this);
  Eigen::MatrixXd out(theta_hat.rows(), theta_hat.cols());
  for (Index i = 0; i < theta_hat.rows(); ++i) {
    out.row(row_index[static_cast<std::size_t>(i)]) = theta_hat.row(i);
  }
  return out;
}

}  // namespace appca
