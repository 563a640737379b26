#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "appca/block_model.hpp"
#include "appca/embedding.hpp"

namespace appca {

struct ErrorReport {
  double raw_error = 0.0;       // ||Theta_hat H* - Theta||_F
  double normalized = 0.0;      // raw_error / ||Theta||_F
  Eigen::MatrixXd h_star;       // minimising r x r transform
  std::optional<double> projector_form;  // ||(I - P_U) Theta||_F, U = Theta_hat / sqrt(n)
};

/// Alignment-adjusted error min_H ||Theta_hat H - Theta||_F, with H* from
/// least squares over all r x r matrices (not only orthogonal ones).
///
/// theta_hat is reordered to subject order first. When theta_hat^T theta_hat
/// equals n I to 1e-8 relative, the projector form is also computed and the
/// two are required to agree to 1e-8 (1 + raw); NumericalError otherwise.
ErrorReport alignment_error(const Embedding& theta_hat, const Eigen::MatrixXd& theta);
/// Same, for a matrix already in subject order.
ErrorReport alignment_error(const Eigen::MatrixXd& theta_hat, const Eigen::MatrixXd& theta);

/// ||P_{U1} - P_{U2}||_F from basis products, never forming n x n matrices.
/// Throws DomainError on row mismatch or columns not orthonormal to 1e-6.
double subspace_distance(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2);

/// Information-criterion rank choice over r = 1..r_max:
///   IC(r) = log V(r) + r (n + p) / (n p) log(n p / (n + p)),
///   V(r)  = ||X - X_r||_F^2 / (n p).
/// Ties go to the smaller r. If some V(r) is zero (to 1e-12 of ||X||_F^2),
/// the smallest such r is returned. Requires 1 <= r_max <= min(n, p) / 2.
Index rank_select_ic(const Eigen::MatrixXd& x, Index r_max);

/// IC values for r = 1..r_max (index r - 1), exposed for diagnostics.
std::vector<double> rank_ic_curve(const Eigen::MatrixXd& x, Index r_max);

/// Largest IC choice over the groups' fully observed submatrices, each with
/// r_max capped at half its smaller dimension.
Index rank_select_blockwise(const MaskedMatrix& x, Index r_max);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares of log(error) on log(scale). Needs >= 3 points with
/// positive coordinates and at least two distinct scales.
LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

}  // namespace appca
