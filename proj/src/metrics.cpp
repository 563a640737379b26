#include "appca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "appca/error.hpp"
#include "appca/linalg.hpp"

namespace appca {

ErrorReport alignment_error(const Eigen::MatrixXd& theta_hat, const Eigen::MatrixXd& theta) {
  if (theta_hat.rows() != theta.rows()) {
    std::ostringstream msg;
    msg << "theta_hat has " << theta_hat.rows() << " rows but theta has " << theta.rows();
    throw DomainError(msg.str());
  }
  if (theta_hat.cols() == 0 || theta.cols() == 0) throw DomainError("empty embedding");

  ErrorReport report;
  report.h_star = ls_transform(theta_hat, theta);
  report.raw_error = (theta_hat * report.h_star - theta).norm();
  const double theta_norm = theta.norm();
  report.normalized = theta_norm > 0.0 ? report.raw_error / theta_norm : 0.0;

  const auto n = static_cast<double>(theta_hat.rows());
  const Eigen::MatrixXd gram = theta_hat.transpose() * theta_hat / n;
  const double gram_dev =
      (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (gram_dev <= 1e-8) {
    const Eigen::MatrixXd u = theta_hat / std::sqrt(n);
    const Eigen::MatrixXd resid = theta - u * (u.transpose() * theta);
    report.projector_form = resid.norm();
    if (std::abs(report.raw_error - *report.projector_form) > 1e-8 * (1.0 + report.raw_error)) {
      std::ostringstream msg;
      msg << "alignment error " << report.raw_error << " disagrees with projector form "
          << *report.projector_form;
      throw NumericalError(msg.str());
    }
  }
  return report;
}

ErrorReport alignment_error(const Embedding& theta_hat, const Eigen::MatrixXd& theta) {
  return alignment_error(theta_hat.in_subject_order(), theta);
}

double subspace_distance(const Eigen::MatrixXd& u1, const Eigen::MatrixXd& u2) {
  if (u1.rows() != u2.rows()) throw DomainError("subspace_distance: row counts differ");
  for (const Eigen::MatrixXd* u : {&u1, &u2}) {
    const Eigen::MatrixXd gram = u->transpose() * *u;
    if (gram.size() > 0 &&
        (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-6) {
      throw DomainError("subspace_distance: columns are not orthonormal");
    }
  }
  // ||P1 - P2||_F^2 = ||(I - P1) U2||_F^2 + ||(I - P2) U1||_F^2 for orthonormal bases.
  const double a = (u2 - u1 * (u1.transpose() * u2)).squaredNorm();
  const double b = (u1 - u2 * (u2.transpose() * u1)).squaredNorm();
  return std::sqrt(a + b);
}

std::vector<double> rank_ic_curve(const Eigen::MatrixXd& x, Index r_max) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (r_max < 1 || 2 * r_max > std::min(n, p)) {
    std::ostringstream msg;
    msg << "r_max " << r_max << " must lie in [1, min(n, p) / 2] for a " << n << " x " << p
        << " matrix";
    throw DomainError(msg.str());
  }
  const Eigen::VectorXd s = top_singular_values(x, r_max);
  const double total = x.squaredNorm();
  const double np = static_cast<double>(n) * static_cast<double>(p);
  const double penalty = (static_cast<double>(n + p) / np) * std::log(np / static_cast<double>(n + p));

  std::vector<double> ic(static_cast<std::size_t>(r_max));
  double captured = 0.0;
  for (Index r = 1; r <= r_max; ++r) {
    captured += s(r - 1) * s(r - 1);
    const double resid = std::max(total - captured, 0.0);
    ic[static_cast<std::size_t>(r - 1)] =
        resid <= 1e-12 * total ? -std::numeric_limits<double>::infinity()
                               : std::log(resid / np) + static_cast<double>(r) * penalty;
  }
  return ic;
}

Index rank_select_ic(const Eigen::MatrixXd& x, Index r_max) {
  const auto ic = rank_ic_curve(x, r_max);
  std::size_t best = 0;
  for (std::size_t i = 1; i < ic.size(); ++i) {
    if (ic[i] < ic[best]) best = i;
  }
  // -inf marks a zero residual; the first such r wins through strict '<'.
  return static_cast<Index>(best) + 1;
}

Index rank_select_blockwise(const MaskedMatrix& x, Index r_max) {
  Index chosen = 0;
  for (std::size_t g = 0; g < x.layout().group_count(); ++g) {
    const Eigen::MatrixXd sub = x.group_submatrix(g);
    const Index cap = std::min(r_max, std::min(sub.rows(), sub.cols()) / 2);
    if (cap < 1) continue;
    chosen = std::max(chosen, rank_select_ic(sub, cap));
  }
  if (chosen == 0) throw FeasibilityError("no group is large enough for rank selection");
  return chosen;
}

LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw DomainError("log-log fit needs at least 3 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [s, e] : points) {
    if (!(s > 0.0) || !(e > 0.0) || !std::isfinite(s) || !std::isfinite(e)) {
      throw DomainError("log-log fit needs positive finite coordinates");
    }
    mx += std::log(s);
    my += std::log(e);
  }
  const auto k = static_cast<double>(points.size());
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [s, e] : points) {
    const double dx = std::log(s) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(e) - my);
  }
  if (sxx <= 0.0) throw DomainError("log-log fit needs at least two distinct scales");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

}  // namespace appca
