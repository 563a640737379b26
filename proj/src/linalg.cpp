#include "appca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "appca/error.hpp"
#include "appca/random.hpp"

namespace appca {

namespace {

constexpr std::uint64_t kStartBlockSeed = 0x41505043415356ULL;
constexpr double kRitzTol = 1e-12;
constexpr int kMaxIterations = 300;

void check_rank(const Eigen::MatrixXd& x, Index r) {
  const Index limit = std::min(x.rows(), x.cols());
  if (r < 1 || r > limit) {
    std::ostringstream msg;
    msg << "rank " << r << " outside [1, " << limit << "] for a " << x.rows() << " x "
        << x.cols() << " matrix";
    throw DomainError(msg.str());
  }
  if (!x.allFinite()) throw DataError("matrix contains non-finite entries");
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

void canonicalize_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  for (Index j = 0; j < u.cols(); ++j) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (u.rows() > 0 && u(best, j) < 0.0) {
      u.col(j) = -u.col(j);
      if (j < v.cols()) v.col(j) = -v.col(j);
    }
  }
}

namespace detail {

TruncatedSVD svd_top_r_dense(const Eigen::MatrixXd& x, Index r) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSVD out{svd.matrixU().leftCols(r), svd.singularValues().head(r),
                   svd.matrixV().leftCols(r)};
  canonicalize_signs(out.U, out.V);
  return out;
}

bool svd_top_r_iterative(const Eigen::MatrixXd& x, Index r, int max_iter, TruncatedSVD& out) {
  const Index m = x.rows();
  const Index n = x.cols();
  const Index k = std::min(r + std::max<Index>(10, r), std::min(m, n));

  Eigen::MatrixXd omega(n, k);
  CounterRng(kStartBlockSeed, static_cast<std::uint64_t>(n)).fill_normal(omega);
  Eigen::MatrixXd y = x * omega;

  for (int it = 0; it < max_iter; ++it) {
    const Eigen::MatrixXd q = thin_q(y);
    const Eigen::MatrixXd z = x.transpose() * q;  // z^T = q^T x
    Eigen::BDCSVD<Eigen::MatrixXd> small(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = small.singularValues();
    Eigen::MatrixXd u = q * small.matrixV();
    Eigen::MatrixXd v = small.matrixU();
    y.noalias() = x * v;

    bool converged = true;
    const double scale = s(0);
    for (Index j = 0; j < r && converged; ++j) {
      const double resid = (y.col(j) - s(j) * u.col(j)).norm();
      converged = resid <= kRitzTol * scale;
    }
    if (converged) {
      out.U = u.leftCols(r);
      out.S = s.head(r);
      out.V = v.leftCols(r);
      canonicalize_signs(out.U, out.V);
      return true;
    }
  }
  return false;
}

}  // namespace detail

TruncatedSVD svd_top_r(const Eigen::MatrixXd& x, Index r) {
  check_rank(x, r);
  const Index small_dim = std::min(x.rows(), x.cols());
  if (small_dim <= detail::kDenseCutoff || 4 * (r + std::max<Index>(10, r)) > small_dim) {
    return detail::svd_top_r_dense(x, r);
  }
  TruncatedSVD out;
  if (detail::svd_top_r_iterative(x, r, kMaxIterations, out)) return out;
  return detail::svd_top_r_dense(x, r);
}

Eigen::MatrixXd project_rows(const Projector& p, const Eigen::MatrixXd& x) {
  if (p.basis().rows() != x.rows()) {
    std::ostringstream msg;
    msg << "projector acts on " << p.basis().rows() << " rows but matrix has " << x.rows();
    throw DomainError(msg.str());
  }
  const Eigen::MatrixXd coeff = p.basis().transpose() * x;
  return p.basis() * coeff;
}

Eigen::MatrixXd ls_transform(const Eigen::MatrixXd& b, const Eigen::MatrixXd& a,
                             bool allow_pseudo_inverse) {
  if (b.rows() != a.rows()) {
    std::ostringstream msg;
    msg << "ls_transform: B has " << b.rows() << " rows, A has " << a.rows();
    throw DomainError(msg.str());
  }
  if (!b.allFinite() || !a.allFinite()) throw DataError("ls_transform: non-finite input");
  if (b.cols() == 0) return Eigen::MatrixXd::Zero(0, a.cols());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double s_max = s.size() > 0 ? s(0) : 0.0;
  const double s_min = s.size() == b.cols() ? s(s.size() - 1) : 0.0;
  const double cutoff = kRankTol * s_max;
  if (!(s_min > cutoff) && !allow_pseudo_inverse) {
    throw ConditioningError("ls_transform: B is numerically rank deficient (smallest singular "
                            "value " + std::to_string(s_min) + ")",
                            s_min);
  }
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  const Eigen::MatrixXd uta = svd.matrixU().transpose() * a;
  return svd.matrixV() * (inv.asDiagonal() * uta);
}

Eigen::VectorXd top_singular_values(const Eigen::MatrixXd& x, Index k) {
  check_rank(x, k);
  const bool wide = x.cols() > x.rows();
  const Index m = wide ? x.rows() : x.cols();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  if (wide) {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
  } else {
    gram.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  Eigen::VectorXd out(k);
  for (Index j = 0; j < k; ++j) out(j) = std::sqrt(std::max(es.eigenvalues()(m - 1 - j), 0.0));
  return out;
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& x) {
  if (x.cols() == 0 || x.rows() < x.cols()) {
    throw ConditioningError("orthonormal_basis: matrix cannot have full column rank", 0.0);
  }
  TruncatedSVD svd = svd_top_r(x, x.cols());
  const double s_min = svd.S(svd.S.size() - 1);
  if (!(s_min > kRankTol * svd.S(0))) {
    throw ConditioningError("orthonormal_basis: matrix is numerically rank deficient (smallest "
                            "singular value " + std::to_string(s_min) + ")",
                            s_min);
  }
  return std::move(svd.U);
}

}  // namespace appca
