#include "opm/possibility_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opm {

namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

Matrix symmetrized(const Matrix& M) { return 0.5 * (M + M.transpose()); }

}  // namespace

double gaussian_possibility_value(const Eigen::LLT<Matrix>& cov_llt, const Vector& diff) {
  const Vector z = cov_llt.matrixL().solve(diff);
  return std::exp(std::max(-0.5 * z.squaredNorm(), kMinExponent));
}

double mahalanobis_squared(const Vector& x, const Vector& mean, const Matrix& cov) {
  if (x.size() != mean.size() || cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw InputError("mahalanobis_squared: dimension mismatch (x " + std::to_string(x.size()) + ", mean " +
                     std::to_string(mean.size()) + ", cov " + dims(cov.rows(), cov.cols()) + ")");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("mahalanobis_squared: covariance is not positive-definite");
  return llt.matrixL().solve(x - mean).squaredNorm();
}

double gaussian_possibility_value(const Vector& x, const Vector& mean, const Matrix& cov) {
  return std::exp(std::max(-0.5 * mahalanobis_squared(x, mean, cov), kMinExponent));
}

double eval(const GaussianPossibility& g, const Vector& x) {
  return g.weight * gaussian_possibility_value(x, g.mean, g.cov);
}

double eval(const MaxMixture& mix, const Vector& x) {
  double value = mix.flat_weight;
  for (const auto& c : mix.components) {
    if (c.weight <= value) continue;
    value = std::max(value, eval(c, x));
  }
  return value;
}

double sup(const MaxMixture& mix) {
  double value = mix.flat_weight;
  for (const auto& c : mix.components) value = std::max(value, c.weight);
  return value;
}

void require_psd(const Matrix& M, const std::string& what) {
  if (M.rows() != M.cols()) throw InputError(what + " must be square, got " + dims(M.rows(), M.cols()));
  if (M.size() == 0) return;
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InputError(what + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(M), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) throw InputError(what + " must be positive semi-definite");
}

void validate(const GaussianPossibility& g) {
  if (!(g.weight > 0.0 && g.weight <= 1.0)) {
    throw InputError("component weight must lie in (0,1], got " + std::to_string(g.weight));
  }
  if (g.cov.rows() != g.mean.size() || g.cov.cols() != g.mean.size()) {
    throw InputError("component covariance is " + dims(g.cov.rows(), g.cov.cols()) + " for a mean of size " +
                     std::to_string(g.mean.size()));
  }
  require_psd(g.cov, "component covariance");
  Eigen::LLT<Matrix> llt(g.cov);
  if (llt.info() != Eigen::Success) throw InputError("component covariance must be positive-definite");
}

namespace detail {

GaussianPossibility predict_unchecked(const GaussianPossibility& g, const Matrix& F, const Matrix& Q, double gain) {
  return GaussianPossibility{gain * g.weight, F * g.mean, symmetrized(F * g.cov * F.transpose() + Q)};
}

}  // namespace detail

GaussianPossibility predict_gaussian(const GaussianPossibility& g, const Matrix& F, const Matrix& Q, double gain) {
  const auto n = g.mean.size();
  if (F.rows() != n || F.cols() != n) {
    throw InputError("predict_gaussian: transition matrix is " + dims(F.rows(), F.cols()) + ", state dimension " +
                     std::to_string(n));
  }
  if (Q.rows() != n || Q.cols() != n) {
    throw InputError("predict_gaussian: process noise is " + dims(Q.rows(), Q.cols()) + ", state dimension " +
                     std::to_string(n));
  }
  require_psd(Q, "process noise covariance");
  if (!(gain > 0.0 && gain <= 1.0)) throw InputError("predict_gaussian: gain must lie in (0,1]");
  return detail::predict_unchecked(g, F, Q, gain);
}

KalmanUpdater::KalmanUpdater(const GaussianPossibility& prior, const Matrix& H, const Matrix& R)
    : prior_weight_(prior.weight), prior_mean_(prior.mean) {
  const auto n = prior.mean.size();
  if (H.cols() != n || R.rows() != H.rows() || R.cols() != H.rows()) {
    throw InputError("update: observation model H " + dims(H.rows(), H.cols()) + ", R " + dims(R.rows(), R.cols()) +
                     " inconsistent with state dimension " + std::to_string(n));
  }
  const Matrix VHt = prior.cov * H.transpose();
  predicted_obs_ = H * prior.mean;
  innovation_cov_ = symmetrized(H * VHt + R);
  innovation_llt_.compute(innovation_cov_);
  if (innovation_llt_.info() != Eigen::Success) {
    throw NumericalError("update: innovation covariance is singular or not positive-definite");
  }
  gain_ = innovation_llt_.solve(VHt.transpose()).transpose();
  posterior_cov_ = symmetrized((Matrix::Identity(n, n) - gain_ * H) * prior.cov);
}

double KalmanUpdater::likelihood(const Vector& y) const {
  if (y.size() != predicted_obs_.size()) {
    throw InputError("update: observation has size " + std::to_string(y.size()) + ", expected " +
                     std::to_string(predicted_obs_.size()));
  }
  return gaussian_possibility_value(innovation_llt_, y - predicted_obs_);
}

GaussianUpdate KalmanUpdater::apply(const Vector& y) const {
  const double lik = likelihood(y);
  return GaussianUpdate{GaussianPossibility{prior_weight_, prior_mean_ + gain_ * (y - predicted_obs_), posterior_cov_},
                        lik};
}

GaussianUpdate update_gaussian(const GaussianPossibility& g, const Vector& y, const Matrix& H, const Matrix& R) {
  require_psd(R, "observation noise covariance");
  return KalmanUpdater(g, H, R).apply(y);
}

}  // namespace opm
