#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace opm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an operation receives inconsistent dimensions or an invalid model.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical factorization fails (e.g. singular innovation covariance).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponents below this are clamped so that likelihoods never underflow to an exact zero.
inline constexpr double kMinExponent = -745.0;

/// Weighted Gaussian possibility function  w * exp(-1/2 (x-m)' V^-1 (x-m)).
///
/// Unlike a density there is no normalizing constant: the supremum over x is
/// exactly `weight`, attained at `mean`.
struct GaussianPossibility {
  double weight = 1.0;
  Vector mean;
  Matrix cov;
};

/// Pointwise maximum of weighted Gaussian possibilities and an optional
/// constant term `flat_weight` (the possibility function flat_weight * 1_S).
struct MaxMixture {
  std::vector<GaussianPossibility> components;
  double flat_weight = 0.0;
};

/// Result of a single-component data update.
struct GaussianUpdate {
  GaussianPossibility posterior;
  /// Unnormalized Gaussian possibility  exp(-1/2 (y-Hm)' S^-1 (y-Hm)), in (0,1].
  double likelihood = 0.0;
};

/// Quantities of a Kalman update that do not depend on the observation value.
///
/// A component is typically updated against every observation of a scan, so
/// the gain and posterior covariance are factored once and reused.
class KalmanUpdater {
 public:
  KalmanUpdater(const GaussianPossibility& prior, const Matrix& H, const Matrix& R);

  [[nodiscard]] GaussianUpdate apply(const Vector& y) const;
  /// Likelihood only; skips building the posterior mean.
  [[nodiscard]] double likelihood(const Vector& y) const;
  [[nodiscard]] const Vector& predicted_observation() const { return predicted_obs_; }
  [[nodiscard]] const Matrix& innovation_cov() const { return innovation_cov_; }
  [[nodiscard]] const Matrix& posterior_cov() const { return posterior_cov_; }

 private:
  double prior_weight_;
  Vector prior_mean_;
  Vector predicted_obs_;
  Matrix innovation_cov_;
  Eigen::LLT<Matrix> innovation_llt_;
  Matrix gain_;
  Matrix posterior_cov_;
};

/// exp(-1/2 d' P^-1 d) given the Cholesky factor of P, with the exponent clamped at kMinExponent.
[[nodiscard]] double gaussian_possibility_value(const Eigen::LLT<Matrix>& cov_llt, const Vector& diff);

/// Unweighted Gaussian possibility  exp(-1/2 (x-m)' V^-1 (x-m)).
[[nodiscard]] double gaussian_possibility_value(const Vector& x, const Vector& mean, const Matrix& cov);

/// Squared Mahalanobis distance (x-m)' V^-1 (x-m).
[[nodiscard]] double mahalanobis_squared(const Vector& x, const Vector& mean, const Matrix& cov);

/// Value of one weighted component at x.
[[nodiscard]] double eval(const GaussianPossibility& g, const Vector& x);

/// max(flat_weight, max_i w_i N(x; m_i, V_i)).
[[nodiscard]] double eval(const MaxMixture& mix, const Vector& x);

/// Supremum over the state space: max(flat_weight, max_i w_i).
[[nodiscard]] double sup(const MaxMixture& mix);

/// Sup-convolution of g with gain * N(x; F x', Q):  (gain * w, F m, F V F' + Q).
[[nodiscard]] GaussianPossibility predict_gaussian(const GaussianPossibility& g, const Matrix& F, const Matrix& Q,
                                                   double gain);

/// Kalman update of one component. The input weight is carried through
/// unchanged; callers combine it with the returned likelihood.
[[nodiscard]] GaussianUpdate update_gaussian(const GaussianPossibility& g, const Vector& y, const Matrix& H,
                                             const Matrix& R);

namespace detail {
/// predict_gaussian without the model checks; callers validate F and Q once up front.
[[nodiscard]] GaussianPossibility predict_unchecked(const GaussianPossibility& g, const Matrix& F, const Matrix& Q,
                                                   double gain);
}  // namespace detail

/// Throws InputError unless weight in (0,1] and cov is symmetric positive-definite.
void validate(const GaussianPossibility& g);

/// Throws InputError unless M is square, symmetric and positive semi-definite.
void require_psd(const Matrix& M, const std::string& what);

}  // namespace opm
