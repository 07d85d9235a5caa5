#pragma once

#include "steam/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace steam {

enum class Link { logistic };

//! A fitted sparse linear predictor; index 0 is the intercept.
struct Coefficients {
  Eigen::VectorXd values;
  //! Non-intercept indices with a nonzero value.
  std::vector<Eigen::Index> support;
  //! Penalty level the fit was computed at (0 for unpenalized fits).
  double lambda = 0.0;
  //! Power of the adaptive weights 1/|initial|^gamma.
  double gamma = 1.0;
  //! Some adaptive weight hit the cap because the initial estimate was ~0.
  bool weight_capped = false;
  //! The initial estimate needed the ridge fallback.
  bool ridge_initial = false;

  static Coefficients from_values(Eigen::VectorXd values, double lambda = 0.0,
                                  double gamma = 1.0);
  Eigen::Index df() const { return static_cast<Eigen::Index>(support.size()) + 1; }
};

class SeparationError : public Error {
public:
  explicit SeparationError(const std::string& what)
    : Error(ErrorCode::separation, what) {}
};

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
    : Error(ErrorCode::non_convergence, what), trace_(std::move(trace)) {}
  //! Gradient max-norm (or coefficient change) per iteration.
  const std::vector<double>& trace() const noexcept { return trace_; }

private:
  std::vector<double> trace_;
};

struct LogisticOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  //! Any |coefficient| above this during Newton iterations is taken as
  //! complete separation.
  double separation_bound = 30.0;
  //! Ridge penalty on the per-observation scale, i.e. the objective is
  //! mean weighted log-likelihood - ridge/2 * |beta_{-0}|^2.
  double ridge = 0.0;
};

//! Sum over rows of w_i * l(beta; y_i, x_i) for the logistic link, with the
//! weights rescaled to sum to the number of rows.
double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& weights, const Eigen::VectorXd& beta);

//! Weighted maximum likelihood by Newton-Raphson (IRLS) with step halving.
//! Responses may be fractional in [0,1]. Non-intercept columns with zero
//! variance are dropped (coefficient 0).
Coefficients fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights, const LogisticOptions& options = {});

struct AdaptiveLassoOptions {
  double weight_cap = 1e6;
  //! Coordinate-wise max change between Newton iterations.
  double tolerance = 1e-7;
  int max_sweeps = 1000;
  int max_newton = 100;
  std::size_t grid_size = 50;
  double grid_min_ratio = 1e-4;
  //! Ridge fallback penalty for the initial estimate, per observation.
  double ridge_fallback = 1e-4;
};

//! Adaptive penalty weights 1/|initial_j|^gamma (capped) derived from an
//! unpenalized fit, or a ridge fit when that fails.
struct PenaltyWeights {
  Eigen::VectorXd weights;
  Eigen::VectorXd initial;
  bool capped = false;
  bool ridge = false;
};

PenaltyWeights adaptive_penalty_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& weights, double gamma,
                                        const AdaptiveLassoOptions& options = {});

//! Objective values recorded while fitting one penalty level.
struct FitTrace {
  //! Penalized objective after each proximal Newton iteration (starts with
  //! the value at the warm start).
  std::vector<double> objective;
  //! Quadratic-model objective after every coordinate sweep, all Newton
  //! iterations concatenated; `inner_starts` marks where each begins.
  std::vector<double> inner_objective;
  std::vector<std::size_t> inner_starts;
};

//! Maximizes mean weighted log-likelihood - lambda * sum_j pw_j |beta_j| by
//! proximal Newton with coordinate descent on each quadratic model and a
//! backtracking line search. The intercept is never penalized.
Coefficients fit_penalized_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& weights,
                                    const PenaltyWeights& penalty, double lambda,
                                    const Eigen::VectorXd* warm_start = nullptr,
                                    const AdaptiveLassoOptions& options = {},
                                    FitTrace* trace = nullptr);

//! Log-spaced descending grid from the smallest lambda that zeroes every
//! penalized coefficient down to `min_ratio` times it.
std::vector<double> lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& weights, const PenaltyWeights& penalty,
                                std::size_t size = 50, double min_ratio = 1e-4);

//! Warm-started fits along a descending grid. The path stops early at the
//! first lambda whose fit separates.
std::vector<Coefficients> adaptive_lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& weights,
                                              const PenaltyWeights& penalty,
                                              std::span<const double> grid,
                                              const AdaptiveLassoOptions& options = {});

//! -2 * weighted log-likelihood + df * log(n_eff) with n_eff the sum of the
//! normalized weights (= number of rows).
double bic(const Coefficients& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           const Eigen::VectorXd& weights);

//! Minimum-BIC fit; ties go to the larger lambda.
Coefficients select_lambda_bic(std::span<const Coefficients> path, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y, const Eigen::VectorXd& weights);

//! Adaptive LASSO with BIC tuning. An empty grid selects the default
//! 50-point grid.
Coefficients fit_adaptive_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& weights, double gamma,
                                std::span<const double> lambda_grid = {},
                                const AdaptiveLassoOptions& options = {});

//! Adaptive LASSO at a fixed lambda with weights re-anchored at the weighted
//! unpenalized fit. Used for perturbed refits.
Coefficients fit_adaptive_lasso_at(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& weights, double gamma, double lambda,
                                   const Eigen::VectorXd* warm_start = nullptr,
                                   const AdaptiveLassoOptions& options = {});

inline double expit(double u)
{
  return u >= 0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

} // namespace steam
