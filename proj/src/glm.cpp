#include "steam/glm.hpp"

#include "steam/simd_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace steam {

namespace {

Eigen::VectorXd normalized_weights(const Eigen::VectorXd& w, Eigen::Index n)
{
  if (w.size() != n)
    throw Error(ErrorCode::invalid_argument, "observation weights length differs from rows");
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total) || (w.array() < 0.0).any())
    throw Error(ErrorCode::invalid_argument, "observation weights must be nonnegative with positive sum");
  return w * (static_cast<double>(n) / total);
}

void check_response(const Eigen::MatrixXd& X, const Eigen::VectorXd& y)
{
  if (y.size() != X.rows())
    throw Error(ErrorCode::invalid_argument, "response length differs from rows");
  if (X.cols() < 1 || X.rows() < 1)
    throw Error(ErrorCode::invalid_argument, "empty design");
  if ((y.array() < 0.0).any() || (y.array() > 1.0).any())
    throw Error(ErrorCode::invalid_argument, "response outside [0,1]");
}

// sum_i w_i (y_i eta_i - softplus(eta_i)) with w already normalized.
double loglik_normalized(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& w)
{
  const double* e = eta.data();
  const double* yy = y.data();
  const double* ww = w.data();
  const Eigen::Index n = eta.size();
  double total = 0.0;
#pragma omp simd reduction(+ : total)
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = e[i];
    const double sp = (a > 0.0 ? a : 0.0) + log1p(exp(-std::fabs(a)));
    total += ww[i] * (yy[i] * a - sp);
  }
  return total;
}

void fitted_probabilities(const Eigen::VectorXd& eta, Eigen::VectorXd& p)
{
  p.resize(eta.size());
  const double* e = eta.data();
  double* out = p.data();
  const Eigen::Index n = eta.size();
#pragma omp simd
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = exp(-std::fabs(e[i]));
    out[i] = e[i] >= 0.0 ? 1.0 / (1.0 + z) : z / (1.0 + z);
  }
}

std::vector<Eigen::Index> varying_columns(const Eigen::MatrixXd& X)
{
  std::vector<Eigen::Index> active{0};
  for (Eigen::Index j = 1; j < X.cols(); ++j) {
    const double first = X(0, j);
    if ((X.col(j).array() != first).any())
      active.push_back(j);
  }
  return active;
}

double penalty_term(const Eigen::VectorXd& beta, const Eigen::VectorXd& pw, double lambda)
{
  if (lambda == 0.0)
    return 0.0;
  double total = 0.0;
  for (Eigen::Index j = 1; j < beta.size(); ++j)
    total += pw[j] * std::fabs(beta[j]);
  return lambda * total;
}

} // namespace

Coefficients Coefficients::from_values(Eigen::VectorXd values, double lambda, double gamma)
{
  Coefficients c;
  c.values = std::move(values);
  c.lambda = lambda;
  c.gamma = gamma;
  for (Eigen::Index j = 1; j < c.values.size(); ++j) {
    if (c.values[j] != 0.0)
      c.support.push_back(j);
  }
  return c;
}

double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& weights, const Eigen::VectorXd& beta)
{
  check_response(X, y);
  const Eigen::VectorXd w = normalized_weights(weights, X.rows());
  const Eigen::VectorXd eta = X * beta;
  return loglik_normalized(eta, y, w);
}

Coefficients fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& weights, const LogisticOptions& options)
{
  check_response(X, y);
  const Eigen::Index n = X.rows();
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd w = normalized_weights(weights, n);
  if (options.ridge <= 0.0) {
    bool all_one = true;
    bool all_zero = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (w[i] > 0.0) {
        all_one = all_one && y[i] >= 1.0;
        all_zero = all_zero && y[i] <= 0.0;
      }
    }
    if (all_one || all_zero)
      throw SeparationError("outcome takes a single value; the likelihood has no finite "
                            "maximizer (use a penalized fit)");
  }
  const auto active = varying_columns(X);
  const auto q = static_cast<Eigen::Index>(active.size());

  Eigen::MatrixXd Xa(n, q);
  for (Eigen::Index k = 0; k < q; ++k)
    Xa.col(k) = X.col(active[static_cast<std::size_t>(k)]);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p;
  auto objective = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& e) {
    double value = loglik_normalized(e, y, w) / nd;
    if (options.ridge > 0.0)
      value -= 0.5 * options.ridge * b.tail(q - 1).squaredNorm();
    return value;
  };
  double current = objective(beta, eta);
  std::vector<double> trace;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    fitted_probabilities(eta, p);
    Eigen::VectorXd grad = Xa.transpose() * (w.array() * (y - p).array()).matrix() / nd;
    if (options.ridge > 0.0)
      grad.tail(q - 1) -= options.ridge * beta.tail(q - 1);
    const double gnorm = grad.lpNorm<Eigen::Infinity>();
    trace.push_back(gnorm);
    if (gnorm <= options.gradient_tolerance) {
      Eigen::VectorXd full = Eigen::VectorXd::Zero(X.cols());
      for (Eigen::Index k = 0; k < q; ++k)
        full[active[static_cast<std::size_t>(k)]] = beta[k];
      return Coefficients::from_values(std::move(full));
    }
    const Eigen::ArrayXd curvature = w.array() * p.array() * (1.0 - p.array());
    Eigen::MatrixXd H = Xa.transpose() * (Xa.array().colwise() * curvature).matrix() / nd;
    if (options.ridge > 0.0)
      H.diagonal().tail(q - 1).array() += options.ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || !ldlt.isPositive()) {
      if (options.ridge == 0.0 && (beta.array().abs() > 0.5 * options.separation_bound).any())
        throw SeparationError("complete separation suspected (singular information); use penalization");
      throw Error(ErrorCode::numerical, "ill-conditioned information matrix in logistic fit");
    }

    double t = 1.0;
    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_eta;
    double value = 0.0;
    for (;;) {
      candidate = beta + t * step;
      candidate_eta = Xa * candidate;
      value = objective(candidate, candidate_eta);
      if (value >= current - 1e-14 * std::fabs(current) || t < 1e-10)
        break;
      t *= 0.5;
    }
    beta = std::move(candidate);
    eta = std::move(candidate_eta);
    current = value;
    if (options.ridge == 0.0 && beta.lpNorm<Eigen::Infinity>() > options.separation_bound)
      throw SeparationError("complete separation detected (|coefficient| > " +
                            std::to_string(options.separation_bound) +
                            "); use a penalized fit");
  }
  throw ConvergenceError("logistic fit did not converge in " +
                           std::to_string(options.max_iterations) + " iterations",
                         std::move(trace));
}

PenaltyWeights adaptive_penalty_weights(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& weights, double gamma,
                                        const AdaptiveLassoOptions& options)
{
  if (gamma < 0.0)
    throw Error(ErrorCode::invalid_argument, "gamma must be nonnegative");
  PenaltyWeights out;
  try {
    out.initial = fit_logistic(X, y, weights).values;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::separation && e.code() != ErrorCode::numerical &&
        e.code() != ErrorCode::non_convergence)
      throw;
    LogisticOptions ridge;
    ridge.ridge = options.ridge_fallback;
    out.initial = fit_logistic(X, y, weights, ridge).values;
    out.ridge = true;
  }
  out.weights = Eigen::VectorXd::Zero(X.cols());
  for (Eigen::Index j = 1; j < X.cols(); ++j) {
    const double a = std::fabs(out.initial[j]);
    double pw = gamma == 0.0 ? 1.0 : (a > 0.0 ? std::pow(a, -gamma) : options.weight_cap);
    if (pw >= options.weight_cap) {
      pw = options.weight_cap;
      out.capped = true;
    }
    out.weights[j] = pw;
  }
  return out;
}

Coefficients fit_penalized_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& weights, const PenaltyWeights& penalty,
                                    double lambda, const Eigen::VectorXd* warm_start,
                                    const AdaptiveLassoOptions& options, FitTrace* trace)
{
  check_response(X, y);
  if (lambda < 0.0)
    throw Error(ErrorCode::invalid_argument, "lambda must be nonnegative");
  const Eigen::Index n = X.rows();
  const Eigen::Index q = X.cols();
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd w = normalized_weights(weights, n);
  const Eigen::VectorXd& pw = penalty.weights;
  if (pw.size() != q)
    throw Error(ErrorCode::invalid_argument, "penalty weights length differs from columns");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q);
  if (warm_start) {
    beta = *warm_start;
  } else {
    const double ybar = std::clamp(w.dot(y) / nd, 1e-6, 1.0 - 1e-6);
    beta[0] = std::log(ybar / (1.0 - ybar));
  }
  Eigen::VectorXd eta = X * beta;
  auto objective = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& e) {
    return loglik_normalized(e, y, w) / nd - penalty_term(b, pw, lambda);
  };
  double current = objective(beta, eta);
  if (trace)
    trace->objective.push_back(current);

  const double inner_tol = options.tolerance * 1e-3;
  Eigen::VectorXd p;
  Eigen::VectorXd d(q);
  Eigen::VectorXd Hd(q);
  for (int outer = 0; outer < options.max_newton; ++outer) {
    fitted_probabilities(eta, p);
    const Eigen::VectorXd g = X.transpose() * (w.array() * (y - p).array()).matrix() / nd;
    const Eigen::ArrayXd curvature = w.array() * p.array() * (1.0 - p.array());
    const Eigen::MatrixXd H = X.transpose() * (X.array().colwise() * curvature).matrix() / nd;

    d.setZero();
    Hd.setZero();
    auto model = [&]() {
      double value = g.dot(d) - 0.5 * d.dot(Hd);
      for (Eigen::Index j = 1; j < q; ++j)
        value -= lambda * pw[j] * std::fabs(beta[j] + d[j]);
      return value;
    };
    if (trace) {
      trace->inner_starts.push_back(trace->inner_objective.size());
      trace->inner_objective.push_back(model());
    }
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      double max_change = 0.0;
      for (Eigen::Index j = 0; j < q; ++j) {
        const double hjj = H(j, j);
        double target;
        if (hjj <= 1e-300) {
          target = j == 0 ? beta[j] : 0.0;
        } else {
          const double z = hjj * (beta[j] + d[j]) + g[j] - Hd[j];
          if (j == 0) {
            target = z / hjj;
          } else {
            const double thr = lambda * pw[j];
            target = z > thr ? (z - thr) / hjj : (z < -thr ? (z + thr) / hjj : 0.0);
          }
        }
        const double delta = (target - beta[j]) - d[j];
        if (delta != 0.0) {
          d[j] += delta;
          Hd += H.col(j) * delta;
          max_change = std::max(max_change, std::fabs(delta));
        }
      }
      if (trace)
        trace->inner_objective.push_back(model());
      if (max_change <= inner_tol)
        break;
    }

    double t = 1.0;
    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_eta;
    double value = current;
    bool accepted = false;
    while (t >= 1e-10) {
      candidate = beta + t * d;
      candidate_eta = X * candidate;
      value = objective(candidate, candidate_eta);
      if (value >= current) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (trace)
        trace->objective.push_back(current);
      break;
    }
    const double change = (candidate - beta).lpNorm<Eigen::Infinity>();
    beta = std::move(candidate);
    eta = std::move(candidate_eta);
    current = value;
    if (trace)
      trace->objective.push_back(current);
    if (beta.lpNorm<Eigen::Infinity>() > 30.0)
      throw SeparationError("penalized fit diverging (|coefficient| > 30) at lambda " +
                            std::to_string(lambda));
    if (change <= options.tolerance)
      break;
  }

  Coefficients out = Coefficients::from_values(std::move(beta), lambda);
  out.weight_capped = penalty.capped;
  out.ridge_initial = penalty.ridge;
  return out;
}

std::vector<double> lambda_grid(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& weights, const PenaltyWeights& penalty,
                                std::size_t size, double min_ratio)
{
  check_response(X, y);
  if (size == 0)
    throw Error(ErrorCode::invalid_argument, "lambda grid needs at least one point");
  const Eigen::Index n = X.rows();
  const Eigen::VectorXd w = normalized_weights(weights, n);
  const double ybar = w.dot(y) / static_cast<double>(n);
  const Eigen::VectorXd g = X.transpose() * (w.array() * (y.array() - ybar)).matrix() /
                            static_cast<double>(n);
  double lambda_max = 0.0;
  for (Eigen::Index j = 1; j < X.cols(); ++j) {
    if (penalty.weights[j] > 0.0)
      lambda_max = std::max(lambda_max, std::fabs(g[j]) / penalty.weights[j]);
  }
  std::vector<double> grid;
  if (lambda_max <= 0.0) {
    grid.push_back(0.0);
    return grid;
  }
  grid.reserve(size);
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * min_ratio);
  for (std::size_t k = 0; k < size; ++k) {
    const double frac = size == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(size - 1);
    grid.push_back(k == 0 ? lambda_max : std::exp(log_max + frac * (log_min - log_max)));
  }
  return grid;
}

std::vector<Coefficients> adaptive_lasso_path(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                              const Eigen::VectorXd& weights,
                                              const PenaltyWeights& penalty,
                                              std::span<const double> grid,
                                              const AdaptiveLassoOptions& options)
{
  if (grid.empty())
    throw Error(ErrorCode::invalid_argument, "empty lambda grid");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k] > grid[k - 1])
      throw Error(ErrorCode::invalid_argument, "lambda grid must be sorted descending");
  }
  std::vector<Coefficients> path;
  path.reserve(grid.size());
  for (double lambda : grid) {
    try {
      const Eigen::VectorXd* warm = path.empty() ? nullptr : &path.back().values;
      path.push_back(fit_penalized_logistic(X, y, weights, penalty, lambda, warm, options));
    } catch (const SeparationError&) {
      if (path.empty())
        throw;
      break;
    }
  }
  return path;
}

double bic(const Coefficients& fit, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
           const Eigen::VectorXd& weights)
{
  const double ll = logistic_loglik(X, y, weights, fit.values);
  return -2.0 * ll + static_cast<double>(fit.df()) * std::log(static_cast<double>(X.rows()));
}

Coefficients select_lambda_bic(std::span<const Coefficients> path, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y, const Eigen::VectorXd& weights)
{
  if (path.empty())
    throw Error(ErrorCode::invalid_argument, "empty path");
  std::size_t best = 0;
  double best_value = bic(path[0], X, y, weights);
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double value = bic(path[k], X, y, weights);
    if (value < best_value || (value == best_value && path[k].lambda > path[best].lambda)) {
      best = k;
      best_value = value;
    }
  }
  return path[best];
}

Coefficients fit_adaptive_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& weights, double gamma,
                                std::span<const double> grid, const AdaptiveLassoOptions& options)
{
  const PenaltyWeights penalty = adaptive_penalty_weights(X, y, weights, gamma, options);
  std::vector<double> own;
  if (grid.empty()) {
    own = lambda_grid(X, y, weights, penalty, options.grid_size, options.grid_min_ratio);
    grid = own;
  }
  auto path = adaptive_lasso_path(X, y, weights, penalty, grid, options);
  Coefficients best = select_lambda_bic(path, X, y, weights);
  best.gamma = gamma;
  return best;
}

Coefficients fit_adaptive_lasso_at(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& weights, double gamma, double lambda,
                                   const Eigen::VectorXd* warm_start,
                                   const AdaptiveLassoOptions& options)
{
  const PenaltyWeights penalty = adaptive_penalty_weights(X, y, weights, gamma, options);
  Coefficients fit = fit_penalized_logistic(X, y, weights, penalty, lambda, warm_start, options);
  fit.gamma = gamma;
  return fit;
}

} // namespace steam
