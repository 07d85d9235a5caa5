#include "fixtures.hpp"
#include "steam/glm.hpp"
#include "steam/rng.hpp"

#include <doctest.h>

#include <random>

using namespace steam;

namespace {

struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
};

Problem problem(std::uint64_t seed, Eigen::Index n, const Eigen::VectorXd& beta)
{
  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Problem p;
  const Eigen::Index q = beta.size();
  p.X.resize(n, q);
  p.y.resize(n);
  p.w.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < q; ++j)
      p.X(i, j) = normal(rng);
    const double mu = 1.0 / (1.0 + std::exp(-p.X.row(i).dot(beta)));
    p.y[i] = unit(rng) < mu ? 1.0 : 0.0;
    p.w[i] = 0.5 + unit(rng);
  }
  return p;
}

//! Plain Newton-Raphson on the weighted log-likelihood, written independently
//! of the library (no step halving, no column screening).
Eigen::VectorXd newton(const Problem& p)
{
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p.X.cols());
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd mu =
      (1.0 + (-(p.X * b).array()).exp()).inverse().matrix();
    const Eigen::VectorXd g = p.X.transpose() * (p.w.array() * (p.y - mu).array()).matrix();
    const Eigen::VectorXd v = p.w.array() * mu.array() * (1.0 - mu.array());
    const Eigen::MatrixXd H = p.X.transpose() * v.asDiagonal() * p.X;
    b += H.ldlt().solve(g);
  }
  return b;
}

//! Gradient of the mean weighted log-likelihood with weights normalized to
//! sum to n.
Eigen::VectorXd mean_gradient(const Problem& p, const Eigen::VectorXd& b)
{
  const double n = static_cast<double>(p.y.size());
  const Eigen::VectorXd wn = p.w * (n / p.w.sum());
  const Eigen::VectorXd mu = (1.0 + (-(p.X * b).array()).exp()).inverse().matrix();
  return p.X.transpose() * (wn.array() * (p.y - mu).array()).matrix() / n;
}

Eigen::VectorXd true_beta()
{
  Eigen::VectorXd b(7);
  b << -0.3, 1.0, -0.8, 0.5, 0.0, 0.0, 0.05;
  return b;
}

} // namespace

TEST_CASE("weighted logistic MLE matches an independent Newton solver")
{
  const Problem p = problem(1, 400, true_beta());
  const Coefficients fit = fit_logistic(p.X, p.y, p.w);
  const Eigen::VectorXd ref = newton(p);
  CHECK((fit.values - ref).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(mean_gradient(p, fit.values).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fractional responses solve the score equations")
{
  Problem p = problem(2, 300, true_beta());
  for (Eigen::Index i = 0; i < p.y.size(); ++i)
    p.y[i] = 1.0 / (1.0 + std::exp(-p.X.row(i).dot(true_beta())));
  const Coefficients fit = fit_logistic(p.X, p.y, p.w);
  CHECK(mean_gradient(p, fit.values).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((fit.values - newton(p)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("complete separation raises a separation error")
{
  Problem p = problem(3, 100, true_beta());
  for (Eigen::Index i = 0; i < p.y.size(); ++i)
    p.y[i] = p.X(i, 1) > 0.0 ? 1.0 : 0.0;
  CHECK_THROWS_AS(fit_logistic(p.X, p.y, p.w), SeparationError);

  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(20, 1);
  CHECK_THROWS_AS(fit_logistic(ones, Eigen::VectorXd::Ones(20), Eigen::VectorXd::Ones(20)),
                  SeparationError);
}

TEST_CASE("adaptive lasso satisfies the KKT conditions at the selected lambda")
{
  const Problem p = problem(4, 300, true_beta());
  const Coefficients fit = fit_adaptive_lasso(p.X, p.y, p.w, 1.0);
  const PenaltyWeights pw = adaptive_penalty_weights(p.X, p.y, p.w, 1.0);
  const Eigen::VectorXd g = mean_gradient(p, fit.values);
  CHECK(std::abs(g[0]) < 1e-6);
  for (Eigen::Index j = 1; j < fit.values.size(); ++j) {
    const double bound = fit.lambda * pw.weights[j];
    if (fit.values[j] != 0.0)
      CHECK(std::abs(g[j] - bound * (fit.values[j] > 0 ? 1.0 : -1.0)) < 1e-5);
    else
      CHECK(std::abs(g[j]) <= bound + 1e-6);
  }
  CHECK(fit.lambda > 0.0);
}

TEST_CASE("the first grid lambda zeroes every penalized coefficient")
{
  const Problem p = problem(5, 300, true_beta());
  const PenaltyWeights pw = adaptive_penalty_weights(p.X, p.y, p.w, 1.0);
  const auto grid = lambda_grid(p.X, p.y, p.w, pw, 10, 1e-3);
  REQUIRE(grid.size() == 10);
  CHECK(grid.front() / grid.back() == doctest::Approx(1e3).epsilon(1e-9));
  const Coefficients top = fit_penalized_logistic(p.X, p.y, p.w, pw, grid.front() * 1.0001);
  CHECK(top.support.empty());
}

TEST_CASE("proximal Newton objective never decreases")
{
  const Problem p = problem(6, 300, true_beta());
  const PenaltyWeights pw = adaptive_penalty_weights(p.X, p.y, p.w, 1.0);
  const auto grid = lambda_grid(p.X, p.y, p.w, pw);
  for (double lambda : {grid[5], grid[20], grid[40]}) {
    FitTrace trace;
    fit_penalized_logistic(p.X, p.y, p.w, pw, lambda, nullptr, {}, &trace);
    REQUIRE(trace.objective.size() >= 2);
    for (std::size_t k = 1; k < trace.objective.size(); ++k)
      CHECK(trace.objective[k] >= trace.objective[k - 1] - 1e-12);
    for (std::size_t s = 0; s < trace.inner_starts.size(); ++s) {
      const std::size_t end =
        s + 1 < trace.inner_starts.size() ? trace.inner_starts[s + 1] : trace.inner_objective.size();
      for (std::size_t k = trace.inner_starts[s] + 1; k < end; ++k)
        CHECK(trace.inner_objective[k] >= trace.inner_objective[k - 1] - 1e-12);
    }
  }
}

TEST_CASE("BIC is -2 loglik + df log n")
{
  const Problem p = problem(7, 200, true_beta());
  const Coefficients fit = fit_adaptive_lasso(p.X, p.y, p.w, 1.0);
  const double n = static_cast<double>(p.y.size());
  const double expected = -2.0 * logistic_loglik(p.X, p.y, p.w, fit.values) +
                          static_cast<double>(fit.df()) * std::log(n);
  CHECK(bic(fit, p.X, p.y, p.w) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero initial estimates get the capped adaptive weight")
{
  Problem p = problem(8, 200, true_beta());
  p.X.col(4).setZero();
  const PenaltyWeights pw = adaptive_penalty_weights(p.X, p.y, p.w, 1.0);
  CHECK(pw.capped);
  CHECK(pw.weights[4] == AdaptiveLassoOptions{}.weight_cap);
}

TEST_CASE("fixed-lambda refit with unit weights reproduces the fit")
{
  const Problem p = problem(9, 300, true_beta());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(p.y.size());
  const Coefficients fit = fit_adaptive_lasso(p.X, p.y, ones, 1.0);
  const Coefficients again = fit_adaptive_lasso_at(p.X, p.y, ones, 1.0, fit.lambda, &fit.values);
  CHECK((fit.values - again.values).cwiseAbs().maxCoeff() < 1e-7);
}
