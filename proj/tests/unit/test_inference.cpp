#include "fixtures.hpp"
#include "steam/inference.hpp"

#include <doctest.h>

using namespace steam;

TEST_CASE("perturbation weights have mean 1, variance 1 and support [0, 4]")
{
  Rng rng(1);
  const Eigen::VectorXd g = draw_perturbation_weights(400000, rng);
  const double mean = g.mean();
  const double var = (g.array() - mean).square().sum() / static_cast<double>(g.size() - 1);
  CHECK(mean == doctest::Approx(1.0).epsilon(0.01));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  CHECK(g.minCoeff() >= 0.0);
  CHECK(g.maxCoeff() <= 4.0);
}

TEST_CASE("perturbation rows do not depend on the number of draws")
{
  const Eigen::MatrixXd small = perturbation_matrix(3, 50, 9);
  const Eigen::MatrixXd large = perturbation_matrix(10, 50, 9);
  CHECK(small == large.topRows(3));
}

TEST_CASE("type-7 quantiles")
{
  CHECK(quantile7({1, 2, 3, 4, 10}, 0.9) == doctest::Approx(7.6));
  CHECK(quantile7({1, 2, 3, 4, 10}, 0.5) == 3.0);
  CHECK(quantile7({5, 1}, 0.25) == doctest::Approx(2.0));
  CHECK(quantile7({3}, 0.3) == 3.0);
  CHECK_THROWS_AS(quantile7({}, 0.5), Error);
}

TEST_CASE("draw summaries and recentering")
{
  PerturbationDraws d;
  d.names = {"a"};
  d.draws.resize(101, 1);
  for (int b = 0; b <= 100; ++b)
    d.draws(b, 0) = b / 100.0;
  const auto s = summarize_draws(d, 0.9);
  REQUIRE(s.size() == 1);
  CHECK(s[0].name == "a");
  CHECK(s[0].lower == doctest::Approx(0.05));
  CHECK(s[0].upper == doctest::Approx(0.95));
  const ScalarSummary r = recenter(s[0], 0.5, 0.6);
  CHECK(r.lower == doctest::Approx(0.15));
  CHECK(r.upper == doctest::Approx(1.05));
  CHECK(r.se == s[0].se);
  d.draws.conservativeResize(99, 1);
  CHECK_THROWS_AS(summarize_draws(d), Error);
}

TEST_CASE("ROC at a false positive rate interpolates")
{
  const std::vector<RocPoint> roc{{0.0, 1.0, 1.0}, {0.5, 0.8, 0.4}, {1.0, 0.0, 0.0}};
  CHECK(roc_at_fpr(roc, 1.0) == 1.0);
  CHECK(roc_at_fpr(roc, 0.4) == 0.8);
  CHECK(roc_at_fpr(roc, 0.2) == doctest::Approx(0.4));
  CHECK(roc_at_fpr(roc, 0.7) == doctest::Approx(0.9));
  CHECK(roc_at_fpr(roc, 0.0) == 0.0);
}

TEST_CASE("scalar names line up with report scalars")
{
  const std::vector<double> u0{0.05, 0.1};
  const auto names = perturbation_scalar_names(u0);
  CHECK(names.size() == 2 + 8 + 101);
  CHECK(names[2] == "cutoff@0.05");
  CHECK(names[7] == "tpr@0.1");
  CHECK(names.back() == "roc@1.00");
}
