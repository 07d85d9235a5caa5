#include "fixtures.hpp"
#include "steam/scores.hpp"

#include <doctest.h>

#include <random>

using namespace steam;

namespace {

//! Lattice and cohort percentiles by the sorted-ECDF route.
RankedScores ecdf_route(const Eigen::VectorXd& beta, const Eigen::MatrixXd& target,
                        const Eigen::MatrixXd& cohort)
{
  const EcdfEvaluator ecdf = target_ecdf(beta, target);
  return {TargetLattice::from_ecdf(ecdf), percentile_scores(beta, cohort, ecdf)};
}

void check_same(const RankedScores& a, const RankedScores& b)
{
  CHECK(a.lattice.size == b.lattice.size);
  CHECK(a.lattice.rank == b.lattice.rank);
  CHECK(a.lattice.count == b.lattice.count);
  CHECK(a.cohort.rank == b.cohort.rank);
  CHECK(a.cohort.percentile == b.cohort.percentile);
  CHECK(a.cohort.raw == b.cohort.raw);
}

Eigen::MatrixXd design(std::uint64_t seed, Eigen::Index rows, bool integer)
{
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(rows, 4);
  for (Eigen::Index i = 0; i < rows; ++i) {
    z(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < 4; ++j)
      z(i, j) = integer ? std::round(2.0 * normal(rng)) : normal(rng);
  }
  return z;
}

} // namespace

TEST_CASE("ECDF counts values at or below the query")
{
  const EcdfEvaluator F({3.0, 1.0, 2.0, 2.0});
  CHECK(F(0.5) == 0.0);
  CHECK(F(1.0) == 0.25);
  CHECK(F(2.0) == 0.75);
  CHECK(F(2.5) == 0.75);
  CHECK(F(3.0) == 1.0);
  CHECK(F.count_le(2.0) == 3);
}

TEST_CASE("percentiles are rank over target size")
{
  Eigen::MatrixXd target(4, 2);
  target << 1, 0.1, 1, 0.4, 1, 0.2, 1, 0.3;
  Eigen::MatrixXd cohort(3, 2);
  cohort << 1, 0.25, 1, 0.0, 1, 1.0;
  Eigen::VectorXd beta(2);
  beta << 0.0, 1.0;
  const auto ecdf = target_ecdf(beta, target);
  const ScoreSet s = percentile_scores(beta, cohort, ecdf);
  CHECK(s.rank == std::vector<Eigen::Index>{2, 0, 4});
  CHECK(s.percentile[0] == 0.5);
  CHECK(s.percentile[1] == 0.0);
  CHECK(s.percentile[2] == 1.0);
}

TEST_CASE("ranked_scores equals the ECDF route on tie-free scores")
{
  Eigen::VectorXd beta(4);
  beta << 0.1, 0.7, -0.4, 0.2;
  check_same(ranked_scores(beta, design(1, 3000, false), design(2, 200, false)),
             ecdf_route(beta, design(1, 3000, false), design(2, 200, false)));
}

TEST_CASE("ranked_scores equals the ECDF route with tied scores")
{
  Eigen::VectorXd beta(4);
  beta << 0.0, 1.0, 2.0, -1.0;
  const Eigen::MatrixXd target = design(3, 2000, true);
  const Eigen::MatrixXd cohort = design(4, 150, true);
  const RankedScores fast = ranked_scores(beta, target, cohort);
  check_same(fast, ecdf_route(beta, target, cohort));
  CHECK(fast.lattice.rank.size() < 2000);
}

TEST_CASE("ranked_scores handles cohort values tied with target values")
{
  Eigen::VectorXd beta(4);
  beta << 0.3, 1.0, 0.5, -0.25;
  Eigen::MatrixXd target = design(5, 500, false);
  Eigen::MatrixXd cohort = design(6, 50, false);
  cohort.topRows(10) = target.topRows(10);
  check_same(ranked_scores(beta, target, cohort), ecdf_route(beta, target, cohort));
}

TEST_CASE("normal CDF matches tabulated values")
{
  CHECK(std::abs(normal_cdf(0.0) - 0.5) < 1e-15);
  CHECK(std::abs(normal_cdf(1.959963984540054) - 0.975) < 1e-12);
  CHECK(std::abs(normal_cdf(-1.0) - 0.15865525393145705) < 1e-12);
  CHECK(std::abs(normal_cdf(-5.0) - 2.8665157187919391e-07) < 1e-12);
  CHECK(std::abs(normal_pdf(0.0) - 0.3989422804014327) < 1e-15);
}

TEST_CASE("PIT standardization")
{
  Eigen::VectorXd v(4);
  v << 1.0, 2.0, 3.0, 4.0;
  const Eigen::VectorXd t = pit_standardize(v);
  const double sd = std::sqrt(5.0 / 3.0);
  CHECK(t[0] == doctest::Approx(normal_cdf(-1.5 / sd)).epsilon(1e-14));
  CHECK(t[3] == doctest::Approx(normal_cdf(1.5 / sd)).epsilon(1e-14));
  CHECK_THROWS_AS(pit_standardize(Eigen::VectorXd::Constant(5, 2.0)), Error);
}

TEST_CASE("sample moments")
{
  const std::vector<double> v{2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
  CHECK(sample_mean(v) == 5.0);
  CHECK(sample_sd(v) == doctest::Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-14));
}
