#pragma once

#include "steam/glm.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace steam {

enum class Population { labeled_source, unlabeled_source, target };

//! Right-continuous empirical CDF t -> #{v <= t} / size of a fixed sample.
class EcdfEvaluator {
public:
  explicit EcdfEvaluator(std::vector<double> values);

  double operator()(double t) const { return static_cast<double>(count_le(t)) / size_d_; }
  //! Number of sample values <= t.
  Eigen::Index count_le(double t) const;
  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(sorted_.size()); }
  const std::vector<double>& sorted() const noexcept { return sorted_; }

private:
  std::vector<double> sorted_;
  double size_d_;
};

struct ScoreSet {
  Eigen::VectorXd raw;
  Eigen::VectorXd percentile;
  //! Percentile numerators: percentile = rank / ecdf size exactly.
  std::vector<Eigen::Index> rank;
  Population population = Population::target;
};

Eigen::VectorXd linear_scores(const Eigen::VectorXd& beta, const Eigen::MatrixXd& design);

EcdfEvaluator target_ecdf(const Eigen::VectorXd& beta, const Eigen::MatrixXd& target);
inline EcdfEvaluator target_ecdf(const Coefficients& beta, const Eigen::MatrixXd& target)
{
  return target_ecdf(beta.values, target);
}

ScoreSet percentile_scores(const Eigen::VectorXd& beta, const Eigen::MatrixXd& cohort,
                           const EcdfEvaluator& ecdf,
                           Population population = Population::labeled_source);
inline ScoreSet percentile_scores(const Coefficients& beta, const Eigen::MatrixXd& cohort,
                                  const EcdfEvaluator& ecdf,
                                  Population population = Population::labeled_source)
{
  return percentile_scores(beta.values, cohort, ecdf, population);
}

//! Standard normal CDF through erfc, accurate to a few ulps in both tails.
double normal_cdf(double x);
double normal_pdf(double x);

//! v -> Phi((v - mean) / sd) with the sample mean and SD of a reference set.
struct PitTransform {
  double mean = 0.0;
  double sd = 1.0;

  static PitTransform fit(std::span<const double> reference);
  double operator()(double v) const { return normal_cdf((v - mean) / sd); }
  //! Applies the transform in place.
  void apply(std::span<double> values) const;
};

//! Throws "degenerate score" when the sample SD is zero.
Eigen::VectorXd pit_standardize(const Eigen::VectorXd& scores);

double sample_mean(std::span<const double> v);
//! Denominator n - 1.
double sample_sd(std::span<const double> v);

//! Distinct ECDF ranks of a target sample with their multiplicities, the
//! support of every target percentile vector. Ranks are ascending.
struct TargetLattice {
  Eigen::Index size = 0;
  std::vector<Eigen::Index> rank;
  std::vector<Eigen::Index> count;

  static TargetLattice from_ecdf(const EcdfEvaluator& ecdf);
  double percentile(std::size_t level) const
  {
    return static_cast<double>(rank[level]) / static_cast<double>(size);
  }
};

//! Target lattice plus cohort percentiles under one coefficient vector. When
//! the target scores are tie-free the lattice is every rank 1..N and cohort
//! ranks are counted against the sorted cohort, so the large target sample is
//! never sorted. Results equal the EcdfEvaluator route exactly.
struct RankedScores {
  TargetLattice lattice;
  ScoreSet cohort;
};

RankedScores ranked_scores(const Eigen::VectorXd& beta, const Eigen::MatrixXd& target,
                           const Eigen::MatrixXd& cohort,
                           Population population = Population::labeled_source);

} // namespace steam
