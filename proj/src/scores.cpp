#include "steam/scores.hpp"

#include "steam/simd_math.hpp"

#include <boost/sort/spreadsort/float_sort.hpp>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <cmath>
#include <numbers>
#include <numeric>

namespace steam {

EcdfEvaluator::EcdfEvaluator(std::vector<double> values)
  : sorted_(std::move(values))
  , size_d_(static_cast<double>(sorted_.size()))
{
  if (sorted_.empty())
    throw Error(ErrorCode::invalid_argument, "empirical CDF of an empty sample");
  for (double v : sorted_) {
    if (!std::isfinite(v))
      throw Error(ErrorCode::numerical, "non-finite score in empirical CDF sample");
  }
  boost::sort::spreadsort::float_sort(sorted_.begin(), sorted_.end());
}

Eigen::Index EcdfEvaluator::count_le(double t) const
{
  return static_cast<Eigen::Index>(std::upper_bound(sorted_.begin(), sorted_.end(), t) -
                                   sorted_.begin());
}

Eigen::VectorXd linear_scores(const Eigen::VectorXd& beta, const Eigen::MatrixXd& design)
{
  if (design.cols() != beta.size())
    throw Error(ErrorCode::invalid_argument, "coefficient length differs from design columns");
  return design * beta;
}

EcdfEvaluator target_ecdf(const Eigen::VectorXd& beta, const Eigen::MatrixXd& target)
{
  const Eigen::VectorXd s = linear_scores(beta, target);
  return EcdfEvaluator(std::vector<double>(s.begin(), s.end()));
}

ScoreSet percentile_scores(const Eigen::VectorXd& beta, const Eigen::MatrixXd& cohort,
                           const EcdfEvaluator& ecdf, Population population)
{
  ScoreSet out;
  out.population = population;
  out.raw = linear_scores(beta, cohort);
  out.percentile.resize(out.raw.size());
  out.rank.resize(static_cast<std::size_t>(out.raw.size()));
  const double size = static_cast<double>(ecdf.size());
  for (Eigen::Index i = 0; i < out.raw.size(); ++i) {
    const Eigen::Index r = ecdf.count_le(out.raw[i]);
    out.rank[static_cast<std::size_t>(i)] = r;
    out.percentile[i] = static_cast<double>(r) / size;
  }
  return out;
}

double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double normal_pdf(double x)
{
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double sample_mean(std::span<const double> v)
{
  if (v.empty())
    throw Error(ErrorCode::invalid_argument, "mean of an empty sample");
  double total = 0.0;
  for (double x : v)
    total += x;
  return total / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v)
{
  if (v.size() < 2)
    throw Error(ErrorCode::invalid_argument, "standard deviation needs two values");
  const double m = sample_mean(v);
  double ss = 0.0;
  for (double x : v)
    ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

PitTransform PitTransform::fit(std::span<const double> reference)
{
  PitTransform t;
  t.mean = sample_mean(reference);
  t.sd = sample_sd(reference);
  if (!(t.sd > 0.0) || !std::isfinite(t.sd))
    throw Error(ErrorCode::degenerate, "degenerate score: zero standard deviation");
  return t;
}

void PitTransform::apply(std::span<double> values) const
{
  const double shift = mean;
  const double scale = -std::numbers::sqrt2 / 2.0 / sd;
  double* v = values.data();
  const std::size_t n = values.size();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i)
    v[i] = 0.5 * erfc((v[i] - shift) * scale);
}

Eigen::VectorXd pit_standardize(const Eigen::VectorXd& scores)
{
  const std::span<const double> view(scores.data(), static_cast<std::size_t>(scores.size()));
  const PitTransform t = PitTransform::fit(view);
  Eigen::VectorXd out = scores;
  t.apply(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

TargetLattice TargetLattice::from_ecdf(const EcdfEvaluator& ecdf)
{
  TargetLattice out;
  out.size = ecdf.size();
  const auto& s = ecdf.sorted();
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i + 1;
    while (j < s.size() && s[j] == s[i])
      ++j;
    out.rank.push_back(static_cast<Eigen::Index>(j));
    out.count.push_back(static_cast<Eigen::Index>(j - i));
    i = j;
  }
  return out;
}

namespace {

//! True when some value occurs twice; +0 and -0 compare equal.
bool has_duplicates(const Eigen::VectorXd& v)
{
  std::size_t cap = 16;
  while (cap < 2 * static_cast<std::size_t>(v.size()))
    cap <<= 1;
  std::vector<std::uint64_t> slot(cap);
  std::vector<char> used(cap, 0);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v[i] + 0.0;
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    std::size_t h = static_cast<std::size_t>((bits * 0x9e3779b97f4a7c15ULL) >> 20) & (cap - 1);
    while (used[h]) {
      if (slot[h] == bits)
        return true;
      h = (h + 1) & (cap - 1);
    }
    used[h] = 1;
    slot[h] = bits;
  }
  return false;
}

//! std::lower_bound without data-dependent branches; the comparisons on
//! random queries would otherwise mispredict at every level.
std::size_t lower_bound_index(const std::vector<double>& sorted, double x)
{
  if (sorted.empty())
    return 0;
  const double* base = sorted.data();
  std::size_t n = sorted.size();
  while (n > 1) {
    const std::size_t half = n / 2;
    base = base[half] < x ? base + half : base;
    n -= half;
  }
  return static_cast<std::size_t>(base - sorted.data()) + (*base < x ? 1 : 0);
}

} // namespace

RankedScores ranked_scores(const Eigen::VectorXd& beta, const Eigen::MatrixXd& target,
                           const Eigen::MatrixXd& cohort, Population population)
{
  const Eigen::VectorXd t = linear_scores(beta, target);
  if (t.size() == 0)
    throw Error(ErrorCode::invalid_argument, "empirical CDF of an empty sample");
  if (!t.allFinite())
    throw Error(ErrorCode::numerical, "non-finite score in empirical CDF sample");
  if (has_duplicates(t)) {
    const EcdfEvaluator ecdf(std::vector<double>(t.begin(), t.end()));
    return {TargetLattice::from_ecdf(ecdf), percentile_scores(beta, cohort, ecdf, population)};
  }

  RankedScores out;
  const Eigen::Index N = t.size();
  out.lattice.size = N;
  out.lattice.rank.resize(static_cast<std::size_t>(N));
  std::iota(out.lattice.rank.begin(), out.lattice.rank.end(), Eigen::Index{1});
  out.lattice.count.assign(static_cast<std::size_t>(N), 1);

  ScoreSet& cs = out.cohort;
  cs.population = population;
  cs.raw = linear_scores(beta, cohort);
  const auto m = static_cast<std::size_t>(cs.raw.size());
  std::vector<double> sorted(cs.raw.begin(), cs.raw.end());
  std::sort(sorted.begin(), sorted.end());
  // hits[j]: target scores whose first cohort value >= them sits at j.
  std::vector<Eigen::Index> hits(m + 1, 0);
  for (Eigen::Index i = 0; i < N; ++i)
    ++hits[lower_bound_index(sorted, t[i])];
  std::vector<Eigen::Index> le(m);
  Eigen::Index run = 0;
  for (std::size_t j = 0; j < m; ++j) {
    run += hits[j];
    le[j] = run;
  }
  cs.percentile.resize(cs.raw.size());
  cs.rank.resize(m);
  const double size = static_cast<double>(N);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = cs.raw[static_cast<Eigen::Index>(i)];
    // Last sorted position holding x carries the full count of scores <= x.
    const auto k = static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), x) -
                                            sorted.begin());
    const Eigen::Index r = le[k - 1];
    cs.rank[i] = r;
    cs.percentile[static_cast<Eigen::Index>(i)] = static_cast<double>(r) / size;
  }
  return out;
}

} // namespace steam
