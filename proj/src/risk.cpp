#include "steam/risk.hpp"

#include "steam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace steam {

namespace {

constexpr double kTinyDenominator = 1e-300;

} // namespace

void check_risk_rate(double nu2)
{
  if (!(nu2 > 0.25 && nu2 < 0.5))
    throw Error(ErrorCode::invalid_argument,
                "risk bandwidth rate must lie in (1/4, 1/2) for undersmoothing");
}

double default_h2(std::span<const double> percentiles, double nu2, double multiplier)
{
  check_risk_rate(nu2);
  if (!(multiplier > 0.0))
    throw Error(ErrorCode::invalid_argument, "h2 multiplier must be positive");
  const double sd = sample_sd(percentiles);
  if (!(sd > 0.0))
    throw Error(ErrorCode::degenerate, "degenerate percentile scores: zero standard deviation");
  return multiplier * sd * std::pow(static_cast<double>(percentiles.size()), -nu2);
}

RiskCurve::RiskCurve(Eigen::VectorXd support, Eigen::VectorXd y, Eigen::VectorXd w, double h2,
                     std::vector<long> lattice_rank, long lattice_size)
  : h2_(h2)
  , lattice_size_(lattice_size)
{
  const Eigen::Index n = support.size();
  if (n < 1 || y.size() != n || w.size() != n)
    throw Error(ErrorCode::invalid_argument, "risk curve: inputs disagree in length");
  if (!(h2 > 0.0) || !std::isfinite(h2))
    throw Error(ErrorCode::invalid_argument, "risk curve: bandwidth must be positive");
  if ((w.array() < 0.0).any() || !w.allFinite() || !(w.sum() > 0.0))
    throw Error(ErrorCode::invalid_argument, "risk curve: weights must be nonnegative");
  if (!lattice_rank.empty() && static_cast<Eigen::Index>(lattice_rank.size()) != n)
    throw Error(ErrorCode::invalid_argument, "risk curve: lattice ranks disagree in length");
  if (lattice_rank.empty())
    lattice_size_ = 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return support[i] < support[j]; });
  support_.resize(n);
  y_.resize(n);
  w_.resize(n);
  if (lattice_size_ > 0)
    rank_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = order[static_cast<std::size_t>(k)];
    support_[k] = support[i];
    y_[k] = y[i];
    w_[k] = w[i];
    if (lattice_size_ > 0)
      rank_[static_cast<std::size_t>(k)] = lattice_rank[static_cast<std::size_t>(i)];
  }
  wy_ = w_.cwiseProduct(y_);
}

double RiskCurve::fallback(double q) const
{
  double best = std::numeric_limits<double>::infinity();
  double value = y_[0];
  for (Eigen::Index i = 0; i < support_.size(); ++i) {
    if (w_[i] <= 0.0)
      continue;
    const double d = std::fabs(support_[i] - q);
    if (d < best) {
      best = d;
      value = y_[i];
    }
  }
  return value;
}

RiskCurve::Values RiskCurve::evaluate(std::span<const double> queries) const
{
  std::vector<double> clamped(queries.begin(), queries.end());
  for (double& q : clamped)
    q = std::clamp(q, 0.0, 1.0);
  const auto sums = kernels::nw1d({support_.data(), static_cast<std::size_t>(support_.size())},
                                  {wy_.data(), static_cast<std::size_t>(wy_.size())},
                                  {w_.data(), static_cast<std::size_t>(w_.size())}, h2_, clamped);
  Values out;
  out.m.resize(static_cast<Eigen::Index>(clamped.size()));
  for (std::size_t k = 0; k < clamped.size(); ++k) {
    if (sums.den[k] < kTinyDenominator) {
      out.m[static_cast<Eigen::Index>(k)] = fallback(clamped[k]);
      ++out.fallback_count;
    } else {
      out.m[static_cast<Eigen::Index>(k)] = std::clamp(sums.num[k] / sums.den[k], 0.0, 1.0);
    }
  }
  return out;
}

double RiskCurve::operator()(double q) const
{
  return evaluate(std::span<const double>(&q, 1)).m[0];
}

RiskCurve::Values RiskCurve::lattice_values(std::vector<char>* fell) const
{
  if (lattice_size_ <= 0)
    throw Error(ErrorCode::invalid_argument, "risk curve: no lattice support");
  const auto sums = kernels::nw1d_lattice(rank_, {wy_.data(), static_cast<std::size_t>(wy_.size())},
                                          {w_.data(), static_cast<std::size_t>(w_.size())}, h2_,
                                          lattice_size_);
  Values out;
  out.m.resize(lattice_size_ + 1);
  if (fell)
    fell->assign(static_cast<std::size_t>(lattice_size_) + 1, 0);
  for (long r = 0; r <= lattice_size_; ++r) {
    const auto k = static_cast<std::size_t>(r);
    if (sums.den[k] < kTinyDenominator) {
      out.m[r] = fallback(static_cast<double>(r) / static_cast<double>(lattice_size_));
      ++out.fallback_count;
      if (fell)
        (*fell)[k] = 1;
    } else {
      out.m[r] = std::clamp(sums.num[k] / sums.den[k], 0.0, 1.0);
    }
  }
  return out;
}

RiskCurve::Values RiskCurve::evaluate_lattice() const
{
  return lattice_values(nullptr);
}

RiskCurve::Values RiskCurve::evaluate_ranks(std::span<const long> ranks) const
{
  std::vector<char> fell;
  const Values all = lattice_values(&fell);
  Values out;
  out.m.resize(static_cast<Eigen::Index>(ranks.size()));
  for (std::size_t k = 0; k < ranks.size(); ++k) {
    const long r = ranks[k];
    if (r < 0 || r > lattice_size_)
      throw Error(ErrorCode::invalid_argument, "risk curve: rank outside lattice");
    out.m[static_cast<Eigen::Index>(k)] = all.m[r];
    out.fallback_count += fell[static_cast<std::size_t>(r)];
  }
  return out;
}

RiskCurve build_risk_curve(const Eigen::VectorXd& percentiles, const Eigen::VectorXd& y,
                           const CalibratedWeights& weights, double h2,
                           std::vector<long> lattice_rank, long lattice_size)
{
  if (percentiles.size() < 20)
    throw Error(ErrorCode::invalid_argument, "risk curve needs at least 20 labeled units");
  if ((weights.w.array() <= 0.0).any())
    throw Error(ErrorCode::invalid_argument, "risk curve weights must be positive");
  return RiskCurve(percentiles, y, weights.w, h2, std::move(lattice_rank), lattice_size);
}

} // namespace steam
