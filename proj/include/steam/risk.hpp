#pragma once

#include "steam/density_ratio.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace steam {

//! Smoothing rate nu2 of h2 = sd * n^-nu2; must lie strictly in (1/4, 1/2).
inline constexpr double kDefaultRiskRate = 0.4;
void check_risk_rate(double nu2);

//! n^-nu2 * multiplier * (sample SD of the percentile scores).
double default_h2(std::span<const double> percentiles, double nu2 = kDefaultRiskRate,
                  double multiplier = 1.0);

//! Weighted Nadaraya-Watson estimate of P(Y = 1 | percentile = q).
class RiskCurve {
public:
  struct Values {
    Eigen::VectorXd m;
    //! Queries whose kernel denominator vanished (nearest support fallback).
    Eigen::Index fallback_count = 0;
  };

  //! `lattice_rank`, when given, states that support point i equals
  //! lattice_rank[i] / lattice_size exactly, which enables evaluate_ranks.
  RiskCurve(Eigen::VectorXd support, Eigen::VectorXd y, Eigen::VectorXd w, double h2,
            std::vector<long> lattice_rank = {}, long lattice_size = 0);

  double operator()(double q) const;
  //! Queries are clamped to [0, 1].
  Values evaluate(std::span<const double> queries) const;
  //! Values at r / lattice_size for each r; needs lattice support.
  Values evaluate_ranks(std::span<const long> ranks) const;
  //! Values at every lattice point 0..lattice_size.
  Values evaluate_lattice() const;

  bool has_lattice() const noexcept { return lattice_size_ > 0; }
  long lattice_size() const noexcept { return lattice_size_; }
  double h2() const noexcept { return h2_; }
  Eigen::Index size() const noexcept { return support_.size(); }
  //! Sorted ascending, with outcomes and weights permuted alongside.
  const Eigen::VectorXd& support() const noexcept { return support_; }
  const Eigen::VectorXd& outcomes() const noexcept { return y_; }
  const Eigen::VectorXd& weights() const noexcept { return w_; }

private:
  double fallback(double q) const;
  Values lattice_values(std::vector<char>* fell) const;

  Eigen::VectorXd support_;
  Eigen::VectorXd y_;
  Eigen::VectorXd w_;
  Eigen::VectorXd wy_;
  double h2_;
  std::vector<long> rank_;
  long lattice_size_ = 0;
};

//! Checked constructor for estimation use: at least 20 support points and
//! positive weights.
RiskCurve build_risk_curve(const Eigen::VectorXd& percentiles, const Eigen::VectorXd& y,
                           const CalibratedWeights& weights, double h2,
                           std::vector<long> lattice_rank = {}, long lattice_size = 0);

} // namespace steam
