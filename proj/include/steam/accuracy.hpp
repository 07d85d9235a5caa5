#pragma once

#include "steam/risk.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace steam {

enum class Method { source, target_labeled, weighted, dr_aug, steam };

inline constexpr Method kAllMethods[] = {Method::source, Method::target_labeled,
                                         Method::weighted, Method::dr_aug, Method::steam};

std::string_view method_name(Method m);
//! Accepts the canonical names and "DR-aug".
std::optional<Method> parse_method(std::string_view name);

struct RocPoint {
  double cutoff = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct OperatingPoint {
  double u0 = 0.0;
  double cutoff = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double ppv = 0.0;
  double npv = 0.0;
};

struct AccuracyDiagnostics {
  Eigen::Index clip_count = 0;
  Eigen::Index fallback_count = 0;
  //! CV folds whose held-out outcomes were all one class.
  Eigen::Index single_class_folds = 0;
};

struct AccuracyReport {
  Method method = Method::steam;
  //! Sorted by ascending cutoff.
  std::vector<RocPoint> roc;
  double auc = 0.0;
  double prevalence = 0.0;
  std::vector<OperatingPoint> at_fpr;
  AccuracyDiagnostics diagnostics;
};

//! Cutoff just above every percentile, where all rates are 0.
inline constexpr double kAboveMaxCutoff = 1.0000000000000002;

//! Sorted distinct values of the given percentile sets plus 0, 1 and the
//! above-max sentinel.
std::vector<double> default_cutoffs(std::initializer_list<std::span<const double>> percentiles);

//! TPR(c) = sum I(P >= c) pos / sum pos and FPR(c) likewise with neg, for
//! ascending cutoffs.
std::vector<RocPoint> mass_roc(std::span<const double> percentile, std::span<const double> pos,
                               std::span<const double> neg, std::span<const double> cutoffs);

//! Projection onto the target with imputed outcomes m = risk(P_i), i in T.
std::vector<RocPoint> steam_tpr_fpr(const Eigen::VectorXd& target_percentiles,
                                    const RiskCurve& risk, std::span<const double> cutoffs);

//! Trapezoidal area under TPR against FPR.
double steam_auc(std::span<const RocPoint> roc);

//! Smallest grid cutoff with FPR <= u0, linearly interpolated (cutoff and
//! TPR) between the bracketing grid points. `roc` must be sorted by cutoff.
OperatingPoint steam_cutoff_at_fpr(std::span<const RocPoint> roc, double u0);

struct PredictiveValues {
  double ppv = 0.0;
  double npv = 0.0;
};
PredictiveValues steam_ppv_npv(double tpr, double fpr, double prevalence);

//! Fills auc and the operating points of a report whose roc and prevalence
//! are already set.
void finish_report(AccuracyReport& report, std::span<const double> u0);

//! STEAM from imputed target outcomes given per distinct percentile level
//! (`level_percentile` ascending, `level_count` units each).
AccuracyReport steam_report_from_levels(std::span<const double> level_percentile,
                                        std::span<const double> level_count,
                                        std::span<const double> level_m,
                                        std::span<const double> cutoffs,
                                        std::span<const double> u0);

AccuracyReport steam_report(const Eigen::VectorXd& target_percentiles, const RiskCurve& risk,
                            std::span<const double> cutoffs, std::span<const double> u0);

//! Importance-weighted empirical estimator; prevalence sum wy / sum w.
AccuracyReport comparator_weighted(const Eigen::VectorXd& percentiles, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& w, std::span<const double> cutoffs,
                                   std::span<const double> u0);

//! Unweighted empirical estimator on the given units (source: held-out
//! labeled percentiles; target_labeled: validation units).
AccuracyReport comparator_empirical(Method method, const Eigen::VectorXd& percentiles,
                                    const Eigen::VectorXd& y, std::span<const double> cutoffs,
                                    std::span<const double> u0);

//! Augmented IPW: num(c) = sum_L w I(P>=c)(Y - m) / sum_L w
//!                        + N_t^-1 sum_T I(P>=c) m,
//! TPR = num(c) / num(0); FPR with 1 - Y and 1 - m. The raw ratios are made
//! monotone by a running maximum from the largest cutoff down and clamped to
//! [0, 1]. Prevalence is num(0).
AccuracyReport comparator_dr_aug(const Eigen::VectorXd& labeled_percentiles,
                                 const Eigen::VectorXd& y, const Eigen::VectorXd& labeled_m,
                                 const Eigen::VectorXd& w,
                                 const Eigen::VectorXd& target_percentiles,
                                 const Eigen::VectorXd& target_m,
                                 std::span<const double> cutoffs, std::span<const double> u0);

} // namespace steam
