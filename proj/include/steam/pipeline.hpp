#pragma once

#include "steam/accuracy.hpp"
#include "steam/data_model.hpp"
#include "steam/density_ratio.hpp"
#include "steam/glm.hpp"
#include "steam/risk.hpp"
#include "steam/scores.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace steam {

struct EstimationConfig {
  BasisExpansion mu_basis;
  BasisExpansion pi_basis;
  //! Adaptive weight power of the outcome model; the selection model uses 1.
  double gamma = 1.0;
  AdaptiveLassoOptions lasso;
  PiOptions pi;
  double h2_multiplier = 1.0;
  double h2_rate = kDefaultRiskRate;
  //! Cross-validation folds; values below 2 disable CV.
  int folds = 5;
  std::uint64_t seed = 1;
  std::vector<double> u0{0.05};
  std::vector<Method> methods{Method::source, Method::weighted, Method::dr_aug, Method::steam};
  //! Omit a method whose estimate fails instead of failing the whole call.
  bool skip_failed_methods = false;
};

//! Design matrices of one study after basis expansion. Immutable.
struct PreparedData {
  //! Outcome design Z on labeled source, pooled (U then T) and target rows.
  Eigen::MatrixXd z_labeled;
  Eigen::MatrixXd z_pooled;
  Eigen::MatrixXd z_target;
  //! Selection design Psi on pooled and labeled source rows.
  Eigen::MatrixXd psi_pooled;
  Eigen::MatrixXd psi_labeled;
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  std::optional<ValidationLabels> validation;

  static PreparedData from(const StudyData& data, const EstimationConfig& config,
                           const std::optional<ValidationLabels>& validation = std::nullopt);
  Eigen::Index n() const noexcept { return y.size(); }
  Eigen::Index n_target() const noexcept { return z_target.rows(); }
};

//! Stratified fold assignment of the labeled source units.
struct FoldPlan {
  int k = 0;
  std::vector<int> assignment;
  std::uint64_t seed = 0;

  //! Seeded permutation within each outcome class, classes concatenated and
  //! dealt round-robin, so fold sizes differ by at most one.
  static FoldPlan stratified(const Eigen::VectorXd& y, int k, std::uint64_t seed);
  std::vector<Eigen::Index> members(int fold) const;
  std::vector<Eigen::Index> complement(int fold) const;
};

//! Percentile, weight and outcome of each labeled unit that enters the risk
//! smoother, with the provenance of the outcome model that produced them.
struct RiskInputs {
  Eigen::VectorXd percentile;
  std::vector<long> rank;
  Eigen::VectorXd w;
  Eigen::VectorXd pi;
  Eigen::VectorXd y;
  std::vector<Eigen::Index> unit;
  //! Fold whose complement trained the outcome model; -1 for full data.
  std::vector<int> fit_fold;
  Eigen::Index clip_count = 0;
  Eigen::Index fallback_count = 0;
};

struct CvHooks {
  //! Use the full-data outcome model in every fold (collapse check).
  bool reuse_full_beta = false;
};

struct CvDetails {
  FoldPlan plan;
  std::vector<Coefficients> fold_beta;
  std::vector<std::vector<Eigen::Index>> fold_training;
  Eigen::Index single_class_folds = 0;
};

//! Everything the point estimate produced, including what perturbation
//! resampling needs to hold fixed.
struct PointEstimate {
  Coefficients alpha;
  Coefficients beta;
  std::shared_ptr<const PiCalibrator> calibrator;
  //! alpha'Psi on the labeled source units.
  Eigen::VectorXd labeled_alpha;
  EcdfEvaluator target_ecdf{std::vector<double>{0.0}};
  TargetLattice lattice;
  //! Full-data in-sample smoother inputs and its bandwidth.
  RiskInputs in_sample;
  double h2 = 0.0;
  //! Smoother inputs actually used (held-out when CV is on) and bandwidth.
  RiskInputs risk_inputs;
  double h2_used = 0.0;
  std::optional<CvDetails> cv;
  //! Requested methods, in request order.
  std::vector<AccuracyReport> reports;
  //! STEAM without CV; the center of perturbation resampling.
  AccuracyReport in_sample_steam;

  const AccuracyReport* find(Method m) const;
};

PointEstimate estimate(const PreparedData& data, const EstimationConfig& config,
                       const CvHooks& hooks = {});

//! STEAM report from smoother inputs on the target lattice of `lattice`.
AccuracyReport steam_from_inputs(const RiskInputs& inputs, double h2, const TargetLattice& lattice,
                                 std::span<const double> u0);

//! Pooled held-out smoother inputs and the resulting STEAM report.
struct CvPipelineResult {
  RiskCurve curve;
  AccuracyReport report;
  CvDetails details;
};
CvPipelineResult cv_pipeline(const PreparedData& data, const EstimationConfig& config,
                             const CvHooks& hooks = {});

//! Cutoff grid of a STEAM projection: every target level plus 0, 1 and the
//! above-max sentinel.
std::vector<double> lattice_cutoffs(const TargetLattice& lattice);

} // namespace steam
