#pragma once

#include "steam/pipeline.hpp"
#include "steam/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace steam {

enum class PerturbVariant { exact, approx };

std::string_view variant_name(PerturbVariant v);

//! iid 4 * Beta(0.5, 1.5) draws: mean 1, variance 1, support [0, 4].
Eigen::VectorXd draw_perturbation_weights(Eigen::Index count, Rng& rng);

//! B x n weights; row b comes from its own child stream of `seed`, so rows do
//! not depend on B or on scheduling.
Eigen::MatrixXd perturbation_matrix(Eigen::Index draws, Eigen::Index n, std::uint64_t seed);

//! Grid of false positive rates at which ROC(u) is resampled for bands.
std::vector<double> band_fpr_grid();

//! Names of the resampled scalars, in column order: auc, prevalence, then
//! cutoff/tpr/ppv/npv per u0, then roc(u) over band_fpr_grid().
std::vector<std::string> perturbation_scalar_names(std::span<const double> u0);
Eigen::VectorXd report_scalars(const AccuracyReport& report);

//! TPR at FPR u on an ROC sorted by cutoff, u in [0, 1].
double roc_at_fpr(std::span<const RocPoint> roc, double u);

struct PerturbationDraws {
  Eigen::Index B = 0;
  //! Successful draws only, one row each.
  Eigen::MatrixXd draws;
  //! Index into the G matrix of each successful row.
  std::vector<Eigen::Index> draw_index;
  Eigen::Index failed = 0;
  Eigen::VectorXd point;
  std::vector<std::string> names;
  std::uint64_t seed = 0;
  PerturbVariant variant = PerturbVariant::exact;
};

//! Perturbed non-CV STEAM pipeline. Lambda, h1 and h2 stay at their point
//! estimate values; the outcome model is refit with likelihood weights G and
//! adaptive weights re-anchored at the G-weighted unpenalized fit; alpha is
//! not perturbed. Draws that fail are skipped; more than 5% failures is an
//! error.
PerturbationDraws perturb(const PreparedData& data, const PointEstimate& point,
                          const EstimationConfig& config, const Eigen::MatrixXd& G,
                          PerturbVariant variant, std::uint64_t seed = 0);

PerturbationDraws perturb_exact(const PreparedData& data, const PointEstimate& point,
                                const EstimationConfig& config, Eigen::Index B,
                                std::uint64_t seed);
PerturbationDraws perturb_approx(const PreparedData& data, const PointEstimate& point,
                                 const EstimationConfig& config, Eigen::Index B,
                                 std::uint64_t seed);

struct ScalarSummary {
  std::string name;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

//! Sample SD and type-7 quantile interval of each column.
std::vector<ScalarSummary> summarize_draws(const PerturbationDraws& draws, double level = 0.95);

//! Percentile interval of draws centered on `draw_center` (the in-sample
//! estimate), translated to sit around a reported `point` such as the
//! cross-validated estimate. The SE is unchanged.
ScalarSummary recenter(const ScalarSummary& summary, double draw_center, double point);

//! Linear-interpolation (type 7) quantile of unsorted values.
double quantile7(std::vector<double> values, double prob);

} // namespace steam
