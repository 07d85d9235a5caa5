#pragma once

#include "steam/inference.hpp"
#include "steam/pipeline.hpp"
#include "steam/rng.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace steam {

enum class ShiftStrength { weak, moderate, strong };
enum class Misspec { both_correct, pi_mis, mu_mis };

std::string_view shift_name(ShiftStrength s);
std::string_view misspec_name(Misspec m);
std::optional<ShiftStrength> parse_shift(std::string_view name);
std::optional<Misspec> parse_misspec(std::string_view name);

struct SimScenario {
  int p = 10;
  double sigma2 = 1.0;
  double rho = 0.2;
  ShiftStrength shift = ShiftStrength::moderate;
  Misspec misspec = Misspec::both_correct;
  //! Labeled source units.
  Eigen::Index n = 200;
  //! Expected sizes: N + N_t rows are pooled and split by S ~ Bernoulli(pi).
  Eigen::Index N = 10000;
  Eigen::Index N_t = 10000;
  //! Target rows carrying validation labels.
  Eigen::Index n_target_labeled = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

//! True outcome and selection probabilities of the generating mechanism.
//! Covariates are given without the intercept.
struct TruthModel {
  ShiftStrength shift = ShiftStrength::moderate;
  double mu(const double* x) const;
  double pi(const double* x) const;
};

struct SimDataset {
  StudyData data;
  ValidationLabels validation;
  TruthModel truth;
};

//! X ~ MVN(0, sigma2 ((1 - rho) I + rho J)), S ~ Bernoulli(pi(X)),
//! Y ~ Bernoulli(mu(X)); n random source rows are labeled and the first
//! n_target_labeled target rows carry validation labels.
SimDataset generate_dataset(const SimScenario& scenario, Rng& rng);

//! (outcome basis, selection basis) fitted under each misspecification case.
std::pair<BasisExpansion, BasisExpansion> scenario_bases(Misspec misspec);

inline constexpr std::array<std::string_view, 5> kMeasures{"cutoff", "auc", "tpr", "ppv", "npv"};

//! Monte-Carlo target population: expanded outcome design and true mu of
//! draws from p(X | S = 0).
struct OracleSample {
  Eigen::MatrixXd z;
  Eigen::VectorXd mu;
};

OracleSample oracle_sample(const SimScenario& scenario, const BasisExpansion& mu_basis,
                           Eigen::Index draws, std::uint64_t seed);

//! Target accuracy of the classifier beta'Z, imputing outcomes with the true mu.
AccuracyReport classifier_accuracy(const OracleSample& sample, const Eigen::VectorXd& beta,
                                   double u0 = 0.05);

//! Target accuracy of the limiting working-model classifier, by Monte Carlo.
struct OracleTruth {
  Eigen::VectorXd beta_bar;
  double auc = 0.0;
  double prevalence = 0.0;
  OperatingPoint at_u0;
  //! cutoff, auc, tpr, ppv, npv at u0, in kMeasures order.
  std::array<double, 5> measures{};
};

//! beta_bar is the unpenalized fit with soft labels mu(X) on `fit_draws`
//! source draws, evaluated on `sample`.
OracleTruth oracle_truth(const SimScenario& scenario, const BasisExpansion& mu_basis,
                         const OracleSample& sample, std::uint64_t seed, double u0 = 0.05,
                         Eigen::Index fit_draws = 200000);

std::array<double, 5> measures_of(const AccuracyReport& report);

struct MethodEstimates {
  std::string method;
  //! Per replicate, kMeasures order; NaN rows for failures.
  std::vector<std::array<double, 5>> values;
  std::vector<char> ok;
};

struct SummaryRow {
  std::string measure;
  std::string method;
  double bias = 0.0;
  double se = 0.0;
  double rmse = 0.0;
  Eigen::Index n_fail = 0;
};

//! Resampling calibration of STEAM for one measure and variant.
struct CoverageRow {
  std::string measure;
  std::string variant;
  double mean_estimate = 0.0;
  //! Empirical SE of the point estimates across replicates.
  double ese = 0.0;
  //! Mean resampling SE.
  double ase = 0.0;
  //! Coverage of the reported interval: draw percentiles recentered on the
  //! cross-validated point estimate.
  double coverage = 0.0;
  //! Coverage of the raw draw percentiles, centered on the in-sample estimate.
  double coverage_uncentered = 0.0;
  Eigen::Index replicates = 0;
};

struct EquivalentLabels {
  double size = 0.0;
  //! The RMSE fell outside the grid's range; size is a grid endpoint.
  bool clamped = false;
};

//! Inverts a decreasing RMSE-versus-labels curve (isotonic-regularized,
//! interpolated linearly in 1/RMSE^2).
EquivalentLabels equivalent_labels(std::span<const Eigen::Index> label_grid,
                                   std::span<const double> grid_rmse, double estimator_rmse);

//! Antitonic (nonincreasing) least-squares fit by pool-adjacent-violators.
std::vector<double> antitonic_fit(std::span<const double> values);

//! What each replicate's estimates are compared with.
enum class TruthMode {
  //! Target accuracy of that replicate's fitted outcome model.
  fitted,
  //! Target accuracy of the limiting model beta_bar, shared by all replicates.
  limiting
};

struct ExperimentOptions {
  std::vector<Method> methods{Method::source, Method::target_labeled, Method::weighted,
                              Method::dr_aug, Method::steam};
  Eigen::Index replicates = 200;
  Eigen::Index oracle_draws = 1000000;
  TruthMode truth = TruthMode::fitted;
  //! Also report STEAM without CV ("steam_nocv").
  bool include_in_sample = false;
  //! target_labeled RMSE curve sizes for equivalent labels; empty disables.
  std::vector<Eigen::Index> label_grid{25, 50, 75, 100, 150, 200, 300, 400};
  std::vector<PerturbVariant> perturb;
  Eigen::Index draws = 500;
  EstimationConfig config;
};

struct EquivalentLabelsRow {
  std::string measure;
  std::string method;
  double rmse = 0.0;
  double labels = 0.0;
  bool clamped = false;
};

struct ExperimentResult {
  SimScenario scenario;
  OracleTruth truth;
  //! Per replicate truth in kMeasures order (NaN when the replicate failed).
  std::vector<std::array<double, 5>> replicate_truth;
  std::vector<MethodEstimates> estimates;
  std::vector<SummaryRow> summary;
  std::vector<CoverageRow> coverage;
  //! target_labeled RMSE (x100) per measure at each label_grid size.
  std::vector<std::array<double, 5>> label_curve;
  std::vector<EquivalentLabelsRow> equivalent;
  //! Wall-clock seconds spent in each perturbation variant.
  std::vector<std::pair<std::string, double>> perturb_seconds;

  const MethodEstimates* find(std::string_view method) const;
  const SummaryRow* row(std::string_view measure, std::string_view method) const;
};

//! Bias, SE (denominator r - 1) and RMSE, all x100, of each method and
//! measure against the truth selected by options.truth. Replicates run in
//! parallel, each on its own child stream of the scenario seed.
ExperimentResult run_experiment(const SimScenario& scenario, const ExperimentOptions& options);

//! Bias, SE and RMSE of one estimate series; failures (NaN) excluded.
SummaryRow summarize_series(std::span<const double> values, double truth);
//! Same with a truth per replicate; pairs with a NaN truth count as failed.
SummaryRow summarize_series(std::span<const double> values, std::span<const double> truth);

} // namespace steam
