#pragma once

#include "steam/inference.hpp"
#include "steam/pipeline.hpp"
#include "steam/sim.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace steam::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

//! Fully resolved settings of one `evaluate` run.
struct RunConfig {
  EstimationConfig estimation;
  std::optional<PerturbVariant> perturb;
  Eigen::Index draws = 1000;
  double level = 0.95;
  int threads = 0;
  std::string input;
  ColumnRoles roles;
  std::string out_dir;
};

Json config_json(const RunConfig& config);
Json estimation_json(const EstimationConfig& config);

struct Evaluation {
  PointEstimate point;
  std::optional<PerturbationDraws> draws;
};

//! Point estimates and, when requested, perturbation draws of one study.
//! Target-labeled validation rows are passed to the comparator only.
Evaluation evaluate_study(const LoadedStudy& study, const RunConfig& config);

//! Interval summary of every resampled STEAM scalar, recentered on the
//! reported (cross-validated when CV is on) estimate.
struct InferenceRow {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};
std::vector<InferenceRow> steam_inference(const Evaluation& eval, double level);

Json report_json(const RunConfig& config, const LoadedStudy& study, const Evaluation& eval);

//! JSON text with every floating-point number printed with 17 significant
//! digits and keys in insertion order. Non-finite numbers become null.
std::string dump(const Json& value);

//! Long-format ROC grid: method,cutoff,fpr,tpr, preceded by `# ` lines
//! holding the run configuration.
void write_roc_csv(std::ostream& out, const Json& config, const Evaluation& eval);

//! ROC curve of one method on the band FPR grid, with an optional pointwise
//! band.
struct RocSeries {
  std::string name;
  std::vector<double> fpr;
  std::vector<double> tpr;
  std::vector<double> lower;
  std::vector<double> upper;
};

//! Reads the `roc_grid` block of every method in a report.
std::vector<RocSeries> roc_series(const Json& report);

//! Self-contained SVG 1.1 document: one polyline per series, shaded band
//! polygons, chance diagonal and legend. `comment` is embedded as an XML
//! comment.
std::string roc_svg(const std::vector<RocSeries>& series, const std::string& comment);

//! `# ` prefixed lines carrying a JSON document, for CSV headers.
std::string comment_lines(const Json& value);

Json scenario_json(const SimScenario& scenario);
Json experiment_json(const ExperimentOptions& options);

//! Columns shift,misspec,measure,method,bias,se,rmse,n_fail.
void write_summary_csv(std::ostream& out, const Json& config,
                       const std::vector<ExperimentResult>& results);
//! Columns shift,misspec,measure,variant,estimate,ese,ase,ase_over_ese,
//! coverage,coverage_uncentered,replicates,seconds.
void write_coverage_csv(std::ostream& out, const Json& config,
                        const std::vector<ExperimentResult>& results);
//! Columns shift,misspec,measure,method,rmse,labels,clamped.
void write_equivalent_csv(std::ostream& out, const Json& config,
                          const std::vector<ExperimentResult>& results);
//! Columns shift,misspec,measure,limiting_truth,mean_fitted_truth.
void write_truth_csv(std::ostream& out, const Json& config,
                     const std::vector<ExperimentResult>& results);
//! Fixed-width tables for reading in a terminal.
std::string summary_text(const std::vector<ExperimentResult>& results);

} // namespace steam::report
