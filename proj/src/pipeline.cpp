#include "steam/pipeline.hpp"

#include "steam/rng.hpp"

#include <algorithm>
#include <numeric>

namespace steam {

namespace {

std::span<const double> view(const Eigen::VectorXd& v)
{
  return {v.data(), static_cast<std::size_t>(v.size())};
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows)
{
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t k = 0; k < rows.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& rows)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k)
    out[static_cast<Eigen::Index>(k)] = v[rows[k]];
  return out;
}

//! Smoother inputs of the given labeled units under one outcome model.
RiskInputs smoother_inputs(const PreparedData& data, const Eigen::VectorXd& labeled_alpha,
                           const std::vector<Eigen::Index>& rows, const Eigen::VectorXd& beta,
                           const EcdfEvaluator& ecdf, const PiCalibrator& calibrator, int fit_fold)
{
  RiskInputs out;
  const Eigen::MatrixXd z = take_rows(data.z_labeled, rows);
  const ScoreSet scores = percentile_scores(beta, z, ecdf, Population::labeled_source);
  const auto eval = calibrator.evaluate(take(labeled_alpha, rows), z);
  const CalibratedWeights w = weights_from_pi(eval);
  out.percentile = scores.percentile;
  out.rank.assign(scores.rank.begin(), scores.rank.end());
  out.w = w.w;
  out.pi = w.pi;
  out.y = take(data.y, rows);
  out.unit = rows;
  out.fit_fold.assign(rows.size(), fit_fold);
  out.clip_count = w.clip_count;
  out.fallback_count = w.fallback_count;
  return out;
}

void append(RiskInputs& into, const RiskInputs& part)
{
  const Eigen::Index a = into.percentile.size();
  const Eigen::Index b = part.percentile.size();
  auto grow = [&](Eigen::VectorXd& dst, const Eigen::VectorXd& src) {
    dst.conservativeResize(a + b);
    dst.tail(b) = src;
  };
  grow(into.percentile, part.percentile);
  grow(into.w, part.w);
  grow(into.pi, part.pi);
  grow(into.y, part.y);
  into.rank.insert(into.rank.end(), part.rank.begin(), part.rank.end());
  into.unit.insert(into.unit.end(), part.unit.begin(), part.unit.end());
  into.fit_fold.insert(into.fit_fold.end(), part.fit_fold.begin(), part.fit_fold.end());
  into.clip_count += part.clip_count;
  into.fallback_count += part.fallback_count;
}

RiskCurve curve_from(const RiskInputs& inputs, double h2, long lattice_size)
{
  return RiskCurve(inputs.percentile, inputs.y, inputs.w, h2, inputs.rank, lattice_size);
}

} // namespace

PreparedData PreparedData::from(const StudyData& data, const EstimationConfig& config,
                                const std::optional<ValidationLabels>& validation)
{
  config.mu_basis.validate(data.p());
  config.pi_basis.validate(data.p());
  PreparedData out;
  const Eigen::MatrixXd pooled = data.pooled_unlabeled();
  out.z_labeled = expand_matrix(data.labeled_source(), config.mu_basis);
  out.z_pooled = expand_matrix(pooled, config.mu_basis);
  out.z_target = expand_matrix(data.target(), config.mu_basis);
  out.psi_pooled = expand_matrix(pooled, config.pi_basis);
  out.psi_labeled = expand_matrix(data.labeled_source(), config.pi_basis);
  out.y = data.y();
  out.s = data.pooled_selection();
  out.validation = validation;
  return out;
}

FoldPlan FoldPlan::stratified(const Eigen::VectorXd& y, int k, std::uint64_t seed)
{
  const Eigen::Index n = y.size();
  if (k < 2)
    throw Error(ErrorCode::invalid_argument, "cross-validation needs at least 2 folds");
  if (static_cast<Eigen::Index>(k) * 10 > n)
    throw Error(ErrorCode::invalid_argument,
                "too many folds: each fold must retain at least 10 labeled units");
  std::vector<Eigen::Index> pos;
  std::vector<Eigen::Index> neg;
  for (Eigen::Index i = 0; i < n; ++i)
    (y[i] > 0.5 ? pos : neg).push_back(i);
  Rng rng(child_seed(seed, 0x5f01d));
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(static_cast<std::size_t>(n), 0);
  std::size_t slot = 0;
  for (const auto* group : {&pos, &neg}) {
    for (Eigen::Index i : *group)
      plan.assignment[static_cast<std::size_t>(i)] = static_cast<int>(slot++ % k);
  }
  return plan;
}

std::vector<Eigen::Index> FoldPlan::members(int fold) const
{
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold)
      out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

std::vector<Eigen::Index> FoldPlan::complement(int fold) const
{
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold)
      out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

const AccuracyReport* PointEstimate::find(Method m) const
{
  for (const auto& r : reports) {
    if (r.method == m)
      return &r;
  }
  return nullptr;
}

std::vector<double> lattice_cutoffs(const TargetLattice& lattice)
{
  std::vector<double> levels(lattice.rank.size());
  for (std::size_t k = 0; k < levels.size(); ++k)
    levels[k] = lattice.percentile(k);
  return default_cutoffs({levels});
}

AccuracyReport steam_from_inputs(const RiskInputs& inputs, double h2, const TargetLattice& lattice,
                                 std::span<const double> u0)
{
  const RiskCurve curve = curve_from(inputs, h2, lattice.size);
  const auto values = curve.evaluate_ranks(lattice.rank);
  const std::size_t levels = lattice.rank.size();
  std::vector<double> percentile(levels);
  std::vector<double> count(levels);
  for (std::size_t k = 0; k < levels; ++k) {
    percentile[k] = lattice.percentile(k);
    count[k] = static_cast<double>(lattice.count[k]);
  }
  const auto cutoffs = lattice_cutoffs(lattice);
  AccuracyReport report = steam_report_from_levels(percentile, count, view(values.m), cutoffs, u0);
  report.diagnostics.fallback_count = values.fallback_count;
  report.diagnostics.clip_count = inputs.clip_count;
  return report;
}

PointEstimate estimate(const PreparedData& data, const EstimationConfig& config,
                       const CvHooks& hooks)
{
  check_risk_rate(config.h2_rate);
  PointEstimate est;
  const Eigen::Index n = data.n();
  const Eigen::VectorXd ones_pooled = Eigen::VectorXd::Ones(data.psi_pooled.rows());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  est.alpha = fit_adaptive_lasso(data.psi_pooled, data.s, ones_pooled, 1.0, {}, config.lasso);
  est.beta = fit_adaptive_lasso(data.z_labeled, data.y, ones, config.gamma, {}, config.lasso);

  const Eigen::VectorXd pooled_alpha = data.psi_pooled * est.alpha.values;
  est.labeled_alpha = data.psi_labeled * est.alpha.values;
  est.calibrator = std::make_shared<const PiCalibrator>(pooled_alpha, data.z_pooled, data.s,
                                                        est.beta.values, config.pi);
  est.target_ecdf = target_ecdf(est.beta.values, data.z_target);
  est.lattice = TargetLattice::from_ecdf(est.target_ecdf);

  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  est.in_sample = smoother_inputs(data, est.labeled_alpha, all, est.beta.values, est.target_ecdf,
                                  *est.calibrator, -1);
  est.h2 = default_h2(view(est.in_sample.percentile), config.h2_rate, config.h2_multiplier);
  est.in_sample_steam = steam_from_inputs(est.in_sample, est.h2, est.lattice, config.u0);

  if (config.folds >= 2) {
    CvDetails cv;
    cv.plan = FoldPlan::stratified(data.y, config.folds, config.seed);
    RiskInputs pooled;
    int usable = 0;
    for (int k = 0; k < cv.plan.k; ++k) {
      const auto held = cv.plan.members(k);
      const auto train = cv.plan.complement(k);
      Coefficients beta_k = est.beta;
      if (!hooks.reuse_full_beta) {
        beta_k = fit_adaptive_lasso_at(take_rows(data.z_labeled, train), take(data.y, train),
                                    Eigen::VectorXd::Ones(static_cast<Eigen::Index>(train.size())),
                                    config.gamma, est.beta.lambda, &est.beta.values, config.lasso);
      }
      const PiCalibrator calibrator_k = est.calibrator->with_default_bandwidth(beta_k.values);
      const EcdfEvaluator ecdf_k = target_ecdf(beta_k.values, data.z_target);
      RiskInputs part = smoother_inputs(data, est.labeled_alpha, held, beta_k.values, ecdf_k,
                                        calibrator_k, k);
      const double held_sum = part.y.sum();
      if (held_sum == 0.0 || held_sum == static_cast<double>(part.y.size()))
        ++cv.single_class_folds;
      else
        ++usable;
      append(pooled, part);
      cv.fold_beta.push_back(std::move(beta_k));
      cv.fold_training.push_back(train);
    }
    if (usable == 0)
      throw Error(ErrorCode::degenerate, "every cross-validation fold has a single outcome class");
    est.risk_inputs = std::move(pooled);
    est.cv = std::move(cv);
  } else {
    est.risk_inputs = est.in_sample;
  }
  est.h2_used = default_h2(view(est.risk_inputs.percentile), config.h2_rate, config.h2_multiplier);

  const RiskInputs& ri = est.risk_inputs;
  const Eigen::Index single = est.cv ? est.cv->single_class_folds : 0;
  for (Method m : config.methods) {
    AccuracyReport report;
    try {
    switch (m) {
    case Method::steam:
      report = steam_from_inputs(ri, est.h2_used, est.lattice, config.u0);
      break;
    case Method::weighted: {
      const auto cutoffs = default_cutoffs({view(ri.percentile)});
      report = comparator_weighted(ri.percentile, ri.y, ri.w, cutoffs, config.u0);
      report.diagnostics.clip_count = ri.clip_count;
      break;
    }
    case Method::source: {
      const auto cutoffs = default_cutoffs({view(ri.percentile)});
      report = comparator_empirical(Method::source, ri.percentile, ri.y, cutoffs, config.u0);
      break;
    }
    case Method::dr_aug: {
      const RiskCurve curve = curve_from(ri, est.h2_used, est.lattice.size);
      const ScoreSet target = percentile_scores(est.beta.values, data.z_target, est.target_ecdf,
                                                Population::target);
      const std::vector<long> target_rank(target.rank.begin(), target.rank.end());
      const auto labeled_m = curve.evaluate_ranks(ri.rank);
      const auto target_m = curve.evaluate_ranks(target_rank);
      const auto cutoffs = default_cutoffs({view(ri.percentile), view(target.percentile)});
      report = comparator_dr_aug(ri.percentile, ri.y, labeled_m.m, ri.w, target.percentile,
                                 target_m.m, cutoffs, config.u0);
      report.diagnostics.clip_count = ri.clip_count;
      report.diagnostics.fallback_count = labeled_m.fallback_count + target_m.fallback_count;
      break;
    }
    case Method::target_labeled: {
      if (!data.validation || data.validation->size() == 0)
        throw Error(ErrorCode::invalid_argument,
                    "target_labeled needs validation labels on target rows");
      const auto& v = *data.validation;
      const Eigen::MatrixXd z = take_rows(data.z_target, v.target_rows());
      const ScoreSet scores =
        percentile_scores(est.beta.values, z, est.target_ecdf, Population::target);
      Eigen::VectorXd y(static_cast<Eigen::Index>(v.size()));
      for (std::size_t k = 0; k < v.size(); ++k)
        y[static_cast<Eigen::Index>(k)] = v.y()[k];
      const auto cutoffs = default_cutoffs({view(scores.percentile)});
      report = comparator_empirical(Method::target_labeled, scores.percentile, y, cutoffs,
                                    config.u0);
      break;
    }
    }
    } catch (const Error&) {
      if (!config.skip_failed_methods)
        throw;
      continue;
    }
    report.diagnostics.single_class_folds = single;
    est.reports.push_back(std::move(report));
  }
  return est;
}

CvPipelineResult cv_pipeline(const PreparedData& data, const EstimationConfig& config,
                             const CvHooks& hooks)
{
  EstimationConfig cfg = config;
  cfg.methods = {Method::steam};
  if (cfg.folds < 2)
    throw Error(ErrorCode::invalid_argument, "cv_pipeline needs at least 2 folds");
  PointEstimate est = estimate(data, cfg, hooks);
  RiskCurve curve = curve_from(est.risk_inputs, est.h2_used, est.lattice.size);
  return {std::move(curve), std::move(est.reports.front()), std::move(*est.cv)};
}

} // namespace steam
