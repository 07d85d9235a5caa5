#include "steam/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace steam {

namespace {

constexpr std::uint64_t kOracleStream = 0x0a4c1e;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double logistic(double u)
{
  return expit(u);
}

//! Fills one expanded design row (intercept first) from raw covariates.
void design_row(const double* x, int p, const BasisExpansion& basis, double* out)
{
  out[0] = 1.0;
  for (int j = 0; j < p; ++j)
    out[1 + j] = x[j];
  int k = 1 + p;
  for (const auto& t : basis.terms) {
    if (t.kind == BasisTerm::Kind::interaction)
      out[k++] = x[t.first - 1] * x[t.second - 1];
  }
}

//! Draws one covariate vector from the equicorrelated normal.
void draw_x(const SimScenario& sc, Rng& rng, std::normal_distribution<double>& normal, double* x)
{
  const double sd = std::sqrt(sc.sigma2);
  const double shared = std::sqrt(sc.rho) * normal(rng);
  const double own = std::sqrt(1.0 - sc.rho);
  for (int j = 0; j < sc.p; ++j)
    x[j] = sd * (own * normal(rng) + shared);
}

std::array<double, 5> nan_measures()
{
  return {kNaN, kNaN, kNaN, kNaN, kNaN};
}

double sd_of(const std::vector<double>& v)
{
  if (v.size() < 2)
    return kNaN;
  return sample_sd(v);
}

} // namespace

std::array<double, 5> measures_of(const AccuracyReport& r)
{
  const OperatingPoint& op = r.at_fpr.front();
  return {op.cutoff, r.auc, op.tpr, op.ppv, op.npv};
}

std::string_view shift_name(ShiftStrength s)
{
  switch (s) {
  case ShiftStrength::weak:
    return "weak";
  case ShiftStrength::moderate:
    return "moderate";
  case ShiftStrength::strong:
    return "strong";
  }
  return "unknown";
}

std::string_view misspec_name(Misspec m)
{
  switch (m) {
  case Misspec::both_correct:
    return "both_correct";
  case Misspec::pi_mis:
    return "pi_mis";
  case Misspec::mu_mis:
    return "mu_mis";
  }
  return "unknown";
}

std::optional<ShiftStrength> parse_shift(std::string_view name)
{
  for (auto s : {ShiftStrength::weak, ShiftStrength::moderate, ShiftStrength::strong}) {
    if (name == shift_name(s))
      return s;
  }
  return std::nullopt;
}

std::optional<Misspec> parse_misspec(std::string_view name)
{
  for (auto m : {Misspec::both_correct, Misspec::pi_mis, Misspec::mu_mis}) {
    if (name == misspec_name(m))
      return m;
  }
  return std::nullopt;
}

void SimScenario::validate() const
{
  if (p < 6)
    throw Error(ErrorCode::invalid_argument, "scenario needs at least 6 covariates");
  if (!(sigma2 > 0.0))
    throw Error(ErrorCode::invalid_argument, "sigma2 must be positive");
  if (!(rho >= 0.0 && rho < 1.0))
    throw Error(ErrorCode::invalid_argument, "rho must lie in [0, 1)");
  if (n < 1 || N < 1 || N_t < 1 || n > N)
    throw Error(ErrorCode::invalid_argument, "scenario sizes must satisfy 1 <= n <= N, N_t >= 1");
  if (n_target_labeled < 0)
    throw Error(ErrorCode::invalid_argument, "n_target_labeled must be nonnegative");
}

double TruthModel::mu(const double* x) const
{
  return logistic(-0.25 + 0.8 * x[0] + 0.8 * x[1] + 0.4 * x[2] + 0.4 * x[3] +
                  0.2 * x[0] * x[1] - 0.1 * x[1] * x[2] + 0.2 * x[2] * x[3]);
}

double TruthModel::pi(const double* x) const
{
  double scale = 0.2;
  if (shift == ShiftStrength::weak)
    scale = 0.1;
  else if (shift == ShiftStrength::strong)
    scale = 0.6;
  return logistic(scale * (x[0] + 0.5 * x[1] - x[4] - 0.5 * x[5] + 0.5 * x[0] * x[1]));
}

SimDataset generate_dataset(const SimScenario& sc, Rng& rng)
{
  sc.validate();
  const TruthModel truth{sc.shift};
  const Eigen::Index total = sc.N + sc.N_t;
  const int p = sc.p;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd X(total, p);
    std::vector<int> s(static_cast<std::size_t>(total));
    std::vector<int> y(static_cast<std::size_t>(total));
    std::vector<double> x(static_cast<std::size_t>(p));
    std::vector<Eigen::Index> source;
    std::vector<Eigen::Index> target;
    for (Eigen::Index i = 0; i < total; ++i) {
      draw_x(sc, rng, normal, x.data());
      for (int j = 0; j < p; ++j)
        X(i, j) = x[static_cast<std::size_t>(j)];
      const auto k = static_cast<std::size_t>(i);
      s[k] = unif(rng) < truth.pi(x.data()) ? 1 : 0;
      y[k] = unif(rng) < truth.mu(x.data()) ? 1 : 0;
      (s[k] ? source : target).push_back(i);
    }
    if (static_cast<Eigen::Index>(source.size()) < sc.n + 1 ||
        static_cast<Eigen::Index>(target.size()) < std::max<Eigen::Index>(1, sc.n_target_labeled))
      continue;
    std::shuffle(source.begin(), source.end(), rng);

    const Eigen::Index n_unl = static_cast<Eigen::Index>(source.size()) - sc.n;
    const auto n_t = static_cast<Eigen::Index>(target.size());
    Eigen::MatrixXd L(sc.n, p + 1);
    Eigen::VectorXd yl(sc.n);
    Eigen::MatrixXd U(n_unl, p + 1);
    Eigen::MatrixXd T(n_t, p + 1);
    for (Eigen::Index i = 0; i < sc.n; ++i) {
      const Eigen::Index r = source[static_cast<std::size_t>(i)];
      L(i, 0) = 1.0;
      L.row(i).tail(p) = X.row(r);
      yl[i] = y[static_cast<std::size_t>(r)];
    }
    for (Eigen::Index i = 0; i < n_unl; ++i) {
      const Eigen::Index r = source[static_cast<std::size_t>(sc.n + i)];
      U(i, 0) = 1.0;
      U.row(i).tail(p) = X.row(r);
    }
    std::vector<Eigen::Index> vrows;
    std::vector<int> vy;
    for (Eigen::Index i = 0; i < n_t; ++i) {
      const Eigen::Index r = target[static_cast<std::size_t>(i)];
      T(i, 0) = 1.0;
      T.row(i).tail(p) = X.row(r);
      if (i < sc.n_target_labeled) {
        vrows.push_back(i);
        vy.push_back(y[static_cast<std::size_t>(r)]);
      }
    }
    std::vector<std::string> names;
    for (int j = 1; j <= p; ++j)
      names.push_back("x" + std::to_string(j));
    return SimDataset{StudyData(std::move(L), std::move(yl), std::move(U), std::move(T),
                                std::move(names)),
                      ValidationLabels(std::move(vrows), std::move(vy)), truth};
  }
  throw Error(ErrorCode::degenerate,
              "too few source or target rows realized after 10 attempts; enlarge N or N_t");
}

std::pair<BasisExpansion, BasisExpansion> scenario_bases(Misspec misspec)
{
  const BasisExpansion z_mu = BasisExpansion::interactions({{1, 2}, {2, 3}, {3, 4}});
  const BasisExpansion z_pi = BasisExpansion::interactions({{1, 2}});
  switch (misspec) {
  case Misspec::both_correct:
    return {z_mu, z_pi};
  case Misspec::pi_mis:
    return {z_mu, BasisExpansion::none()};
  case Misspec::mu_mis:
    return {BasisExpansion::none(), z_pi};
  }
  return {z_mu, z_pi};
}

OracleSample oracle_sample(const SimScenario& sc, const BasisExpansion& mu_basis,
                           Eigen::Index draws, std::uint64_t seed)
{
  sc.validate();
  mu_basis.validate(sc.p);
  if (draws < 100)
    throw Error(ErrorCode::invalid_argument, "oracle needs at least 100 draws");
  const TruthModel truth{sc.shift};
  const int q = sc.p + 1 + static_cast<int>(mu_basis.added_columns());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(sc.p));
  Rng rng = child_rng(seed, 2);
  OracleSample out;
  // Row-major fill, then one transpose into the column-major design.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z(draws, q);
  out.mu.resize(draws);
  for (Eigen::Index i = 0; i < draws;) {
    draw_x(sc, rng, normal, x.data());
    if (unif(rng) < truth.pi(x.data()))
      continue;
    design_row(x.data(), sc.p, mu_basis, z.row(i).data());
    out.mu[i] = truth.mu(x.data());
    ++i;
  }
  out.z = z;
  return out;
}

AccuracyReport classifier_accuracy(const OracleSample& sample, const Eigen::VectorXd& beta,
                                   double u0)
{
  if (beta.size() != sample.z.cols())
    throw Error(ErrorCode::invalid_argument, "coefficient length does not match the oracle design");
  const Eigen::VectorXd score = sample.z * beta;
  const auto m = static_cast<std::size_t>(score.size());
  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return score[a] < score[b]; });
  std::vector<double> level_p;
  std::vector<double> level_count;
  std::vector<double> level_m;
  const double size = static_cast<double>(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    double msum = 0.0;
    while (j < m && score[order[j]] == score[order[i]])
      msum += sample.mu[order[j++]];
    level_p.push_back(static_cast<double>(j) / size);
    level_count.push_back(static_cast<double>(j - i));
    level_m.push_back(msum / static_cast<double>(j - i));
    i = j;
  }
  const std::vector<double> cutoffs = default_cutoffs({level_p});
  const double u0s[] = {u0};
  return steam_report_from_levels(level_p, level_count, level_m, cutoffs, u0s);
}

OracleTruth oracle_truth(const SimScenario& sc, const BasisExpansion& mu_basis,
                         const OracleSample& sample, std::uint64_t seed, double u0,
                         Eigen::Index fit_draws)
{
  sc.validate();
  mu_basis.validate(sc.p);
  if (fit_draws < 100)
    throw Error(ErrorCode::invalid_argument, "oracle needs at least 100 fitting draws");
  const TruthModel truth{sc.shift};
  const int q = sc.p + 1 + static_cast<int>(mu_basis.added_columns());
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(sc.p));

  // Limiting working-model coefficients on the source population.
  Rng rng = child_rng(seed, 1);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> z(fit_draws, q);
  Eigen::VectorXd soft(fit_draws);
  for (Eigen::Index i = 0; i < fit_draws;) {
    draw_x(sc, rng, normal, x.data());
    if (unif(rng) >= truth.pi(x.data()))
      continue;
    design_row(x.data(), sc.p, mu_basis, z.row(i).data());
    soft[i] = truth.mu(x.data());
    ++i;
  }
  OracleTruth out;
  const Eigen::MatrixXd Z = z;
  out.beta_bar = fit_logistic(Z, soft, Eigen::VectorXd::Ones(fit_draws)).values;
  const AccuracyReport report = classifier_accuracy(sample, out.beta_bar, u0);
  out.auc = report.auc;
  out.prevalence = report.prevalence;
  out.at_u0 = report.at_fpr.front();
  out.measures = measures_of(report);
  return out;
}

std::vector<double> antitonic_fit(std::span<const double> values)
{
  // Pool adjacent violators of a nonincreasing sequence.
  std::vector<double> level;
  std::vector<double> weight;
  for (double v : values) {
    level.push_back(v);
    weight.push_back(1.0);
    while (level.size() > 1 && level[level.size() - 2] < level.back()) {
      const double w = weight.back() + weight[weight.size() - 2];
      const double l = (level.back() * weight.back() +
                        level[level.size() - 2] * weight[weight.size() - 2]) / w;
      level.pop_back();
      weight.pop_back();
      level.back() = l;
      weight.back() = w;
    }
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < level.size(); ++k)
    out.insert(out.end(), static_cast<std::size_t>(weight[k]), level[k]);
  return out;
}

EquivalentLabels equivalent_labels(std::span<const Eigen::Index> label_grid,
                                   std::span<const double> grid_rmse, double estimator_rmse)
{
  if (label_grid.empty() || grid_rmse.size() != label_grid.size())
    throw Error(ErrorCode::invalid_argument, "label grid and RMSE curve disagree in length");
  for (std::size_t k = 1; k < label_grid.size(); ++k) {
    if (label_grid[k] <= label_grid[k - 1])
      throw Error(ErrorCode::invalid_argument, "label grid must be ascending");
  }
  if (!(estimator_rmse > 0.0))
    throw Error(ErrorCode::invalid_argument, "estimator RMSE must be positive");
  const std::vector<double> fit = antitonic_fit(grid_rmse);
  EquivalentLabels out;
  if (estimator_rmse >= fit.front()) {
    out.size = static_cast<double>(label_grid.front());
    out.clamped = estimator_rmse > fit.front();
    return out;
  }
  if (estimator_rmse <= fit.back()) {
    out.size = static_cast<double>(label_grid.back());
    out.clamped = estimator_rmse < fit.back();
    return out;
  }
  std::size_t k = 1;
  while (fit[k] > estimator_rmse)
    ++k;
  // Precision 1/RMSE^2 is close to linear in the number of labels.
  const double a = 1.0 / (fit[k - 1] * fit[k - 1]);
  const double b = 1.0 / (fit[k] * fit[k]);
  const double t = 1.0 / (estimator_rmse * estimator_rmse);
  const double frac = b > a ? (t - a) / (b - a) : 1.0;
  out.size = static_cast<double>(label_grid[k - 1]) +
             frac * static_cast<double>(label_grid[k] - label_grid[k - 1]);
  return out;
}

SummaryRow summarize_series(std::span<const double> values, std::span<const double> truth)
{
  if (truth.size() != values.size())
    throw Error(ErrorCode::invalid_argument, "one truth per estimate is required");
  std::vector<double> err;
  SummaryRow row;
  for (std::size_t r = 0; r < values.size(); ++r) {
    if (std::isfinite(values[r]) && std::isfinite(truth[r]))
      err.push_back(values[r] - truth[r]);
    else
      ++row.n_fail;
  }
  if (err.empty()) {
    row.bias = row.se = row.rmse = kNaN;
    return row;
  }
  double sq = 0.0;
  for (double e : err)
    sq += e * e;
  row.bias = 100.0 * sample_mean(err);
  row.se = err.size() > 1 ? 100.0 * sample_sd(err) : 0.0;
  row.rmse = 100.0 * std::sqrt(sq / static_cast<double>(err.size()));
  return row;
}

SummaryRow summarize_series(std::span<const double> values, double truth)
{
  const std::vector<double> t(values.size(), truth);
  return summarize_series(values, t);
}

const MethodEstimates* ExperimentResult::find(std::string_view method) const
{
  for (const auto& m : estimates) {
    if (m.method == method)
      return &m;
  }
  return nullptr;
}

const SummaryRow* ExperimentResult::row(std::string_view measure, std::string_view method) const
{
  for (const auto& r : summary) {
    if (r.measure == measure && r.method == method)
      return &r;
  }
  return nullptr;
}

ExperimentResult run_experiment(const SimScenario& scenario, const ExperimentOptions& options)
{
  scenario.validate();
  if (options.replicates < 2)
    throw Error(ErrorCode::invalid_argument, "an experiment needs at least 2 replicates");
  const auto [mu_basis, pi_basis] = scenario_bases(scenario.misspec);
  EstimationConfig config = options.config;
  config.mu_basis = mu_basis;
  config.pi_basis = pi_basis;
  config.u0 = {0.05};
  config.methods = options.methods;
  config.skip_failed_methods = true;

  ExperimentResult result;
  result.scenario = scenario;
  const std::uint64_t oracle_seed = child_seed(scenario.seed, kOracleStream);
  const OracleSample sample = oracle_sample(scenario, mu_basis, options.oracle_draws, oracle_seed);
  result.truth = oracle_truth(scenario, mu_basis, sample, oracle_seed);
  const bool fitted_truth = options.truth == TruthMode::fitted;

  Eigen::Index max_grid = 0;
  for (Eigen::Index g : options.label_grid)
    max_grid = std::max(max_grid, g);
  SimScenario sc = scenario;
  sc.n_target_labeled = std::max(scenario.n_target_labeled, max_grid);

  std::vector<std::string> names;
  for (Method m : options.methods)
    names.emplace_back(method_name(m));
  if (options.include_in_sample)
    names.emplace_back("steam_nocv");
  const auto R = static_cast<std::size_t>(options.replicates);
  const std::size_t G = options.label_grid.size();
  const std::size_t V = options.perturb.size();

  std::vector<std::vector<std::array<double, 5>>> values(
    names.size(), std::vector<std::array<double, 5>>(R, nan_measures()));
  result.replicate_truth.assign(R, fitted_truth ? nan_measures() : result.truth.measures);
  std::vector<std::vector<std::array<double, 5>>> grid_values(
    G, std::vector<std::array<double, 5>>(R, nan_measures()));
  // Per variant and replicate: SE, lower, upper of each measure.
  struct Interval {
    std::array<double, 5> se = nan_measures();
    std::array<double, 5> lower = nan_measures();
    std::array<double, 5> upper = nan_measures();
    std::array<double, 5> center = nan_measures();
  };
  std::vector<std::vector<Interval>> intervals(V, std::vector<Interval>(R));
  std::vector<std::vector<double>> seconds(V, std::vector<double>(R, 0.0));

  const std::array<std::string, 5> scalar_for{"cutoff@0.05", "auc", "tpr@0.05", "ppv@0.05",
                                              "npv@0.05"};

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t r = 0; r < R; ++r) {
    const std::uint64_t rep_seed = child_seed(scenario.seed, r + 1);
    try {
      Rng rng(rep_seed);
      const SimDataset ds = generate_dataset(sc, rng);
      const PreparedData prepared = PreparedData::from(
        ds.data, config, ds.validation.head(static_cast<std::size_t>(scenario.n_target_labeled)));
      EstimationConfig cfg = config;
      cfg.seed = child_seed(rep_seed, 1);
      const PointEstimate est = estimate(prepared, cfg);
      if (fitted_truth)
        result.replicate_truth[r] = measures_of(classifier_accuracy(sample, est.beta.values));
      for (std::size_t k = 0; k < options.methods.size(); ++k) {
        if (const AccuracyReport* rep = est.find(options.methods[k]))
          values[k][r] = measures_of(*rep);
      }
      if (options.include_in_sample)
        values[names.size() - 1][r] = measures_of(est.in_sample_steam);

      for (std::size_t g = 0; g < G; ++g) {
        try {
          const auto v = ds.validation.head(static_cast<std::size_t>(options.label_grid[g]));
          Eigen::MatrixXd z(static_cast<Eigen::Index>(v.size()), prepared.z_target.cols());
          Eigen::VectorXd y(static_cast<Eigen::Index>(v.size()));
          for (std::size_t i = 0; i < v.size(); ++i) {
            z.row(static_cast<Eigen::Index>(i)) = prepared.z_target.row(v.target_rows()[i]);
            y[static_cast<Eigen::Index>(i)] = v.y()[i];
          }
          const ScoreSet scores = percentile_scores(est.beta.values, z, est.target_ecdf,
                                                    Population::target);
          const auto cutoffs = default_cutoffs(
            {std::span<const double>(scores.percentile.data(),
                                     static_cast<std::size_t>(scores.percentile.size()))});
          grid_values[g][r] = measures_of(comparator_empirical(
            Method::target_labeled, scores.percentile, y, cutoffs, cfg.u0));
        } catch (const Error&) {
        }
      }

      if (V > 0) {
        const Eigen::MatrixXd Gm = perturbation_matrix(options.draws, prepared.n(),
                                                       child_seed(rep_seed, 2));
        for (std::size_t v = 0; v < V; ++v) {
          try {
            const auto t0 = std::chrono::steady_clock::now();
            const PerturbationDraws d = perturb(prepared, est, cfg, Gm, options.perturb[v],
                                                child_seed(rep_seed, 2));
            const auto t1 = std::chrono::steady_clock::now();
            seconds[v][r] = std::chrono::duration<double>(t1 - t0).count();
            const auto summary = summarize_draws(d, 0.95);
            for (std::size_t k = 0; k < 5; ++k) {
              for (const auto& s : summary) {
                if (s.name == scalar_for[k]) {
                  intervals[v][r].se[k] = s.se;
                  intervals[v][r].lower[k] = s.lower;
                  intervals[v][r].upper[k] = s.upper;
                  intervals[v][r].center[k] = measures_of(est.in_sample_steam)[k];
                }
              }
            }
          } catch (const Error&) {
          }
        }
      }
    } catch (const Error&) {
      // Every method of this replicate stays NaN and counts as failed.
    }
  }

  for (std::size_t k = 0; k < names.size(); ++k) {
    MethodEstimates me;
    me.method = names[k];
    me.values = values[k];
    for (const auto& v : me.values)
      me.ok.push_back(std::isfinite(v[1]) ? 1 : 0);
    for (std::size_t j = 0; j < 5; ++j) {
      std::vector<double> series;
      std::vector<double> truth;
      for (std::size_t r = 0; r < R; ++r) {
        series.push_back(me.values[r][j]);
        truth.push_back(result.replicate_truth[r][j]);
      }
      SummaryRow row = summarize_series(series, truth);
      row.measure = std::string(kMeasures[j]);
      row.method = names[k];
      result.summary.push_back(row);
    }
    result.estimates.push_back(std::move(me));
  }

  for (std::size_t g = 0; g < G; ++g) {
    std::array<double, 5> rm{};
    for (std::size_t j = 0; j < 5; ++j) {
      std::vector<double> series;
      std::vector<double> truth;
      for (std::size_t r = 0; r < R; ++r) {
        series.push_back(grid_values[g][r][j]);
        truth.push_back(result.replicate_truth[r][j]);
      }
      rm[j] = summarize_series(series, truth).rmse;
    }
    result.label_curve.push_back(rm);
  }
  if (G > 0) {
    for (const auto& row : result.summary) {
      std::size_t j = 0;
      while (kMeasures[j] != row.measure)
        ++j;
      std::vector<double> curve;
      bool usable = std::isfinite(row.rmse) && row.rmse > 0.0;
      for (const auto& rm : result.label_curve) {
        curve.push_back(rm[j]);
        usable = usable && std::isfinite(rm[j]);
      }
      if (!usable)
        continue;
      const EquivalentLabels eq = equivalent_labels(options.label_grid, curve, row.rmse);
      result.equivalent.push_back({row.measure, row.method, row.rmse, eq.size, eq.clamped});
    }
  }

  const MethodEstimates* steam = result.find("steam");
  for (std::size_t v = 0; v < V; ++v) {
    double total_seconds = 0.0;
    for (double s : seconds[v])
      total_seconds += s;
    result.perturb_seconds.emplace_back(std::string(variant_name(options.perturb[v])),
                                        total_seconds);
    for (std::size_t j = 0; j < 5; ++j) {
      CoverageRow row;
      row.measure = std::string(kMeasures[j]);
      row.variant = std::string(variant_name(options.perturb[v]));
      std::vector<double> points;
      double se_sum = 0.0;
      Eigen::Index covered = 0;
      Eigen::Index covered_raw = 0;
      for (std::size_t r = 0; r < R; ++r) {
        const Interval& iv = intervals[v][r];
        const double point = steam ? steam->values[r][j] : kNaN;
        if (!std::isfinite(iv.se[j]) || !std::isfinite(point))
          continue;
        points.push_back(point);
        se_sum += iv.se[j];
        const double t = result.replicate_truth[r][j];
        if (iv.lower[j] <= t && t <= iv.upper[j])
          ++covered_raw;
        const double shift = point - iv.center[j];
        if (iv.lower[j] + shift <= t && t <= iv.upper[j] + shift)
          ++covered;
      }
      row.replicates = static_cast<Eigen::Index>(points.size());
      if (!points.empty()) {
        row.mean_estimate = sample_mean(points);
        row.ese = sd_of(points);
        row.ase = se_sum / static_cast<double>(points.size());
        row.coverage = static_cast<double>(covered) / static_cast<double>(points.size());
        row.coverage_uncentered =
          static_cast<double>(covered_raw) / static_cast<double>(points.size());
      }
      result.coverage.push_back(row);
    }
  }
  return result;
}

} // namespace steam
