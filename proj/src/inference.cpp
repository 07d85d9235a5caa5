#include "steam/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace steam {

std::string_view variant_name(PerturbVariant v)
{
  return v == PerturbVariant::exact ? "exact" : "approx";
}

Eigen::VectorXd draw_perturbation_weights(Eigen::Index count, Rng& rng)
{
  if (count < 1)
    throw Error(ErrorCode::invalid_argument, "perturbation weights: count must be positive");
  std::gamma_distribution<double> shape_a(0.5, 1.0);
  std::gamma_distribution<double> shape_b(1.5, 1.0);
  Eigen::VectorXd g(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const double x = shape_a(rng);
    const double y = shape_b(rng);
    g[i] = 4.0 * x / (x + y);
  }
  return g;
}

Eigen::MatrixXd perturbation_matrix(Eigen::Index draws, Eigen::Index n, std::uint64_t seed)
{
  Eigen::MatrixXd G(draws, n);
  for (Eigen::Index b = 0; b < draws; ++b) {
    Rng rng = child_rng(seed, static_cast<std::uint64_t>(b));
    G.row(b) = draw_perturbation_weights(n, rng).transpose();
  }
  return G;
}

std::vector<double> band_fpr_grid()
{
  std::vector<double> u(101);
  for (int k = 0; k <= 100; ++k)
    u[static_cast<std::size_t>(k)] = k / 100.0;
  return u;
}

std::vector<std::string> perturbation_scalar_names(std::span<const double> u0)
{
  std::vector<std::string> names{"auc", "prevalence"};
  char buf[64];
  for (double u : u0) {
    for (const char* what : {"cutoff", "tpr", "ppv", "npv"}) {
      std::snprintf(buf, sizeof buf, "%s@%g", what, u);
      names.emplace_back(buf);
    }
  }
  for (double u : band_fpr_grid()) {
    std::snprintf(buf, sizeof buf, "roc@%.2f", u);
    names.emplace_back(buf);
  }
  return names;
}

namespace {

bool fpr_descending(std::span<const RocPoint> roc)
{
  return std::is_sorted(roc.begin(), roc.end(),
                        [](const RocPoint& x, const RocPoint& y) { return x.fpr > y.fpr; });
}

double roc_at_fpr_impl(std::span<const RocPoint> roc, double u, bool monotone)
{
  if (!(u >= 0.0 && u <= 1.0))
    throw Error(ErrorCode::invalid_argument, "FPR must lie in [0, 1]");
  const auto above = [u](const RocPoint& p) { return p.fpr > u; };
  // First point with fpr <= u.
  const auto k = static_cast<std::size_t>(
    monotone ? std::partition_point(roc.begin(), roc.end(), above) - roc.begin()
             : std::find_if_not(roc.begin(), roc.end(), above) - roc.begin());
  if (k == roc.size())
    throw Error(ErrorCode::invalid_argument, "FPR unattainable on this grid");
  if (k == 0 || roc[k].fpr == u)
    return roc[k].tpr;
  const RocPoint& hi = roc[k - 1];
  const RocPoint& lo = roc[k];
  return hi.tpr + (hi.fpr - u) / (hi.fpr - lo.fpr) * (lo.tpr - hi.tpr);
}

} // namespace

double roc_at_fpr(std::span<const RocPoint> roc, double u)
{
  return roc_at_fpr_impl(roc, u, fpr_descending(roc));
}

Eigen::VectorXd report_scalars(const AccuracyReport& report)
{
  const auto grid = band_fpr_grid();
  Eigen::VectorXd out(2 + 4 * static_cast<Eigen::Index>(report.at_fpr.size()) +
                      static_cast<Eigen::Index>(grid.size()));
  Eigen::Index k = 0;
  out[k++] = report.auc;
  out[k++] = report.prevalence;
  for (const auto& op : report.at_fpr) {
    out[k++] = op.cutoff;
    out[k++] = op.tpr;
    out[k++] = op.ppv;
    out[k++] = op.npv;
  }
  const bool monotone = fpr_descending(report.roc);
  for (double u : grid)
    out[k++] = roc_at_fpr_impl(report.roc, u, monotone);
  return out;
}

PerturbationDraws perturb(const PreparedData& data, const PointEstimate& point,
                          const EstimationConfig& config, const Eigen::MatrixXd& G,
                          PerturbVariant variant, std::uint64_t seed)
{
  const Eigen::Index B = G.rows();
  const Eigen::Index n = data.n();
  if (G.cols() != n)
    throw Error(ErrorCode::invalid_argument, "perturbation matrix has the wrong column count");
  if (B < 1)
    throw Error(ErrorCode::invalid_argument, "perturbation needs at least one draw");

  PerturbationDraws out;
  out.B = B;
  out.seed = seed;
  out.variant = variant;
  out.names = perturbation_scalar_names(config.u0);
  out.point = report_scalars(point.in_sample_steam);

  const PiCalibrator& calibrator = *point.calibrator;
  Eigen::VectorXd pi_hat;
  Eigen::MatrixXd grad;
  if (variant == PerturbVariant::approx) {
    const auto eval = calibrator.evaluate(point.labeled_alpha, data.z_labeled);
    pi_hat = eval.pi_raw;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isnan(pi_hat[i]))
        pi_hat[i] = eval.pi[i];
    }
    grad = calibrator.gradient_wrt_beta(point.labeled_alpha, data.z_labeled);
  }
  const double lo = calibrator.pi_min();
  const double hi = 1.0 - lo;
  const double lambda = point.beta.lambda;

  std::vector<Eigen::VectorXd> rows(static_cast<std::size_t>(B));
  std::vector<char> ok(static_cast<std::size_t>(B), 0);

#pragma omp parallel for schedule(dynamic, 1)
  for (Eigen::Index b = 0; b < B; ++b) {
    try {
      const Eigen::VectorXd g = G.row(b).transpose();
      const Coefficients beta_b = fit_adaptive_lasso_at(data.z_labeled, data.y, g, config.gamma,
                                                        lambda, &point.beta.values, config.lasso);
      const RankedScores ranked = ranked_scores(beta_b.values, data.z_target, data.z_labeled);
      const TargetLattice& lattice = ranked.lattice;
      const ScoreSet& scores = ranked.cohort;

      RiskInputs ri;
      if (variant == PerturbVariant::exact) {
        const auto eval =
          calibrator.with_beta(beta_b.values).evaluate(point.labeled_alpha, data.z_labeled);
        ri.pi = eval.pi;
        ri.clip_count = eval.clip_count;
      } else {
        ri.pi = (pi_hat + grad * (beta_b.values - point.beta.values)).cwiseMax(lo).cwiseMin(hi);
      }
      ri.w = ((1.0 - ri.pi.array()) / ri.pi.array()) * g.array();
      ri.percentile = scores.percentile;
      ri.rank.assign(scores.rank.begin(), scores.rank.end());
      ri.y = data.y;
      const AccuracyReport report = steam_from_inputs(ri, point.h2, lattice, config.u0);
      Eigen::VectorXd s = report_scalars(report);
      if (s.allFinite()) {
        rows[static_cast<std::size_t>(b)] = std::move(s);
        ok[static_cast<std::size_t>(b)] = 1;
      }
    } catch (const Error&) {
      // Recorded through `ok`; the caller sees the failure count.
    }
  }

  const auto m = static_cast<Eigen::Index>(out.names.size());
  Eigen::Index good = 0;
  for (char f : ok)
    good += f;
  out.failed = B - good;
  if (static_cast<double>(out.failed) > 0.05 * static_cast<double>(B))
    throw Error(ErrorCode::numerical, std::to_string(out.failed) + " of " + std::to_string(B) +
                                        " perturbation draws failed (limit 5%)");
  out.draws.resize(good, m);
  Eigen::Index r = 0;
  for (Eigen::Index b = 0; b < B; ++b) {
    if (!ok[static_cast<std::size_t>(b)])
      continue;
    out.draws.row(r++) = rows[static_cast<std::size_t>(b)].transpose();
    out.draw_index.push_back(b);
  }
  return out;
}

PerturbationDraws perturb_exact(const PreparedData& data, const PointEstimate& point,
                                const EstimationConfig& config, Eigen::Index B,
                                std::uint64_t seed)
{
  return perturb(data, point, config, perturbation_matrix(B, data.n(), seed),
                 PerturbVariant::exact, seed);
}

PerturbationDraws perturb_approx(const PreparedData& data, const PointEstimate& point,
                                 const EstimationConfig& config, Eigen::Index B,
                                 std::uint64_t seed)
{
  return perturb(data, point, config, perturbation_matrix(B, data.n(), seed),
                 PerturbVariant::approx, seed);
}

ScalarSummary recenter(const ScalarSummary& summary, double draw_center, double point)
{
  ScalarSummary out = summary;
  const double shift = point - draw_center;
  out.lower += shift;
  out.upper += shift;
  return out;
}

double quantile7(std::vector<double> values, double prob)
{
  if (values.empty())
    throw Error(ErrorCode::invalid_argument, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<ScalarSummary> summarize_draws(const PerturbationDraws& draws, double level)
{
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorCode::invalid_argument, "confidence level must lie in (0, 1)");
  if (draws.draws.rows() < 100)
    throw Error(ErrorCode::invalid_argument,
                "at least 100 successful perturbation draws are needed for intervals");
  std::vector<ScalarSummary> out;
  const double tail = (1.0 - level) / 2.0;
  for (Eigen::Index j = 0; j < draws.draws.cols(); ++j) {
    const Eigen::VectorXd col = draws.draws.col(j);
    std::vector<double> v(col.begin(), col.end());
    ScalarSummary s;
    s.name = j < static_cast<Eigen::Index>(draws.names.size())
               ? draws.names[static_cast<std::size_t>(j)]
               : std::to_string(j);
    s.se = sample_sd(v);
    s.lower = quantile7(v, tail);
    s.upper = quantile7(v, 1.0 - tail);
    out.push_back(std::move(s));
  }
  return out;
}

} // namespace steam
