#include "steam/accuracy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace steam {

namespace {

std::span<const double> view(const Eigen::VectorXd& v)
{
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_cutoffs(std::span<const double> cutoffs)
{
  if (cutoffs.empty())
    throw Error(ErrorCode::invalid_argument, "empty cutoff grid");
  for (std::size_t k = 0; k < cutoffs.size(); ++k) {
    if (!(cutoffs[k] >= 0.0 && cutoffs[k] <= kAboveMaxCutoff))
      throw Error(ErrorCode::invalid_argument, "cutoffs must lie in [0, 1]");
    if (k > 0 && cutoffs[k] < cutoffs[k - 1])
      throw Error(ErrorCode::invalid_argument, "cutoffs must be ascending");
  }
}

} // namespace

std::string_view method_name(Method m)
{
  switch (m) {
  case Method::source:
    return "source";
  case Method::target_labeled:
    return "target_labeled";
  case Method::weighted:
    return "weighted";
  case Method::dr_aug:
    return "dr_aug";
  case Method::steam:
    return "steam";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name)
{
  for (Method m : kAllMethods) {
    if (name == method_name(m))
      return m;
  }
  if (name == "DR-aug" || name == "dr-aug")
    return Method::dr_aug;
  if (name == "STEAM")
    return Method::steam;
  return std::nullopt;
}

std::vector<double> default_cutoffs(std::initializer_list<std::span<const double>> percentiles)
{
  std::vector<double> out{0.0};
  for (const auto& set : percentiles) {
    for (double p : set) {
      if (!(p >= 0.0 && p <= 1.0))
        throw Error(ErrorCode::invalid_argument, "percentile outside [0, 1]");
      out.push_back(p);
    }
  }
  out.push_back(1.0);
  if (!std::is_sorted(out.begin(), out.end()))
    std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  out.push_back(kAboveMaxCutoff);
  return out;
}

std::vector<RocPoint> mass_roc(std::span<const double> percentile, std::span<const double> pos,
                               std::span<const double> neg, std::span<const double> cutoffs)
{
  const std::size_t n = percentile.size();
  if (pos.size() != n || neg.size() != n)
    throw Error(ErrorCode::invalid_argument, "mass_roc: inputs disagree in length");
  check_cutoffs(cutoffs);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (!std::is_sorted(percentile.begin(), percentile.end())) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
      return percentile[i] < percentile[j];
    });
  }
  // Suffix sums in ascending-percentile order: tail[k] = sum over ranks >= k.
  std::vector<double> sorted_p(n);
  std::vector<double> tail_pos(n + 1, 0.0);
  std::vector<double> tail_neg(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    sorted_p[k] = percentile[order[k]];
  for (std::size_t k = n; k-- > 0;) {
    tail_pos[k] = tail_pos[k + 1] + pos[order[k]];
    tail_neg[k] = tail_neg[k + 1] + neg[order[k]];
  }
  const double total_pos = tail_pos[0];
  const double total_neg = tail_neg[0];
  if (!(total_pos > 0.0) || !(total_neg > 0.0))
    throw Error(ErrorCode::degenerate, "degenerate imputed prevalence: no positive or no "
                                       "negative mass");

  std::vector<RocPoint> roc(cutoffs.size());
  std::size_t k = 0;
  for (std::size_t c = 0; c < cutoffs.size(); ++c) {
    while (k < n && sorted_p[k] < cutoffs[c])
      ++k;
    roc[c].cutoff = cutoffs[c];
    roc[c].tpr = k == 0 ? 1.0 : tail_pos[k] / total_pos;
    roc[c].fpr = k == 0 ? 1.0 : tail_neg[k] / total_neg;
  }
  return roc;
}

std::vector<RocPoint> steam_tpr_fpr(const Eigen::VectorXd& target_percentiles,
                                    const RiskCurve& risk, std::span<const double> cutoffs)
{
  const Eigen::VectorXd m = risk.evaluate(view(target_percentiles)).m;
  const Eigen::VectorXd neg = 1.0 - m.array();
  return mass_roc(view(target_percentiles), view(m), view(neg), cutoffs);
}

double steam_auc(std::span<const RocPoint> roc)
{
  if (roc.size() < 2)
    throw Error(ErrorCode::invalid_argument, "AUC needs at least two ROC points");
  std::vector<RocPoint> pts(roc.begin(), roc.end());
  const auto descending = [](const RocPoint& x, const RocPoint& y) {
    return x.fpr > y.fpr || (x.fpr == y.fpr && x.tpr > y.tpr);
  };
  // A cutoff-ordered mass ROC is already descending; reversing it is exact.
  if (std::is_sorted(pts.begin(), pts.end(), descending))
    std::reverse(pts.begin(), pts.end());
  else
    std::sort(pts.begin(), pts.end(), [](const RocPoint& x, const RocPoint& y) {
      return x.fpr < y.fpr || (x.fpr == y.fpr && x.tpr < y.tpr);
    });
  double area = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k)
    area += 0.5 * (pts[k].tpr + pts[k - 1].tpr) * (pts[k].fpr - pts[k - 1].fpr);
  return std::clamp(area, 0.0, 1.0);
}

OperatingPoint steam_cutoff_at_fpr(std::span<const RocPoint> roc, double u0)
{
  if (!(u0 > 0.0 && u0 <= 1.0))
    throw Error(ErrorCode::invalid_argument, "u0 must lie in (0, 1]");
  if (roc.empty())
    throw Error(ErrorCode::invalid_argument, "empty ROC grid");
  std::size_t k = 0;
  while (k < roc.size() && roc[k].fpr > u0)
    ++k;
  if (k == roc.size())
    throw Error(ErrorCode::invalid_argument, "u0 unattainable: every grid FPR exceeds it");
  OperatingPoint op;
  op.u0 = u0;
  if (k == 0 || roc[k].fpr == u0) {
    op.cutoff = roc[k].cutoff;
    op.tpr = roc[k].tpr;
    op.fpr = roc[k].fpr;
    return op;
  }
  const RocPoint& hi = roc[k - 1];
  const RocPoint& lo = roc[k];
  const double frac = (hi.fpr - u0) / (hi.fpr - lo.fpr);
  op.cutoff = hi.cutoff + frac * (lo.cutoff - hi.cutoff);
  op.tpr = hi.tpr + frac * (lo.tpr - hi.tpr);
  op.fpr = u0;
  return op;
}

PredictiveValues steam_ppv_npv(double tpr, double fpr, double prevalence)
{
  const double mu = prevalence;
  const double ppv_den = mu * tpr + (1.0 - mu) * fpr;
  const double npv_den = (1.0 - mu) * (1.0 - fpr) + mu * (1.0 - tpr);
  if (!(ppv_den > 0.0))
    throw Error(ErrorCode::degenerate, "PPV denominator is zero");
  if (!(npv_den > 0.0))
    throw Error(ErrorCode::degenerate, "NPV denominator is zero");
  return {mu * tpr / ppv_den, (1.0 - mu) * (1.0 - fpr) / npv_den};
}

void finish_report(AccuracyReport& report, std::span<const double> u0)
{
  report.auc = steam_auc(report.roc);
  report.at_fpr.clear();
  for (double u : u0) {
    OperatingPoint op = steam_cutoff_at_fpr(report.roc, u);
    const auto pv = steam_ppv_npv(op.tpr, op.fpr, report.prevalence);
    op.ppv = pv.ppv;
    op.npv = pv.npv;
    report.at_fpr.push_back(op);
  }
}

AccuracyReport steam_report_from_levels(std::span<const double> level_percentile,
                                        std::span<const double> level_count,
                                        std::span<const double> level_m,
                                        std::span<const double> cutoffs,
                                        std::span<const double> u0)
{
  const std::size_t L = level_percentile.size();
  if (level_count.size() != L || level_m.size() != L)
    throw Error(ErrorCode::invalid_argument, "level inputs disagree in length");
  std::vector<double> pos(L);
  std::vector<double> neg(L);
  double total = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < L; ++k) {
    pos[k] = level_count[k] * level_m[k];
    neg[k] = level_count[k] * (1.0 - level_m[k]);
    total += level_count[k];
    mass += pos[k];
  }
  AccuracyReport report;
  report.method = Method::steam;
  report.roc = mass_roc(level_percentile, pos, neg, cutoffs);
  report.prevalence = mass / total;
  finish_report(report, u0);
  return report;
}

AccuracyReport steam_report(const Eigen::VectorXd& target_percentiles, const RiskCurve& risk,
                            std::span<const double> cutoffs, std::span<const double> u0)
{
  const auto values = risk.evaluate(view(target_percentiles));
  const Eigen::VectorXd neg = 1.0 - values.m.array();
  AccuracyReport report;
  report.method = Method::steam;
  report.roc = mass_roc(view(target_percentiles), view(values.m), view(neg), cutoffs);
  report.prevalence = values.m.mean();
  report.diagnostics.fallback_count = values.fallback_count;
  finish_report(report, u0);
  return report;
}

AccuracyReport comparator_weighted(const Eigen::VectorXd& percentiles, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& w, std::span<const double> cutoffs,
                                   std::span<const double> u0)
{
  if (y.size() != percentiles.size() || w.size() != percentiles.size())
    throw Error(ErrorCode::invalid_argument, "weighted estimator: inputs disagree in length");
  const Eigen::VectorXd pos = w.cwiseProduct(y);
  const Eigen::VectorXd neg = w - pos;
  if (!(pos.sum() > 0.0) || !(neg.sum() > 0.0))
    throw Error(ErrorCode::degenerate, "weighted estimator needs positive and negative outcomes");
  AccuracyReport report;
  report.method = Method::weighted;
  report.roc = mass_roc(view(percentiles), view(pos), view(neg), cutoffs);
  report.prevalence = pos.sum() / w.sum();
  finish_report(report, u0);
  return report;
}

AccuracyReport comparator_empirical(Method method, const Eigen::VectorXd& percentiles,
                                    const Eigen::VectorXd& y, std::span<const double> cutoffs,
                                    std::span<const double> u0)
{
  AccuracyReport report =
    comparator_weighted(percentiles, y, Eigen::VectorXd::Ones(y.size()), cutoffs, u0);
  report.method = method;
  return report;
}

AccuracyReport comparator_dr_aug(const Eigen::VectorXd& labeled_percentiles,
                                 const Eigen::VectorXd& y, const Eigen::VectorXd& labeled_m,
                                 const Eigen::VectorXd& w,
                                 const Eigen::VectorXd& target_percentiles,
                                 const Eigen::VectorXd& target_m,
                                 std::span<const double> cutoffs, std::span<const double> u0)
{
  const Eigen::Index n = labeled_percentiles.size();
  const Eigen::Index nt = target_percentiles.size();
  if (y.size() != n || labeled_m.size() != n || w.size() != n || target_m.size() != nt)
    throw Error(ErrorCode::invalid_argument, "DR-aug: inputs disagree in length");
  check_cutoffs(cutoffs);
  const double wsum = w.sum();
  if (!(wsum > 0.0) || nt == 0)
    throw Error(ErrorCode::degenerate, "DR-aug: empty weights or target");

  // Signed masses of both samples on one merged axis.
  const Eigen::Index total = n + nt;
  std::vector<double> p(static_cast<std::size_t>(total));
  std::vector<double> pos(static_cast<std::size_t>(total));
  std::vector<double> neg(static_cast<std::size_t>(total));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    p[k] = labeled_percentiles[i];
    pos[k] = w[i] * (y[i] - labeled_m[i]) / wsum;
    neg[k] = w[i] * ((1.0 - y[i]) - (1.0 - labeled_m[i])) / wsum;
  }
  const double inv_nt = 1.0 / static_cast<double>(nt);
  for (Eigen::Index i = 0; i < nt; ++i) {
    const auto k = static_cast<std::size_t>(n + i);
    p[k] = target_percentiles[i];
    pos[k] = target_m[i] * inv_nt;
    neg[k] = (1.0 - target_m[i]) * inv_nt;
  }
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });
  std::vector<double> tail_pos(p.size() + 1, 0.0);
  std::vector<double> tail_neg(p.size() + 1, 0.0);
  for (std::size_t k = p.size(); k-- > 0;) {
    tail_pos[k] = tail_pos[k + 1] + pos[order[k]];
    tail_neg[k] = tail_neg[k + 1] + neg[order[k]];
  }
  const double num0_pos = tail_pos[0];
  const double num0_neg = tail_neg[0];
  if (!(num0_pos > 0.0) || !(num0_neg > 0.0))
    throw Error(ErrorCode::degenerate, "DR-aug: degenerate augmented prevalence");

  AccuracyReport report;
  report.method = Method::dr_aug;
  report.roc.resize(cutoffs.size());
  std::size_t k = 0;
  for (std::size_t c = 0; c < cutoffs.size(); ++c) {
    while (k < p.size() && p[order[k]] < cutoffs[c])
      ++k;
    report.roc[c].cutoff = cutoffs[c];
    report.roc[c].tpr = tail_pos[k] / num0_pos;
    report.roc[c].fpr = tail_neg[k] / num0_neg;
  }
  double run_tpr = 0.0;
  double run_fpr = 0.0;
  for (std::size_t c = cutoffs.size(); c-- > 0;) {
    run_tpr = std::max(run_tpr, std::clamp(report.roc[c].tpr, 0.0, 1.0));
    run_fpr = std::max(run_fpr, std::clamp(report.roc[c].fpr, 0.0, 1.0));
    report.roc[c].tpr = run_tpr;
    report.roc[c].fpr = run_fpr;
  }
  report.prevalence = std::clamp(num0_pos, 1e-12, 1.0 - 1e-12);
  finish_report(report, u0);
  return report;
}

} // namespace steam
