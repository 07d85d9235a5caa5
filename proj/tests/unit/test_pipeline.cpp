#include "fixtures.hpp"
#include "steam/inference.hpp"
#include "steam/kernels.hpp"
#include "steam/pipeline.hpp"

#include <doctest.h>

using namespace steam;

namespace {

struct Study {
  SimDataset ds;
  EstimationConfig config;
  PreparedData data;
};

Study study(std::uint64_t seed)
{
  SimDataset ds = testing::small_study(seed);
  EstimationConfig config = testing::small_config();
  config.methods = {Method::source, Method::target_labeled, Method::weighted, Method::dr_aug,
                    Method::steam};
  PreparedData data = PreparedData::from(ds.data, config, ds.validation);
  return {std::move(ds), config, std::move(data)};
}

void check_same_report(const AccuracyReport& a, const AccuracyReport& b, double tol)
{
  REQUIRE(a.roc.size() == b.roc.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < a.roc.size(); ++k) {
    worst = std::max(worst, std::abs(a.roc[k].tpr - b.roc[k].tpr));
    worst = std::max(worst, std::abs(a.roc[k].fpr - b.roc[k].fpr));
  }
  CHECK(worst <= tol);
  CHECK(std::abs(a.auc - b.auc) <= tol);
  CHECK(std::abs(a.prevalence - b.prevalence) <= tol);
}

} // namespace

TEST_CASE("fold plan is stratified and balanced")
{
  Eigen::VectorXd y(63);
  for (Eigen::Index i = 0; i < y.size(); ++i)
    y[i] = i < 22 ? 1.0 : 0.0;
  const FoldPlan plan = FoldPlan::stratified(y, 5, 42);
  std::size_t total = 0;
  for (int f = 0; f < 5; ++f) {
    const auto m = plan.members(f);
    total += m.size();
    CHECK(m.size() >= 12);
    CHECK(m.size() <= 13);
    int pos = 0;
    for (auto i : m)
      pos += static_cast<int>(y[i]);
    CHECK(pos >= 4);
    CHECK(pos <= 5);
    CHECK(plan.complement(f).size() + m.size() == 63);
  }
  CHECK(total == 63);
  CHECK(FoldPlan::stratified(y, 5, 42).assignment == plan.assignment);
}

TEST_CASE("reports follow the requested methods")
{
  Study s = study(1);
  s.config.methods = {Method::steam, Method::source};
  const PointEstimate est = estimate(s.data, s.config);
  REQUIRE(est.reports.size() == 2);
  CHECK(est.reports[0].method == Method::steam);
  CHECK(est.reports[1].method == Method::source);
  CHECK(est.find(Method::weighted) == nullptr);
}

TEST_CASE("estimation is bitwise deterministic and thread-count independent")
{
  const Study s = study(2);
  const int before = kernels::thread_count();
  kernels::set_thread_count(1);
  const PointEstimate a = estimate(s.data, s.config);
  kernels::set_thread_count(3);
  const PointEstimate b = estimate(s.data, s.config);
  kernels::set_thread_count(before);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t m = 0; m < a.reports.size(); ++m) {
    CHECK(a.reports[m].auc == b.reports[m].auc);
    CHECK(a.reports[m].at_fpr[0].cutoff == b.reports[m].at_fpr[0].cutoff);
  }
  CHECK(a.beta.values == b.beta.values);
}

TEST_CASE("CV with the full-data model in every fold collapses to in-sample STEAM")
{
  const Study s = study(3);
  CvHooks hooks;
  hooks.reuse_full_beta = true;
  const PointEstimate est = estimate(s.data, s.config, hooks);
  const AccuracyReport* cv = est.find(Method::steam);
  REQUIRE(cv);
  check_same_report(*cv, est.in_sample_steam, 1e-10);
  CHECK(std::abs(est.h2_used - est.h2) <= 1e-12);
}

TEST_CASE("CV changes the estimate when folds refit")
{
  const Study s = study(3);
  const PointEstimate est = estimate(s.data, s.config);
  REQUIRE(est.cv);
  CHECK(est.cv->fold_beta.size() == 5);
  CHECK(est.find(Method::steam)->auc != est.in_sample_steam.auc);
}

TEST_CASE("unit perturbation weights reproduce the point estimate")
{
  const Study s = study(4);
  const PointEstimate est = estimate(s.data, s.config);
  const Eigen::MatrixXd G = Eigen::MatrixXd::Ones(3, s.data.n());
  for (auto variant : {PerturbVariant::exact, PerturbVariant::approx}) {
    const PerturbationDraws d = perturb(s.data, est, s.config, G, variant);
    REQUIRE(d.draws.rows() == 3);
    for (Eigen::Index b = 0; b < 3; ++b)
      CHECK((d.draws.row(b).transpose() - d.point).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("target_labeled needs validation labels")
{
  SimDataset ds = testing::small_study(5);
  EstimationConfig config = testing::small_config();
  config.methods = {Method::target_labeled};
  const PreparedData data = PreparedData::from(ds.data, config);
  CHECK_THROWS_AS(estimate(data, config), Error);
  config.skip_failed_methods = true;
  CHECK(estimate(data, config).reports.empty());
}

TEST_CASE("diagnostics are reported")
{
  const Study s = study(6);
  const PointEstimate est = estimate(s.data, s.config);
  const AccuracyReport* r = est.find(Method::steam);
  REQUIRE(r);
  CHECK(r->diagnostics.clip_count >= 0);
  CHECK(r->diagnostics.single_class_folds == 0);
  CHECK(est.h2 > 0.0);
  CHECK(est.beta.lambda > 0.0);
}

TEST_CASE("every estimated report satisfies the ROC properties")
{
  Study s = study(7);
  s.config.u0 = {0.05, 0.1, 0.3};
  const PointEstimate est = estimate(s.data, s.config);
  REQUIRE(est.reports.size() == 5);
  for (const AccuracyReport& r : est.reports) {
    CAPTURE(method_name(r.method));
    REQUIRE(r.roc.size() >= 2);
    CHECK(r.roc.front().tpr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.roc.front().fpr == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.roc.back().tpr == 0.0);
    CHECK(r.roc.back().fpr == 0.0);
    for (std::size_t k = 1; k < r.roc.size(); ++k) {
      CHECK(r.roc[k].tpr <= r.roc[k - 1].tpr + 1e-15);
      CHECK(r.roc[k].fpr <= r.roc[k - 1].fpr + 1e-15);
    }
    CHECK(r.auc >= 0.0);
    CHECK(r.auc <= 1.0);
    const double mu = r.prevalence;
    for (const auto& op : r.at_fpr) {
      CHECK(op.ppv == doctest::Approx(mu * op.tpr / (mu * op.tpr + (1 - mu) * op.fpr)).epsilon(1e-12));
      CHECK(op.npv == doctest::Approx((1 - mu) * (1 - op.fpr) /
                                      ((1 - mu) * (1 - op.fpr) + mu * (1 - op.tpr)))
                        .epsilon(1e-12));
    }
  }
}
