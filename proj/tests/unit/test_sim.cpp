#include "fixtures.hpp"
#include "steam/sim.hpp"

#include <doctest.h>

using namespace steam;

TEST_CASE("outcome and selection probabilities follow the generating model")
{
  const double x[10] = {0.5, -1.0, 0.3, 2.0, 1.5, -0.7, 9.0, 9.0, 9.0, 9.0};
  const double lin_mu = -0.25 + 0.8 * 0.5 + 0.8 * -1.0 + 0.4 * 0.3 + 0.4 * 2.0 +
                        0.2 * 0.5 * -1.0 - 0.1 * -1.0 * 0.3 + 0.2 * 0.3 * 2.0;
  const double core = 0.5 + 0.5 * -1.0 - 1.5 - 0.5 * -0.7 + 0.5 * 0.5 * -1.0;
  TruthModel weak{ShiftStrength::weak};
  TruthModel moderate{ShiftStrength::moderate};
  TruthModel strong{ShiftStrength::strong};
  CHECK(moderate.mu(x) == doctest::Approx(expit(lin_mu)).epsilon(1e-14));
  CHECK(weak.pi(x) == doctest::Approx(expit(0.1 * core)).epsilon(1e-14));
  CHECK(moderate.pi(x) == doctest::Approx(expit(0.2 * core)).epsilon(1e-14));
  CHECK(strong.pi(x) == doctest::Approx(expit(0.6 * core)).epsilon(1e-14));
}

TEST_CASE("generated datasets have the requested shape")
{
  SimScenario sc;
  sc.n = 150;
  sc.N = 1500;
  sc.N_t = 1500;
  sc.n_target_labeled = 40;
  Rng rng(3);
  const SimDataset ds = generate_dataset(sc, rng);
  CHECK(ds.data.n() == 150);
  CHECK(ds.data.p() == 10);
  CHECK(ds.data.n() + ds.data.n_unlabeled() + ds.data.n_target() == 3000);
  CHECK(ds.validation.size() == 40);
  CHECK(ds.data.feature_names().front() == "x1");
  Rng again(3);
  CHECK(generate_dataset(sc, again).data.target() == ds.data.target());
}

TEST_CASE("misspecification cases choose the fitted bases")
{
  const auto [mu_ok, pi_ok] = scenario_bases(Misspec::both_correct);
  CHECK(mu_ok.added_columns() == 3);
  CHECK(pi_ok.added_columns() == 1);
  CHECK(scenario_bases(Misspec::pi_mis).second.added_columns() == 0);
  CHECK(scenario_bases(Misspec::pi_mis).first.added_columns() == 3);
  CHECK(scenario_bases(Misspec::mu_mis).first.added_columns() == 0);
  CHECK(scenario_bases(Misspec::mu_mis).second.added_columns() == 1);
}

TEST_CASE("antitonic fit pools adjacent violators")
{
  CHECK(antitonic_fit(std::vector<double>{1, 3, 2}) == std::vector<double>{2, 2, 2});
  CHECK(antitonic_fit(std::vector<double>{3, 1, 2}) == std::vector<double>{3, 1.5, 1.5});
  CHECK(antitonic_fit(std::vector<double>{4, 3, 1}) == std::vector<double>{4, 3, 1});
}

TEST_CASE("equivalent labels interpolate in inverse squared RMSE")
{
  const std::vector<Eigen::Index> grid{100, 200};
  const std::vector<double> rmse{4.0, 2.0};
  // 1/r^2 runs from 1/16 at 100 to 1/4 at 200; r = sqrt(8) sits at 1/8.
  const EquivalentLabels mid = equivalent_labels(grid, rmse, std::sqrt(8.0));
  CHECK(mid.size == doctest::Approx(100.0 + 100.0 * (1.0 / 8 - 1.0 / 16) / (1.0 / 4 - 1.0 / 16)));
  CHECK_FALSE(mid.clamped);
  const EquivalentLabels low = equivalent_labels(grid, rmse, 1.0);
  CHECK(low.clamped);
  CHECK(low.size == 200.0);
  const EquivalentLabels high = equivalent_labels(grid, rmse, 9.0);
  CHECK(high.clamped);
  CHECK(high.size == 100.0);
}

TEST_CASE("series summaries are x100 and skip failures")
{
  const std::vector<double> est{0.51, 0.49, std::nan(""), 0.53};
  const SummaryRow r = summarize_series(est, 0.5);
  CHECK(r.n_fail == 1);
  CHECK(r.bias == doctest::Approx(1.0));
  CHECK(r.se == doctest::Approx(2.0));
  CHECK(r.rmse == doctest::Approx(std::sqrt((1.0 + 1.0 + 9.0) / 3.0)));

  const std::vector<double> truth{0.5, 0.48, 0.5, std::nan("")};
  const SummaryRow t = summarize_series(est, truth);
  CHECK(t.n_fail == 2);
  CHECK(t.bias == doctest::Approx(1.0));
}

TEST_CASE("a small experiment runs and no fitted truth beats the limiting model")
{
  SimScenario sc;
  sc.N = 2000;
  sc.N_t = 2000;
  sc.seed = 5;
  ExperimentOptions opt;
  opt.replicates = 4;
  opt.oracle_draws = 100000;
  opt.label_grid = {25, 50, 100};
  opt.include_in_sample = true;
  const ExperimentResult r = run_experiment(sc, opt);
  CHECK(r.summary.size() == 6 * 5);
  CHECK(r.find("steam_nocv"));
  CHECK(r.equivalent.size() == 6 * 5);
  CHECK(r.truth.auc > 0.7);
  CHECK(r.truth.auc < 0.9);
  // The true risk score orders the target best, so no fitted model beats it.
  for (const auto& t : r.replicate_truth) {
    CHECK(t[1] <= r.truth.auc + 1e-3);
    CHECK(t[1] > r.truth.auc - 0.15);
  }
  const ExperimentResult again = run_experiment(sc, opt);
  CHECK(again.row("auc", "steam")->bias == r.row("auc", "steam")->bias);
}
