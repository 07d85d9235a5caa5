#include "steam/error.hpp"
#include "steam/kernels.hpp"
#include "steam/report.hpp"
#include "steam/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using steam::Error;
using steam::ErrorCode;
using steam::report::Json;

namespace {

std::string_view code_name(ErrorCode code)
{
  switch (code) {
  case ErrorCode::invalid_argument: return "invalid_argument";
  case ErrorCode::data: return "data";
  case ErrorCode::separation: return "separation";
  case ErrorCode::non_convergence: return "non_convergence";
  case ErrorCode::degenerate: return "degenerate";
  case ErrorCode::numerical: return "numerical";
  case ErrorCode::io: return "io";
  }
  return "unknown";
}

int fail(std::string_view command, std::string_view code, const std::string& message,
         const steam::DataError* data = nullptr)
{
  nlohmann::ordered_json err{{"command", command}, {"code", code}, {"message", message}};
  if (data) {
    err["row"] = data->row();
    err["column"] = data->column();
  }
  std::cerr << nlohmann::ordered_json{{"error", err}}.dump() << '\n';
  return 2;
}

void apply_threads(int threads)
{
  if (threads <= 0) {
    if (const char* env = std::getenv("STEAM_EVAL_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v < 1)
        throw Error(ErrorCode::invalid_argument, "STEAM_EVAL_THREADS must be a positive integer");
      threads = static_cast<int>(v);
    }
  }
  steam::kernels::set_thread_count(threads);
}

void write_file(const fs::path& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out)
    throw Error(ErrorCode::io, "cannot write " + path.string());
}

void make_dir(const fs::path& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(ErrorCode::io, "cannot create output directory " + dir.string());
}

std::vector<steam::Method> parse_methods(const std::vector<std::string>& names)
{
  std::vector<steam::Method> out;
  for (const auto& n : names) {
    const auto m = steam::parse_method(n);
    if (!m)
      throw Error(ErrorCode::invalid_argument, "unknown method '" + n + "'");
    if (std::find(out.begin(), out.end(), *m) != out.end())
      throw Error(ErrorCode::invalid_argument, "method '" + n + "' given twice");
    out.push_back(*m);
  }
  return out;
}

steam::PerturbVariant parse_variant(const std::string& name)
{
  if (name == "exact")
    return steam::PerturbVariant::exact;
  if (name == "approx")
    return steam::PerturbVariant::approx;
  throw Error(ErrorCode::invalid_argument, "unknown perturbation variant '" + name + "'");
}

//! "a:b" pairs where a and b are 1-based covariate positions or feature names.
steam::BasisExpansion parse_interactions(const std::vector<std::string>& specs,
                                         const std::vector<std::string>& features)
{
  const auto index_of = [&](const std::string& token) {
    const auto it = std::find(features.begin(), features.end(), token);
    if (it != features.end())
      return static_cast<int>(it - features.begin()) + 1;
    char* end = nullptr;
    const long v = std::strtol(token.c_str(), &end, 10);
    if (token.empty() || *end != '\0')
      throw Error(ErrorCode::invalid_argument, "unknown covariate '" + token + "' in interaction");
    return static_cast<int>(v);
  };
  std::vector<std::pair<int, int>> pairs;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
      throw Error(ErrorCode::invalid_argument, "interaction '" + s + "' is not of the form a:b");
    pairs.emplace_back(index_of(s.substr(0, colon)), index_of(s.substr(colon + 1)));
  }
  auto basis = steam::BasisExpansion::interactions(pairs);
  basis.validate(static_cast<Eigen::Index>(features.size()));
  return basis;
}

struct EvaluateFlags {
  steam::report::RunConfig run;
  std::vector<std::string> methods;
  std::vector<std::string> mu_interactions;
  std::vector<std::string> pi_interactions;
  std::string perturb;
  bool plot = false;
};

int cmd_evaluate(const EvaluateFlags& f)
{
  steam::report::RunConfig run = f.run;
  if (!f.perturb.empty())
    run.perturb = parse_variant(f.perturb);
  apply_threads(run.threads);

  const steam::LoadedStudy study = steam::load_study_csv(run.input, run.roles);
  const auto& features = study.data.feature_names();
  run.roles.features = features;
  run.estimation.mu_basis = parse_interactions(f.mu_interactions, features);
  run.estimation.pi_basis = parse_interactions(f.pi_interactions, features);
  if (!f.methods.empty()) {
    run.estimation.methods = parse_methods(f.methods);
  } else {
    run.estimation.methods = {steam::Method::source, steam::Method::weighted,
                              steam::Method::dr_aug, steam::Method::steam};
    if (study.validation && study.validation->size() > 0)
      run.estimation.methods.insert(run.estimation.methods.begin() + 1,
                                    steam::Method::target_labeled);
  }

  const steam::report::Evaluation eval = steam::report::evaluate_study(study, run);
  const Json report = steam::report::report_json(run, study, eval);
  const Json config{{"tool", "steam_eval"},
                    {"command", "evaluate"},
                    {"schema_version", steam::report::kSchemaVersion},
                    {"seed", run.estimation.seed},
                    {"config", steam::report::config_json(run)}};

  const fs::path out(run.out_dir);
  make_dir(out);
  write_file(out / "report.json", steam::report::dump(report));
  std::ostringstream roc;
  steam::report::write_roc_csv(roc, config, eval);
  write_file(out / "roc.csv", roc.str());
  if (f.plot)
    write_file(out / "roc.svg", steam::report::roc_svg(steam::report::roc_series(report),
                                                       steam::report::dump(config)));
  return 0;
}

struct SimulateFlags {
  std::string scenario = "moderate";
  std::string misspec = "both_correct";
  steam::SimScenario base;
  steam::ExperimentOptions options;
  std::vector<std::string> methods;
  std::vector<std::string> perturb;
  std::string truth = "fitted";
  bool no_label_curve = false;
  std::uint64_t seed = 1;
  int threads = 0;
  std::string out;
};

int cmd_simulate(const SimulateFlags& f)
{
  apply_threads(f.threads);
  std::vector<steam::ShiftStrength> shifts;
  if (f.scenario == "all") {
    shifts = {steam::ShiftStrength::weak, steam::ShiftStrength::moderate,
              steam::ShiftStrength::strong};
  } else if (const auto s = steam::parse_shift(f.scenario)) {
    shifts = {*s};
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown scenario '" + f.scenario + "'");
  }
  std::vector<steam::Misspec> cases;
  if (f.misspec == "all") {
    cases = {steam::Misspec::both_correct, steam::Misspec::pi_mis, steam::Misspec::mu_mis};
  } else if (const auto m = steam::parse_misspec(f.misspec)) {
    cases = {*m};
  } else {
    throw Error(ErrorCode::invalid_argument, "unknown misspecification '" + f.misspec + "'");
  }

  steam::ExperimentOptions options = f.options;
  if (!f.methods.empty())
    options.methods = parse_methods(f.methods);
  for (const auto& v : f.perturb)
    options.perturb.push_back(parse_variant(v));
  if (f.truth == "fitted")
    options.truth = steam::TruthMode::fitted;
  else if (f.truth == "limiting")
    options.truth = steam::TruthMode::limiting;
  else
    throw Error(ErrorCode::invalid_argument, "unknown truth mode '" + f.truth + "'");
  if (f.no_label_curve)
    options.label_grid.clear();

  std::vector<steam::SimScenario> scenarios;
  Json scenario_list = Json::array();
  for (auto shift : shifts) {
    for (auto mis : cases) {
      steam::SimScenario sc = f.base;
      sc.shift = shift;
      sc.misspec = mis;
      sc.seed = f.seed;
      sc.validate();
      scenarios.push_back(sc);
      scenario_list.push_back(steam::report::scenario_json(sc));
    }
  }
  const Json config{{"tool", "steam_eval"},
                    {"command", "simulate"},
                    {"seed", f.seed},
                    {"threads", f.threads},
                    {"experiment", steam::report::experiment_json(options)},
                    {"scenarios", scenario_list}};

  const fs::path out(f.out);
  make_dir(out);
  std::vector<steam::ExperimentResult> results;
  for (const auto& sc : scenarios) {
    std::cerr << "simulate: shift " << steam::shift_name(sc.shift) << ", "
              << steam::misspec_name(sc.misspec) << ", " << options.replicates
              << " replicates\n";
    results.push_back(steam::run_experiment(sc, options));
  }

  std::ostringstream summary;
  steam::report::write_summary_csv(summary, config, results);
  write_file(out / "summary.csv", summary.str());
  std::ostringstream truth;
  steam::report::write_truth_csv(truth, config, results);
  write_file(out / "truth.csv", truth.str());
  write_file(out / "summary.txt",
             steam::report::comment_lines(config) + "\n" + steam::report::summary_text(results));
  if (!options.perturb.empty()) {
    std::ostringstream coverage;
    steam::report::write_coverage_csv(coverage, config, results);
    write_file(out / "coverage.csv", coverage.str());
  }
  const bool has_comparator = std::find(options.methods.begin(), options.methods.end(),
                                        steam::Method::target_labeled) != options.methods.end();
  if (!options.label_grid.empty() && has_comparator) {
    std::ostringstream eq;
    steam::report::write_equivalent_csv(eq, config, results);
    write_file(out / "equivalent_labels.csv", eq.str());
  }
  return 0;
}

int cmd_roc_plot(const std::vector<std::string>& reports, const std::string& out_path)
{
  std::vector<steam::report::RocSeries> series;
  std::string comment;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    std::ifstream in(reports[k], std::ios::binary);
    if (!in)
      throw Error(ErrorCode::io, "cannot read " + reports[k]);
    Json report;
    try {
      report = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::data, "malformed report " + reports[k] + ": " + e.what());
    }
    for (auto& s : steam::report::roc_series(report)) {
      if (reports.size() > 1)
        s.name += " [" + std::to_string(k + 1) + "]";
      series.push_back(std::move(s));
    }
    comment += "report [" + std::to_string(k + 1) + "] " + reports[k] + "\n";
    comment += steam::report::dump(Json{{"seed", report.value("seed", Json(nullptr))},
                                        {"config", report.value("config", Json(nullptr))}});
  }
  const fs::path out(out_path);
  if (out.has_parent_path())
    make_dir(out.parent_path());
  write_file(out, steam::report::roc_svg(series, comment));
  return 0;
}

struct GenerateFlags {
  steam::SimScenario scenario;
  std::string shift = "moderate";
  std::string out;
};

int cmd_generate(const GenerateFlags& f)
{
  steam::SimScenario sc = f.scenario;
  const auto shift = steam::parse_shift(f.shift);
  if (!shift)
    throw Error(ErrorCode::invalid_argument, "unknown scenario '" + f.shift + "'");
  sc.shift = *shift;
  sc.validate();
  steam::Rng rng(sc.seed);
  const steam::SimDataset ds = steam::generate_dataset(sc, rng);
  const fs::path out(f.out);
  if (out.has_parent_path())
    make_dir(out.parent_path());
  steam::save_study_csv(out, ds.data, &ds.validation);
  return 0;
}

void add_scenario_flags(CLI::App* app, steam::SimScenario& sc)
{
  app->add_option("--n", sc.n, "Labeled source units")->capture_default_str();
  app->add_option("--N", sc.N, "Expected source units")->capture_default_str();
  app->add_option("--N-t", sc.N_t, "Expected target units")->capture_default_str();
  app->add_option("--n-target-labeled", sc.n_target_labeled, "Target rows with validation labels")
    ->capture_default_str();
  app->add_option("--p", sc.p, "Covariates")->capture_default_str();
  app->add_option("--rho", sc.rho, "Equicorrelation")->capture_default_str();
  app->add_option("--sigma2", sc.sigma2, "Covariate variance")->capture_default_str();
}

void add_estimation_flags(CLI::App* app, steam::EstimationConfig& c)
{
  app->add_option("--folds", c.folds, "CV folds; below 2 disables CV")->capture_default_str();
  app->add_option("--h1-mult", c.pi.h1_multiplier, "Multiplier of the propensity bandwidth")
    ->capture_default_str();
  app->add_option("--h2-mult", c.h2_multiplier, "Multiplier of the risk bandwidth")
    ->capture_default_str();
  app->add_option("--pi-min", c.pi.pi_min, "Propensity clipping bound")->capture_default_str();
  app->add_option("--gamma", c.gamma, "Adaptive weight power")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Accuracy of a risk model under covariate shift"};
  app.require_subcommand(1);

  EvaluateFlags ev;
  auto* evaluate = app.add_subcommand("evaluate", "Estimate accuracy on a study CSV");
  evaluate->add_option("--input", ev.run.input, "Study CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", ev.run.out_dir, "Output directory")->required();
  evaluate->add_option("--s-col", ev.run.roles.s_col, "Source indicator column")
    ->capture_default_str();
  evaluate->add_option("--label-col", ev.run.roles.label_col, "Labeled indicator column")
    ->capture_default_str();
  evaluate->add_option("--y-col", ev.run.roles.y_col, "Outcome column")->capture_default_str();
  evaluate->add_option("--features", ev.run.roles.features, "Covariate columns (default: the rest)")
    ->delimiter(',');
  evaluate->add_option("--u0", ev.run.estimation.u0, "FPR targets of the operating points")
    ->delimiter(',')
    ->capture_default_str();
  evaluate->add_option("--methods", ev.methods,
                       "source,target_labeled,weighted,dr_aug,steam (default: all applicable)")
    ->delimiter(',');
  evaluate->add_option("--perturb", ev.perturb, "Resampling variant")
    ->check(CLI::IsMember({"exact", "approx"}));
  evaluate->add_option("--draws", ev.run.draws, "Perturbation draws B")->capture_default_str();
  evaluate->add_option("--level", ev.run.level, "Confidence level")->capture_default_str();
  evaluate->add_option("--seed", ev.run.estimation.seed, "Seed of folds and draws")
    ->capture_default_str();
  evaluate->add_option("--threads", ev.run.threads, "Worker threads (0: STEAM_EVAL_THREADS or all)");
  evaluate->add_option("--mu-interactions", ev.mu_interactions, "Outcome model products a:b")
    ->delimiter(',');
  evaluate->add_option("--pi-interactions", ev.pi_interactions, "Selection model products a:b")
    ->delimiter(',');
  evaluate->add_flag("--plot", ev.plot, "Also write roc.svg");
  add_estimation_flags(evaluate, ev.run.estimation);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Run the simulation study");
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--scenario", sim.scenario, "weak, moderate, strong or all")
    ->capture_default_str();
  simulate->add_option("--misspec", sim.misspec, "both_correct, pi_mis, mu_mis or all")
    ->capture_default_str();
  simulate->add_option("--replicates", sim.options.replicates, "Replicates per scenario")
    ->capture_default_str();
  simulate->add_option("--oracle-draws", sim.options.oracle_draws, "Monte-Carlo truth sample")
    ->capture_default_str();
  simulate->add_option("--truth", sim.truth, "fitted or limiting")->capture_default_str();
  simulate->add_option("--methods", sim.methods, "Methods to run")->delimiter(',');
  simulate->add_option("--perturb", sim.perturb, "Resampling variants to calibrate")
    ->delimiter(',')
    ->check(CLI::IsMember({"exact", "approx"}));
  simulate->add_option("--draws", sim.options.draws, "Perturbation draws B")->capture_default_str();
  simulate->add_option("--label-grid", sim.options.label_grid,
                       "target_labeled sizes of the equivalent-labels curve")
    ->delimiter(',')
    ->capture_default_str();
  simulate->add_flag("--no-label-curve", sim.no_label_curve, "Skip equivalent labels");
  simulate->add_flag("--include-nocv", sim.options.include_in_sample,
                     "Also report STEAM without cross-validation");
  simulate->add_option("--seed", sim.seed, "Scenario seed")->capture_default_str();
  simulate->add_option("--threads", sim.threads, "Worker threads (0: STEAM_EVAL_THREADS or all)");
  add_scenario_flags(simulate, sim.base);
  add_estimation_flags(simulate, sim.options.config);

  std::vector<std::string> reports;
  std::string plot_out;
  auto* roc_plot = app.add_subcommand("roc-plot", "Draw ROC curves of one or more reports");
  roc_plot->add_option("reports", reports, "report.json files")->required();
  roc_plot->add_option("--out", plot_out, "SVG file")->required();

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "Write a simulated study CSV");
  generate->add_option("--out", gen.out, "CSV file")->required();
  generate->add_option("--scenario", gen.shift, "weak, moderate or strong")->capture_default_str();
  generate->add_option("--seed", gen.scenario.seed, "Seed")->capture_default_str();
  add_scenario_flags(generate, gen.scenario);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*evaluate)
      return cmd_evaluate(ev);
    if (*simulate)
      return cmd_simulate(sim);
    if (*roc_plot)
      return cmd_roc_plot(reports, plot_out);
    return cmd_generate(gen);
  } catch (const steam::DataError& e) {
    return fail(command, code_name(e.code()), e.what(), &e);
  } catch (const Error& e) {
    return fail(command, code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(command, "internal", e.what());
  }
}
