#include "steam/report.hpp"

#include "steam/error.hpp"
#include "steam/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace steam::report {

namespace {

// Stream of the root seed that draws the perturbation weights; the CV fold
// plan uses the root seed itself.
constexpr std::uint64_t kPerturbStream = 2;

std::string fmt17(double x)
{
  if (!std::isfinite(x))
    return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_number(double x)
{
  if (std::isnan(x))
    return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json number_array(std::span<const double> v)
{
  Json out = Json::array();
  for (double x : v)
    out.push_back(x);
  return out;
}

Json basis_json(const BasisExpansion& basis)
{
  Json out = Json::array();
  for (const auto& t : basis.terms) {
    if (t.kind == BasisTerm::Kind::interaction)
      out.push_back(Json::array({t.first, t.second}));
  }
  return out;
}

std::vector<std::string> design_names(const std::vector<std::string>& features,
                                      const BasisExpansion& basis)
{
  std::vector<std::string> names{"(intercept)"};
  names.insert(names.end(), features.begin(), features.end());
  for (const auto& t : basis.terms) {
    if (t.kind != BasisTerm::Kind::interaction)
      continue;
    names.push_back(features[static_cast<std::size_t>(t.first - 1)] + ":" +
                    features[static_cast<std::size_t>(t.second - 1)]);
  }
  return names;
}

Json coefficients_json(const Coefficients& c, const std::vector<std::string>& names)
{
  Json values = Json::object();
  for (Eigen::Index j = 0; j < c.values.size(); ++j) {
    const std::string key = j < static_cast<Eigen::Index>(names.size())
                              ? names[static_cast<std::size_t>(j)]
                              : "z" + std::to_string(j);
    values[key] = c.values[j];
  }
  return Json{{"coefficients", values},
              {"lambda", c.lambda},
              {"gamma", c.gamma},
              {"support_size", static_cast<long long>(c.support.size())},
              {"weight_capped", c.weight_capped},
              {"ridge_initial", c.ridge_initial}};
}

Json summary_json(const InferenceRow& row)
{
  return Json{{"se", row.se}, {"lower", row.lower}, {"upper", row.upper}};
}

const InferenceRow* find_row(const std::vector<InferenceRow>& rows, const std::string& name)
{
  for (const auto& r : rows) {
    if (r.name == name)
      return &r;
  }
  return nullptr;
}

std::string u_name(const char* what, double u)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s@%g", what, u);
  return buf;
}

std::string band_name(double u)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "roc@%.2f", u);
  return buf;
}

Json roc_grid_json(const AccuracyReport& report, const std::vector<InferenceRow>* inference)
{
  const auto grid = band_fpr_grid();
  Json fpr = Json::array();
  Json tpr = Json::array();
  Json lower = Json::array();
  Json upper = Json::array();
  for (double u : grid) {
    fpr.push_back(u);
    tpr.push_back(roc_at_fpr(report.roc, u));
    if (inference) {
      const InferenceRow* r = find_row(*inference, band_name(u));
      if (!r)
        throw Error(ErrorCode::invalid_argument, "missing ROC band scalar " + band_name(u));
      lower.push_back(std::clamp(r->lower, 0.0, 1.0));
      upper.push_back(std::clamp(r->upper, 0.0, 1.0));
    }
  }
  Json out{{"fpr", fpr}, {"tpr", tpr}};
  if (inference) {
    out["lower"] = lower;
    out["upper"] = upper;
  }
  return out;
}

void dump_into(const Json& v, std::string& out, int indent)
{
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
  case Json::value_t::object: {
    if (v.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!first)
        out += ",\n";
      first = false;
      out += inner + Json(it.key()).dump() + ": ";
      dump_into(it.value(), out, indent + 1);
    }
    out += "\n" + pad + "}";
    return;
  }
  case Json::value_t::array: {
    if (v.empty()) {
      out += "[]";
      return;
    }
    // Arrays of scalars stay on one line.
    const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_primitive(); });
    out += flat ? "[" : "[\n";
    bool first = true;
    for (const auto& e : v) {
      if (!first)
        out += flat ? ", " : ",\n";
      first = false;
      if (!flat)
        out += inner;
      dump_into(e, out, indent + 1);
    }
    out += flat ? "]" : "\n" + pad + "]";
    return;
  }
  case Json::value_t::number_float:
    out += fmt17(v.get<double>());
    return;
  default:
    out += v.dump();
    return;
  }
}

std::string xml_escape(std::string_view s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

std::string comment_safe(std::string s)
{
  // "--" may not appear inside an XML comment.
  std::size_t pos = 0;
  while ((pos = s.find("--", pos)) != std::string::npos)
    s.replace(pos, 2, "- -");
  if (!s.empty() && s.back() == '-')
    s += ' ';
  return s;
}

std::vector<double> read_numbers(const Json& v, const std::string& what)
{
  if (!v.is_array())
    throw Error(ErrorCode::data, "malformed report: " + what + " is not an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number())
      throw Error(ErrorCode::data, "malformed report: " + what + " holds a non-number");
    out.push_back(e.get<double>());
  }
  return out;
}

} // namespace

Json estimation_json(const EstimationConfig& c)
{
  Json methods = Json::array();
  for (Method m : c.methods)
    methods.push_back(std::string(method_name(m)));
  Json pi{{"pi_min", c.pi.pi_min}, {"h1_multiplier", c.pi.h1_multiplier}};
  if (c.pi.bandwidth)
    pi["h1"] = Json::array({c.pi.bandwidth->a, c.pi.bandwidth->b});
  else
    pi["h1"] = nullptr;
  return Json{{"methods", methods},
              {"u0", number_array(c.u0)},
              {"folds", c.folds},
              {"seed", c.seed},
              {"mu_interactions", basis_json(c.mu_basis)},
              {"pi_interactions", basis_json(c.pi_basis)},
              {"gamma", c.gamma},
              {"lasso",
               {{"grid_size", static_cast<long long>(c.lasso.grid_size)},
                {"grid_min_ratio", c.lasso.grid_min_ratio},
                {"weight_cap", c.lasso.weight_cap},
                {"tolerance", c.lasso.tolerance},
                {"max_sweeps", c.lasso.max_sweeps},
                {"max_newton", c.lasso.max_newton},
                {"ridge_fallback", c.lasso.ridge_fallback}}},
              {"pi", pi},
              {"h2_multiplier", c.h2_multiplier},
              {"h2_rate", c.h2_rate}};
}

Json config_json(const RunConfig& c)
{
  Json features = Json::array();
  for (const auto& f : c.roles.features)
    features.push_back(f);
  return Json{{"input", c.input},
              {"columns",
               {{"s", c.roles.s_col},
                {"labeled", c.roles.label_col},
                {"y", c.roles.y_col},
                {"features", features}}},
              {"estimation", estimation_json(c.estimation)},
              {"perturb", c.perturb ? Json(std::string(variant_name(*c.perturb))) : Json(nullptr)},
              {"draws", static_cast<long long>(c.draws)},
              {"level", c.level},
              {"threads", c.threads},
              {"out", c.out_dir}};
}

Evaluation evaluate_study(const LoadedStudy& study, const RunConfig& config)
{
  const EstimationConfig& est = config.estimation;
  const bool wants_steam =
    std::find(est.methods.begin(), est.methods.end(), Method::steam) != est.methods.end();
  if (config.perturb && !wants_steam)
    throw Error(ErrorCode::invalid_argument, "perturbation resampling needs the steam method");
  const PreparedData data = PreparedData::from(study.data, est, study.validation);
  Evaluation out;
  out.point = estimate(data, est);
  if (config.perturb) {
    const std::uint64_t seed = child_seed(est.seed, kPerturbStream);
    out.draws = perturb(data, out.point, est, perturbation_matrix(config.draws, data.n(), seed),
                        *config.perturb, seed);
  }
  return out;
}

std::vector<InferenceRow> steam_inference(const Evaluation& eval, double level)
{
  if (!eval.draws)
    return {};
  const AccuracyReport* steam = eval.point.find(Method::steam);
  if (!steam)
    throw Error(ErrorCode::invalid_argument, "perturbation resampling needs the steam method");
  const Eigen::VectorXd reported = report_scalars(*steam);
  const auto summaries = summarize_draws(*eval.draws, level);
  std::vector<InferenceRow> rows;
  for (std::size_t j = 0; j < summaries.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    const ScalarSummary s = recenter(summaries[j], eval.draws->point[k], reported[k]);
    rows.push_back({s.name, reported[k], s.se, s.lower, s.upper});
  }
  return rows;
}

Json report_json(const RunConfig& config, const LoadedStudy& study, const Evaluation& eval)
{
  const PointEstimate& pt = eval.point;
  const auto inference = steam_inference(eval, config.level);
  const auto& features = study.data.feature_names();

  Json methods = Json::array();
  for (const AccuracyReport& r : pt.reports) {
    const bool inferred = r.method == Method::steam && !inference.empty();
    Json ops = Json::array();
    for (const OperatingPoint& op : r.at_fpr) {
      Json o{{"u0", op.u0}, {"cutoff", op.cutoff}, {"tpr", op.tpr},
             {"fpr", op.fpr}, {"ppv", op.ppv},       {"npv", op.npv}};
      if (inferred) {
        Json ci = Json::object();
        for (const char* what : {"cutoff", "tpr", "ppv", "npv"}) {
          const InferenceRow* row = find_row(inference, u_name(what, op.u0));
          if (!row)
            throw Error(ErrorCode::invalid_argument, "missing resampled scalar " + u_name(what, op.u0));
          ci[what] = summary_json(*row);
        }
        o["inference"] = ci;
      }
      ops.push_back(o);
    }
    Json m{{"method", std::string(method_name(r.method))},
           {"auc", r.auc},
           {"prevalence", r.prevalence},
           {"operating_points", ops},
           {"diagnostics",
            {{"clip_count", static_cast<long long>(r.diagnostics.clip_count)},
             {"fallback_count", static_cast<long long>(r.diagnostics.fallback_count)},
             {"single_class_folds", static_cast<long long>(r.diagnostics.single_class_folds)}}}};
    if (inferred) {
      m["inference"] = Json{{"auc", summary_json(*find_row(inference, "auc"))},
                            {"prevalence", summary_json(*find_row(inference, "prevalence"))}};
    }
    m["roc_grid"] = roc_grid_json(r, inferred ? &inference : nullptr);
    methods.push_back(m);
  }

  Json cv = nullptr;
  if (pt.cv) {
    cv = Json{{"folds", pt.cv->plan.k},
              {"single_class_folds", static_cast<long long>(pt.cv->single_class_folds)}};
  }
  Json models{
    {"outcome", coefficients_json(pt.beta, design_names(features, config.estimation.mu_basis))},
    {"selection", coefficients_json(pt.alpha, design_names(features, config.estimation.pi_basis))},
    {"h1", pt.calibrator ? Json::array({pt.calibrator->bandwidth().a, pt.calibrator->bandwidth().b})
                         : Json(nullptr)},
    {"h2", pt.h2},
    {"h2_used", pt.h2_used},
    {"cv", cv}};

  Json perturbation = nullptr;
  if (eval.draws) {
    perturbation = Json{{"variant", std::string(variant_name(eval.draws->variant))},
                        {"draws", static_cast<long long>(eval.draws->B)},
                        {"successful", static_cast<long long>(eval.draws->draws.rows())},
                        {"failed", static_cast<long long>(eval.draws->failed)},
                        {"seed", eval.draws->seed},
                        {"level", config.level},
                        {"interval", "percentile of draws, shifted onto the reported estimate"}};
  }

  Json feature_list = Json::array();
  for (const auto& f : features)
    feature_list.push_back(f);
  return Json{
    {"schema_version", kSchemaVersion},
    {"tool", "steam_eval"},
    {"seed", config.estimation.seed},
    {"config", config_json(config)},
    {"data",
     {{"n_labeled", static_cast<long long>(study.data.n())},
      {"n_unlabeled", static_cast<long long>(study.data.n_unlabeled())},
      {"n_target", static_cast<long long>(study.data.n_target())},
      {"n_validation", static_cast<long long>(study.validation ? study.validation->size() : 0)},
      {"features", feature_list}}},
    {"models", models},
    {"methods", methods},
    {"perturbation", perturbation}};
}

std::string dump(const Json& value)
{
  std::string out;
  dump_into(value, out, 0);
  out += "\n";
  return out;
}

std::string comment_lines(const Json& value)
{
  std::string out;
  std::istringstream in(dump(value));
  std::string line;
  while (std::getline(in, line))
    out += "# " + line + "\n";
  return out;
}

void write_roc_csv(std::ostream& out, const Json& config, const Evaluation& eval)
{
  out << comment_lines(config);
  out << "method,cutoff,fpr,tpr\n";
  for (const AccuracyReport& r : eval.point.reports) {
    const std::string name(method_name(r.method));
    for (const RocPoint& p : r.roc)
      out << name << ',' << csv_number(p.cutoff) << ',' << csv_number(p.fpr) << ','
          << csv_number(p.tpr) << '\n';
  }
}

std::vector<RocSeries> roc_series(const Json& report)
{
  if (!report.is_object() || !report.contains("methods") || !report["methods"].is_array())
    throw Error(ErrorCode::data, "malformed report: no methods array");
  std::vector<RocSeries> out;
  for (const auto& m : report["methods"]) {
    if (!m.is_object() || !m.contains("method") || !m["method"].is_string() ||
        !m.contains("roc_grid") || !m["roc_grid"].is_object())
      throw Error(ErrorCode::data, "malformed report: method block without roc_grid");
    const Json& g = m["roc_grid"];
    RocSeries s;
    s.name = m["method"].get<std::string>();
    if (!g.contains("fpr") || !g.contains("tpr"))
      throw Error(ErrorCode::data, "malformed report: roc_grid of " + s.name + " lacks fpr/tpr");
    s.fpr = read_numbers(g["fpr"], s.name + " fpr");
    s.tpr = read_numbers(g["tpr"], s.name + " tpr");
    if (s.fpr.size() != s.tpr.size() || s.fpr.size() < 2)
      throw Error(ErrorCode::data, "malformed report: roc_grid of " + s.name + " is inconsistent");
    if (g.contains("lower") || g.contains("upper")) {
      if (!g.contains("lower") || !g.contains("upper"))
        throw Error(ErrorCode::data, "malformed report: band of " + s.name + " is one-sided");
      s.lower = read_numbers(g["lower"], s.name + " lower");
      s.upper = read_numbers(g["upper"], s.name + " upper");
      if (s.lower.size() != s.fpr.size() || s.upper.size() != s.fpr.size())
        throw Error(ErrorCode::data, "malformed report: band of " + s.name + " is inconsistent");
    }
    out.push_back(std::move(s));
  }
  if (out.empty())
    throw Error(ErrorCode::data, "malformed report: no methods");
  return out;
}

std::string roc_svg(const std::vector<RocSeries>& series, const std::string& comment)
{
  static constexpr const char* kColors[] = {"#1b6ca8", "#d1495b", "#2e933c", "#edae49",
                                            "#6c4f9c", "#00798c", "#8d6a3f", "#444444"};
  constexpr double x0 = 70.0, y0 = 20.0, side = 400.0;
  const auto px = [&](double f) { return x0 + side * f; };
  const auto py = [&](double t) { return y0 + side * (1.0 - t); };
  char buf[256];
  const auto pt = [&](double f, double t) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", px(f), py(t));
    return std::string(buf);
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<!--\n" + comment_safe(comment) + "-->\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"480\" "
       "viewBox=\"0 0 640 480\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                x0, y0, side, side);
  s += buf;
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\">%.1f</text>\n",
                  px(v), py(0.0), px(v), py(0.0) + 5.0, px(v), py(0.0) + 18.0, v);
    s += buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%.1f</text>\n",
                  px(0.0) - 5.0, py(v), px(0.0), py(v), px(0.0) - 8.0, py(v) + 4.0, v);
    s += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\">False positive "
                "rate</text>\n",
                px(0.5), py(0.0) + 40.0);
  s += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 %.2f %.2f)\">True positive rate</text>\n",
                x0 - 45.0, py(0.5), x0 - 45.0, py(0.5));
  s += buf;
  s += "<line class=\"chance\" x1=\"" + std::to_string(static_cast<int>(px(0.0))) + "\" y1=\"" +
       std::to_string(static_cast<int>(py(0.0))) + "\" x2=\"" +
       std::to_string(static_cast<int>(px(1.0))) + "\" y2=\"" +
       std::to_string(static_cast<int>(py(1.0))) +
       "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const RocSeries& r = series[i];
    const char* color = kColors[i % std::size(kColors)];
    if (!r.lower.empty()) {
      std::string points;
      for (std::size_t k = 0; k < r.fpr.size(); ++k)
        points += (k ? " " : "") + pt(r.fpr[k], r.upper[k]);
      for (std::size_t k = r.fpr.size(); k-- > 0;)
        points += " " + pt(r.fpr[k], r.lower[k]);
      s += "<polygon class=\"band\" data-method=\"" + xml_escape(r.name) + "\" points=\"" + points +
           "\" fill=\"" + color + "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const RocSeries& r = series[i];
    const char* color = kColors[i % std::size(kColors)];
    std::vector<std::size_t> order(r.fpr.size());
    for (std::size_t k = 0; k < order.size(); ++k)
      order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return r.fpr[a] < r.fpr[b] || (r.fpr[a] == r.fpr[b] && r.tpr[a] < r.tpr[b]);
    });
    std::string points;
    for (std::size_t k = 0; k < order.size(); ++k)
      points += (k ? " " : "") + pt(r.fpr[order[k]], r.tpr[order[k]]);
    s += "<polyline class=\"roc\" data-method=\"" + xml_escape(r.name) + "\" points=\"" + points +
         "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
  }
  s += "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = y0 + 10.0 + 20.0 * static_cast<double>(i);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"490.00\" y1=\"%.2f\" x2=\"515.00\" y2=\"%.2f\" stroke=\"%s\" "
                  "stroke-width=\"2\"/>\n",
                  y, y, kColors[i % std::size(kColors)]);
    s += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"522.00\" y=\"%.2f\" font-size=\"12\">", y + 4.0);
    s += buf + xml_escape(series[i].name) + "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

Json scenario_json(const SimScenario& sc)
{
  const auto [mu_basis, pi_basis] = scenario_bases(sc.misspec);
  return Json{{"shift", std::string(shift_name(sc.shift))},
              {"misspec", std::string(misspec_name(sc.misspec))},
              {"p", sc.p},
              {"sigma2", sc.sigma2},
              {"rho", sc.rho},
              {"n", static_cast<long long>(sc.n)},
              {"N", static_cast<long long>(sc.N)},
              {"N_t", static_cast<long long>(sc.N_t)},
              {"n_target_labeled", static_cast<long long>(sc.n_target_labeled)},
              {"mu_interactions", basis_json(mu_basis)},
              {"pi_interactions", basis_json(pi_basis)},
              {"seed", sc.seed}};
}

Json experiment_json(const ExperimentOptions& o)
{
  Json methods = Json::array();
  for (Method m : o.methods)
    methods.push_back(std::string(method_name(m)));
  Json perturb = Json::array();
  for (PerturbVariant v : o.perturb)
    perturb.push_back(std::string(variant_name(v)));
  Json grid = Json::array();
  for (Eigen::Index g : o.label_grid)
    grid.push_back(static_cast<long long>(g));
  return Json{{"methods", methods},
              {"replicates", static_cast<long long>(o.replicates)},
              {"oracle_draws", static_cast<long long>(o.oracle_draws)},
              {"truth", o.truth == TruthMode::fitted ? "fitted" : "limiting"},
              {"include_in_sample", o.include_in_sample},
              {"label_grid", grid},
              {"perturb", perturb},
              {"draws", static_cast<long long>(o.draws)},
              {"estimation", estimation_json(o.config)}};
}

void write_summary_csv(std::ostream& out, const Json& config,
                       const std::vector<ExperimentResult>& results)
{
  out << comment_lines(config);
  out << "shift,misspec,measure,method,bias,se,rmse,n_fail\n";
  for (const auto& r : results) {
    for (const auto& row : r.summary)
      out << shift_name(r.scenario.shift) << ',' << misspec_name(r.scenario.misspec) << ','
          << row.measure << ',' << row.method << ',' << csv_number(row.bias) << ','
          << csv_number(row.se) << ',' << csv_number(row.rmse) << ',' << row.n_fail << '\n';
  }
}

void write_coverage_csv(std::ostream& out, const Json& config,
                        const std::vector<ExperimentResult>& results)
{
  out << comment_lines(config);
  out << "shift,misspec,measure,variant,estimate,ese,ase,ase_over_ese,coverage,"
         "coverage_uncentered,replicates,seconds\n";
  for (const auto& r : results) {
    for (const auto& row : r.coverage) {
      double seconds = std::nan("");
      for (const auto& [name, sec] : r.perturb_seconds) {
        if (name == row.variant)
          seconds = sec;
      }
      out << shift_name(r.scenario.shift) << ',' << misspec_name(r.scenario.misspec) << ','
          << row.measure << ',' << row.variant << ',' << csv_number(row.mean_estimate) << ','
          << csv_number(row.ese) << ',' << csv_number(row.ase) << ','
          << csv_number(row.ese > 0.0 ? row.ase / row.ese : std::nan("")) << ','
          << csv_number(row.coverage) << ',' << csv_number(row.coverage_uncentered) << ','
          << row.replicates << ',' << csv_number(seconds) << '\n';
    }
  }
}

void write_equivalent_csv(std::ostream& out, const Json& config,
                          const std::vector<ExperimentResult>& results)
{
  out << comment_lines(config);
  out << "shift,misspec,measure,method,rmse,labels,clamped\n";
  for (const auto& r : results) {
    for (const auto& row : r.equivalent)
      out << shift_name(r.scenario.shift) << ',' << misspec_name(r.scenario.misspec) << ','
          << row.measure << ',' << row.method << ',' << csv_number(row.rmse) << ','
          << csv_number(row.labels) << ',' << (row.clamped ? 1 : 0) << '\n';
  }
}

void write_truth_csv(std::ostream& out, const Json& config,
                     const std::vector<ExperimentResult>& results)
{
  out << comment_lines(config);
  out << "shift,misspec,measure,limiting_truth,mean_fitted_truth\n";
  for (const auto& r : results) {
    for (std::size_t k = 0; k < kMeasures.size(); ++k) {
      double sum = 0.0;
      long count = 0;
      for (const auto& t : r.replicate_truth) {
        if (std::isfinite(t[k])) {
          sum += t[k];
          ++count;
        }
      }
      out << shift_name(r.scenario.shift) << ',' << misspec_name(r.scenario.misspec) << ','
          << kMeasures[k] << ',' << csv_number(r.truth.measures[k]) << ','
          << csv_number(count ? sum / static_cast<double>(count) : std::nan("")) << '\n';
    }
  }
}

std::string summary_text(const std::vector<ExperimentResult>& results)
{
  std::string s;
  char buf[256];
  for (const auto& r : results) {
    std::snprintf(buf, sizeof buf, "== shift %s, %s, n=%lld, %zu replicates ==\n",
                  std::string(shift_name(r.scenario.shift)).c_str(),
                  std::string(misspec_name(r.scenario.misspec)).c_str(),
                  static_cast<long long>(r.scenario.n), r.replicate_truth.size());
    s += buf;
    s += "limiting truth:";
    for (std::size_t k = 0; k < kMeasures.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %s=%.4f", std::string(kMeasures[k]).c_str(),
                    r.truth.measures[k]);
      s += buf;
    }
    s += "\n";
    std::snprintf(buf, sizeof buf, "%-8s %-16s %9s %9s %9s %6s\n", "measure", "method",
                  "bias*100", "se*100", "rmse*100", "fail");
    s += buf;
    for (const auto& row : r.summary) {
      std::snprintf(buf, sizeof buf, "%-8s %-16s %9.3f %9.3f %9.3f %6lld\n", row.measure.c_str(),
                    row.method.c_str(), row.bias, row.se, row.rmse,
                    static_cast<long long>(row.n_fail));
      s += buf;
    }
    if (!r.coverage.empty()) {
      std::snprintf(buf, sizeof buf, "%-8s %-8s %9s %9s %9s %9s\n", "measure", "variant", "ese",
                    "ase", "coverage", "raw");
      s += buf;
      for (const auto& row : r.coverage) {
        std::snprintf(buf, sizeof buf, "%-8s %-8s %9.4f %9.4f %9.3f %9.3f\n", row.measure.c_str(),
                      row.variant.c_str(), row.ese, row.ase, row.coverage,
                      row.coverage_uncentered);
        s += buf;
      }
    }
    if (!r.equivalent.empty()) {
      std::snprintf(buf, sizeof buf, "%-8s %-16s %9s %9s\n", "measure", "method", "rmse*100",
                    "labels");
      s += buf;
      for (const auto& row : r.equivalent) {
        std::snprintf(buf, sizeof buf, "%-8s %-16s %9.3f %8.1f%s\n", row.measure.c_str(),
                      row.method.c_str(), row.rmse, row.labels, row.clamped ? "*" : "");
        s += buf;
      }
    }
    s += "\n";
  }
  return s;
}

} // namespace steam::report
