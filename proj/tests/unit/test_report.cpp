#include "fixtures.hpp"
#include "steam/report.hpp"

#include <doctest.h>

#include <sstream>

using namespace steam;
using report::Json;

namespace {

//! Minimal XML well-formedness check: balanced, properly nested tags and
//! quoted attributes. Comments, the prolog and self-closing tags are handled.
bool well_formed(const std::string& xml)
{
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool root_seen = false;
  while ((i = xml.find('<', i)) != std::string::npos) {
    if (xml.compare(i, 4, "<!--") == 0) {
      const std::size_t end = xml.find("-->", i + 4);
      if (end == std::string::npos || xml.substr(i + 4, end - i - 4).find("--") != std::string::npos)
        return false;
      i = end + 3;
      continue;
    }
    if (xml.compare(i, 2, "<?") == 0) {
      i = xml.find("?>", i);
      if (i == std::string::npos)
        return false;
      continue;
    }
    std::size_t end = i + 1;
    bool quoted = false;
    while (end < xml.size() && (quoted || xml[end] != '>')) {
      if (xml[end] == '"')
        quoted = !quoted;
      ++end;
    }
    if (end == xml.size())
      return false;
    const std::string tag = xml.substr(i + 1, end - i - 1);
    if (tag.empty())
      return false;
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1))
        return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      if (stack.empty() && root_seen)
        return false;
      root_seen = true;
      stack.push_back(tag.substr(0, tag.find_first_of(" \n")));
    }
    i = end + 1;
  }
  return root_seen && stack.empty();
}

std::size_t count(const std::string& s, const std::string& what)
{
  std::size_t n = 0;
  for (std::size_t i = s.find(what); i != std::string::npos; i = s.find(what, i + 1))
    ++n;
  return n;
}

} // namespace

TEST_CASE("JSON numbers carry 17 significant digits")
{
  const Json v{{"a", 0.1}, {"b", 3}, {"c", Json::array({1.0, 2.5})}, {"d", "x\"y"},
               {"e", std::nan("")}};
  const std::string s = report::dump(v);
  CHECK(s.find("\"a\": 0.10000000000000001") != std::string::npos);
  CHECK(s.find("\"b\": 3") != std::string::npos);
  CHECK(s.find("[1, 2.5]") != std::string::npos);
  CHECK(s.find("\"x\\\"y\"") != std::string::npos);
  CHECK(s.find("\"e\": null") != std::string::npos);
  CHECK(Json::parse(s)["a"].get<double>() == 0.1);
}

TEST_CASE("perfect classifier polyline passes through the (0,1) corner")
{
  report::RocSeries s;
  s.name = "steam";
  s.fpr = {0.0, 0.5, 1.0};
  s.tpr = {1.0, 1.0, 1.0};
  const std::string svg = report::roc_svg({s}, "config");
  CHECK(svg.find("points=\"70.00,20.00 ") != std::string::npos);
  CHECK(well_formed(svg));
  CHECK(svg.find("viewBox=") != std::string::npos);
  CHECK(count(svg, "class=\"chance\"") == 1);
}

TEST_CASE("two-method overlay with a band")
{
  report::RocSeries a, b;
  a.name = "steam";
  b.name = "weighted";
  for (int k = 0; k <= 10; ++k) {
    const double u = k / 10.0;
    a.fpr.push_back(u);
    a.tpr.push_back(std::sqrt(u));
    a.lower.push_back(std::max(0.0, std::sqrt(u) - 0.1));
    a.upper.push_back(std::min(1.0, std::sqrt(u) + 0.1));
    b.fpr.push_back(u);
    b.tpr.push_back(u);
  }
  const std::string svg = report::roc_svg({a, b}, "has -- dashes -");
  CHECK(count(svg, "<polyline class=\"roc\"") == 2);
  CHECK(count(svg, "<polygon class=\"band\"") == 1);
  CHECK(svg.find(">steam</text>") != std::string::npos);
  CHECK(svg.find(">weighted</text>") != std::string::npos);
  CHECK(well_formed(svg));
}

TEST_CASE("roc_series rejects malformed reports")
{
  CHECK_THROWS_AS(report::roc_series(Json::object()), Error);
  CHECK_THROWS_AS(report::roc_series(Json{{"methods", Json::array({Json{{"method", "x"}}})}}),
                  Error);
  const Json uneven{
    {"methods", Json::array({Json{{"method", "x"},
                                  {"roc_grid", {{"fpr", {0.0, 1.0}}, {"tpr", {1.0}}}}}})}};
  CHECK_THROWS_AS(report::roc_series(uneven), Error);
  const Json ok{
    {"methods", Json::array({Json{{"method", "x"},
                                  {"roc_grid", {{"fpr", {0.0, 1.0}}, {"tpr", {0.0, 1.0}}}}}})}};
  CHECK(report::roc_series(ok).size() == 1);
}

TEST_CASE("evaluation report holds every requested method and the inference block")
{
  const SimDataset ds = testing::small_study(11);
  LoadedStudy study{ds.data, ds.validation};
  report::RunConfig cfg;
  cfg.estimation = testing::small_config();
  cfg.estimation.methods = {Method::source, Method::weighted, Method::steam};
  cfg.perturb = PerturbVariant::approx;
  cfg.draws = 120;
  const report::Evaluation eval = report::evaluate_study(study, cfg);
  const Json j = report::report_json(cfg, study, eval);
  CHECK(j["schema_version"] == 1);
  REQUIRE(j["methods"].size() == 3);
  CHECK(j["methods"][2]["method"] == "steam");
  const Json& inf = j["methods"][2]["inference"]["auc"];
  const double auc = j["methods"][2]["auc"].get<double>();
  CHECK(inf["lower"].get<double>() < auc);
  CHECK(inf["upper"].get<double>() > auc);
  CHECK(j["methods"][2]["roc_grid"].contains("lower"));
  CHECK_FALSE(j["methods"][0].contains("inference"));
  CHECK(j["perturbation"]["draws"] == 120);

  const auto rows = report::steam_inference(eval, 0.95);
  const auto draws = summarize_draws(*eval.draws, 0.95);
  // The interval keeps its width and moves with the reported estimate.
  CHECK(rows[0].upper - rows[0].lower == doctest::Approx(draws[0].upper - draws[0].lower));
  CHECK(rows[0].estimate == auc);

  std::ostringstream roc;
  report::write_roc_csv(roc, report::config_json(cfg), eval);
  CHECK(roc.str().rfind("# {", 0) == 0);
  CHECK(roc.str().find("method,cutoff,fpr,tpr\n") != std::string::npos);
}
