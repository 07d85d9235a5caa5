#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::path(STEAM_TEST_WORKDIR) / "cli";

int run(const std::string& args)
{
  const std::string cmd = std::string(STEAM_EVAL_PATH) + " " + args + " 2> " +
                          (kWork / "stderr.txt").string() + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string data_lines(const std::string& csv)
{
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) != 0)
      out += line + "\n";
  }
  return out;
}

const fs::path& study_csv()
{
  static const fs::path path = [] {
    fs::create_directories(kWork);
    const fs::path p = kWork / "study.csv";
    REQUIRE(run("generate --out " + p.string() + " --N 2000 --N-t 2000 --seed 3") == 0);
    return p;
  }();
  return path;
}

} // namespace

TEST_CASE("evaluate reruns are byte-identical")
{
  const std::string common = "evaluate --input " + study_csv().string() +
                             " --mu-interactions 1:2,2:3,3:4 --pi-interactions 1:2"
                             " --perturb approx --draws 100 --seed 9 --plot --out ";
  REQUIRE(run(common + (kWork / "eval_a").string()) == 0);
  REQUIRE(run(common + (kWork / "eval_b").string()) == 0);
  for (const char* f : {"report.json", "roc.csv", "roc.svg"}) {
    std::string a = slurp(kWork / "eval_a" / f);
    std::string b = slurp(kWork / "eval_b" / f);
    // Only the echoed output directory differs.
    for (std::string* s : {&a, &b})
      for (std::size_t i = s->find("eval_"); i != std::string::npos; i = s->find("eval_", i + 1))
        (*s)[i + 5] = 'X';
    CHECK(a == b);
  }
  const auto report = nlohmann::json::parse(slurp(kWork / "eval_a" / "report.json"));
  CHECK(report["seed"] == 9);
  CHECK(report["config"]["estimation"]["seed"] == 9);
  CHECK(slurp(kWork / "eval_a" / "roc.csv").find("\"seed\": 9") != std::string::npos);
  CHECK(slurp(kWork / "eval_a" / "roc.svg").find("\"seed\": 9") != std::string::npos);
}

TEST_CASE("method filter yields exactly the requested blocks")
{
  REQUIRE(run("evaluate --input " + study_csv().string() + " --methods source,weighted,steam --out " +
              (kWork / "eval_m").string()) == 0);
  const auto report = nlohmann::json::parse(slurp(kWork / "eval_m" / "report.json"));
  REQUIRE(report["methods"].size() == 3);
  CHECK(report["methods"][0]["method"] == "source");
  CHECK(report["methods"][1]["method"] == "weighted");
  CHECK(report["methods"][2]["method"] == "steam");
  CHECK(report["perturbation"].is_null());
}

TEST_CASE("errors exit nonzero with a structured message")
{
  fs::create_directories(kWork);
  const fs::path bad = kWork / "bad.csv";
  std::ofstream(bad) << "s,labeled,y,a\n1,1,,0.5\n";
  CHECK(run("evaluate --input " + bad.string() + " --out " + (kWork / "eval_bad").string()) != 0);
  const auto err = nlohmann::json::parse(slurp(kWork / "stderr.txt"));
  CHECK(err["error"]["code"] == "data");
  CHECK(err["error"]["row"] == 2);
  CHECK(err["error"]["column"] == "y");
  CHECK_FALSE(fs::exists(kWork / "eval_bad" / "report.json"));

  CHECK(run("evaluate --input " + study_csv().string() + " --methods nope --out " +
            (kWork / "eval_bad").string()) != 0);
  CHECK(run("simulate --scenario nope --out " + (kWork / "sim_bad").string()) != 0);
}

TEST_CASE("simulate smoke run is deterministic and emits one block per scenario")
{
  const std::string common = "simulate --replicates 2 --misspec all --N 1500 --N-t 1500"
                             " --oracle-draws 20000 --label-grid 25,50 --out ";
  REQUIRE(run(common + (kWork / "sim_a").string()) == 0);
  REQUIRE(run(common + (kWork / "sim_b").string() + " --threads 1") == 0);
  const std::string a = data_lines(slurp(kWork / "sim_a" / "summary.csv"));
  CHECK(a == data_lines(slurp(kWork / "sim_b" / "summary.csv")));
  CHECK(data_lines(slurp(kWork / "sim_a" / "equivalent_labels.csv")) ==
        data_lines(slurp(kWork / "sim_b" / "equivalent_labels.csv")));
  CHECK(a.rfind("shift,misspec,measure,method,bias,se,rmse,n_fail\n", 0) == 0);
  for (const char* m : {"both_correct", "pi_mis", "mu_mis"})
    CHECK(a.find("moderate," + std::string(m) + ",auc,steam,") != std::string::npos);
  CHECK_FALSE(fs::exists(kWork / "sim_a" / "coverage.csv"));
}

TEST_CASE("roc-plot overlays reports")
{
  REQUIRE(fs::exists(kWork / "eval_a" / "report.json"));
  const fs::path out = kWork / "overlay.svg";
  REQUIRE(run("roc-plot " + (kWork / "eval_a" / "report.json").string() + " " +
              (kWork / "eval_m" / "report.json").string() + " --out " + out.string()) == 0);
  const std::string svg = slurp(out);
  std::size_t lines = 0;
  for (std::size_t i = svg.find("<polyline"); i != std::string::npos; i = svg.find("<polyline", i + 1))
    ++lines;
  CHECK(lines == 8);
  std::ofstream(kWork / "broken.json") << "{\"methods\": 3}";
  CHECK(run("roc-plot " + (kWork / "broken.json").string() + " --out " +
            (kWork / "x.svg").string()) != 0);
}
