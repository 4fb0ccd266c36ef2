#include "blockprop/error.hpp"
#include "blockprop/io.hpp"
#include "blockprop/pipeline.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>

using namespace blockprop;
namespace fs = std::filesystem;

namespace {

const char* kFast = R"(
# small study
synth_users = 300
quantiles = 0.5, 0.9
n_estimators = 10
cv_runs = 2
cv_folds = 3
rf_trees = 10
best_worst_n = 1, 4
beeswarm_quantiles = 0.9
ablation_quantiles = 0.9
)";

RunConfig fast(const std::string& out) {
  auto c = RunConfig::parse(kFast);
  c.set("out", out);
  return c;
}

std::map<std::string, std::string> snapshot(const std::string& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file(e.path().string());
  return files;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(BLOCKPROP_CLI) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::vector<std::string> kChain = {"synth", "ingest", "features", "label", "train",
                                         "explain", "ablate", "regress", "report"};

}  // namespace

TEST_CASE("run config") {
  const auto c = RunConfig::parse("seed = 7  # comment\nquantiles = 0.5,0.9\n\n");
  CHECK(c.seed() == 7);
  CHECK(c.numbers("quantiles") == std::vector<double>{0.5, 0.9});
  CHECK(c.get("n_estimators") == "500");
  CHECK_THROWS_AS(RunConfig::parse("bogus = 1"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("no equals sign"), ConfigError);

  auto d = c;
  d.set("jobs", "4");
  d.set("out", "elsewhere");
  CHECK(d.hash() == c.hash());
  d.set("seed", "8");
  CHECK(d.hash() != c.hash());

  auto bad = c;
  bad.set("replay", "does/not/exist.ndjson");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.set("quantiles", "0.5, 1.5");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.set("definitions", "raw,sideways");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.set("seed", "-3");
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("dependency errors name the missing command") {
  const std::string out = "pipeline_dep";
  fs::remove_all(out);
  const auto c = fast(out);
  CHECK_THROWS_WITH_AS(run_command("train", c), doctest::Contains("`label`"), DependencyError);
  CHECK_THROWS_WITH_AS(run_command("ingest", c), doctest::Contains("`synth`"), DependencyError);
  CHECK_THROWS_AS(run_command("nonsense", c), ConfigError);
  fs::remove_all(out);
}

TEST_CASE("full chain: report completeness, metadata, determinism and composition") {
  const std::string a = "pipeline_a", b = "pipeline_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const auto ca = fast(a);
  for (const auto& cmd : kChain) run_command(cmd, ca);

  const auto index = nlohmann::json::parse(read_file(a + "/report/index.json"));
  CHECK(index["config_hash"] == ca.hash());
  const std::vector<std::string> families = {"table1_summary", "fig2_daily_actions", "fig2_action_distribution",
                                             "fig3_exploratory", "fig4_threshold_sweep", "fig4_ablation",
                                             "fig5_beeswarm", "fig5_bump", "fig6_group_shares",
                                             "fig7_best_worst", "fig8_regression"};
  for (const auto& f : families) {
    INFO(f);
    REQUIRE(index["families"].contains(f));
    REQUIRE(!index["families"][f]["files"].empty());
    for (const auto& file : index["families"][f]["files"]) {
      CHECK(fs::exists(a + "/report/" + file["file"].get<std::string>()));
      CHECK(file["rows"].get<long>() > 0);
    }
  }

  const auto first = snapshot(a);
  for (const auto& [name, content] : first) {
    if (name.size() < 10 || name.substr(name.size() - 10) != ".meta.json") continue;
    INFO(name);
    const auto meta = nlohmann::json::parse(content);
    CHECK(meta["config_hash"] == ca.hash());
    CHECK(meta["seed"] == 42);
    CHECK(meta["manifest_version"] == "default-81-v1");
  }

  for (const auto& cmd : kChain) run_command(cmd, ca);
  CHECK(snapshot(a) == first);

  const auto cb = fast(b);
  run_command("synth", cb);
  run_command("run-all", cb);
  const auto second = snapshot(b);
  CHECK(second.size() == first.size());
  for (const auto& [name, content] : first) {
    INFO(name);
    REQUIRE(second.count(name));
    CHECK(second.at(name) == content);
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("cli exit codes") {
  const std::string out = "pipeline_cli";
  fs::remove_all(out);
  write_file_atomic(out + "/fast.conf", kFast);
  const std::string base = "--config " + out + "/fast.conf --set out=" + out + " ";
  CHECK(cli(base + "train") == 3);
  CHECK(cli(base + "--set nope=1 synth") == 2);
  CHECK(cli(base + "--tox-mode psychic synth") == 2);
  CHECK(cli("--config " + out + "/missing.conf synth") == 2);
  CHECK(cli(base + "--seed 3 --definition raw --quantiles 0.9 --jobs 1 synth") == 0);
  write_file_atomic(out + "/garbage.ndjson", "this is\nnot ndjson\n");
  CHECK(cli(base + "--set replay=" + out + "/garbage.ndjson ingest") == 4);
  CHECK(cli("") == 2);
  fs::remove_all(out);
}
