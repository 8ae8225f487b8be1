// Copyright 2026 The ruleseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "ruleseg/commands.hpp"

namespace ruleseg {
namespace {

namespace fs = std::filesystem;

const fs::path kData = RULESEG_TEST_DATA;

class Commands : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ruleseg_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void generate(const std::string& name, std::size_t count, std::uint64_t seed, double noise = 0.3) {
    GenArgs g;
    g.count = count;
    g.out = path(name);
    g.noise = noise;
    g.common.seed = seed;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_gen(g, out, err), kExitOk) << err.str();
  }

  int infer(InferArgs a, std::string* err_text = nullptr) {
    std::ostringstream out, err;
    const int code = cmd_infer(a, out, err);
    if (err_text) *err_text = err.str();
    return code;
  }

  fs::path dir_;
};

Json strip_timestamp(Json manifest) {
  manifest.erase("timestamp");
  return manifest;
}

TEST_F(Commands, SoftMutexFixture) {
  InferArgs a;
  a.corpus = (kData / "soft_mutex_2x2" / "instance.json").string();
  a.rules = (kData / "soft_mutex_2x2" / "rules.json").string();
  a.no_rescale = a.no_area_weight = true;
  a.out_dir = path("out");
  ASSERT_EQ(infer(a), kExitOk);
  const auto preds = read_json_file(dir_ / "out" / "predictions.json");
  const auto& inst = preds["instances"][0];
  EXPECT_EQ(inst["status"], "optimal");
  EXPECT_EQ(inst["labels"], Json::parse(R"(["a", "b"])"));
  EXPECT_NEAR(inst["objective"].get<double>(), 1.2, 1e-12);
  EXPECT_EQ(inst["rules"][0]["outcome"], "violated");
  const auto manifest = read_json_file(dir_ / "out" / "manifest.json");
  EXPECT_EQ(manifest["instances"][0]["violated_soft_rules"], 1);
  EXPECT_EQ(manifest["aggregate"]["optimal"], 1);
}

TEST_F(Commands, HardFixtureAndDumpLp) {
  InferArgs a;
  a.corpus = (kData / "soft_mutex_2x2" / "instance.json").string();
  a.rules = (kData / "soft_mutex_2x2" / "hard_rules.json").string();
  a.no_rescale = a.no_area_weight = true;
  a.out_dir = path("out");
  a.common.dump_lp = path("lp");
  ASSERT_EQ(infer(a), kExitOk);
  const auto preds = read_json_file(dir_ / "out" / "predictions.json");
  EXPECT_NEAR(preds["instances"][0]["objective"].get<double>(), 1.1, 1e-12);
  EXPECT_TRUE(fs::exists(dir_ / "lp" / "soft_mutex_2x2.lp"));
}

TEST_F(Commands, NoRulesEqualsArgmaxBaseline) {
  generate("corpus", 5, 3);
  InferArgs a;
  a.corpus = path("corpus");
  a.out_dir = path("out");
  ASSERT_EQ(infer(a), kExitOk);
  const auto corpus = load_corpus(path("corpus"));
  const auto preds = read_json_file(dir_ / "out" / "predictions.json");
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto fused = compute_weights(corpus.samples[k].instance, ScoringParams{}, std::nullopt);
    std::vector<std::string> expect;
    for (LabelId id : argmax_labels(fused.weights)) expect.push_back(corpus.labels.name(id));
    EXPECT_EQ(preds["instances"][k]["labels"].get<std::vector<std::string>>(), expect);
  }
}

TEST_F(Commands, MissingModelIsSkippedWithWarning) {
  generate("corpus", 2, 1);
  InferArgs a;
  a.corpus = path("corpus");
  a.model = path("nope.json");
  a.out_dir = path("out");
  std::string err;
  ASSERT_EQ(infer(a, &err), kExitOk);
  EXPECT_NE(err.find("warning"), std::string::npos);
  EXPECT_EQ(read_json_file(dir_ / "out" / "manifest.json")["context_applied"], false);
}

TEST_F(Commands, MineExitCodes) {
  std::ostringstream out, err;
  fs::create_directories(dir_ / "empty");
  MineArgs m;
  m.corpus = path("empty");
  m.out = path("rules.json");
  EXPECT_EQ(cmd_mine(m, out, err), kExitBadInput);

  generate("corpus", 20, 2);
  m.corpus = path("corpus");
  m.min_support = 1000;
  EXPECT_EQ(cmd_mine(m, out, err), kExitOk);
  EXPECT_EQ(read_json_file(m.out), Json::array());
}

TEST_F(Commands, MineFindsPlantedRules) {
  generate("corpus", 200, 1);
  MineArgs m;
  m.corpus = path("corpus");
  m.out = path("rules.json");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_mine(m, out, err), kExitOk) << err.str();
  const auto rules = read_json_file(m.out);
  auto has = [&](const char* kind, const char* a, const char* b) {
    for (const auto& r : rules)
      if (r["kind"] == kind && r["a"] == a && r["b"] == b && r["hard"] == true) return true;
    return false;
  };
  EXPECT_TRUE(has("geometric_above", "sky", "sea"));
  EXPECT_TRUE(has("presence", "car", "road"));
  EXPECT_TRUE(has("adjacency", "sun", "sky"));
}

TEST_F(Commands, DeterministicManifests) {
  generate("train", 60, 1);
  generate("test", 6, 2);
  std::ostringstream out, err;
  MineArgs m;
  m.corpus = path("train");
  m.out = path("rules.json");
  ASSERT_EQ(cmd_mine(m, out, err), kExitOk);
  LearnContextArgs l;
  l.corpus = path("train");
  l.out = path("model.json");
  ASSERT_EQ(cmd_learn_context(l, out, err), kExitOk);

  InferArgs a;
  a.corpus = path("test");
  a.rules = path("rules.json");
  a.model = path("model.json");
  a.common.deterministic = true;
  a.out_dir = path("run1");
  a.common.threads = 1;
  ASSERT_EQ(infer(a), kExitOk);
  a.out_dir = path("run2");
  a.common.threads = 2;
  ASSERT_EQ(infer(a), kExitOk);
  const auto m1 = read_json_file(dir_ / "run1" / "manifest.json");
  const auto m2 = read_json_file(dir_ / "run2" / "manifest.json");
  EXPECT_EQ(strip_timestamp(m1), strip_timestamp(m2));
  EXPECT_EQ(m1["context_applied"], true);
  EXPECT_EQ(read_json_file(dir_ / "run1" / "predictions.json"), read_json_file(dir_ / "run2" / "predictions.json"));
}

TEST_F(Commands, InfeasibleInstanceIsReportedAndRunContinues) {
  // A single region cannot carry both labels of a hard co-occurrence, and
  // it cannot carry neither; the two-region instance is fine.
  write_text_file(path("corpus.json"), R"({
    "labels": ["a", "b"],
    "instances": [
      {"name": "one", "regions": [{"id": 0, "bbox": [0, 0, 10, 10], "area": 100}], "raw_scores": [[0.9, 0.1]]},
      {"name": "two",
       "regions": [{"id": 0, "bbox": [0, 0, 10, 10], "area": 100, "neighbors": [1]},
                   {"id": 1, "bbox": [10, 0, 10, 10], "area": 100, "neighbors": [0]}],
       "raw_scores": [[0.9, 0.1], [0.8, 0.2]]}
    ]
  })");
  write_text_file(path("rules.json"), R"([{"kind": "cooccurrence", "a": "a", "b": "b", "hard": true}])");
  InferArgs a;
  a.corpus = path("corpus.json");
  a.rules = path("rules.json");
  a.out_dir = path("out");
  std::string err;
  ASSERT_EQ(infer(a, &err), kExitOk);
  EXPECT_NE(err.find("one is infeasible"), std::string::npos) << err;
  const auto preds = read_json_file(dir_ / "out" / "predictions.json");
  EXPECT_EQ(preds["instances"][0]["status"], "infeasible");
  EXPECT_TRUE(preds["instances"][0]["labels"].is_null());
  EXPECT_EQ(preds["instances"][0]["conflicting_rules"], Json::parse("[0]"));
  EXPECT_EQ(preds["instances"][1]["status"], "optimal");
  EXPECT_EQ(preds["instances"][1]["labels"], Json::parse(R"(["a", "b"])"));
  const auto manifest = read_json_file(dir_ / "out" / "manifest.json");
  EXPECT_EQ(manifest["aggregate"]["infeasible"], 1);
  EXPECT_EQ(manifest["aggregate"]["optimal"], 1);
}

TEST_F(Commands, EvalFixtures) {
  write_text_file(path("corpus.json"), R"({
    "labels": ["a", "b", "c"],
    "instances": [{
      "name": "x",
      "regions": [
        {"id": 0, "bbox": [0, 0, 10, 10], "area": 100, "neighbors": [1]},
        {"id": 1, "bbox": [10, 0, 10, 10], "area": 100, "neighbors": [0]}
      ],
      "raw_scores": [[1, 0, 0], [0, 1, 0]],
      "ground_truth": ["a", "b"]
    }]
  })");
  auto run = [&](const char* labels) {
    write_text_file(path("preds.json"), std::string(R"({"instances": [{"name": "x", "labels": )") + labels + "}]}");
    EvalArgs e;
    e.predictions = path("preds.json");
    e.corpus = path("corpus.json");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_eval(e, out, err), kExitOk) << err.str();
    return read_json_file(dir_ / "metrics.json");
  };
  auto all = run(R"(["a", "b"])");
  EXPECT_EQ(all["per_pixel"], 1.0);
  EXPECT_EQ(all["per_class"], 1.0);
  EXPECT_TRUE(all["per_label"]["c"].is_null());
  auto half = run(R"(["a", "a"])");
  EXPECT_EQ(half["per_pixel"], 0.5);
  EXPECT_EQ(half["per_class"], 0.5);

  EvalArgs bad;
  bad.predictions = path("missing.json");
  bad.corpus = path("corpus.json");
  std::ostringstream out, err;
  EXPECT_EQ(cmd_eval(bad, out, err), kExitBadInput);
}

TEST_F(Commands, ConfigFileAndFlags) {
  write_text_file(path("config.json"), R"({"seed": 5, "scoring": {"a": 3.0, "beta": 2.0}, "solver": {"node_limit": 77}})");
  CommonOptions c;
  c.config = path("config.json");
  auto s = detail::load_settings(c);
  EXPECT_EQ(s.seed, 5u);
  EXPECT_EQ(s.scoring.sigmoid.a, 3.0);
  EXPECT_EQ(s.solver.node_limit, 77u);
  c.seed = 9;
  EXPECT_EQ(detail::load_settings(c).seed, 9u);

  write_text_file(path("bad.json"), R"({"scoring": {"a": "steep"}})");
  c.config = path("bad.json");
  EXPECT_THROW(detail::load_settings(c), InputError);
}

TEST_F(Commands, GenRejectsBadNoise) {
  GenArgs g;
  g.count = 2;
  g.out = path("corpus");
  g.noise = 1.5;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_gen(g, out, err), kExitBadInput);
}

// The installed binary: exit codes and a full gen -> mine -> learn-context ->
// infer -> eval round.
TEST_F(Commands, BinaryEndToEnd) {
  const std::string cli = RULESEG_CLI;
  auto run = [&](const std::string& args) {
    const int status = std::system((cli + " " + args + " > " + path("log.txt") + " 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("mine --corpus " + path("none")), 2);
  EXPECT_EQ(run("gen --count 40 --seed 1 --out " + path("train")), 0);
  EXPECT_EQ(run("gen --count 4 --seed 2 --out " + path("test")), 0);
  EXPECT_EQ(run("mine --corpus " + path("train") + " --out " + path("rules.json")), 0);
  EXPECT_EQ(run("learn-context --corpus " + path("train") + " --out " + path("model.json")), 0);
  EXPECT_EQ(run("infer --instances " + path("test") + " --rules " + path("rules.json") + " --model " +
                path("model.json") + " --deterministic --out " + path("out")),
            0);
  EXPECT_EQ(run("eval --predictions " + path("out/predictions.json") + " --corpus " + path("test")), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "metrics.json"));
}

}  // namespace
}  // namespace ruleseg
