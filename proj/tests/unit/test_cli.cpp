#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gevk/cli.hpp"
#include "gevk/embedding.hpp"
#include "gevk/manifest.hpp"
#include "support.hpp"

using namespace gevk;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
};

Run gevk_run(std::vector<std::string> args) {
  args.insert(args.begin(), "gevk");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path write_manifest(const fs::path& dir, std::size_t n) {
  DatasetManifest m;
  m.seed = 11;
  for (std::size_t i = 0; i < n; ++i) m.records.push_back({"img" + std::to_string(i), "file://img", "", {}, {}, {}, {}});
  const auto path = dir / "manifest.json";
  save_manifest(m, path);
  return path;
}

const fs::path kFixtures = fs::path(GEVK_FIXTURE_DIR) / "embeddings";

std::size_t count_lines(const std::string& text) { return std::count(text.begin(), text.end(), '\n'); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit with 2") {
    CHECK(gevk_run({}).code == cli::kInputError);
    CHECK(gevk_run({"frobnicate"}).code == cli::kInputError);
    CHECK(gevk_run({"split", "--ratios"}).code == cli::kInputError);
    CHECK(gevk_run({"--help"}).code == cli::kOk);
  }

  TEST_CASE("split 100 records") {
    testing::TempDir dir("cli");
    const auto path = write_manifest(dir.path(), 100);
    const auto a = gevk_run({"split", "--manifest", path.string(), "--out", (dir.path() / "a.json").string()});
    CHECK(a.code == 0);
    CHECK(a.out == "train 80, val 10, test 10\n");
    const auto b = gevk_run({"split", "--manifest", path.string(), "--out", (dir.path() / "b.json").string()});
    CHECK(testing::slurp(dir.path() / "a.json") == testing::slurp(dir.path() / "b.json"));
    const auto c = gevk_run({"--seed", "12", "split", "--manifest", path.string(), "--out",
                             (dir.path() / "c.json").string()});
    CHECK(testing::slurp(dir.path() / "a.json") != testing::slurp(dir.path() / "c.json"));

    const auto custom = gevk_run({"split", "--manifest", path.string(), "--ratios", "0.6,0.2,0.2"});
    CHECK(custom.out == "train 60, val 20, test 20\n");
    CHECK(custom.err.find("previous manifest saved as") != std::string::npos);
    CHECK(count_splits(load_manifest(path)).train == 60);
  }

  TEST_CASE("split rejects tiny and malformed inputs") {
    testing::TempDir dir("cli");
    const auto path = write_manifest(dir.path(), 2);
    const auto r = gevk_run({"split", "--manifest", path.string()});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("fewer than 3 records") != std::string::npos);
    const auto big = write_manifest(dir.path(), 10);
    CHECK(gevk_run({"split", "--manifest", big.string(), "--ratios", "0.5,0.5"}).code == cli::kInputError);
    CHECK(gevk_run({"split", "--manifest", big.string(), "--ratios", "0.5,0.4,0.4"}).code == cli::kInputError);
    CHECK(gevk_run({"split", "--manifest", (dir.path() / "none.json").string()}).code == cli::kInputError);
    testing::spit(dir.path() / "bad.json", "{not json");
    CHECK(gevk_run({"split", "--manifest", (dir.path() / "bad.json").string()}).code == cli::kInputError);
  }

  TEST_CASE("score writes one csv per variant, reproducibly") {
    testing::TempDir dir("cli");
    const auto config = (kFixtures / "config.json").string();
    const auto a = gevk_run({"--config", config, "--output-dir", (dir.path() / "a").string(), "score",
                             "--metric", "clip"});
    REQUIRE(a.code == 0);
    for (const char* v : {"M0", "M1", "M2", "M3", "M4"}) {
      const auto text = testing::slurp(dir.path() / "a" / (std::string("scores_clip_") + v + ".csv"));
      CHECK(count_lines(text) == 11);
      CHECK(text.rfind("image_id,variant,raw,normalized\n", 0) == 0);
    }
    gevk_run({"--config", config, "--output-dir", (dir.path() / "b").string(), "score"});
    gevk_run({"--config", config, "--output-dir", (dir.path() / "c").string(), "score"});
    for (const auto& entry : fs::directory_iterator(dir.path() / "b")) {
      CHECK(testing::slurp(entry.path()) == testing::slurp(dir.path() / "c" / entry.path().filename()));
    }
    const auto model = nlohmann::json::parse(testing::slurp(dir.path() / "b" / "model_giqa_gmm.json"));
    CHECK(model.at("options").at("K") == 2);
    CHECK(model.at("gmm").at("k") == 2);
  }

  TEST_CASE("score reports dimension mismatches with both sizes") {
    testing::TempDir dir("cli");
    write_embeddings(testing::random_matrix(10, 16, 1), dir.path() / "prompts.gevk");
    write_embeddings(testing::random_matrix(10, 12, 2), dir.path() / "images.gevk");
    testing::spit(dir.path() / "config.json", R"({"embeddings": {"clip": {"prompt_path": "prompts.gevk",
                  "generated_paths": {"M0": "images.gevk"}}}})");
    const auto r = gevk_run({"--config", (dir.path() / "config.json").string(), "--output-dir",
                             dir.path().string(), "score"});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("12") != std::string::npos);
    CHECK(r.err.find("16") != std::string::npos);
  }

  TEST_CASE("score needs a config and existing files") {
    CHECK(gevk_run({"score"}).code == cli::kInputError);
    testing::TempDir dir("cli");
    testing::spit(dir.path() / "config.json",
                  R"({"embeddings": {"giqa_knn": {"reference_path": "missing.gevk", "generated_paths": {"M0": "x"}}}})");
    const auto r = gevk_run({"--config", (dir.path() / "config.json").string(), "score"});
    CHECK(r.code == cli::kInputError);
    CHECK(r.err.find("missing.gevk") != std::string::npos);
    testing::spit(dir.path() / "bad.gevk", "GEVX");
    testing::spit(dir.path() / "config.json",
                  R"({"embeddings": {"giqa_knn": {"reference_path": "bad.gevk", "generated_paths": {"M0": "x"}}}})");
    const auto bad = gevk_run({"--config", (dir.path() / "config.json").string(), "score"});
    CHECK(bad.code == cli::kInputError);
    CHECK(bad.err.find("bad magic") != std::string::npos);
  }

  TEST_CASE("report from raw means") {
    testing::TempDir dir("cli");
    testing::spit(dir.path() / "config.json", R"({"formats": ["markdown", "json"], "raw_means": {
      "clip": {"M0": 28.9447, "M1": 30.9256, "M2": 29.8510, "M3": 29.5998, "M4": 29.5652},
      "giqa_knn": {"M0": 9.3586, "M1": 8.8503}}})");
    const auto r = gevk_run({"--config", (dir.path() / "config.json").string(), "--output-dir",
                             dir.path().string(), "report"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("| M1 | 30.9256 | 100.0% | +6.8% | #1 |") != std::string::npos);
    CHECK(r.out.find("| M1 | 8.8503 | 100.0% | +5.4% | #1 |") != std::string::npos);
    const auto json = testing::slurp(dir.path() / "report_clip.json");
    const std::map<ModelVariantId, double> means{{ModelVariantId::parse("M0"), 28.9447},
                                                 {ModelVariantId::parse("M1"), 30.9256},
                                                 {ModelVariantId::parse("M2"), 29.8510},
                                                 {ModelVariantId::parse("M3"), 29.5998},
                                                 {ModelVariantId::parse("M4"), 29.5652}};
    CHECK(parse_report_json(json) == build_report(Metric::clip, means));
    CHECK(testing::slurp(dir.path() / "report_clip.md").find("| M0 | 28.9447 | — | — | — |") != std::string::npos);
    CHECK_FALSE(fs::exists(dir.path() / "report_clip.csv"));
  }

  TEST_CASE("report from embeddings writes the per-model averages") {
    testing::TempDir dir("cli");
    const auto r = gevk_run({"--config", (kFixtures / "config.json").string(), "--output-dir",
                             dir.path().string(), "report"});
    REQUIRE(r.code == 0);
    const auto csv = testing::slurp(dir.path() / "figure5_normalized_means.csv");
    CHECK(csv.rfind("variant,metric,mean_normalized\n", 0) == 0);
    CHECK(count_lines(csv) == 16);
    CHECK(r.out.find("## giqa_gmm") != std::string::npos);
  }

  TEST_CASE("survey command") {
    testing::TempDir dir("cli");
    const auto fixture = std::string(GEVK_FIXTURE_DIR) + "/survey_table5.csv";
    const auto r = gevk_run({"--output-dir", dir.path().string(), "survey", fixture});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("| Pair 1 | 100% | 33/33 | < .001 | [89.4, 100] |") != std::string::npos);
    CHECK(r.out.find("| Overall | 87.4% | 173/198 |") != std::string::npos);
    CHECK(fs::exists(dir.path() / "survey_report.md"));
    CHECK(fs::exists(dir.path() / "survey_report.json"));

    testing::spit(dir.path() / "empty.csv", "");
    CHECK(gevk_run({"survey", (dir.path() / "empty.csv").string()}).code == cli::kInputError);
    CHECK(gevk_run({"survey", (dir.path() / "absent.csv").string()}).code == cli::kInputError);

    testing::spit(dir.path() / "messy.csv",
                  "respondent_id,pair_id,choice,confidence,helpfulness,role\n"
                  "a,1,optimized,5,6,x\n"
                  "b,1,optimized,9,6,x\n"
                  "c,1,sideways,5,6,x\n"
                  "d,1,original\n"
                  "e,1,optimized,6,5,x\n"
                  "f,1,original,3,4,x\n");
    const auto messy = gevk_run({"survey", (dir.path() / "messy.csv").string()});
    CHECK(messy.code == 0);
    CHECK(count_lines(messy.err) == 3);
    CHECK(messy.err.find("line 3") != std::string::npos);
    CHECK(messy.out.find("| Pair 1 | 67% | 2/3 |") != std::string::npos);
  }

  TEST_CASE("fetch without work or key") {
    testing::TempDir dir("cli");
    const auto manifest = (dir.path() / "m.json").string();
    const auto zero = gevk_run({"fetch", "--query", "kitchen", "--count", "0", "--manifest", manifest});
    CHECK(zero.code == 0);
    CHECK_FALSE(fs::exists(manifest));

    unsetenv("UNSPLASH_ACCESS_KEY");
    const auto nokey = gevk_run({"fetch", "--query", "kitchen", "--count", "2", "--manifest", manifest});
    CHECK(nokey.code == cli::kInputError);
    CHECK(nokey.err.find("UNSPLASH_ACCESS_KEY") != std::string::npos);
  }

  TEST_CASE("backups never overwrite each other") {
    testing::TempDir dir("cli");
    const auto p = dir.path() / "f.txt";
    CHECK_FALSE(cli::replace_with_backup(p, "one"));
    const auto b1 = cli::replace_with_backup(p, "two");
    const auto b2 = cli::replace_with_backup(p, "three");
    REQUIRE(b1);
    REQUIRE(b2);
    CHECK(*b1 != *b2);
    CHECK(testing::slurp(*b1) == "one");
    CHECK(testing::slurp(*b2) == "two");
    CHECK(testing::slurp(p) == "three");
  }

  TEST_CASE("config parsing") {
    const auto c = cli::load_run_config(kFixtures / "config.json");
    CHECK(c.giqa.k == 2);
    CHECK(c.embeddings.at(Metric::clip).prompt_path == kFixtures / "clip_prompts.gevk");
    CHECK(c.output_dir == kFixtures / "out");
    CHECK_THROWS_AS(cli::parse_run_config(nlohmann::json::parse(R"({"embeddings": {"clip": {"generated_paths": {"M1": "a"}}}})"), ""),
                    InputError);
    CHECK_THROWS_AS(cli::parse_run_config(nlohmann::json::parse(R"({"giqa": {"knn_variant": "odd"}})"), ""), InputError);
    CHECK_THROWS_AS(cli::parse_run_config(nlohmann::json::parse(R"({"giqa": {"K": "two"}})"), ""), InputError);
  }
}
