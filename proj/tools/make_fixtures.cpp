// Writes the small deterministic embedding set used by the CLI tests and the
// README walkthrough: 10 held-out images x 5 variants, 16-dim features.

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include <nlohmann/json.hpp>

#include "gevk/embedding.hpp"

namespace {

constexpr std::size_t kDims = 16;
constexpr std::size_t kImages = 10;
constexpr std::size_t kReference = 60;

const char* const kVariants[] = {"M0", "M1", "M2", "M3", "M4"};
// Drift of each variant away from the real-image distribution and its prompts.
constexpr double kDrift[] = {0.45, 0.2, 0.6, 0.75, 0.9};

std::vector<std::string> image_ids() {
  std::vector<std::string> ids;
  for (std::size_t i = 1; i <= kImages; ++i) ids.push_back((i < 10 ? "kitchen0" : "kitchen") + std::to_string(i));
  return ids;
}

gevk::EmbeddingMatrix gaussian(std::size_t rows, std::vector<std::string> ids, std::mt19937_64& rng, double shift,
                               double scale) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<float> v(rows * kDims);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = static_cast<float>(scale * nd(rng) + (i % kDims < 4 ? shift : 0.0));
  }
  return gevk::EmbeddingMatrix(rows, kDims, std::move(v), std::move(ids));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <output-dir>\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(20240611);

  std::vector<std::string> ref_ids;
  for (std::size_t i = 0; i < kReference; ++i) ref_ids.push_back("real" + std::to_string(i));
  gevk::write_embeddings(gaussian(kReference, ref_ids, rng, 0.0, 1.0), dir / "giqa_reference.gevk");

  const auto prompts = gaussian(kImages, image_ids(), rng, 0.0, 1.0);
  gevk::write_embeddings(prompts, dir / "clip_prompts.gevk");

  nlohmann::json clip_paths, giqa_paths;
  std::normal_distribution<double> nd(0.0, 1.0);
  for (std::size_t v = 0; v < 5; ++v) {
    const std::string name = kVariants[v];
    gevk::write_embeddings(gaussian(kImages, image_ids(), rng, 3.0 * kDrift[v], 1.0), dir / ("giqa_" + name + ".gevk"));

    std::vector<float> aligned(kImages * kDims);
    for (std::size_t i = 0; i < aligned.size(); ++i) {
      aligned[i] = static_cast<float>(prompts.values()[i] + 2.0 * kDrift[v] * nd(rng));
    }
    gevk::write_embeddings(gevk::EmbeddingMatrix(kImages, kDims, std::move(aligned), image_ids()),
                           dir / ("clip_" + name + ".gevk"));
    clip_paths[name] = "clip_" + name + ".gevk";
    giqa_paths[name] = "giqa_" + name + ".gevk";
  }

  const nlohmann::json config{
      {"output_dir", "out"},
      {"embeddings",
       {{"clip", {{"prompt_path", "clip_prompts.gevk"}, {"generated_paths", clip_paths}}},
        {"giqa_gmm", {{"reference_path", "giqa_reference.gevk"}, {"generated_paths", giqa_paths}}},
        {"giqa_knn", {{"reference_path", "giqa_reference.gevk"}, {"generated_paths", giqa_paths}}}}},
      {"giqa", {{"K", 2}, {"q", 8}, {"max_iter", 200}, {"tol", 1e-8}, {"seed", 7}, {"knn_K", 5}}},
      {"normalization", {{"kind", "global_min_max"}}}};
  std::ofstream(dir / "config.json") << config.dump(2) << "\n";
  return 0;
}
