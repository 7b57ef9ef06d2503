#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace gevk {

enum class Conditioning { canny_edge, depth };

/// Fine-tuning hyperparameters handed to an external diffusion trainer.
struct TrainConfig {
  double learning_rate = 1e-4;
  std::uint32_t batch_size = 4;
  std::uint32_t steps = 10000;
  /// Probability of replacing a caption with the empty string.
  double prompt_dropout = 0.5;
  std::vector<std::string> negative_prompts{"clutter", "dark"};
  std::set<Conditioning> conditioning;

  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string dump_train_config(const TrainConfig& config);
TrainConfig parse_train_config(const std::string& text);

void emit_train_config(const TrainConfig& config, const std::filesystem::path& destination);
TrainConfig load_train_config(const std::filesystem::path& source);

}  // namespace gevk
