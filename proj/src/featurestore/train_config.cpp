#include "gevk/train_config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gevk/common.hpp"

namespace gevk {

using nlohmann::json;

namespace {

std::string to_string(Conditioning c) { return c == Conditioning::canny_edge ? "canny_edge" : "depth"; }

Conditioning parse_conditioning(const std::string& text) {
  if (text == "canny_edge") return Conditioning::canny_edge;
  if (text == "depth") return Conditioning::depth;
  throw InputError("unknown conditioning '" + text + "'");
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (batch_size == 0) throw InputError("batch_size must be positive");
  if (steps == 0) throw InputError("steps must be positive");
  if (!(prompt_dropout >= 0.0 && prompt_dropout <= 1.0)) throw InputError("prompt_dropout must lie in [0, 1]");
}

std::string dump_train_config(const TrainConfig& config) {
  config.validate();
  json conditioning = json::array();
  for (auto c : config.conditioning) conditioning.push_back(to_string(c));
  json j{{"learning_rate", config.learning_rate},
         {"batch_size", config.batch_size},
         {"steps", config.steps},
         {"prompt_dropout", config.prompt_dropout},
         {"negative_prompts", config.negative_prompts},
         {"conditioning", conditioning}};
  return j.dump(2) + "\n";
}

TrainConfig parse_train_config(const std::string& text) {
  TrainConfig config;
  try {
    const auto j = json::parse(text);
    config.learning_rate = j.at("learning_rate").get<double>();
    config.batch_size = j.at("batch_size").get<std::uint32_t>();
    config.steps = j.at("steps").get<std::uint32_t>();
    config.prompt_dropout = j.at("prompt_dropout").get<double>();
    config.negative_prompts = j.at("negative_prompts").get<std::vector<std::string>>();
    config.conditioning.clear();
    for (const auto& c : j.at("conditioning")) config.conditioning.insert(parse_conditioning(c.get<std::string>()));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed train config: ") + e.what());
  }
  config.validate();
  return config;
}

void emit_train_config(const TrainConfig& config, const std::filesystem::path& destination) {
  const auto text = dump_train_config(config);
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + destination.string());
  out << text;
  if (!out) throw InputError("write failed for " + destination.string());
}

TrainConfig load_train_config(const std::filesystem::path& source) {
  std::ifstream in(source);
  if (!in) throw InputError("cannot open " + source.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_train_config(buffer.str());
}

}  // namespace gevk
