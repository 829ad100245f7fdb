#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sdae/baselines.hpp"
#include "sdae/data.hpp"
#include "sdae/sda.hpp"
#include "sdae/search.hpp"

namespace sdae::app {

struct DataConfig {
  // Either one image/label pair split by `split`...
  std::optional<std::filesystem::path> images;
  std::optional<std::filesystem::path> labels;
  // ...or explicit per-split files (test optional).
  std::optional<std::filesystem::path> train_images;
  std::optional<std::filesystem::path> train_labels;
  std::optional<std::filesystem::path> valid_images;
  std::optional<std::filesystem::path> valid_labels;
  std::optional<std::filesystem::path> test_images;
  std::optional<std::filesystem::path> test_labels;
  std::array<double, 3> split{5.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0};
  std::size_t n_classes = 10;
};

struct StackConfig {
  std::vector<std::size_t> hidden_dims{200, 200};
  Activation hidden_activation = Activation::Sigmoid;
  double corruption_level = 0.3;
  CorruptionMode corruption_mode = CorruptionMode::EveryLayer;
};

struct GridConfig {
  std::vector<Activation> activations{Activation::Sigmoid};
  std::vector<std::size_t> layer_counts{4, 5};
  std::vector<std::size_t> neuron_counts{300, 500, 700, 1000, 1500};
  std::vector<double> corruption_levels{0.3};
  std::vector<CorruptionMode> corruption_modes{CorruptionMode::EveryLayer};
  std::optional<double> wall_time_budget_s;
};

struct BaselinesConfig {
  std::vector<std::string> models{"logistic_regression", "decision_tree", "knn",
                                  "nearest_centroid",    "gaussian_nb",   "multinomial_nb",
                                  "bernoulli_nb",        "svm",           "svm_linear",
                                  "svm_rbf",             "svm_sigmoid",   "single_hidden_net"};
  std::size_t knn_k = 3;
  double learning_rate = 0.1;
  std::size_t batch_size = 20;
  std::size_t epochs = 30;
  std::size_t hidden = 700;
  Activation hidden_activation = Activation::Relu;
};

struct RunConfig {
  DataConfig data;
  StackConfig stack;
  SgdConfig pretrain = default_pretrain_config();
  FinetuneConfig finetune;
  GridConfig grid;
  BaselinesConfig baselines;
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  std::size_t workers = 1;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Parses and validates. Unknown keys anywhere are rejected with ConfigError.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// Canonical JSON form (every key present). parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& c);

// FNV-1a 64 of the canonical JSON, excluding `out` and `workers`, which
// cannot influence results. 16 lowercase hex digits.
std::string config_digest(const RunConfig& c);

// FNV-1a 64 of arbitrary text as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

// Seeds handed to each stage, all derived from RunConfig::seed.
struct StageSeeds {
  std::uint64_t split;
  std::uint64_t pretrain;
  std::uint64_t corruption;
  std::uint64_t head;
  std::uint64_t finetune;
  std::uint64_t baselines;
};
StageSeeds stage_seeds(std::uint64_t seed) noexcept;

StackSpec stack_spec(const RunConfig& c, std::size_t input_dim);
GridSpec grid_spec(const RunConfig& c);
std::vector<BaselineSpec> baseline_specs(const RunConfig& c);

// Loads the IDX files named by the data section and assigns split tags.
// Throws ConfigError when no usable paths are configured and FormatError on
// bad files.
Dataset load_dataset(const RunConfig& c);

}  // namespace sdae::app
