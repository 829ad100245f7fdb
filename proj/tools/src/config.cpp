#include "sdae_app/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "sdae/error.hpp"
#include "sdae/rng.hpp"

namespace sdae::app {
namespace {

using nlohmann::json;

// Reads one JSON object, remembering which keys were consumed so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& name) const {
    return path_.empty() ? name : path_ + "." + name;
  }

  bool has(const std::string& name) {
    seen_.insert(name);
    return j_.contains(name) && !j_.at(name).is_null();
  }

  template <typename T>
  void read(const std::string& name, T& out) {
    if (!has(name)) return;
    try {
      out = j_.at(name).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(key(name), std::string("wrong type: ") + e.what());
    }
  }

  void read_path(const std::string& name, std::optional<std::filesystem::path>& out) {
    std::string s;
    if (!has(name)) return;
    read(name, s);
    if (s.empty()) throw ConfigError(key(name), "empty path");
    out = s;
  }

  void read_activation(const std::string& name, Activation& out) {
    std::string s;
    if (!has(name)) return;
    read(name, s);
    try {
      out = parse_activation(s);
    } catch (const ArgumentError& e) {
      throw ConfigError(key(name), e.what());
    }
  }

  void read_activations(const std::string& name, std::vector<Activation>& out) {
    std::vector<std::string> names;
    if (!has(name)) return;
    read(name, names);
    out.clear();
    for (const auto& s : names) {
      try {
        out.push_back(parse_activation(s));
      } catch (const ArgumentError& e) {
        throw ConfigError(key(name), e.what());
      }
    }
  }

  void read_modes(const std::string& name, std::vector<CorruptionMode>& out) {
    std::vector<std::string> names;
    if (!has(name)) return;
    read(name, names);
    out.clear();
    for (const auto& s : names) {
      try {
        out.push_back(parse_corruption_mode(s));
      } catch (const ArgumentError& e) {
        throw ConfigError(key(name), e.what());
      }
    }
  }

  Section child(const std::string& name) {
    seen_.insert(name);
    static const json empty = json::object();
    return Section(j_.contains(name) ? j_.at(name) : empty, key(name));
  }

  void finish() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
void require(bool ok, const std::string& key, T&& message) {
  if (!ok) throw ConfigError(key, std::forward<T>(message));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> names_of(const std::vector<Activation>& xs) {
  std::vector<std::string> out;
  for (auto a : xs) out.emplace_back(to_string(a));
  return out;
}

json opt_path(const std::optional<std::filesystem::path>& p) {
  return p ? json(p->string()) : json(nullptr);
}

}  // namespace

void RunConfig::validate() const {
  const auto& d = data;
  const bool pair = d.images || d.labels;
  require(!pair || (d.images && d.labels), d.images ? "data.labels" : "data.images",
          "images and labels must be given together");
  if (!pair) {
    require(d.train_images.has_value(), "data.train_images",
            "missing dataset path (set data.images/data.labels or per-split files)");
    require(d.train_labels.has_value(), "data.train_labels", "missing dataset path");
    require(d.valid_images.has_value(), "data.valid_images", "missing dataset path");
    require(d.valid_labels.has_value(), "data.valid_labels", "missing dataset path");
    require(d.test_images.has_value() == d.test_labels.has_value(),
            d.test_images ? "data.test_labels" : "data.test_images",
            "test images and labels must be given together");
  }
  for (double f : d.split) require(f > 0.0, "data.split", "fractions must be positive");
  require(std::abs(d.split[0] + d.split[1] + d.split[2] - 1.0) <= 1e-9, "data.split",
          "fractions must sum to 1");
  require(d.n_classes >= 2, "data.n_classes", "need at least 2 classes");

  require(!stack.hidden_dims.empty(), "stack.hidden_dims", "must not be empty");
  for (auto h : stack.hidden_dims) require(h > 0, "stack.hidden_dims", "widths must be positive");
  require(stack.hidden_activation != Activation::Softmax, "stack.hidden_activation",
          "softmax is only an output activation");
  require(stack.corruption_level >= 0.0 && stack.corruption_level <= 1.0,
          "stack.corruption_level", "must lie in [0,1]");

  require(pretrain.learning_rate >= 0.0, "pretrain.learning_rate", "must be non-negative");
  require(pretrain.batch_size >= 1, "pretrain.batch_size", "must be at least 1");
  require(finetune.sgd.learning_rate >= 0.0, "finetune.learning_rate", "must be non-negative");
  require(finetune.sgd.batch_size >= 1, "finetune.batch_size", "must be at least 1");
  require(finetune.patience >= 1, "finetune.patience", "must be at least 1");
  require(finetune.min_delta >= 0.0, "finetune.min_delta", "must be non-negative");

  try {
    grid_spec(*this).validate();
  } catch (const ArgumentError& e) {
    throw ConfigError("grid", e.what());
  }

  static const std::set<std::string> known_models{
      "logistic_regression", "decision_tree", "knn",         "nearest_centroid",
      "gaussian_nb",         "multinomial_nb", "bernoulli_nb", "svm",
      "svm_linear",          "svm_rbf",        "svm_sigmoid",  "single_hidden_net"};
  for (const auto& m : baselines.models) {
    require(known_models.count(m) > 0, "baselines.models", "unknown model '" + m + "'");
  }
  require(baselines.knn_k >= 1, "baselines.knn_k", "must be at least 1");
  require(baselines.batch_size >= 1, "baselines.batch_size", "must be at least 1");
  require(baselines.hidden >= 1, "baselines.hidden", "must be at least 1");
  require(workers >= 1, "workers", "must be at least 1");
}

RunConfig parse_config(const json& j) {
  RunConfig c;
  Section root(j, "");
  root.read("seed", c.seed);
  {
    std::string out;
    root.read("out", out);
    if (!out.empty()) c.out = out;
  }
  root.read("workers", c.workers);

  auto d = root.child("data");
  d.read_path("images", c.data.images);
  d.read_path("labels", c.data.labels);
  d.read_path("train_images", c.data.train_images);
  d.read_path("train_labels", c.data.train_labels);
  d.read_path("valid_images", c.data.valid_images);
  d.read_path("valid_labels", c.data.valid_labels);
  d.read_path("test_images", c.data.test_images);
  d.read_path("test_labels", c.data.test_labels);
  d.read("split", c.data.split);
  d.read("n_classes", c.data.n_classes);
  d.finish();

  auto s = root.child("stack");
  s.read("hidden_dims", c.stack.hidden_dims);
  s.read_activation("hidden_activation", c.stack.hidden_activation);
  s.read("corruption_level", c.stack.corruption_level);
  if (s.has("corruption_mode")) {
    std::string m;
    s.read("corruption_mode", m);
    try {
      c.stack.corruption_mode = parse_corruption_mode(m);
    } catch (const ArgumentError& e) {
      throw ConfigError("stack.corruption_mode", e.what());
    }
  }
  s.finish();

  auto p = root.child("pretrain");
  p.read("learning_rate", c.pretrain.learning_rate);
  p.read("batch_size", c.pretrain.batch_size);
  p.read("epochs", c.pretrain.epochs);
  p.finish();

  auto f = root.child("finetune");
  f.read("learning_rate", c.finetune.sgd.learning_rate);
  f.read("batch_size", c.finetune.sgd.batch_size);
  f.read("epochs", c.finetune.sgd.epochs);
  f.read("patience", c.finetune.patience);
  f.read("min_delta", c.finetune.min_delta);
  f.finish();

  auto g = root.child("grid");
  g.read_activations("activations", c.grid.activations);
  g.read("layer_counts", c.grid.layer_counts);
  g.read("neuron_counts", c.grid.neuron_counts);
  g.read("corruption_levels", c.grid.corruption_levels);
  g.read_modes("corruption_modes", c.grid.corruption_modes);
  if (g.has("wall_time_budget_s")) {
    double b = 0.0;
    g.read("wall_time_budget_s", b);
    c.grid.wall_time_budget_s = b;
  }
  g.finish();

  auto b = root.child("baselines");
  b.read("models", c.baselines.models);
  b.read("knn_k", c.baselines.knn_k);
  b.read("learning_rate", c.baselines.learning_rate);
  b.read("batch_size", c.baselines.batch_size);
  b.read("epochs", c.baselines.epochs);
  b.read("hidden", c.baselines.hidden);
  b.read_activation("hidden_activation", c.baselines.hidden_activation);
  b.finish();

  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  std::vector<std::string> modes;
  for (auto m : c.grid.corruption_modes) modes.emplace_back(to_string(m));
  return json{
      {"seed", c.seed},
      {"out", c.out.string()},
      {"workers", c.workers},
      {"data",
       {{"images", opt_path(c.data.images)},
        {"labels", opt_path(c.data.labels)},
        {"train_images", opt_path(c.data.train_images)},
        {"train_labels", opt_path(c.data.train_labels)},
        {"valid_images", opt_path(c.data.valid_images)},
        {"valid_labels", opt_path(c.data.valid_labels)},
        {"test_images", opt_path(c.data.test_images)},
        {"test_labels", opt_path(c.data.test_labels)},
        {"split", c.data.split},
        {"n_classes", c.data.n_classes}}},
      {"stack",
       {{"hidden_dims", c.stack.hidden_dims},
        {"hidden_activation", to_string(c.stack.hidden_activation)},
        {"corruption_level", c.stack.corruption_level},
        {"corruption_mode", to_string(c.stack.corruption_mode)}}},
      {"pretrain",
       {{"learning_rate", c.pretrain.learning_rate},
        {"batch_size", c.pretrain.batch_size},
        {"epochs", c.pretrain.epochs}}},
      {"finetune",
       {{"learning_rate", c.finetune.sgd.learning_rate},
        {"batch_size", c.finetune.sgd.batch_size},
        {"epochs", c.finetune.sgd.epochs},
        {"patience", c.finetune.patience},
        {"min_delta", c.finetune.min_delta}}},
      {"grid",
       {{"activations", names_of(c.grid.activations)},
        {"layer_counts", c.grid.layer_counts},
        {"neuron_counts", c.grid.neuron_counts},
        {"corruption_levels", c.grid.corruption_levels},
        {"corruption_modes", modes},
        {"wall_time_budget_s",
         c.grid.wall_time_budget_s ? json(*c.grid.wall_time_budget_s) : json(nullptr)}}},
      {"baselines",
       {{"models", c.baselines.models},
        {"knn_k", c.baselines.knn_k},
        {"learning_rate", c.baselines.learning_rate},
        {"batch_size", c.baselines.batch_size},
        {"epochs", c.baselines.epochs},
        {"hidden", c.baselines.hidden},
        {"hidden_activation", to_string(c.baselines.hidden_activation)}}},
  };
}

std::string fnv1a_hex(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

std::string config_digest(const RunConfig& c) {
  json j = to_json(c);
  j.erase("out");
  j.erase("workers");
  return fnv1a_hex(j.dump());
}

StageSeeds stage_seeds(std::uint64_t seed) noexcept {
  return {derive_seed(seed, 11), derive_seed(seed, 12), derive_seed(seed, 13),
          derive_seed(seed, 14), derive_seed(seed, 15), derive_seed(seed, 16)};
}

StackSpec stack_spec(const RunConfig& c, std::size_t input_dim) {
  const auto seeds = stage_seeds(c.seed);
  return StackSpec{input_dim,
                   c.stack.hidden_dims,
                   c.stack.hidden_activation,
                   c.data.n_classes,
                   {c.stack.corruption_level, seeds.corruption},
                   c.stack.corruption_mode};
}

GridSpec grid_spec(const RunConfig& c) {
  GridSpec g;
  g.activations = c.grid.activations;
  g.layer_counts = c.grid.layer_counts;
  g.neuron_counts = c.grid.neuron_counts;
  g.corruption_levels = c.grid.corruption_levels;
  g.corruption_modes = c.grid.corruption_modes;
  g.base_seed = c.seed;
  g.pretrain = c.pretrain;
  g.finetune = c.finetune;
  g.wall_time_budget_s = c.grid.wall_time_budget_s;
  return g;
}

std::vector<BaselineSpec> baseline_specs(const RunConfig& c) {
  const auto seeds = stage_seeds(c.seed);
  const SgdConfig lr_sgd{c.baselines.learning_rate, c.baselines.batch_size, c.baselines.epochs,
                         derive_seed(seeds.baselines, 1)};
  const SgdConfig ann_sgd{c.baselines.learning_rate, c.baselines.batch_size, c.baselines.epochs,
                          derive_seed(seeds.baselines, 2)};
  std::vector<BaselineSpec> out;
  for (const auto& m : c.baselines.models) {
    if (m == "logistic_regression") out.push_back(baseline::LogisticRegressionSpec{lr_sgd});
    else if (m == "decision_tree") out.push_back(baseline::NotImplementedSpec{"Decision Tree"});
    else if (m == "knn") out.push_back(baseline::KNearestSpec{c.baselines.knn_k});
    else if (m == "nearest_centroid") out.push_back(baseline::NearestCentroidSpec{});
    else if (m == "gaussian_nb") out.push_back(baseline::GaussianNBSpec{});
    else if (m == "multinomial_nb") out.push_back(baseline::MultinomialNBSpec{});
    else if (m == "bernoulli_nb") out.push_back(baseline::BernoulliNBSpec{});
    else if (m == "svm") out.push_back(baseline::NotImplementedSpec{"Support Vector Machine (SVM)"});
    else if (m == "svm_linear") out.push_back(baseline::NotImplementedSpec{"SVM with Linear Kernel"});
    else if (m == "svm_rbf") out.push_back(baseline::NotImplementedSpec{"SVM with RBF Kernel"});
    else if (m == "svm_sigmoid") out.push_back(baseline::NotImplementedSpec{"SVM with Sigmoid Kernel"});
    else if (m == "single_hidden_net")
      out.push_back(baseline::SingleHiddenNetSpec{c.baselines.hidden,
                                                  c.baselines.hidden_activation, ann_sgd});
    else throw ConfigError("baselines.models", "unknown model '" + m + "'");
  }
  return out;
}

Dataset load_dataset(const RunConfig& c) {
  c.validate();
  const auto& d = c.data;
  auto load_pair = [&](const std::filesystem::path& img, const std::filesystem::path& lab) {
    const auto images = read_idx_images(img);
    const auto labels = read_idx_labels(lab);
    try {
      return dataset_from_idx(images, labels, d.n_classes);
    } catch (const ArgumentError& e) {
      throw FormatError(lab.string() + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(img.string() + " / " + lab.string() + ": " + e.what());
    }
  };
  if (d.images) {
    return split(load_pair(*d.images, *d.labels), d.split, stage_seeds(c.seed).split);
  }
  const Dataset train = load_pair(*d.train_images, *d.train_labels);
  const Dataset valid = load_pair(*d.valid_images, *d.valid_labels);
  const Dataset test = d.test_images ? load_pair(*d.test_images, *d.test_labels)
                                     : Dataset(Matrix(0, train.dim()), {}, d.n_classes);
  return join_splits(train, valid, test);
}

}  // namespace sdae::app
