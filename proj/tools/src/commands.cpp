#include "sdae_app/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "sdae/error.hpp"
#include "sdae_app/model_file.hpp"
#include "sdae_app/report.hpp"

namespace sdae::app {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path prepare_out(const RunConfig& cfg) {
  fs::create_directories(cfg.out);
  return cfg.out;
}

// Timestamps and wall times go here, never into the reproducible artefacts.
void write_run_metadata(const fs::path& dir, const std::string& command, double seconds) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const json meta{{"command", command}, {"finished_utc", stamp}, {"wall_time_s", seconds}};
  write_text(dir / ("run_metadata_" + command + ".json"), meta.dump(2) + "\n");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json sgd_json(const SgdConfig& s) {
  return {{"learning_rate", s.learning_rate},
          {"batch_size", s.batch_size},
          {"epochs", s.epochs},
          {"seed", s.seed}};
}

EpochCallback progress(std::ostream& log) {
  return [&log](std::string_view phase, std::size_t epoch) {
    log << "  " << phase << " epoch " << epoch << "\n" << std::flush;
  };
}

void require_dim(std::size_t model_dim, std::size_t data_dim) {
  if (model_dim != data_dim) {
    throw ShapeError("model expects inputs of length " + std::to_string(model_dim) +
                     " but the dataset has " + std::to_string(data_dim));
  }
}

}  // namespace

void cmd_pretrain(const RunConfig& cfg, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = prepare_out(cfg);
  const auto digest = config_digest(cfg);
  const auto seeds = stage_seeds(cfg.seed);
  const Dataset ds = load_dataset(cfg);
  const LabeledSet train = ds.subset(Split::Train);
  const StackSpec spec = stack_spec(cfg, ds.dim());
  SgdConfig sgd = cfg.pretrain;
  sgd.seed = seeds.pretrain;

  log << "pretraining " << spec.hidden_dims.size() << " layer(s) on " << train.size()
      << " samples\n";
  const Pretraining result = pretrain(spec, train.inputs, sgd, progress(log));

  StackFile file{spec, result.das, {{"config_digest", digest}, {"pretrain", sgd_json(sgd)}}};
  save_stack(dir / "pretrained.sdae", file);
  write_text(dir / "pretrain_loss.csv", pretrain_loss_csv(result.loss_traces, digest));
  for (std::size_t k = 0; k < result.loss_traces.size(); ++k) {
    const auto& t = result.loss_traces[k];
    if (t.empty()) continue;
    log << "layer " << k + 1 << ": loss " << format_double(t.front()) << " -> "
        << format_double(t.back()) << "\n";
  }
  write_run_metadata(dir, "pretrain", seconds_since(t0));
}

void cmd_finetune(const RunConfig& cfg, const std::string& pretrained, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = prepare_out(cfg);
  const auto digest = config_digest(cfg);
  const auto seeds = stage_seeds(cfg.seed);
  const Dataset ds = load_dataset(cfg);
  const StackSpec spec = stack_spec(cfg, ds.dim());
  Rng head(seeds.head);

  SupervisedNet net;
  if (pretrained == "none") {
    net = random_net(spec, head);
  } else {
    const StackFile stack = load_stack(pretrained);
    if (stack.das.size() != spec.hidden_dims.size()) {
      throw ShapeError("pretrained stack has " + std::to_string(stack.das.size()) +
                       " layers, config expects " + std::to_string(spec.hidden_dims.size()));
    }
    std::size_t dim = spec.input_dim;
    for (std::size_t k = 0; k < stack.das.size(); ++k) {
      const auto& da = stack.das[k];
      if (da.input_dim() != dim || da.code_dim() != spec.hidden_dims[k] ||
          da.encoder.activation != spec.hidden_activation) {
        throw ShapeError("layer " + std::to_string(k + 1) + ": pretrained " +
                         std::to_string(da.input_dim()) + "->" + std::to_string(da.code_dim()) +
                         " " + std::string(to_string(da.encoder.activation)) +
                         ", config expects " + std::to_string(dim) + "->" +
                         std::to_string(spec.hidden_dims[k]) + " " +
                         std::string(to_string(spec.hidden_activation)));
      }
      dim = da.code_dim();
    }
    net = unroll(stack.das, spec, head);
  }

  FinetuneConfig fine = cfg.finetune;
  fine.sgd.seed = seeds.finetune;
  const LabeledSet train = ds.subset(Split::Train);
  const LabeledSet valid = ds.subset(Split::Valid);
  log << "fine-tuning on " << train.size() << " samples, validating on " << valid.size() << "\n";
  const Finetuning result = finetune(std::move(net), train, valid, fine, progress(log));

  const std::string history = history_csv(result.history, digest);
  NetFile file{result.net, spec,
               {{"config_digest", digest},
                {"pretrained", pretrained == "none" ? "none" : "file"},
                {"finetune", sgd_json(fine.sgd)},
                {"patience", fine.patience},
                {"min_delta", fine.min_delta},
                {"best_epoch", result.best_epoch},
                {"epochs_ran", result.epochs_ran()},
                {"best_valid_error", result.best_valid_error},
                {"history_fnv1a64", fnv1a_hex(history)}}};
  save_net(dir / "model.sdae", file);
  write_text(dir / "finetune_history.csv", history);
  log << "best validation error " << format_double(100.0 * result.best_valid_error)
      << "% at epoch " << result.best_epoch << " of " << result.epochs_ran() << "\n";
  write_run_metadata(dir, "finetune", seconds_since(t0));
}

bool cmd_gridsearch(const RunConfig& cfg, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = prepare_out(cfg);
  const auto digest = config_digest(cfg);
  const Dataset ds = load_dataset(cfg);
  const GridSpec spec = grid_spec(cfg);
  log << "grid search over " << enumerate_cells(spec).size() << " cells with " << cfg.workers
      << " worker(s)\n";
  const auto ledger = run_grid(spec, ds, cfg.workers);

  write_text(dir / "ledger.csv", ledger_csv(ledger, digest));
  write_text(dir / "ledger.json", ledger_json(ledger, digest).dump(2) + "\n");
  write_text(dir / "ledger_timing.csv", ledger_timing_csv(ledger));

  std::set<std::size_t> widths(spec.neuron_counts.begin(), spec.neuron_counts.end());
  for (auto w : widths) {
    const Fig3Table table = emit_fig3_table(ledger, w, spec.activations, spec.layer_counts);
    const std::string name = widths.size() == 1 ? "fig3.csv" : "fig3_N" + std::to_string(w) + ".csv";
    write_text(dir / name, fig3_csv(table, digest));
    if (!table.complete()) {
      log << "width " << w << ": missing cells";
      for (const auto& m : table.missing) log << " " << m;
      log << "\n";
    }
  }

  for (const auto& t : ledger) {
    log << t.cell.id() << "  " << to_string(t.status) << "  "
        << (t.status == TrialStatus::Ok ? format_double(t.validation_error_pct) + "%" : t.message)
        << "\n";
  }
  write_run_metadata(dir, "gridsearch", seconds_since(t0));
  try {
    const TrialResult best = select_best(ledger);
    write_text(dir / "best.txt", best_cell_summary(best, digest));
    log << "best: " << best.cell.id() << " " << format_double(best.validation_error_pct) << "%\n";
    return true;
  } catch (const ArgumentError&) {
    log << "no grid cell finished successfully\n";
    return false;
  }
}

Evaluation cmd_eval(const RunConfig& cfg, const fs::path& model, Split split, std::ostream& log) {
  const auto dir = prepare_out(cfg);
  const auto digest = config_digest(cfg);
  const NetFile file = load_net(model);
  const Dataset ds = load_dataset(cfg);
  require_dim(file.net.input_dim(), ds.dim());
  const LabeledSet data = ds.subset(split);
  const Evaluation ev = evaluate(file.net, data);
  const std::string report = evaluation_report(ev, to_string(split), digest);
  write_text(dir / (std::string("eval_") + to_string(split) + ".txt"), report);
  write_text(dir / (std::string("confusion_") + to_string(split) + ".csv"), confusion_csv(ev, digest));
  log << report;
  return ev;
}

void cmd_baselines(const RunConfig& cfg, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = prepare_out(cfg);
  const auto digest = config_digest(cfg);
  const Dataset ds = load_dataset(cfg);
  const auto rows = run_baseline_suite(ds, baseline_specs(cfg));
  write_text(dir / "baselines.csv", baselines_csv(rows, digest));
  const std::string table = baselines_table(rows);
  write_text(dir / "baselines.txt", table);
  log << table;
  write_run_metadata(dir, "baselines", seconds_since(t0));
}

void cmd_make_bars(const fs::path& out, std::size_t n, std::size_t dim, std::uint64_t seed,
                   double noise, std::ostream& log) {
  fs::create_directories(out);
  const Dataset bars = make_bars(n, dim, seed, noise);
  const IdxImages images = to_idx_images(bars.samples(), 1, static_cast<std::uint32_t>(dim));
  std::vector<std::uint8_t> labels;
  for (auto y : bars.labels()) labels.push_back(static_cast<std::uint8_t>(y));
  write_bytes(out / "bars-images.idx3-ubyte", encode_idx_images(images));
  write_bytes(out / "bars-labels.idx1-ubyte", encode_idx_labels(labels));
  log << "wrote " << n << " bars samples of dimension " << dim << " to " << out.string() << "\n";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stacked denoising autoencoder toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> n_classes;
  std::map<std::string, std::string> paths;
  std::string pretrained;
  std::string model_path;
  std::string split_name = "valid";
  std::size_t bars_n = 256, bars_dim = 8;
  double bars_noise = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--seed", seed, "Master seed (overrides config)");
    sub->add_option("--out", out_dir, "Output directory (overrides config)");
    sub->add_option("--n-classes", n_classes, "Number of classes (overrides config)");
    for (const char* key : {"images", "labels", "train-images", "train-labels", "valid-images",
                            "valid-labels", "test-images", "test-labels"}) {
      sub->add_option(std::string("--") + key, paths[key], "IDX file path");
    }
  };

  auto* pre = app.add_subcommand("pretrain", "Greedy layer-wise denoising pre-training");
  common(pre);
  auto* fine = app.add_subcommand("finetune", "Supervised fine-tuning of the unrolled stack");
  common(fine);
  fine->add_option("--pretrained", pretrained, "Pre-trained stack file, or 'none'")->required();
  auto* grid = app.add_subcommand("gridsearch", "Activation x depth x width grid search");
  common(grid);
  grid->add_option("--workers", workers, "Parallel grid cells (results do not depend on it)");
  auto* eval = app.add_subcommand("eval", "Evaluate a saved model on one split");
  common(eval);
  eval->add_option("--model", model_path, "Model file")->required();
  eval->add_option("--split", split_name, "train, valid or test");
  auto* base = app.add_subcommand("baselines", "Classical comparison models");
  common(base);
  auto* bars = app.add_subcommand("make-bars", "Write a synthetic bars dataset as IDX files");
  bars->add_option("--out", out_dir, "Output directory")->required();
  bars->add_option("--n", bars_n, "Number of samples");
  bars->add_option("--dim", bars_dim, "Dimension (and class count)");
  bars->add_option("--noise", bars_noise, "Background noise amplitude in [0,1]");
  bars->add_option("--seed", seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (bars->parsed()) {
      cmd_make_bars(out_dir, bars_n, bars_dim, seed.value_or(0), bars_noise, out);
      return kExitOk;
    }

    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("--config", "cannot open " + config_path);
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("--config", config_path + ": " + e.what());
      }
      if (!j.is_object()) throw ConfigError("--config", "top level must be an object");
    }
    if (seed) j["seed"] = *seed;
    if (!out_dir.empty()) j["out"] = out_dir;
    if (workers) j["workers"] = *workers;
    if (n_classes) j["data"]["n_classes"] = *n_classes;
    for (const auto& [key, value] : paths) {
      if (value.empty()) continue;
      std::string k = key;
      std::replace(k.begin(), k.end(), '-', '_');
      j["data"][k] = value;
    }
    const RunConfig cfg = parse_config(j);

    if (pre->parsed()) cmd_pretrain(cfg, out);
    if (fine->parsed()) cmd_finetune(cfg, pretrained, out);
    if (grid->parsed() && !cmd_gridsearch(cfg, out)) return kExitNumeric;
    if (eval->parsed()) {
      Split split;
      try {
        split = parse_split(split_name);
      } catch (const ArgumentError& e) {
        throw ConfigError("--split", e.what());
      }
      cmd_eval(cfg, model_path, split, out);
    }
    if (base->parsed()) cmd_baselines(cfg, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ShapeError& e) {
    err << "shape mismatch: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "data format error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace sdae::app
