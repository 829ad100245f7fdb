#include "sdae/search.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <set>
#include <thread>
#include <tuple>

#include "sdae/error.hpp"
#include "sdae/rng.hpp"

namespace sdae {
namespace {

struct BudgetExceeded {
  std::size_t epoch;
};

template <typename T>
std::vector<T> sorted_unique(std::vector<T> xs) {
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_level(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string GridCell::id() const {
  return std::string(to_string(activation)) + "/L" + std::to_string(n_layers) + "/N" +
         std::to_string(n_neurons) + "/c" + format_level(corruption_level) + "/" +
         std::string(to_string(corruption_mode));
}

void GridSpec::validate() const {
  if (activations.empty() || layer_counts.empty() || neuron_counts.empty() ||
      corruption_levels.empty() || corruption_modes.empty()) {
    throw ArgumentError("grid: every parameter set must be non-empty");
  }
  for (auto a : activations) {
    if (a == Activation::Softmax) throw ArgumentError("grid: softmax is not a hidden activation");
  }
  for (auto n : layer_counts)
    if (n == 0) throw ArgumentError("grid: layer counts must be positive");
  for (auto n : neuron_counts)
    if (n == 0) throw ArgumentError("grid: neuron counts must be positive");
  for (auto c : corruption_levels) CorruptionSpec{c, 0}.validate();
  pretrain.validate();
  finetune.validate();
  if (wall_time_budget_s && !(*wall_time_budget_s > 0.0)) {
    throw ArgumentError("grid: wall_time_budget_s must be positive");
  }
}

const char* to_string(TrialStatus s) noexcept {
  switch (s) {
    case TrialStatus::Ok: return "ok";
    case TrialStatus::Failed: return "failed";
    case TrialStatus::BudgetExceeded: return "budget_exceeded";
  }
  return "?";
}

TrialStatus parse_trial_status(std::string_view name) {
  for (auto s : {TrialStatus::Ok, TrialStatus::Failed, TrialStatus::BudgetExceeded}) {
    if (name == to_string(s)) return s;
  }
  throw ArgumentError("unknown trial status '" + std::string(name) + "'");
}

bool TrialResult::same_outcome(const TrialResult& o) const {
  return cell == o.cell && seed == o.seed && status == o.status && message == o.message &&
         validation_error_pct == o.validation_error_pct && test_error_pct == o.test_error_pct &&
         epochs_ran == o.epochs_ran;
}

std::vector<GridCell> enumerate_cells(const GridSpec& spec) {
  spec.validate();
  std::vector<GridCell> cells;
  for (auto act : sorted_unique(spec.activations))
    for (auto layers : sorted_unique(spec.layer_counts))
      for (auto neurons : sorted_unique(spec.neuron_counts))
        for (auto level : sorted_unique(spec.corruption_levels))
          for (auto mode : sorted_unique(spec.corruption_modes))
            cells.push_back({act, layers, neurons, level, mode});
  return cells;
}

std::uint64_t cell_seed(std::uint64_t base_seed, const GridCell& cell) {
  return derive_seed(base_seed, fnv1a(cell.id()));
}

TrialResult run_cell(const GridSpec& spec, const GridCell& cell, const Dataset& data) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  TrialResult r{cell, cell_seed(spec.base_seed, cell), TrialStatus::Ok, {}, 0.0, std::nullopt,
                0, 0.0};
  std::size_t finetune_epochs = 0;
  try {
    const LabeledSet train = data.subset(Split::Train);
    const LabeledSet valid = data.subset(Split::Valid);
    if (train.size() == 0 || valid.size() == 0) {
      throw ArgumentError("grid cell needs Train and Valid samples");
    }
    StackSpec stack{data.dim(),
                    std::vector<std::size_t>(cell.n_layers, cell.n_neurons),
                    cell.activation,
                    data.n_classes(),
                    {cell.corruption_level, derive_seed(r.seed, 1)},
                    cell.corruption_mode};
    SgdConfig pre = spec.pretrain;
    pre.seed = derive_seed(r.seed, 2);
    FinetuneConfig fine = spec.finetune;
    fine.sgd.seed = derive_seed(r.seed, 4);

    EpochCallback guard;
    if (spec.wall_time_budget_s) {
      const auto deadline =
          start + std::chrono::duration_cast<clock::duration>(
                      std::chrono::duration<double>(*spec.wall_time_budget_s));
      guard = [deadline, &finetune_epochs](std::string_view phase, std::size_t epoch) {
        if (phase == "finetune") finetune_epochs = epoch;
        if (clock::now() > deadline) throw BudgetExceeded{epoch};
      };
    }

    const Pretraining stackwise = pretrain(stack, train.inputs, pre, guard);
    Rng head(derive_seed(r.seed, 3));
    const SupervisedNet net = unroll(stackwise.das, stack, head);
    const Finetuning tuned = finetune(net, train, valid, fine, guard);
    r.validation_error_pct = 100.0 * tuned.best_valid_error;
    r.epochs_ran = tuned.epochs_ran();
    if (data.count(Split::Test) > 0) {
      r.test_error_pct = 100.0 * evaluate(tuned.net, data.subset(Split::Test)).error_rate;
    }
  } catch (const BudgetExceeded&) {
    r.status = TrialStatus::BudgetExceeded;
    r.message = "wall-time budget exceeded";
    r.epochs_ran = finetune_epochs;
  } catch (const std::exception& e) {
    r.status = TrialStatus::Failed;
    r.message = e.what();
    r.epochs_ran = finetune_epochs;
  }
  r.wall_time_s = std::chrono::duration<double>(clock::now() - start).count();
  return r;
}

std::vector<TrialResult> run_grid(const GridSpec& spec, const Dataset& data, std::size_t workers) {
  const auto cells = enumerate_cells(spec);
  std::vector<TrialResult> ledger(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      ledger[i] = run_cell(spec, cells[i], data);
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(cells.size(), 1));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return ledger;
}

TrialResult select_best(std::span<const TrialResult> ledger) {
  const TrialResult* best = nullptr;
  auto key = [](const TrialResult& t) {
    return std::make_tuple(t.validation_error_pct, t.cell.n_layers, t.cell.n_neurons, t.seed,
                           t.cell.id());
  };
  for (const auto& t : ledger) {
    if (t.status != TrialStatus::Ok) continue;
    if (!best || key(t) < key(*best)) best = &t;
  }
  if (!best) throw ArgumentError("select_best: no successful grid cell");
  return *best;
}

Fig3Table emit_fig3_table(std::span<const TrialResult> ledger, std::optional<std::size_t> n_neurons,
                          std::span<const Activation> activations,
                          std::span<const std::size_t> layer_counts) {
  if (!n_neurons) {
    std::set<std::size_t> widths;
    for (const auto& t : ledger) widths.insert(t.cell.n_neurons);
    if (widths.size() != 1) {
      throw ArgumentError("fig3 table: ledger has " + std::to_string(widths.size()) +
                          " hidden widths; choose one");
    }
    n_neurons = *widths.begin();
  }
  Fig3Table table;
  table.n_neurons = *n_neurons;
  if (activations.empty()) {
    for (const auto& t : ledger) table.activations.push_back(t.cell.activation);
  } else {
    table.activations.assign(activations.begin(), activations.end());
  }
  if (layer_counts.empty()) {
    for (const auto& t : ledger) table.layer_counts.push_back(t.cell.n_layers);
  } else {
    table.layer_counts.assign(layer_counts.begin(), layer_counts.end());
  }
  table.activations = sorted_unique(std::move(table.activations));
  table.layer_counts = sorted_unique(std::move(table.layer_counts));

  table.error_pct.assign(table.activations.size(),
                         std::vector<std::optional<double>>(table.layer_counts.size()));
  for (std::size_t r = 0; r < table.activations.size(); ++r) {
    for (std::size_t c = 0; c < table.layer_counts.size(); ++c) {
      auto& entry = table.error_pct[r][c];
      for (const auto& t : ledger) {
        if (t.status != TrialStatus::Ok || t.cell.activation != table.activations[r] ||
            t.cell.n_layers != table.layer_counts[c] || t.cell.n_neurons != *n_neurons) {
          continue;
        }
        if (!entry || t.validation_error_pct < *entry) entry = t.validation_error_pct;
      }
      if (!entry) {
        table.missing.push_back(std::string(to_string(table.activations[r])) + "/L" +
                                std::to_string(table.layer_counts[c]));
      }
    }
  }
  return table;
}

}  // namespace sdae
