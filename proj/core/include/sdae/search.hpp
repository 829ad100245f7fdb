#pragma once

// Exhaustive grid search over hidden activation x depth x width (x corruption
// level x corruption mode). Every cell runs the full
// pretrain -> unroll -> finetune -> evaluate pipeline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdae/data.hpp"
#include "sdae/nn.hpp"
#include "sdae/sda.hpp"

namespace sdae {

struct GridCell {
  Activation activation = Activation::Sigmoid;
  std::size_t n_layers = 1;
  std::size_t n_neurons = 1;
  double corruption_level = 0.3;
  CorruptionMode corruption_mode = CorruptionMode::EveryLayer;

  // Stable textual key, e.g. "sigmoid/L4/N300/c0.3/every_layer".
  std::string id() const;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GridSpec {
  std::vector<Activation> activations{Activation::Sigmoid};
  std::vector<std::size_t> layer_counts{1};
  std::vector<std::size_t> neuron_counts{100};
  std::vector<double> corruption_levels{0.3};
  std::vector<CorruptionMode> corruption_modes{CorruptionMode::EveryLayer};
  std::uint64_t base_seed = 0;
  SgdConfig pretrain = default_pretrain_config();
  FinetuneConfig finetune;
  // Cells still running past this many seconds are abandoned and recorded as
  // budget-exceeded.
  std::optional<double> wall_time_budget_s;

  void validate() const;
};

enum class TrialStatus { Ok, Failed, BudgetExceeded };

const char* to_string(TrialStatus s) noexcept;
TrialStatus parse_trial_status(std::string_view name);

struct TrialResult {
  GridCell cell;
  std::uint64_t seed = 0;
  TrialStatus status = TrialStatus::Ok;
  std::string message;
  double validation_error_pct = 0.0;
  std::optional<double> test_error_pct;
  std::size_t epochs_ran = 0;
  double wall_time_s = 0.0;  // informational; never part of equality

  bool same_outcome(const TrialResult& other) const;
};

// Cells in canonical order: activation (enum order), then layers, neurons,
// corruption level (ascending) and mode. Duplicates are dropped.
std::vector<GridCell> enumerate_cells(const GridSpec& spec);

// Seed of a cell, a hash of the base seed and the cell id.
std::uint64_t cell_seed(std::uint64_t base_seed, const GridCell& cell);

// Runs one cell standalone. Never throws for training failures; they are
// reported through the status field.
TrialResult run_cell(const GridSpec& spec, const GridCell& cell, const Dataset& data);

// Ledger in canonical cell order. `workers` only changes wall time.
std::vector<TrialResult> run_grid(const GridSpec& spec, const Dataset& data,
                                  std::size_t workers = 1);

// Lowest validation error among successful cells; ties go to fewer layers,
// then fewer neurons, then the lower seed. Throws ArgumentError when no cell
// succeeded.
TrialResult select_best(std::span<const TrialResult> ledger);

struct Fig3Table {
  std::vector<Activation> activations;  // rows
  std::vector<std::size_t> layer_counts;  // columns
  std::size_t n_neurons = 0;
  std::vector<std::vector<std::optional<double>>> error_pct;  // [row][col]
  std::vector<std::string> missing;  // "activation/L<n>" of absent cells

  bool complete() const noexcept { return missing.empty(); }
};

// Activation x depth matrix of validation errors at one hidden width. With no
// width given the ledger must use exactly one. Entries with no successful
// trial are left empty and listed in `missing`. When several trials share a
// (activation, depth) pair, the lowest error is reported.
Fig3Table emit_fig3_table(std::span<const TrialResult> ledger,
                          std::optional<std::size_t> n_neurons = std::nullopt,
                          std::span<const Activation> activations = {},
                          std::span<const std::size_t> layer_counts = {});

}  // namespace sdae
