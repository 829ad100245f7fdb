#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sdae/baselines.hpp"
#include "sdae/sda.hpp"
#include "sdae/search.hpp"

namespace sdae::app {

// Shortest text that parses back to the same double ("%.17g").
std::string format_double(double v);

// RFC 4180 style: fields containing , " or newlines are quoted.
std::string csv_escape(std::string_view field);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// Table with a leading "# config_digest: <hex>" comment line.
std::string render_csv(const std::string& digest, const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);

std::string ledger_csv(std::span<const TrialResult> ledger, const std::string& digest);
std::vector<TrialResult> parse_ledger_csv(std::string_view text);
nlohmann::json ledger_json(std::span<const TrialResult> ledger, const std::string& digest);
// Wall times live apart from the ledger so ledgers stay byte-reproducible.
std::string ledger_timing_csv(std::span<const TrialResult> ledger);

std::string fig3_csv(const Fig3Table& table, const std::string& digest);
std::string best_cell_summary(const TrialResult& best, const std::string& digest);

std::string history_csv(std::span<const EpochRecord> history, const std::string& digest);
std::string pretrain_loss_csv(const std::vector<std::vector<double>>& traces,
                              const std::string& digest);

std::string evaluation_report(const Evaluation& ev, std::string_view split,
                              const std::string& digest);
std::string confusion_csv(const Evaluation& ev, const std::string& digest);

std::string baselines_csv(std::span<const BaselineRow> rows, const std::string& digest);
std::string baselines_table(std::span<const BaselineRow> rows);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace sdae::app
