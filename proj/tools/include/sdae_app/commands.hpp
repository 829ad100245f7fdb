#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sdae/data.hpp"
#include "sdae/sda.hpp"
#include "sdae_app/config.hpp"

namespace sdae::app {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
  kExitInternal = 5,
};

// Each command writes its artefacts into cfg.out (created if needed) and a
// short human summary to `log`. Errors propagate as exceptions; run() maps
// them to exit codes.
void cmd_pretrain(const RunConfig& cfg, std::ostream& log);
void cmd_finetune(const RunConfig& cfg, const std::string& pretrained, std::ostream& log);
// Returns false when no grid cell finished successfully.
bool cmd_gridsearch(const RunConfig& cfg, std::ostream& log);
Evaluation cmd_eval(const RunConfig& cfg, const std::filesystem::path& model, Split split,
                    std::ostream& log);
void cmd_baselines(const RunConfig& cfg, std::ostream& log);

// Writes a synthetic bars dataset as an IDX image/label pair (1 x dim images).
void cmd_make_bars(const std::filesystem::path& out, std::size_t n, std::size_t dim,
                   std::uint64_t seed, double noise, std::ostream& log);

// Full command-line entry point.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sdae::app
