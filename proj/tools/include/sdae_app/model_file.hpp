#pragma once

// Self-describing model file:
//
//   SDAE-MODEL 1\n
//   <decimal header byte count>\n
//   <JSON header: kind, specs, metadata, tensor table with byte offsets>
//   <parameter block: little-endian IEEE-754 doubles>
//
// The header lists every tensor as {name, rows, cols, offset, bytes}, with
// offsets relative to the start of the parameter block, plus an FNV-1a 64
// checksum of the block.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "sdae/autoencoder.hpp"
#include "sdae/sda.hpp"

namespace sdae::app {

inline constexpr int kModelFormatVersion = 1;

struct NetFile {
  SupervisedNet net;
  std::optional<StackSpec> spec;
  nlohmann::json metadata = nlohmann::json::object();
};

struct StackFile {
  StackSpec spec;
  std::vector<DenoisingAutoencoder> das;
  nlohmann::json metadata = nlohmann::json::object();
};

std::vector<std::uint8_t> encode_net(const NetFile& file);
std::vector<std::uint8_t> encode_stack(const StackFile& file);

// Throw FormatError on anything malformed, truncated, or failing the checksum.
NetFile decode_net(std::span<const std::uint8_t> bytes);
StackFile decode_stack(std::span<const std::uint8_t> bytes);

// "supervised_net" or "da_stack".
std::string model_kind(std::span<const std::uint8_t> bytes);

void save_net(const std::filesystem::path& path, const NetFile& file);
void save_stack(const std::filesystem::path& path, const StackFile& file);
NetFile load_net(const std::filesystem::path& path);
StackFile load_stack(const std::filesystem::path& path);

// The parameter block alone, for byte-level comparisons.
std::vector<std::uint8_t> parameter_block(std::span<const std::uint8_t> bytes);

}  // namespace sdae::app
