#include "sdae_app/model_file.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <map>
#include <string>

#include "sdae/data.hpp"
#include "sdae/error.hpp"

namespace sdae::app {
namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "SDAE-MODEL ";

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class BlockWriter {
 public:
  void add(const std::string& name, std::size_t rows, std::size_t cols,
           std::span<const double> values) {
    table_.push_back({{"name", name},
                      {"rows", rows},
                      {"cols", cols},
                      {"offset", bytes_.size()},
                      {"bytes", values.size() * 8}});
    for (double v : values) {
      auto u = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
  }
  const json& table() const { return table_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  json table_ = json::array();
  std::vector<std::uint8_t> bytes_;
};

class BlockReader {
 public:
  BlockReader(const json& table, std::span<const std::uint8_t> block) : block_(block) {
    if (!table.is_array()) throw FormatError("model file: tensor table is not an array");
    for (const auto& t : table) by_name_[t.at("name").get<std::string>()] = &t;
  }

  Matrix matrix(const std::string& name) const {
    const json& t = entry(name);
    const auto rows = t.at("rows").get<std::size_t>();
    const auto cols = t.at("cols").get<std::size_t>();
    return Matrix(rows, cols, values(t, rows * cols, name));
  }

  Vector vector(const std::string& name) const {
    const json& t = entry(name);
    const auto rows = t.at("rows").get<std::size_t>();
    if (t.at("cols").get<std::size_t>() != 1) {
      throw FormatError("model file: tensor " + name + " is not a column");
    }
    return Vector(values(t, rows, name));
  }

 private:
  const json& entry(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw FormatError("model file: missing tensor " + name);
    return *it->second;
  }

  std::vector<double> values(const json& t, std::size_t count, const std::string& name) const {
    const auto offset = t.at("offset").get<std::size_t>();
    const auto bytes = t.at("bytes").get<std::size_t>();
    if (bytes != count * 8 || offset > block_.size() || block_.size() - offset < bytes) {
      throw FormatError("model file: tensor " + name + " lies outside the parameter block");
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::uint64_t u = 0;
      for (int b = 0; b < 8; ++b) u |= std::uint64_t{block_[offset + 8 * i + b]} << (8 * b);
      out[i] = std::bit_cast<double>(u);
    }
    return out;
  }

  std::span<const std::uint8_t> block_;
  std::map<std::string, const json*> by_name_;
};

json spec_json(const StackSpec& s) {
  return {{"input_dim", s.input_dim},
          {"hidden_dims", s.hidden_dims},
          {"hidden_activation", to_string(s.hidden_activation)},
          {"n_classes", s.n_classes},
          {"corruption_level", s.corruption.level},
          {"corruption_seed", s.corruption.seed},
          {"corruption_mode", to_string(s.corruption_mode)}};
}

StackSpec spec_from(const json& j) {
  StackSpec s;
  s.input_dim = j.at("input_dim").get<std::size_t>();
  s.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  s.hidden_activation = parse_activation(j.at("hidden_activation").get<std::string>());
  s.n_classes = j.at("n_classes").get<std::size_t>();
  s.corruption.level = j.at("corruption_level").get<double>();
  s.corruption.seed = j.at("corruption_seed").get<std::uint64_t>();
  s.corruption_mode = parse_corruption_mode(j.at("corruption_mode").get<std::string>());
  return s;
}

std::vector<std::uint8_t> assemble(json header, const BlockWriter& block) {
  header["format_version"] = kModelFormatVersion;
  header["tensors"] = block.table();
  header["payload_bytes"] = block.bytes().size();
  header["payload_fnv1a64"] = hex64(fnv1a(block.bytes()));
  const std::string text = header.dump(2);
  std::string preamble = std::string(kMagic) + std::to_string(kModelFormatVersion) + "\n" +
                         std::to_string(text.size()) + "\n";
  std::vector<std::uint8_t> out(preamble.begin(), preamble.end());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), block.bytes().begin(), block.bytes().end());
  return out;
}

struct Parsed {
  json header;
  std::span<const std::uint8_t> block;
};

std::string read_line(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  std::string line;
  while (pos < bytes.size() && bytes[pos] != '\n') {
    line.push_back(static_cast<char>(bytes[pos++]));
    if (line.size() > 64) throw FormatError("model file: preamble line too long");
  }
  if (pos >= bytes.size()) throw FormatError("model file: truncated preamble");
  ++pos;
  return line;
}

Parsed parse(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  const std::string first = read_line(bytes, pos);
  if (first.rfind(kMagic, 0) != 0) throw FormatError("model file: bad magic line");
  if (first.substr(kMagic.size()) != std::to_string(kModelFormatVersion)) {
    throw FormatError("model file: unsupported format version '" + first.substr(kMagic.size()) +
                      "'");
  }
  const std::string len_text = read_line(bytes, pos);
  std::size_t header_len = 0;
  try {
    std::size_t used = 0;
    header_len = std::stoull(len_text, &used);
    if (used != len_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw FormatError("model file: bad header length '" + len_text + "'");
  }
  if (bytes.size() - pos < header_len) throw FormatError("model file: truncated header");
  Parsed p;
  try {
    p.header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                           bytes.begin() + static_cast<std::ptrdiff_t>(pos + header_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: header is not valid JSON: ") + e.what());
  }
  pos += header_len;
  p.block = bytes.subspan(pos);
  try {
    if (p.header.at("format_version").get<int>() != kModelFormatVersion) {
      throw FormatError("model file: header format version mismatch");
    }
    const auto expected = p.header.at("payload_bytes").get<std::size_t>();
    if (p.block.size() != expected) {
      throw FormatError("model file: parameter block is " + std::to_string(p.block.size()) +
                        " bytes, header declares " + std::to_string(expected));
    }
    if (p.header.at("payload_fnv1a64").get<std::string>() != hex64(fnv1a(p.block))) {
      throw FormatError("model file: parameter block checksum mismatch");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: malformed header: ") + e.what());
  }
  return p;
}

// Wraps library errors raised while rebuilding objects from a parsed file.
template <typename F>
auto rebuild(F&& f) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model file: malformed header: ") + e.what());
  } catch (const std::exception& e) {
    throw FormatError(std::string("model file: inconsistent contents: ") + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> encode_net(const NetFile& file) {
  file.net.validate();
  BlockWriter block;
  json layers = json::array();
  for (std::size_t l = 0; l < file.net.layers.size(); ++l) {
    const auto& layer = file.net.layers[l];
    const std::string base = "layers/" + std::to_string(l);
    block.add(base + "/weights", layer.weights.rows(), layer.weights.cols(), layer.weights.span());
    block.add(base + "/bias", layer.bias.size(), 1, layer.bias.span());
    layers.push_back({{"activation", to_string(layer.activation)}});
  }
  json header{{"kind", "supervised_net"},
              {"layers", layers},
              {"spec", file.spec ? spec_json(*file.spec) : json(nullptr)},
              {"metadata", file.metadata}};
  return assemble(std::move(header), block);
}

std::vector<std::uint8_t> encode_stack(const StackFile& file) {
  file.spec.validate();
  BlockWriter block;
  json das = json::array();
  for (std::size_t k = 0; k < file.das.size(); ++k) {
    const auto& da = file.das[k];
    da.validate();
    const std::string base = "das/" + std::to_string(k);
    block.add(base + "/encoder_weights", da.encoder.weights.rows(), da.encoder.weights.cols(),
              da.encoder.weights.span());
    block.add(base + "/encoder_bias", da.encoder.bias.size(), 1, da.encoder.bias.span());
    block.add(base + "/decoder_bias", da.decoder_bias.size(), 1, da.decoder_bias.span());
    das.push_back({{"encoder_activation", to_string(da.encoder.activation)},
                   {"decoder_activation", to_string(da.decoder_activation)},
                   {"corruption_level", da.corruption.level},
                   {"corruption_seed", da.corruption.seed}});
  }
  json header{{"kind", "da_stack"},
              {"das", das},
              {"spec", spec_json(file.spec)},
              {"metadata", file.metadata}};
  return assemble(std::move(header), block);
}

std::string model_kind(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  return rebuild([&] { return p.header.at("kind").get<std::string>(); });
}

NetFile decode_net(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  return rebuild([&] {
    if (p.header.at("kind") != "supervised_net") {
      throw FormatError("model file holds a " + p.header.at("kind").get<std::string>() +
                        ", expected supervised_net");
    }
    BlockReader reader(p.header.at("tensors"), p.block);
    NetFile out;
    const auto& layers = p.header.at("layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string base = "layers/" + std::to_string(l);
      out.net.layers.push_back(
          {reader.matrix(base + "/weights"), reader.vector(base + "/bias"),
           parse_activation(layers[l].at("activation").get<std::string>())});
    }
    out.net.validate();
    if (!p.header.at("spec").is_null()) out.spec = spec_from(p.header.at("spec"));
    out.metadata = p.header.at("metadata");
    return out;
  });
}

StackFile decode_stack(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  return rebuild([&] {
    if (p.header.at("kind") != "da_stack") {
      throw FormatError("model file holds a " + p.header.at("kind").get<std::string>() +
                        ", expected da_stack");
    }
    BlockReader reader(p.header.at("tensors"), p.block);
    StackFile out;
    out.spec = spec_from(p.header.at("spec"));
    const auto& das = p.header.at("das");
    for (std::size_t k = 0; k < das.size(); ++k) {
      const std::string base = "das/" + std::to_string(k);
      DenoisingAutoencoder da{
          {reader.matrix(base + "/encoder_weights"), reader.vector(base + "/encoder_bias"),
           parse_activation(das[k].at("encoder_activation").get<std::string>())},
          reader.vector(base + "/decoder_bias"),
          parse_activation(das[k].at("decoder_activation").get<std::string>()),
          {das[k].at("corruption_level").get<double>(),
           das[k].at("corruption_seed").get<std::uint64_t>()}};
      da.validate();
      out.das.push_back(std::move(da));
    }
    out.metadata = p.header.at("metadata");
    return out;
  });
}

std::vector<std::uint8_t> parameter_block(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  return {p.block.begin(), p.block.end()};
}

void save_net(const std::filesystem::path& path, const NetFile& file) {
  write_bytes(path, encode_net(file));
}

void save_stack(const std::filesystem::path& path, const StackFile& file) {
  write_bytes(path, encode_stack(file));
}

NetFile load_net(const std::filesystem::path& path) {
  try {
    return decode_net(read_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

StackFile load_stack(const std::filesystem::path& path) {
  try {
    return decode_stack(read_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace sdae::app
