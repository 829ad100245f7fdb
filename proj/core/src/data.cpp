#include "sdae/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "sdae/error.hpp"
#include "sdae/rng.hpp"

namespace sdae {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += digits[(v >> shift) & 0xf];
  return s;
}

void check_magic(std::span<const std::uint8_t> bytes, std::uint32_t expected, std::size_t header) {
  if (bytes.size() < 4) {
    throw FormatError("IDX: file is " + std::to_string(bytes.size()) +
                      " bytes, too short for a magic number");
  }
  const std::uint32_t found = read_be32(bytes, 0);
  if (found != expected) {
    throw FormatError("IDX: bad magic number, expected " + hex32(expected) + " found " +
                      hex32(found));
  }
  if (bytes.size() < header) {
    throw FormatError("IDX: header needs " + std::to_string(header) + " bytes, file has " +
                      std::to_string(bytes.size()));
  }
}

void check_payload(std::size_t expected, std::size_t available) {
  if (expected != available) {
    throw FormatError("IDX: header declares " + std::to_string(expected) +
                      " payload bytes but " + std::to_string(available) + " follow");
  }
}

}  // namespace

IdxImages parse_idx_images(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxImageMagic, 16);
  IdxImages img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  const std::size_t expected = std::size_t{img.count} * img.rows * img.cols;
  check_payload(expected, bytes.size() - 16);
  img.pixels.assign(bytes.begin() + 16, bytes.end());
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  check_magic(bytes, kIdxLabelMagic, 8);
  const std::uint32_t count = read_be32(bytes, 4);
  check_payload(count, bytes.size() - 8);
  return {bytes.begin() + 8, bytes.end()};
}

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images) {
  if (images.pixels.size() != std::size_t{images.count} * images.rows * images.cols) {
    throw ShapeError("IDX images: pixel count does not match dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  write_be32(out, kIdxImageMagic);
  write_be32(out, images.count);
  write_be32(out, images.rows);
  write_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path.string());
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  try {
    return parse_idx_images(read_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  try {
    return parse_idx_labels(read_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Matrix normalize(std::span<const std::uint8_t> pixels, std::size_t dim) {
  if (dim == 0) {
    if (!pixels.empty()) throw ShapeError("normalize: zero dimension with non-empty payload");
    return Matrix();
  }
  if (pixels.size() % dim != 0) {
    throw ShapeError("normalize: " + std::to_string(pixels.size()) +
                     " bytes is not a multiple of dimension " + std::to_string(dim));
  }
  std::vector<double> v(pixels.size());
  std::transform(pixels.begin(), pixels.end(), v.begin(),
                 [](std::uint8_t p) { return static_cast<double>(p) / 255.0; });
  return Matrix(pixels.size() / dim, dim, std::move(v));
}

const char* to_string(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Valid: return "valid";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  for (auto s : {Split::Train, Split::Valid, Split::Test}) {
    if (name == to_string(s)) return s;
  }
  throw ArgumentError("unknown split '" + std::string(name) + "'");
}

void LabeledSet::validate() const {
  if (inputs.rows() != labels.size()) {
    throw ShapeError("labeled set: " + std::to_string(inputs.rows()) + " inputs but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (auto y : labels) {
    if (y >= n_classes) {
      throw ArgumentError("label " + std::to_string(y) + " outside [0, " +
                          std::to_string(n_classes) + ")");
    }
  }
}

Dataset::Dataset(Matrix samples, std::vector<std::size_t> labels, std::size_t n_classes)
    : Dataset(std::move(samples), labels, n_classes,
              std::vector<Split>(labels.size(), Split::Train)) {}

Dataset::Dataset(Matrix samples, std::vector<std::size_t> labels, std::size_t n_classes,
                 std::vector<Split> tags)
    : samples_(std::move(samples)),
      labels_(std::move(labels)),
      n_classes_(n_classes),
      tags_(std::move(tags)) {
  if (samples_.rows() != labels_.size() || tags_.size() != labels_.size()) {
    throw ShapeError("dataset: samples, labels and split tags must have equal length");
  }
  for (double v : samples_.span()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("dataset: sample component outside [0,1]");
  }
  for (auto y : labels_) {
    if (y >= n_classes_) {
      throw ArgumentError("dataset: label " + std::to_string(y) + " outside [0, " +
                          std::to_string(n_classes_) + ")");
    }
  }
}

std::vector<std::size_t> Dataset::indices(Split tag) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tags_.size(); ++i)
    if (tags_[i] == tag) out.push_back(i);
  return out;
}

std::size_t Dataset::count(Split tag) const {
  return static_cast<std::size_t>(std::count(tags_.begin(), tags_.end(), tag));
}

LabeledSet Dataset::subset(Split tag) const {
  const auto idx = indices(tag);
  LabeledSet out{gather_rows(samples_, idx), {}, n_classes_};
  out.labels.reserve(idx.size());
  for (auto i : idx) out.labels.push_back(labels_[i]);
  return out;
}

Dataset dataset_from_idx(const IdxImages& images, std::span<const std::uint8_t> labels,
                         std::size_t n_classes) {
  if (images.count != labels.size()) {
    throw FormatError("IDX: " + std::to_string(images.count) + " images but " +
                      std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> y(labels.begin(), labels.end());
  return Dataset(normalize(images.pixels, images.pixels_per_image()), std::move(y), n_classes);
}

Dataset join_splits(const Dataset& train, const Dataset& valid, const Dataset& test) {
  const std::size_t dim = train.dim();
  if (valid.dim() != dim || test.dim() != dim) throw ShapeError("splits differ in dimension");
  if (valid.n_classes() != train.n_classes() || test.n_classes() != train.n_classes()) {
    throw ArgumentError("splits differ in class count");
  }
  const std::size_t n = train.size() + valid.size() + test.size();
  std::vector<double> values;
  values.reserve(n * dim);
  std::vector<std::size_t> labels;
  std::vector<Split> tags;
  for (auto [part, tag] : {std::pair{&train, Split::Train}, std::pair{&valid, Split::Valid},
                           std::pair{&test, Split::Test}}) {
    values.insert(values.end(), part->samples().span().begin(), part->samples().span().end());
    labels.insert(labels.end(), part->labels().begin(), part->labels().end());
    tags.insert(tags.end(), part->size(), tag);
  }
  return Dataset(Matrix(n, dim, std::move(values)), std::move(labels), train.n_classes(),
                 std::move(tags));
}

Dataset split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions) {
    if (!(f > 0.0)) throw ArgumentError("split fractions must be positive");
  }
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ArgumentError("split fractions sum to " + std::to_string(sum) + ", expected 1");
  }
  const std::size_t n = ds.size();
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = fractions[i] * static_cast<double>(n);
    sizes[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(sizes[i]);
    assigned += sizes[i];
  }
  // Largest remainder first; ties to the earlier split.
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];

  Rng rng(seed);
  const auto perm = permutation(n, rng);
  std::vector<Split> tags(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    tags[perm[pos]] = pos < sizes[0]              ? Split::Train
                      : pos < sizes[0] + sizes[1] ? Split::Valid
                                                  : Split::Test;
  }
  return Dataset(ds.samples(), ds.labels(), ds.n_classes(), std::move(tags));
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch) {
  if (batch_size == 0) throw ArgumentError("batch_size must be at least 1");
  Rng rng(derive_seed(seed, epoch));
  const auto order = permutation(n, rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t stop = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return batches;
}

std::vector<std::vector<std::size_t>> minibatches(const Dataset& ds, Split tag,
                                                  std::size_t batch_size, std::uint64_t seed,
                                                  std::size_t epoch) {
  if (batch_size == 0) throw ArgumentError("batch_size must be at least 1");
  const auto idx = ds.indices(tag);
  if (idx.empty()) throw ArgumentError(std::string("no samples tagged ") + to_string(tag));
  auto batches = epoch_batches(idx.size(), batch_size, seed, epoch);
  for (auto& b : batches)
    for (auto& i : b) i = idx[i];
  return batches;
}

Dataset make_bars(std::size_t n, std::size_t dim, std::uint64_t seed, double noise) {
  if (dim < 2) throw ArgumentError("bars: need at least 2 dimensions");
  if (noise < 0.0 || noise > 1.0) throw ArgumentError("bars: noise must lie in [0,1]");
  Rng rng(seed);
  Matrix x(n, dim);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(rng.below(dim));
    labels[i] = c;
    for (std::size_t k = 0; k < dim; ++k) {
      x(i, k) = k == c ? 1.0 : (noise > 0.0 ? rng.uniform(0.0, noise) : 0.0);
    }
  }
  return Dataset(std::move(x), std::move(labels), dim);
}

IdxImages to_idx_images(const Matrix& samples, std::uint32_t rows, std::uint32_t cols) {
  if (std::size_t{rows} * cols != samples.cols()) {
    throw ShapeError("to_idx_images: rows*cols must equal the sample dimension");
  }
  IdxImages img{static_cast<std::uint32_t>(samples.rows()), rows, cols, {}};
  img.pixels.reserve(samples.size());
  for (double v : samples.span()) {
    img.pixels.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  return img;
}

}  // namespace sdae
