#pragma once

// IDX ingestion, normalisation, deterministic splits and minibatching.
//
// IDX layout (all integers big-endian):
//   images: 0x00000803, count, rows, cols, then count*rows*cols bytes
//   labels: 0x00000801, count, then count bytes

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sdae/linalg.hpp"

namespace sdae {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // sample-major, row-major within a sample

  std::size_t pixels_per_image() const noexcept { return std::size_t{rows} * cols; }
  friend bool operator==(const IdxImages&, const IdxImages&) = default;
};

// Throw FormatError on a wrong magic number or a payload length that does not
// match the header.
IdxImages parse_idx_images(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_idx_images(const IdxImages& images);
std::vector<std::uint8_t> encode_idx_labels(std::span<const std::uint8_t> labels);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

// Each byte v becomes v / 255; one sample of `dim` values per row.
Matrix normalize(std::span<const std::uint8_t> pixels, std::size_t dim);

enum class Split : std::uint8_t { Train, Valid, Test };

const char* to_string(Split s) noexcept;
Split parse_split(std::string_view name);

// Inputs with class labels; the unit every trainer and evaluator consumes.
struct LabeledSet {
  Matrix inputs;  // one sample per row
  std::vector<std::size_t> labels;
  std::size_t n_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return inputs.cols(); }
  void validate() const;
};

// Samples in [0,1]^d with labels in [0, n_classes) and one split tag each.
class Dataset {
 public:
  Dataset() = default;
  // Every sample starts tagged Train. Throws ShapeError/ArgumentError if the
  // invariants do not hold.
  Dataset(Matrix samples, std::vector<std::size_t> labels, std::size_t n_classes);
  Dataset(Matrix samples, std::vector<std::size_t> labels, std::size_t n_classes,
          std::vector<Split> tags);

  const Matrix& samples() const noexcept { return samples_; }
  const std::vector<std::size_t>& labels() const noexcept { return labels_; }
  const std::vector<Split>& tags() const noexcept { return tags_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return samples_.cols(); }
  std::size_t n_classes() const noexcept { return n_classes_; }

  std::vector<std::size_t> indices(Split tag) const;
  std::size_t count(Split tag) const;
  LabeledSet subset(Split tag) const;

 private:
  Matrix samples_;
  std::vector<std::size_t> labels_;
  std::size_t n_classes_ = 0;
  std::vector<Split> tags_;
};

// Build a Dataset (all Train) from an IDX image/label pair. Throws FormatError
// on count mismatch and ArgumentError on labels >= n_classes.
Dataset dataset_from_idx(const IdxImages& images, std::span<const std::uint8_t> labels,
                         std::size_t n_classes);

// Concatenate per-split datasets, tagging their samples accordingly.
Dataset join_splits(const Dataset& train, const Dataset& valid, const Dataset& test);

// Seeded shuffle, then contiguous Train/Valid/Test assignment. Sizes come from
// largest-remainder rounding, so each differs from fraction * N by < 1.
Dataset split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed);

// Shuffled batches of 0..n-1 for one epoch. The order depends only on
// (seed, epoch); the last batch may be short.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch);

// Batches of dataset indices restricted to `tag`.
std::vector<std::vector<std::size_t>> minibatches(const Dataset& ds, Split tag,
                                                  std::size_t batch_size, std::uint64_t seed,
                                                  std::size_t epoch);

// Synthetic "bars": sample i has class c drawn uniformly from [0, dim) and
// input e_c, with the off-bar components drawn from [0, noise).
Dataset make_bars(std::size_t n, std::size_t dim, std::uint64_t seed, double noise = 0.0);

// Quantise a dataset back to IDX bytes (round(v * 255)).
IdxImages to_idx_images(const Matrix& samples, std::uint32_t rows, std::uint32_t cols);

}  // namespace sdae
