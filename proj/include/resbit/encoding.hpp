#pragma once

// Bit-vector codecs for categorical class indices.
//
// Three schemes are provided over a class index n in [0, M):
//   onehot  M bits, exactly one set
//   binary  ceil(log2 M) bits, big-endian; patterns >= M are "out of index"
//   resbit  residual bit vectors: M-1 is decomposed greedily into a sum of
//           all-ones blocks (2^b - 1); an index is the sum of the per-block
//           binary values, so every bit pattern decodes to a valid index.
//
// Bits are stored one per byte (0 or 1). ResBit blocks are concatenated
// largest-first, each block big-endian.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace resbit {

using ClassIndex = std::uint64_t;
using Bits = std::vector<std::uint8_t>;

enum class Scheme { onehot, binary, resbit };

std::string_view to_string(Scheme scheme) noexcept;
// Throws SchemaError on an unknown name.
Scheme parse_scheme(std::string_view name);

// Greedy block lengths for M classes. Follows the string-of-ones subtraction:
// while the remaining value is not all ones in binary, subtract the all-ones
// number one bit shorter than it; the final all-ones remainder closes the
// list. M == 1 yields an empty list; M == 0 throws DomainError.
std::vector<unsigned> block_lengths(std::uint64_t class_count);

// Block structure shared by every ResBit code over the same class count.
class ResBitLayout {
 public:
  explicit ResBitLayout(std::uint64_t class_count);

  std::uint64_t class_count() const noexcept { return class_count_; }
  const std::vector<unsigned>& block_lengths() const noexcept { return blocks_; }
  std::size_t width() const noexcept { return width_; }

  friend bool operator==(const ResBitLayout&, const ResBitLayout&) = default;

 private:
  std::uint64_t class_count_;
  std::vector<unsigned> blocks_;
  std::size_t width_;
};

Bits encode_resbit(ClassIndex n, const ResBitLayout& layout);
// Sum of each block read as an unsigned big-endian integer. Total over all
// patterns of the right width; throws ShapeError on a width mismatch.
ClassIndex decode_resbit(std::span<const std::uint8_t> bits, const ResBitLayout& layout);

// Width of the plain binary code: ceil(log2 M), and 1 for M == 1.
unsigned binary_width(std::uint64_t class_count);

struct OutOfIndex {
  std::uint64_t value;
  friend bool operator==(const OutOfIndex&, const OutOfIndex&) = default;
};
using BinaryDecoded = std::variant<ClassIndex, OutOfIndex>;

Bits encode_binary(ClassIndex n, std::uint64_t class_count);
BinaryDecoded decode_binary(std::span<const std::uint8_t> bits, std::uint64_t class_count);

Bits encode_onehot(ClassIndex n, std::uint64_t class_count);
// Throws MalformedCodeError unless exactly one element is 1.
ClassIndex decode_onehot(std::span<const std::uint8_t> bits, std::uint64_t class_count);
// Non-throwing variant for hot loops; nullopt when malformed.
std::optional<ClassIndex> try_decode_onehot(std::span<const std::uint8_t> bits) noexcept;

// Code width for M classes under a scheme.
std::size_t dims(std::uint64_t class_count, Scheme scheme);

// Generic encode/decode. For binary, an out-of-index pattern yields nullopt;
// for one-hot, a malformed pattern yields nullopt.
Bits encode(ClassIndex n, std::uint64_t class_count, Scheme scheme);
std::optional<ClassIndex> try_decode(std::span<const std::uint8_t> bits, std::uint64_t class_count,
                                     Scheme scheme);

// Exact minimum total ResBit width by unbounded-knapsack DP over targets
// 0..M-1 with items (2^k - 1, cost k). Exists to check the greedy solver;
// guarded at M <= 2^20.
struct OptimalBlocks {
  unsigned total_width;
  std::vector<unsigned> block_lengths;  // non-increasing
};
inline constexpr std::uint64_t kOptimalOracleLimit = std::uint64_t{1} << 20;
OptimalBlocks optimal_block_lengths_oracle(std::uint64_t class_count);

// Fitted vocabulary for one categorical column. Index i <-> labels[i].
class CategorySpace {
 public:
  // Throws SchemaError on an empty or duplicated label list, or when
  // masked_label is set but not present exactly once.
  explicit CategorySpace(std::vector<std::string> labels,
                         std::optional<std::string> masked_label = std::nullopt);

  std::uint64_t class_count() const noexcept { return labels_.size(); }
  const ResBitLayout& layout() const noexcept { return layout_; }
  const std::vector<unsigned>& block_lengths() const noexcept { return layout_.block_lengths(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::optional<std::string>& masked_label() const noexcept { return masked_label_; }

  std::optional<ClassIndex> find(std::string_view label) const;
  const std::string& label(ClassIndex index) const;
  // Index of the masked catch-all category, if any.
  std::optional<ClassIndex> masked_index() const;

  friend bool operator==(const CategorySpace& a, const CategorySpace& b) {
    return a.labels_ == b.labels_ && a.masked_label_ == b.masked_label_;
  }

 private:
  std::vector<std::string> labels_;
  std::optional<std::string> masked_label_;
  ResBitLayout layout_;
  std::unordered_map<std::string, ClassIndex> index_;
};

}  // namespace resbit
