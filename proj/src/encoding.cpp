#include "resbit/encoding.hpp"

#include <algorithm>
#include <bit>
#include <limits>

#include "resbit/errors.hpp"

namespace resbit {
namespace {

constexpr std::uint64_t all_ones(unsigned length) noexcept {
  return length >= 64 ? std::numeric_limits<std::uint64_t>::max()
                      : (std::uint64_t{1} << length) - 1;
}

void require_classes(std::uint64_t class_count) {
  if (class_count == 0) throw DomainError("empty category space (class count 0)");
}

void require_index(ClassIndex n, std::uint64_t class_count) {
  require_classes(class_count);
  if (n >= class_count) {
    throw RangeError("class index " + std::to_string(n) + " outside [0, " +
                     std::to_string(class_count) + ")");
  }
}

void require_width(std::size_t got, std::size_t want, const char* scheme) {
  if (got != want) {
    throw ShapeError(std::string(scheme) + " code has width " + std::to_string(got) +
                     ", expected " + std::to_string(want));
  }
}

void append_big_endian(Bits& out, std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
}

std::uint64_t read_big_endian(std::span<const std::uint8_t> bits) {
  std::uint64_t value = 0;
  for (auto b : bits) {
    if (b > 1) throw MalformedCodeError("bit value " + std::to_string(b) + " is not 0 or 1");
    value = (value << 1) | b;
  }
  return value;
}

std::uint64_t nonempty_size(const std::vector<std::string>& labels) {
  if (labels.empty()) throw SchemaError("category space needs at least one label");
  return labels.size();
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::onehot: return "onehot";
    case Scheme::binary: return "binary";
    case Scheme::resbit: return "resbit";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "onehot") return Scheme::onehot;
  if (name == "binary") return Scheme::binary;
  if (name == "resbit") return Scheme::resbit;
  throw SchemaError("unknown scheme '" + std::string(name) + "' (expected onehot|binary|resbit)");
}

std::vector<unsigned> block_lengths(std::uint64_t class_count) {
  require_classes(class_count);
  std::vector<unsigned> out;
  std::uint64_t remaining = class_count - 1;
  if (remaining == 0) return out;
  while (true) {
    const auto length = static_cast<unsigned>(std::bit_width(remaining));
    if (remaining == all_ones(length)) {
      out.push_back(length);
      break;
    }
    // Strip the all-ones number one bit shorter than the remainder. The
    // remainder has its top bit set, so it stays >= 1 afterwards.
    remaining -= all_ones(length - 1);
    out.push_back(length - 1);
  }
  return out;
}

ResBitLayout::ResBitLayout(std::uint64_t class_count)
    : class_count_(class_count), blocks_(resbit::block_lengths(class_count)), width_(0) {
  for (auto b : blocks_) width_ += b;
}

Bits encode_resbit(ClassIndex n, const ResBitLayout& layout) {
  require_index(n, layout.class_count());
  Bits out;
  out.reserve(layout.width());
  std::uint64_t remaining = n;
  for (auto length : layout.block_lengths()) {
    if (remaining == 0) {
      out.insert(out.end(), length, 0);
      continue;
    }
    const auto saturated = all_ones(length);
    if (saturated <= remaining) {
      out.insert(out.end(), length, 1);
      remaining -= saturated;
    } else {
      append_big_endian(out, remaining, length);
      remaining = 0;
    }
  }
  return out;
}

ClassIndex decode_resbit(std::span<const std::uint8_t> bits, const ResBitLayout& layout) {
  require_width(bits.size(), layout.width(), "resbit");
  ClassIndex total = 0;
  std::size_t offset = 0;
  for (auto length : layout.block_lengths()) {
    total += read_big_endian(bits.subspan(offset, length));
    offset += length;
  }
  return total;
}

unsigned binary_width(std::uint64_t class_count) {
  require_classes(class_count);
  if (class_count == 1) return 1;
  return static_cast<unsigned>(std::bit_width(class_count - 1));
}

Bits encode_binary(ClassIndex n, std::uint64_t class_count) {
  require_index(n, class_count);
  Bits out;
  const auto width = binary_width(class_count);
  out.reserve(width);
  append_big_endian(out, n, width);
  return out;
}

BinaryDecoded decode_binary(std::span<const std::uint8_t> bits, std::uint64_t class_count) {
  require_width(bits.size(), binary_width(class_count), "binary");
  const auto value = read_big_endian(bits);
  if (value >= class_count) return OutOfIndex{value};
  return ClassIndex{value};
}

Bits encode_onehot(ClassIndex n, std::uint64_t class_count) {
  require_index(n, class_count);
  Bits out(class_count, 0);
  out[n] = 1;
  return out;
}

std::optional<ClassIndex> try_decode_onehot(std::span<const std::uint8_t> bits) noexcept {
  std::optional<ClassIndex> hot;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == 0) continue;
    if (bits[i] != 1 || hot) return std::nullopt;
    hot = i;
  }
  return hot;
}

ClassIndex decode_onehot(std::span<const std::uint8_t> bits, std::uint64_t class_count) {
  require_classes(class_count);
  require_width(bits.size(), class_count, "onehot");
  auto hot = try_decode_onehot(bits);
  if (!hot) {
    const auto ones = std::count(bits.begin(), bits.end(), std::uint8_t{1});
    throw MalformedCodeError("one-hot code has " + std::to_string(ones) +
                             " set elements, expected exactly 1");
  }
  return *hot;
}

std::size_t dims(std::uint64_t class_count, Scheme scheme) {
  require_classes(class_count);
  switch (scheme) {
    case Scheme::onehot: return class_count;
    case Scheme::binary: return binary_width(class_count);
    case Scheme::resbit: return ResBitLayout(class_count).width();
  }
  return 0;
}

Bits encode(ClassIndex n, std::uint64_t class_count, Scheme scheme) {
  switch (scheme) {
    case Scheme::onehot: return encode_onehot(n, class_count);
    case Scheme::binary: return encode_binary(n, class_count);
    case Scheme::resbit: return encode_resbit(n, ResBitLayout(class_count));
  }
  return {};
}

std::optional<ClassIndex> try_decode(std::span<const std::uint8_t> bits,
                                     std::uint64_t class_count, Scheme scheme) {
  switch (scheme) {
    case Scheme::onehot:
      require_width(bits.size(), class_count, "onehot");
      return try_decode_onehot(bits);
    case Scheme::binary: {
      auto decoded = decode_binary(bits, class_count);
      if (auto* index = std::get_if<ClassIndex>(&decoded)) return *index;
      return std::nullopt;
    }
    case Scheme::resbit: return decode_resbit(bits, ResBitLayout(class_count));
  }
  return std::nullopt;
}

OptimalBlocks optimal_block_lengths_oracle(std::uint64_t class_count) {
  require_classes(class_count);
  if (class_count > kOptimalOracleLimit) {
    throw DomainError("optimal block oracle limited to M <= 2^20, got " +
                      std::to_string(class_count));
  }
  const auto target = static_cast<std::size_t>(class_count - 1);
  constexpr unsigned kUnreachable = std::numeric_limits<unsigned>::max();
  std::vector<unsigned> cost(target + 1, kUnreachable);
  std::vector<unsigned char> last_item(target + 1, 0);
  cost[0] = 0;
  for (std::size_t v = 1; v <= target; ++v) {
    for (unsigned k = 1; all_ones(k) <= v; ++k) {
      const auto prev = cost[v - all_ones(k)];
      if (prev != kUnreachable && prev + k < cost[v]) {
        cost[v] = prev + k;
        last_item[v] = static_cast<unsigned char>(k);
      }
    }
  }
  OptimalBlocks result{cost[target], {}};
  for (std::size_t v = target; v > 0; v -= all_ones(last_item[v])) {
    result.block_lengths.push_back(last_item[v]);
  }
  std::sort(result.block_lengths.rbegin(), result.block_lengths.rend());
  return result;
}

CategorySpace::CategorySpace(std::vector<std::string> labels,
                             std::optional<std::string> masked_label)
    : labels_(std::move(labels)),
      masked_label_(std::move(masked_label)),
      layout_(nonempty_size(labels_)) {
  index_.reserve(labels_.size());
  for (ClassIndex i = 0; i < labels_.size(); ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw SchemaError("duplicate label '" + labels_[i] + "' in category space");
    }
  }
  if (masked_label_ && !index_.contains(*masked_label_)) {
    throw SchemaError("masked label '" + *masked_label_ + "' missing from category space");
  }
}

std::optional<ClassIndex> CategorySpace::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& CategorySpace::label(ClassIndex index) const {
  if (index >= labels_.size()) {
    throw RangeError("class index " + std::to_string(index) + " outside vocabulary of size " +
                     std::to_string(labels_.size()));
  }
  return labels_[index];
}

std::optional<ClassIndex> CategorySpace::masked_index() const {
  if (!masked_label_) return std::nullopt;
  return find(*masked_label_);
}

}  // namespace resbit
