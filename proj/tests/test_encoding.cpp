#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "resbit/encoding.hpp"
#include "resbit/errors.hpp"

namespace resbit {
namespace {

std::uint64_t ones(unsigned b) { return (std::uint64_t{1} << b) - 1; }

Bits bits_of(std::initializer_list<int> v) {
  Bits out;
  for (int b : v) out.push_back(static_cast<std::uint8_t>(b));
  return out;
}

// Independent reading: each block is a plain big-endian integer.
std::uint64_t blockwise_value(const Bits& bits, const std::vector<unsigned>& blocks) {
  std::uint64_t total = 0;
  std::size_t pos = 0;
  for (unsigned b : blocks) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < b; ++i) v = v * 2 + bits[pos++];
    total += v;
  }
  return total;
}

Bits pattern(std::uint64_t value, std::size_t width) {
  Bits out(width);
  for (std::size_t i = 0; i < width; ++i) out[width - 1 - i] = (value >> i) & 1;
  return out;
}

TEST(BlockLengths, StatesExample) {
  EXPECT_EQ(block_lengths(50), (std::vector<unsigned>{5, 4, 2}));
}

TEST(BlockLengths, SmallAndAllOnes) {
  EXPECT_EQ(block_lengths(2), (std::vector<unsigned>{1}));
  EXPECT_EQ(block_lengths(1024), (std::vector<unsigned>{10}));
  EXPECT_TRUE(block_lengths(1).empty());
  EXPECT_THROW(block_lengths(0), DomainError);
}

TEST(BlockLengths, ThousandClassesNeedFortyTwoBits) {
  const auto b = block_lengths(1000);
  unsigned total = 0;
  for (auto x : b) total += x;
  EXPECT_EQ(total, 42u);
  // Repeated lengths are legitimate output.
  EXPECT_EQ(std::count(b.begin(), b.end(), 1u), 2);
}

TEST(BlockLengths, RangeIdentityUpToOneMillion) {
  for (std::uint64_t m = 1; m <= 1'000'000; ++m) {
    const auto b = block_lengths(m);
    std::uint64_t sum = 0;
    for (auto x : b) sum += ones(x);
    ASSERT_EQ(sum, m - 1) << "M=" << m;
    ASSERT_TRUE(std::is_sorted(b.rbegin(), b.rend())) << "M=" << m;
  }
}

TEST(BlockLengths, LargeClassCounts) {
  const std::uint64_t m = std::uint64_t{1} << 62;
  std::uint64_t sum = 0;
  for (auto x : block_lengths(m)) sum += ones(x);
  EXPECT_EQ(sum, m - 1);
  EXPECT_EQ(block_lengths(~std::uint64_t{0}).front(), 63u);
}

TEST(EncodeResBit, StatesExample) {
  const ResBitLayout layout(50);
  EXPECT_EQ(layout.width(), 11u);
  EXPECT_EQ(encode_resbit(39, layout), bits_of({1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(encode_resbit(0, layout), Bits(11, 0));
  EXPECT_EQ(encode_resbit(49, layout), Bits(11, 1));
  EXPECT_THROW(encode_resbit(50, layout), RangeError);
}

TEST(DecodeResBit, Examples) {
  const ResBitLayout layout(50);
  EXPECT_EQ(decode_resbit(bits_of({1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0}), layout), 39u);
  EXPECT_EQ(decode_resbit(Bits(11, 0), layout), 0u);
  EXPECT_EQ(decode_resbit(bits_of({0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1}), layout), 4u);
  EXPECT_THROW(decode_resbit(Bits(10, 0), layout), ShapeError);
}

TEST(DecodeResBit, AllPatternsOfFiftyStayInRange) {
  const ResBitLayout layout(50);
  std::set<std::uint64_t> seen;
  for (std::uint64_t v = 0; v < (1u << 11); ++v) {
    const auto p = pattern(v, 11);
    const auto d = decode_resbit(p, layout);
    ASSERT_LT(d, 50u);
    ASSERT_EQ(d, blockwise_value(p, layout.block_lengths()));
    seen.insert(d);
  }
  EXPECT_EQ(seen.size(), 50u);  // surjective
}

TEST(ResBit, ZeroWidthForSingleClass) {
  const ResBitLayout layout(1);
  EXPECT_EQ(layout.width(), 0u);
  EXPECT_TRUE(encode_resbit(0, layout).empty());
  EXPECT_EQ(decode_resbit(Bits{}, layout), 0u);
}

TEST(ResBit, ExhaustiveRoundTripUpTo4096) {
  for (std::uint64_t m = 1; m <= 4096; ++m) {
    const ResBitLayout layout(m);
    for (std::uint64_t n = 0; n < m; ++n) {
      ASSERT_EQ(decode_resbit(encode_resbit(n, layout), layout), n) << "M=" << m << " n=" << n;
    }
    ASSERT_EQ(encode_resbit(m - 1, layout), Bits(layout.width(), 1));
  }
}

TEST(ResBit, SampledRoundTripUpToOneMillion) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> pick_m(2, 1'000'000);
  for (int i = 0; i < 100; ++i) {
    const auto m = pick_m(rng);
    const ResBitLayout layout(m);
    std::uniform_int_distribution<std::uint64_t> pick_n(0, m - 1);
    for (int j = 0; j < 1000; ++j) {
      const auto n = pick_n(rng);
      ASSERT_EQ(decode_resbit(encode_resbit(n, layout), layout), n);
    }
  }
}

TEST(ResBit, TotalityOverSmallSpaces) {
  std::mt19937_64 rng(11);
  for (std::uint64_t m = 2; m <= 256; ++m) {
    const ResBitLayout layout(m);
    const auto w = layout.width();
    if (w <= 16) {
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << w); ++v) {
        ASSERT_LT(decode_resbit(pattern(v, w), layout), m);
      }
    } else {
      Bits p(w);
      for (int i = 0; i < 100000; ++i) {
        for (auto& b : p) b = rng() & 1;
        ASSERT_LT(decode_resbit(p, layout), m);
      }
    }
  }
}

// A block may be only partly filled when the value runs out inside it; every
// later block is then zero.
TEST(ResBit, CanonicalForm) {
  for (std::uint64_t m = 1; m <= 600; ++m) {
    const ResBitLayout layout(m);
    for (std::uint64_t n = 0; n < m; ++n) {
      const auto code = encode_resbit(n, layout);
      std::size_t pos = 0;
      bool exhausted = false;
      for (unsigned b : layout.block_lengths()) {
        const bool all_ones = std::all_of(code.begin() + pos, code.begin() + pos + b, [](auto x) { return x == 1; });
        const bool all_zero = std::all_of(code.begin() + pos, code.begin() + pos + b, [](auto x) { return x == 0; });
        if (exhausted) ASSERT_TRUE(all_zero) << "M=" << m << " n=" << n;
        if (!all_ones) exhausted = true;
        pos += b;
      }
    }
  }
}

TEST(Binary, Examples) {
  EXPECT_EQ(binary_width(50), 6u);
  EXPECT_EQ(binary_width(64), 6u);
  EXPECT_EQ(binary_width(65), 7u);
  EXPECT_EQ(binary_width(1), 1u);
  EXPECT_EQ(encode_binary(0, 50), Bits(6, 0));
  EXPECT_EQ(encode_binary(49, 50), bits_of({1, 1, 0, 0, 0, 1}));
  EXPECT_EQ(decode_binary(bits_of({1, 1, 0, 1, 0, 1}), 50), BinaryDecoded(OutOfIndex{53}));
  EXPECT_EQ(decode_binary(Bits(6, 0), 50), BinaryDecoded(ClassIndex{0}));
  EXPECT_THROW(decode_binary(Bits(5, 0), 50), ShapeError);
  EXPECT_THROW(encode_binary(50, 50), RangeError);
  EXPECT_EQ(encode_binary(0, 1), Bits(1, 0));
}

TEST(Binary, FourteenInvalidPatternsForFifty) {
  int invalid = 0;
  for (std::uint64_t v = 0; v < 64; ++v) {
    if (std::holds_alternative<OutOfIndex>(decode_binary(pattern(v, 6), 50))) ++invalid;
  }
  EXPECT_EQ(invalid, 14);
}

TEST(Binary, InvalidCountMatchesPowerGap) {
  for (std::uint64_t m = 2; m <= 1024; ++m) {
    const auto w = binary_width(m);
    std::uint64_t invalid = 0;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << w); ++v) {
      const auto r = decode_binary(pattern(v, w), m);
      if (const auto* o = std::get_if<OutOfIndex>(&r)) {
        ASSERT_EQ(o->value, v);
        ++invalid;
      } else {
        ASSERT_EQ(std::get<ClassIndex>(r), v);
      }
    }
    ASSERT_EQ(invalid, (std::uint64_t{1} << w) - m) << "M=" << m;
  }
}

TEST(OneHot, Examples) {
  EXPECT_EQ(encode_onehot(2, 4), bits_of({0, 0, 1, 0}));
  EXPECT_EQ(decode_onehot(bits_of({0, 1, 0, 0}), 4), 1u);
  EXPECT_THROW(decode_onehot(bits_of({0, 1, 1, 0}), 4), MalformedCodeError);
  EXPECT_THROW(decode_onehot(bits_of({0, 0, 0, 0}), 4), MalformedCodeError);
  EXPECT_THROW(decode_onehot(bits_of({0, 1, 0}), 4), ShapeError);
  EXPECT_FALSE(try_decode_onehot(bits_of({1, 1})).has_value());
  EXPECT_EQ(try_decode_onehot(bits_of({0, 0, 1})), 2u);
}

TEST(Dims, Examples) {
  EXPECT_EQ(dims(1000, Scheme::resbit), 42u);
  EXPECT_EQ(dims(50, Scheme::resbit), 11u);
  EXPECT_EQ(dims(64, Scheme::binary), 6u);
  EXPECT_EQ(dims(2, Scheme::onehot), 2u);
  EXPECT_EQ(dims(2, Scheme::binary), 1u);
  EXPECT_EQ(dims(2, Scheme::resbit), 1u);
  EXPECT_EQ(dims(1, Scheme::onehot), 1u);
  EXPECT_EQ(dims(1, Scheme::binary), 1u);
  EXPECT_EQ(dims(1, Scheme::resbit), 0u);
  EXPECT_THROW(dims(0, Scheme::resbit), DomainError);
}

TEST(Dims, Ordering) {
  for (std::uint64_t m = 1; m <= 100000; ++m) {
    const auto r = dims(m, Scheme::resbit);
    ASSERT_LT(r, dims(m, Scheme::onehot));
    if (m >= 2) ASSERT_LE(dims(m, Scheme::binary), r);
  }
  for (unsigned k = 1; k < 40; ++k) EXPECT_EQ(dims((std::uint64_t{1} << k), Scheme::resbit), k);
}

// Width is not monotone in M: 6 = 3 + 3 needs four bits, 7 needs three. The
// minimum over all decompositions agrees, so no solver could do better.
TEST(Dims, WidthDropsAtPowersOfTwo) {
  EXPECT_EQ(dims(7, Scheme::resbit), 4u);
  EXPECT_EQ(dims(8, Scheme::resbit), 3u);
  EXPECT_EQ(optimal_block_lengths_oracle(7).total_width, 4u);
  EXPECT_EQ(optimal_block_lengths_oracle(8).total_width, 3u);
  std::uint64_t drops = 0;
  for (std::uint64_t m = 2; m <= 4096; ++m) drops += dims(m, Scheme::resbit) < dims(m - 1, Scheme::resbit);
  EXPECT_GT(drops, 0u);
}

TEST(Oracle, Examples) {
  EXPECT_EQ(optimal_block_lengths_oracle(50).total_width, 11u);
  EXPECT_EQ(optimal_block_lengths_oracle(2).total_width, 1u);
  EXPECT_EQ(optimal_block_lengths_oracle(1).total_width, 0u);
  EXPECT_THROW(optimal_block_lengths_oracle(kOptimalOracleLimit + 1), DomainError);
  EXPECT_THROW(optimal_block_lengths_oracle(0), DomainError);
}

TEST(Oracle, WitnessIsConsistent) {
  for (std::uint64_t m : {3u, 50u, 777u, 1000u, 4096u}) {
    const auto best = optimal_block_lengths_oracle(m);
    std::uint64_t sum = 0;
    unsigned width = 0;
    for (auto b : best.block_lengths) {
      sum += ones(b);
      width += b;
    }
    EXPECT_EQ(sum, m - 1);
    EXPECT_EQ(width, best.total_width);
  }
}

TEST(Oracle, GreedyIsMinimalUpTo4096) {
  for (std::uint64_t m = 1; m <= 4096; ++m) {
    ASSERT_EQ(dims(m, Scheme::resbit), optimal_block_lengths_oracle(m).total_width) << "M=" << m;
  }
}

TEST(Generic, SchemesAgreeWithSpecificCodecs) {
  for (std::uint64_t m : {1u, 2u, 7u, 50u}) {
    for (std::uint64_t n = 0; n < m; ++n) {
      for (auto s : {Scheme::onehot, Scheme::binary, Scheme::resbit}) {
        const auto code = encode(n, m, s);
        ASSERT_EQ(code.size(), dims(m, s));
        ASSERT_EQ(try_decode(code, m, s), n);
      }
    }
  }
  EXPECT_FALSE(try_decode(bits_of({1, 1, 0, 1, 0, 1}), 50, Scheme::binary).has_value());
}

TEST(SchemeNames, RoundTrip) {
  for (auto s : {Scheme::onehot, Scheme::binary, Scheme::resbit}) EXPECT_EQ(parse_scheme(to_string(s)), s);
  EXPECT_THROW(parse_scheme("gray"), SchemaError);
}

TEST(CategorySpace, Lookup) {
  const CategorySpace space({"CA", "NY", "__masked__"}, "__masked__");
  EXPECT_EQ(space.class_count(), 3u);
  EXPECT_EQ(space.find("NY"), 1u);
  EXPECT_FALSE(space.find("TX").has_value());
  EXPECT_EQ(space.masked_index(), 2u);
  EXPECT_EQ(space.label(0), "CA");
  EXPECT_THROW(space.label(3), RangeError);
  EXPECT_EQ(space.block_lengths(), block_lengths(3));
}

TEST(CategorySpace, Validation) {
  EXPECT_THROW(CategorySpace({}), SchemaError);
  EXPECT_THROW(CategorySpace({"a", "a"}), SchemaError);
  EXPECT_THROW(CategorySpace({"a"}, "b"), SchemaError);
  EXPECT_FALSE(CategorySpace({"a"}).masked_index().has_value());
}

}  // namespace
}  // namespace resbit
