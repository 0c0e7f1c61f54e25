#pragma once

// Classical Bloom filter over a fixed family of byte-string hashes, plus the
// sizing and false-positive formulas the rest of the library is built on.
//
// The hash family is drawn from five classical string hashes (sax, sdbm,
// bernstein/djb2, elf, fnv). Exact definitions are pinned in bloom.cpp so two
// processes built from this code always agree on bit positions; that is what
// makes persisted filters queryable across runs.
//
// Filters are plain values: one writer at a time, read-only sharing of
// frozen instances, freely movable between threads.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace svcdisco {

enum class HashAlg : std::uint8_t {
  Sax = 0,
  Sdbm = 1,
  Bernstein = 2,
  Elf = 3,
  Fnv = 4,
};

constexpr std::size_t kHashAlgCount = 5;

const char* hash_alg_name(HashAlg alg);

// Raw 64-bit hash of a byte string. seed = 0 reproduces the classical
// unseeded definition of each algorithm.
std::uint64_t hash_bytes(HashAlg alg, std::uint64_t seed,
                         std::span<const std::uint8_t> key);

struct HashMember {
  HashAlg alg{HashAlg::Sax};
  std::uint64_t seed{0};

  bool operator==(const HashMember&) const = default;
};

// Ordered set of k hash functions shared by every filter that must agree on
// positions. k <= 5 uses the five base algorithms with seed 0; larger k
// reuses algorithms with distinct non-zero seeds.
class HashFamily {
 public:
  explicit HashFamily(std::vector<HashMember> members);

  // The standard family of the first k members in fixed order.
  static HashFamily with_k(unsigned k);

  unsigned k() const { return static_cast<unsigned>(members_.size()); }
  const std::vector<HashMember>& members() const { return members_; }

  // Writes exactly k indices in [0, m) to out. Deterministic per (key, m).
  void positions(std::span<const std::uint8_t> key, std::uint64_t m,
                 std::span<std::uint64_t> out) const;

  std::vector<std::uint64_t> positions(std::span<const std::uint8_t> key,
                                       std::uint64_t m) const;

  bool operator==(const HashFamily&) const = default;

 private:
  std::vector<HashMember> members_;
};

struct IncompatibleFilters : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// m-bit filter backed by a byte array; bit i lives at byte i/8, bit i%8
// (LSB first). That layout is the persisted wire layout, byte for byte.
class BloomFilter {
 public:
  BloomFilter(std::uint64_t m_bits, HashFamily family);

  void insert(std::span<const std::uint8_t> key);
  bool contains(std::span<const std::uint8_t> key) const;

  // Position-level forms for callers probing several same-shaped filters
  // with one key: hash once, test or set everywhere.
  bool contains_positions(std::span<const std::uint64_t> positions) const;
  void insert_positions(std::span<const std::uint64_t> positions);

  void clear();

  // Bitwise OR of another filter with identical shape into this one.
  void merge(const BloomFilter& other);
  static BloomFilter united(const BloomFilter& a, const BloomFilter& b);

  std::uint64_t bit_count() const { return m_; }
  const HashFamily& family() const { return family_; }
  std::uint64_t inserted_count() const { return inserted_; }

  std::uint64_t popcount() const;
  bool bit(std::uint64_t i) const {
    return (bytes_[i >> 3] >> (i & 7)) & 1u;
  }

  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

  // Rebuilds a filter around an existing bit array (e.g. one read back from
  // a file header).
  static BloomFilter from_bits(std::uint64_t m_bits, HashFamily family,
                               std::vector<std::uint8_t> bytes);

  bool same_shape(const BloomFilter& other) const {
    return m_ == other.m_ && family_ == other.family_;
  }

 private:
  std::uint64_t m_;
  HashFamily family_;
  std::vector<std::uint8_t> bytes_;
  std::uint64_t inserted_{0};
};

struct SizingParams {
  unsigned k_opt;
  std::uint64_t m_min_bits;  // per bit array; a buddy pair needs 2x
};

// Smallest per-array size holding n_distinct elements at false-positive
// target epsilon: k = ceil(log2(1/eps)), m = ceil(log2(e) * k * n).
SizingParams optimal_params(double epsilon, double n_distinct);

// (1 - e^{-kn/m})^k
double fp_rate_classic(double k, double m, double n);

}  // namespace svcdisco
