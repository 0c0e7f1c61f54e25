#include "svcdisco/bloom.hpp"

#include <bit>
#include <cmath>
#include <set>

namespace svcdisco {

namespace {

// Pinned reference definitions, widened to 64-bit accumulators. A seed is
// mixed into the initial state only, so seed 0 keeps the textbook behaviour.

std::uint64_t hash_sax(std::uint64_t seed, std::span<const std::uint8_t> key) {
  std::uint64_t h = seed;
  for (std::uint8_t b : key) h ^= (h << 5) + (h >> 2) + b;
  return h;
}

std::uint64_t hash_sdbm(std::uint64_t seed, std::span<const std::uint8_t> key) {
  std::uint64_t h = seed;
  for (std::uint8_t b : key) h = b + (h << 6) + (h << 16) - h;
  return h;
}

std::uint64_t hash_bernstein(std::uint64_t seed,
                             std::span<const std::uint8_t> key) {
  std::uint64_t h = 5381ull ^ seed;
  for (std::uint8_t b : key) h = h * 33 + b;
  return h;
}

// PJW/ELF, generalized to a 64-bit word (top nibble folded back).
std::uint64_t hash_elf(std::uint64_t seed, std::span<const std::uint8_t> key) {
  std::uint64_t h = seed;
  for (std::uint8_t b : key) {
    h = (h << 4) + b;
    std::uint64_t g = h & 0xF000000000000000ull;
    if (g) h ^= g >> 56;
    h &= ~g;
  }
  return h;
}

// FNV-1a, 64-bit.
std::uint64_t hash_fnv(std::uint64_t seed, std::span<const std::uint8_t> key) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ seed;
  for (std::uint8_t b : key) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

const char* hash_alg_name(HashAlg alg) {
  switch (alg) {
    case HashAlg::Sax: return "sax";
    case HashAlg::Sdbm: return "sdbm";
    case HashAlg::Bernstein: return "bernstein";
    case HashAlg::Elf: return "elf";
    case HashAlg::Fnv: return "fnv";
  }
  return "?";
}

std::uint64_t hash_bytes(HashAlg alg, std::uint64_t seed,
                         std::span<const std::uint8_t> key) {
  switch (alg) {
    case HashAlg::Sax: return hash_sax(seed, key);
    case HashAlg::Sdbm: return hash_sdbm(seed, key);
    case HashAlg::Bernstein: return hash_bernstein(seed, key);
    case HashAlg::Elf: return hash_elf(seed, key);
    case HashAlg::Fnv: return hash_fnv(seed, key);
  }
  throw std::invalid_argument("unknown hash algorithm id");
}

HashFamily::HashFamily(std::vector<HashMember> members)
    : members_(std::move(members)) {
  if (members_.empty() || members_.size() > 8) {
    throw std::invalid_argument("hash family size must be in 1..8");
  }
  std::set<std::pair<std::uint8_t, std::uint64_t>> seen;
  std::set<std::uint8_t> algs;
  for (const auto& m : members_) {
    if (static_cast<std::uint8_t>(m.alg) >= kHashAlgCount) {
      throw std::invalid_argument("unknown hash algorithm id");
    }
    if (!seen.insert({static_cast<std::uint8_t>(m.alg), m.seed}).second) {
      throw std::invalid_argument("duplicate (algorithm, seed) in hash family");
    }
    algs.insert(static_cast<std::uint8_t>(m.alg));
  }
  // Up to five members there is no reason to reuse an algorithm; reuse is
  // only for families larger than the algorithm set.
  if (members_.size() <= kHashAlgCount && algs.size() != members_.size()) {
    throw std::invalid_argument(
        "families of up to 5 members must use distinct algorithms");
  }
}

HashFamily HashFamily::with_k(unsigned k) {
  if (k < 1 || k > 8) throw std::invalid_argument("k must be in 1..8");
  // Members beyond the base five reuse only sax/elf/fnv: their update mixes
  // the state nonlinearly, so a different seed really moves positions. For
  // the multiply-add hashes (sdbm, bernstein) a seed change is a constant
  // position offset, which would duplicate a member rather than add one.
  static constexpr HashAlg kSeedSensitive[] = {HashAlg::Sax, HashAlg::Elf,
                                               HashAlg::Fnv};
  std::vector<HashMember> members;
  members.reserve(k);
  for (unsigned i = 0; i < k; ++i) {
    if (i < kHashAlgCount) {
      members.push_back({static_cast<HashAlg>(i), 0});
    } else {
      members.push_back({kSeedSensitive[(i - kHashAlgCount) % 3],
                         1 + static_cast<std::uint64_t>(i - kHashAlgCount) / 3});
    }
  }
  return HashFamily(std::move(members));
}

void HashFamily::positions(std::span<const std::uint8_t> key, std::uint64_t m,
                           std::span<std::uint64_t> out) const {
  if (key.empty()) throw std::invalid_argument("empty key");
  if (m == 0) throw std::invalid_argument("m must be positive");
  if (out.size() < members_.size()) {
    throw std::invalid_argument("positions output span too small");
  }
  for (std::size_t i = 0; i < members_.size(); ++i) {
    out[i] = hash_bytes(members_[i].alg, members_[i].seed, key) % m;
  }
}

std::vector<std::uint64_t> HashFamily::positions(
    std::span<const std::uint8_t> key, std::uint64_t m) const {
  std::vector<std::uint64_t> out(members_.size());
  positions(key, m, out);
  return out;
}

BloomFilter::BloomFilter(std::uint64_t m_bits, HashFamily family)
    : m_(m_bits), family_(std::move(family)), bytes_((m_bits + 7) / 8, 0) {
  if (m_bits < 8) throw std::invalid_argument("filter needs at least 8 bits");
}

void BloomFilter::insert(std::span<const std::uint8_t> key) {
  std::array<std::uint64_t, 8> pos;
  family_.positions(key, m_, pos);
  insert_positions({pos.data(), family_.k()});
}

bool BloomFilter::contains(std::span<const std::uint8_t> key) const {
  std::array<std::uint64_t, 8> pos;
  family_.positions(key, m_, pos);
  return contains_positions({pos.data(), family_.k()});
}

bool BloomFilter::contains_positions(
    std::span<const std::uint64_t> positions) const {
  for (std::uint64_t p : positions) {
    if (!bit(p)) return false;
  }
  return true;
}

void BloomFilter::insert_positions(std::span<const std::uint64_t> positions) {
  for (std::uint64_t p : positions) {
    bytes_[p >> 3] |= static_cast<std::uint8_t>(1u << (p & 7));
  }
  ++inserted_;
}

void BloomFilter::clear() {
  std::fill(bytes_.begin(), bytes_.end(), 0);
  inserted_ = 0;
}

void BloomFilter::merge(const BloomFilter& other) {
  if (!same_shape(other)) {
    throw IncompatibleFilters("cannot merge filters of different shape");
  }
  for (std::size_t i = 0; i < bytes_.size(); ++i) bytes_[i] |= other.bytes_[i];
  inserted_ += other.inserted_;
}

BloomFilter BloomFilter::united(const BloomFilter& a, const BloomFilter& b) {
  BloomFilter out = a;
  out.merge(b);
  return out;
}

std::uint64_t BloomFilter::popcount() const {
  std::uint64_t n = 0;
  for (std::uint8_t b : bytes_) n += std::popcount(b);
  return n;
}

BloomFilter BloomFilter::from_bits(std::uint64_t m_bits, HashFamily family,
                                   std::vector<std::uint8_t> bytes) {
  if (bytes.size() != (m_bits + 7) / 8) {
    throw std::invalid_argument("bit array length does not match m");
  }
  BloomFilter f(m_bits, std::move(family));
  f.bytes_ = std::move(bytes);
  return f;
}

SizingParams optimal_params(double epsilon, double n_distinct) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must be in (0,1)");
  }
  if (n_distinct < 1.0) {
    throw std::invalid_argument("n_distinct must be >= 1");
  }
  const double log2e = 1.4426950408889634;
  unsigned k = static_cast<unsigned>(std::ceil(std::log2(1.0 / epsilon)));
  if (k < 1) k = 1;
  auto m = static_cast<std::uint64_t>(std::ceil(log2e * k * n_distinct));
  if (m < 8) m = 8;
  return {k, m};
}

double fp_rate_classic(double k, double m, double n) {
  if (n <= 0.0) return 0.0;
  return std::pow(1.0 - std::exp(-k * n / m), k);
}

}  // namespace svcdisco
