#pragma once

// Buddy Bloom filter: a selecting array B1 and a remembering array B2 of
// identical shape sharing one hash family. First sighting of a key marks B1;
// a repeat promotes the key into B2; anything already in B2 is skipped.
// Neither array supports deletion, so duplicates are never lost (false
// positives only).

#include <cstdint>

#include "svcdisco/bloom.hpp"

namespace svcdisco {

enum class ObserveOutcome : std::uint8_t {
  FirstSeen,
  Promoted,
  KnownDuplicate,
};

class BuddyBloomFilter {
 public:
  BuddyBloomFilter(std::uint64_t m_bits, HashFamily family);

  // Probe order is B2 then B1, so a known duplicate costs a single query.
  ObserveOutcome observe(std::span<const std::uint8_t> key);

  void clear();

  const BloomFilter& b1() const { return b1_; }
  const BloomFilter& b2() const { return b2_; }
  BloomFilter& b1() { return b1_; }
  BloomFilter& b2() { return b2_; }

  std::uint64_t bit_count() const { return b1_.bit_count(); }
  const HashFamily& family() const { return b1_.family(); }
  std::uint64_t allocated_bits() const { return 2 * b1_.bit_count(); }

  bool same_shape(const BuddyBloomFilter& other) const {
    return b1_.same_shape(other.b1_);
  }

 private:
  BloomFilter b1_;
  BloomFilter b2_;
};

// Upper bound on the false-positive rate of a single buddy filter observing
// n_total elements per window with distinct ratio r_d: B2 holds at most
// n*(1-r_d) genuine duplicates plus the singles B1 leaks at its own rate,
// and the classic formula is applied to that cardinality.
double bbf_fp_bound(double k, double m, double n_total, double r_d);

}  // namespace svcdisco
