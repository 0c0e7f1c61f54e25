#include "svcdisco/buddy.hpp"

#include <cmath>

namespace svcdisco {

BuddyBloomFilter::BuddyBloomFilter(std::uint64_t m_bits, HashFamily family)
    : b1_(m_bits, family), b2_(m_bits, std::move(family)) {}

ObserveOutcome BuddyBloomFilter::observe(std::span<const std::uint8_t> key) {
  std::array<std::uint64_t, 8> buf;
  b1_.family().positions(key, b1_.bit_count(), buf);
  const std::span<const std::uint64_t> pos{buf.data(), b1_.family().k()};
  if (b2_.contains_positions(pos)) return ObserveOutcome::KnownDuplicate;
  if (b1_.contains_positions(pos)) {
    b2_.insert_positions(pos);
    return ObserveOutcome::Promoted;
  }
  b1_.insert_positions(pos);
  return ObserveOutcome::FirstSeen;
}

void BuddyBloomFilter::clear() {
  b1_.clear();
  b2_.clear();
}

double bbf_fp_bound(double k, double m, double n_total, double r_d) {
  if (!(r_d > 0.0 && r_d <= 1.0)) {
    throw std::invalid_argument("r_d must be in (0,1]");
  }
  if (n_total <= 0.0) return 0.0;
  const double b1_leak = fp_rate_classic(k, m, n_total * r_d);
  const double b2_cardinality =
      n_total * ((1.0 - r_d) + (2.0 * r_d - 1.0) * b1_leak);
  return fp_rate_classic(k, m, b2_cardinality);
}

}  // namespace svcdisco
