#pragma once

// Round-robin schema over jumping time windows: M buddy filters, one per
// window, plus a summary buddy filter that is the bitwise OR of the live
// historical windows. The summary is rebuilt at every window jump, after the
// stale window (the slot the new window reuses) has been cleared, so history
// queries cost one probe regardless of M.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "svcdisco/buddy.hpp"

namespace svcdisco {

enum class RbbfOutcome : std::uint8_t {
  SkipKnown,        // already remembered (summary B2 or current B2)
  FirstSeen,        // entered current B1
  PromotedCurrent,  // repeat within the current window
  PromotedHistory,  // fresh in current window, known from a live past window
};

const char* rbbf_outcome_name(RbbfOutcome o);

// B2 plane of a window that just rotated out, copied by value so it can be
// persisted or inspected after the slot is reused.
struct EvictedWindow {
  std::uint64_t window_start_ms;
  BloomFilter b2;
};

// OR of every window except the stale one, both planes. Inputs untouched.
BuddyBloomFilter rebuild_summary(std::span<const BuddyBloomFilter> windows,
                                 std::size_t stale_index);

class RbbfWindowSet {
 public:
  RbbfWindowSet(unsigned window_count, std::uint64_t m_bits,
                const HashFamily& family, std::uint32_t window_seconds);

  struct AdvanceResult {
    bool accepted{true};
    std::vector<EvictedWindow> evicted;
  };

  // Moves the window clock to event_time_ms. Events older than the current
  // window are rejected (counted, not fatal). Each boundary crossed evicts
  // the stale window and returns its B2 snapshot.
  AdvanceResult advance(std::uint64_t event_time_ms);

  // Single observation; advance() must already cover its timestamp. The
  // optional companion is inserted wherever the key is, but only the key
  // decides the outcome.
  RbbfOutcome observe(std::span<const std::uint8_t> key);
  RbbfOutcome observe(std::span<const std::uint8_t> key,
                      std::span<const std::uint8_t> companion);

  unsigned window_count() const { return static_cast<unsigned>(windows_.size()); }
  std::uint64_t bit_count() const { return windows_.front().bit_count(); }
  std::uint32_t window_seconds() const { return window_seconds_; }

  bool started() const { return started_; }
  unsigned current_index() const;
  std::uint64_t current_window_start_ms() const;
  std::uint64_t stale_events_dropped() const { return stale_dropped_; }

  // 2*(M+1) arrays of m bits.
  std::uint64_t allocated_filter_bits() const {
    return 2 * (static_cast<std::uint64_t>(windows_.size()) + 1) * bit_count();
  }

  const BuddyBloomFilter& summary() const { return summary_; }
  const BuddyBloomFilter& window(std::size_t i) const { return windows_[i]; }

  // Non-destructive B2 snapshots of all live windows, oldest first. Used
  // when a stream ends and the in-flight windows must still be reported.
  std::vector<EvictedWindow> snapshot_live_windows() const;

  void clear();

 private:
  std::uint64_t window_ms() const {
    return static_cast<std::uint64_t>(window_seconds_) * 1000;
  }

  std::vector<BuddyBloomFilter> windows_;
  BuddyBloomFilter summary_;
  std::uint32_t window_seconds_;
  bool started_{false};
  std::int64_t current_window_id_{0};
  std::int64_t first_window_id_{0};
  std::vector<std::int64_t> slot_window_id_;
  std::uint64_t stale_dropped_{0};
};

struct RbbfFpBound {
  double bound;  // buddy-filter bound applied to M windows as one set
  double cap;    // looser classic cap at M*N*r_d distinct elements
};

RbbfFpBound rbbf_fp_bound(double k, double m, unsigned window_count,
                          double n_per_window, double r_d);

}  // namespace svcdisco
