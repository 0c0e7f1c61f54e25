#include "svcdisco/rbbf.hpp"

#include <stdexcept>

namespace svcdisco {

const char* rbbf_outcome_name(RbbfOutcome o) {
  switch (o) {
    case RbbfOutcome::SkipKnown: return "skip_known";
    case RbbfOutcome::FirstSeen: return "first_seen";
    case RbbfOutcome::PromotedCurrent: return "promoted_current";
    case RbbfOutcome::PromotedHistory: return "promoted_history";
  }
  return "?";
}

BuddyBloomFilter rebuild_summary(std::span<const BuddyBloomFilter> windows,
                                 std::size_t stale_index) {
  if (windows.empty()) throw std::invalid_argument("no windows");
  if (stale_index >= windows.size()) {
    throw std::invalid_argument("stale index out of range");
  }
  for (const auto& w : windows) {
    if (!w.same_shape(windows.front())) {
      throw IncompatibleFilters("window filters differ in shape");
    }
  }
  BuddyBloomFilter out(windows.front().bit_count(), windows.front().family());
  for (std::size_t j = 0; j < windows.size(); ++j) {
    if (j == stale_index) continue;
    out.b1().merge(windows[j].b1());
    out.b2().merge(windows[j].b2());
  }
  return out;
}

RbbfWindowSet::RbbfWindowSet(unsigned window_count, std::uint64_t m_bits,
                             const HashFamily& family,
                             std::uint32_t window_seconds)
    : summary_(m_bits, family), window_seconds_(window_seconds) {
  if (window_count < 1) throw std::invalid_argument("need at least one window");
  if (window_seconds < 1) throw std::invalid_argument("window width must be positive");
  windows_.reserve(window_count);
  for (unsigned i = 0; i < window_count; ++i) {
    windows_.emplace_back(m_bits, family);
  }
  slot_window_id_.assign(window_count, 0);
}

unsigned RbbfWindowSet::current_index() const {
  const auto m = static_cast<std::int64_t>(windows_.size());
  return static_cast<unsigned>(((current_window_id_ % m) + m) % m);
}

std::uint64_t RbbfWindowSet::current_window_start_ms() const {
  return static_cast<std::uint64_t>(current_window_id_) * window_ms();
}

RbbfWindowSet::AdvanceResult RbbfWindowSet::advance(std::uint64_t event_time_ms) {
  AdvanceResult result;
  const auto wid = static_cast<std::int64_t>(event_time_ms / window_ms());
  const auto m = static_cast<std::int64_t>(windows_.size());

  if (!started_) {
    started_ = true;
    current_window_id_ = wid;
    first_window_id_ = wid;
    // Historic slots notionally hold the (empty) windows preceding the first.
    for (std::int64_t i = 0; i < m; ++i) {
      std::int64_t delta = (((wid - i) % m) + m) % m;
      slot_window_id_[static_cast<std::size_t>(i)] = wid - delta;
    }
    return result;
  }

  if (event_time_ms < current_window_start_ms()) {
    ++stale_dropped_;
    result.accepted = false;
    return result;
  }
  if (wid == current_window_id_) return result;

  std::int64_t steps = wid - current_window_id_;
  // Crossings beyond M only rotate through windows already cleared below.
  std::int64_t evict_steps = steps < m ? steps : m;
  std::int64_t first_new_id = wid - evict_steps + 1;
  for (std::int64_t j = 0; j < evict_steps; ++j) {
    std::int64_t new_id = first_new_id + j;
    auto slot = static_cast<std::size_t>(((new_id % m) + m) % m);
    std::int64_t old_id = slot_window_id_[slot];
    if (old_id >= first_window_id_) {
      result.evicted.push_back(EvictedWindow{
          static_cast<std::uint64_t>(old_id) * window_ms(),
          windows_[slot].b2()});
    }
    windows_[slot].clear();
    slot_window_id_[slot] = new_id;
  }
  current_window_id_ = wid;
  summary_ = rebuild_summary(windows_, current_index());
  return result;
}

RbbfOutcome RbbfWindowSet::observe(std::span<const std::uint8_t> key) {
  return observe(key, {});
}

RbbfOutcome RbbfWindowSet::observe(std::span<const std::uint8_t> key,
                                   std::span<const std::uint8_t> companion) {
  if (!started_) {
    throw std::logic_error("observe before advance: window clock not started");
  }
  BuddyBloomFilter& cur = windows_[current_index()];
  // Every filter in the set shares m and the family: hash once.
  const HashFamily& family = summary_.family();
  const std::uint64_t m = bit_count();
  std::array<std::uint64_t, 8> key_buf;
  family.positions(key, m, key_buf);
  const std::span<const std::uint64_t> kpos{key_buf.data(), family.k()};
  std::array<std::uint64_t, 8> comp_buf;
  std::span<const std::uint64_t> cpos;
  if (!companion.empty()) {
    family.positions(companion, m, comp_buf);
    cpos = {comp_buf.data(), family.k()};
  }

  if (summary_.b2().contains_positions(kpos)) return RbbfOutcome::SkipKnown;
  if (cur.b2().contains_positions(kpos)) return RbbfOutcome::SkipKnown;
  if (cur.b1().contains_positions(kpos)) {
    cur.b2().insert_positions(kpos);
    if (!cpos.empty()) cur.b2().insert_positions(cpos);
    return RbbfOutcome::PromotedCurrent;
  }
  cur.b1().insert_positions(kpos);
  if (!cpos.empty()) cur.b1().insert_positions(cpos);
  if (summary_.b1().contains_positions(kpos)) {
    cur.b2().insert_positions(kpos);
    if (!cpos.empty()) cur.b2().insert_positions(cpos);
    return RbbfOutcome::PromotedHistory;
  }
  return RbbfOutcome::FirstSeen;
}

std::vector<EvictedWindow> RbbfWindowSet::snapshot_live_windows() const {
  std::vector<EvictedWindow> out;
  if (!started_) return out;
  const auto m = static_cast<std::int64_t>(windows_.size());
  for (std::int64_t id = current_window_id_ - m + 1; id <= current_window_id_; ++id) {
    auto slot = static_cast<std::size_t>(((id % m) + m) % m);
    if (slot_window_id_[slot] != id || id < first_window_id_) continue;
    out.push_back(EvictedWindow{static_cast<std::uint64_t>(id) * window_ms(),
                                windows_[slot].b2()});
  }
  return out;
}

void RbbfWindowSet::clear() {
  for (auto& w : windows_) w.clear();
  summary_.clear();
  started_ = false;
  stale_dropped_ = 0;
}

RbbfFpBound rbbf_fp_bound(double k, double m, unsigned window_count,
                          double n_per_window, double r_d) {
  const double n_total = static_cast<double>(window_count) * n_per_window;
  return RbbfFpBound{
      bbf_fp_bound(k, m, n_total, r_d),
      fp_rate_classic(k, m, n_total * r_d),
  };
}

}  // namespace svcdisco
