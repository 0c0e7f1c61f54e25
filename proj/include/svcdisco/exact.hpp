#pragma once

// Exact reference detectors. ExactTable is the conventional hash-table
// duplicate detector (one counter per key, conjugate directions collapsed by
// the caller via canonical_flow_key); it exists for ground truth, testing and
// the space/time baseline, not for production use.
//
// compare_runs replays a stream through the approximate pipeline and grades
// every node-stage decision against an exact record of what the filters
// actually inserted. Under that grading, a false negative would mean a
// Bloom array lost an inserted element, so the count must be zero; false
// positives are the hash-collision events the analytical bounds cap.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "svcdisco/detect.hpp"
#include "svcdisco/flow.hpp"

namespace svcdisco {

enum class ExactOutcome : std::uint8_t {
  FirstSeen,
  Duplicate,
};

class ExactTable {
 public:
  // horizon_windows mirrors the round-robin eviction: a prior occurrence
  // counts only if it happened at most horizon_windows-1 windows ago.
  explicit ExactTable(unsigned horizon_windows);

  ExactOutcome observe(std::span<const std::uint8_t> key,
                       std::int64_t window_index);

  std::size_t entry_count() const { return entries_.size(); }

  // Analytic footprint: stored key bytes plus per-entry bookkeeping and
  // hash-table node overhead.
  std::uint64_t memory_bytes() const;

 private:
  struct Entry {
    std::uint64_t count{0};
    std::int64_t last_window{0};
    std::int64_t first_window{0};
  };

  unsigned horizon_;
  std::unordered_map<std::string, Entry> entries_;
  std::uint64_t key_bytes_{0};
};

// Membership record of the node-stage filters' actual insertions, exact to
// the window. Updated from observed outcomes, queried before applying them.
class ShadowHistory {
 public:
  explicit ShadowHistory(unsigned horizon_windows);

  bool inserted_within_horizon(std::span<const std::uint8_t> key,
                               std::int64_t window_index) const;

  void apply(std::span<const std::uint8_t> key, std::int64_t window_index,
             RbbfOutcome outcome);

  std::size_t entry_count() const { return last_insert_.size(); }

 private:
  unsigned horizon_;
  std::unordered_map<std::string, std::int64_t> last_insert_;
};

struct ComparisonReport {
  std::uint64_t flows_processed{0};
  std::uint64_t events_compared{0};  // node-stage observations
  std::uint64_t agreements{0};
  std::uint64_t false_positives{0};
  std::uint64_t false_negatives{0};
  double fp_rate{0.0};
  std::uint64_t node_distinct_tuples{0};

  std::uint64_t exact_memory_bytes{0};
  std::uint64_t approx_memory_bytes{0};
  double exact_ns_per_flow{0.0};
  double approx_ns_per_flow{0.0};

  std::uint64_t service_events{0};
};

// Runs the approximate pipeline and the hash-table pipeline over the same
// records (the vector is replayed once per side).
ComparisonReport compare_runs(const std::vector<FlowRecord>& stream,
                              const PipelineConfig& config);

}  // namespace svcdisco
