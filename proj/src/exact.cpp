#include "svcdisco/exact.hpp"

#include <chrono>
#include <stdexcept>

namespace svcdisco {

namespace {

std::string key_string(std::span<const std::uint8_t> key) {
  return std::string(reinterpret_cast<const char*>(key.data()), key.size());
}

// Rough per-entry overhead of an unordered_map node (bucket pointer, next
// pointer, cached hash, allocator slack).
constexpr std::uint64_t kMapNodeOverhead = 48;

}  // namespace

ExactTable::ExactTable(unsigned horizon_windows) : horizon_(horizon_windows) {
  if (horizon_windows < 1) {
    throw std::invalid_argument("horizon must be at least one window");
  }
}

ExactOutcome ExactTable::observe(std::span<const std::uint8_t> key,
                                 std::int64_t window_index) {
  auto [it, fresh] = entries_.try_emplace(key_string(key));
  Entry& e = it->second;
  if (fresh) {
    key_bytes_ += key.size();
    e.first_window = window_index;
  }
  const bool within_horizon =
      !fresh && window_index - e.last_window <= static_cast<std::int64_t>(horizon_) - 1;
  ++e.count;
  e.last_window = window_index;
  return (e.count >= 2 && within_horizon) ? ExactOutcome::Duplicate
                                          : ExactOutcome::FirstSeen;
}

std::uint64_t ExactTable::memory_bytes() const {
  return key_bytes_ + entries_.size() * (sizeof(Entry) + kMapNodeOverhead);
}

ShadowHistory::ShadowHistory(unsigned horizon_windows)
    : horizon_(horizon_windows) {
  if (horizon_windows < 1) {
    throw std::invalid_argument("horizon must be at least one window");
  }
}

bool ShadowHistory::inserted_within_horizon(std::span<const std::uint8_t> key,
                                            std::int64_t window_index) const {
  auto it = last_insert_.find(key_string(key));
  if (it == last_insert_.end()) return false;
  return window_index - it->second <= static_cast<std::int64_t>(horizon_) - 1;
}

void ShadowHistory::apply(std::span<const std::uint8_t> key,
                          std::int64_t window_index, RbbfOutcome outcome) {
  // SkipKnown performs no insertion; every other outcome writes the key
  // into the current window's B1 (and possibly B2, which B1 covers).
  if (outcome == RbbfOutcome::SkipKnown) return;
  last_insert_[key_string(key)] = window_index;
}

ComparisonReport compare_runs(const std::vector<FlowRecord>& stream,
                              const PipelineConfig& config) {
  using clock = std::chrono::steady_clock;
  ComparisonReport report;
  report.flows_processed = stream.size();

  // Approximate side, with every node probe graded against the shadow
  // record of actual insertions.
  ShadowHistory shadow(config.node_stage.windows);
  DetectionPipeline pipeline(
      config, {}, [&](const NodeObservation& obs) {
        ++report.events_compared;
        const bool exact_positive =
            shadow.inserted_within_horizon(obs.key, obs.window_id);
        const bool approx_positive = obs.outcome != RbbfOutcome::FirstSeen;
        if (exact_positive == approx_positive) {
          ++report.agreements;
        } else if (approx_positive) {
          ++report.false_positives;
        } else {
          ++report.false_negatives;
        }
        shadow.apply(obs.key, obs.window_id, obs.outcome);
      });

  const auto approx_start = clock::now();
  for (const auto& rec : stream) {
    report.service_events += pipeline.process_flow(rec).size();
  }
  const auto approx_end = clock::now();

  // Conventional side: a counter per canonical flow key, then a counter per
  // end-node tuple of every newly validated flow.
  const std::uint64_t gamma_flow_ms =
      static_cast<std::uint64_t>(config.flow_stage.window_seconds) * 1000;
  const std::uint64_t gamma_node_ms =
      static_cast<std::uint64_t>(config.node_stage.window_seconds) * 1000;
  ExactTable exact_flows(config.flow_stage.windows);
  ExactTable exact_nodes(config.node_stage.windows);
  std::uint64_t exact_services = 0;

  const auto exact_start = clock::now();
  for (const auto& rec : stream) {
    const auto flow_window =
        static_cast<std::int64_t>(rec.start_ms / gamma_flow_ms);
    const auto canon = canonical_flow_key(rec.key);
    if (exact_flows.observe(canon, flow_window) != ExactOutcome::Duplicate) {
      continue;
    }
    const auto node_window =
        static_cast<std::int64_t>(rec.start_ms / gamma_node_ms);
    const auto nodes = end_nodes(rec.key);
    for (const EndNodeTuple& tuple : {nodes.src, nodes.dst}) {
      if (exact_nodes.observe(serialize_tuple(tuple), node_window) ==
          ExactOutcome::Duplicate) {
        ++exact_services;
      }
    }
  }
  const auto exact_end = clock::now();
  (void)exact_services;

  report.fp_rate = report.events_compared
                       ? static_cast<double>(report.false_positives) /
                             static_cast<double>(report.events_compared)
                       : 0.0;
  report.node_distinct_tuples = shadow.entry_count();
  report.exact_memory_bytes =
      exact_flows.memory_bytes() + exact_nodes.memory_bytes();
  report.approx_memory_bytes = pipeline.allocated_filter_bits() / 8;
  if (!stream.empty()) {
    const double n = static_cast<double>(stream.size());
    report.approx_ns_per_flow =
        std::chrono::duration<double, std::nano>(approx_end - approx_start)
            .count() /
        n;
    report.exact_ns_per_flow =
        std::chrono::duration<double, std::nano>(exact_end - exact_start)
            .count() /
        n;
  }
  return report;
}

}  // namespace svcdisco
