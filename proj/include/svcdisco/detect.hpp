#pragma once

// Two-stage service-node discovery.
//
// Stage 1 deduplicates flows: each record is observed together with its
// conjugate, so the reply direction of a session, or a split continuation of
// the same flow, counts as the repeat that validates the session. Repeats
// beyond the first are skipped, which strips the artificial duplication the
// collection process introduces.
//
// Stage 2 observes both end-node tuples of every validated flow; a tuple
// seen in two validated flows within the node horizon is a service-node
// candidate and is emitted exactly once per horizon traversal. Evicted
// node-stage B2 planes are handed to a report sink for persistence.

#include <cstdint>
#include <functional>
#include <vector>

#include "svcdisco/flow.hpp"
#include "svcdisco/rbbf.hpp"

namespace svcdisco {

struct StageConfig {
  unsigned windows;
  std::uint64_t m_bits;
  std::uint32_t window_seconds;
};

struct PipelineConfig {
  StageConfig flow_stage{4, 1 << 20, 300};
  StageConfig node_stage{6, 1 << 20, 300};
  HashFamily family{HashFamily::with_k(5)};
  std::uint32_t t0_seconds{300};
  std::uint32_t timeout_seconds{900};
  std::uint32_t active_seconds{1800};

  // ceil(timeout / t0) + 1: enough windows that a flow and its continuation
  // after the exporter timeout still share a live window.
  static unsigned flow_windows_for(std::uint32_t timeout_seconds,
                                   std::uint32_t t0_seconds);

  // Sizes both stages for the false-positive target over each stage's live
  // horizon. Stage 1 inserts both orientations of every distinct flow
  // (2 * flows * r_d elements per window); stage 2 sees two end-node tuples
  // per validated flow (at most 2 * flows * (1 - r_d) distinct per window).
  static PipelineConfig sized(double epsilon, double flows_per_window,
                              double r_d, unsigned node_windows = 6,
                              std::uint32_t t0_seconds = 300,
                              std::uint32_t timeout_seconds = 900);
};

struct ServiceNodeEvent {
  EndNodeTuple tuple;
  std::uint64_t detected_at_ms;
  RbbfOutcome via;  // PromotedCurrent or PromotedHistory
  FlowKey triggering_flow;
};

struct WindowCounters {
  std::uint64_t flows_in{0};
  std::uint64_t flows_validated{0};
  std::uint64_t flows_skipped_known{0};
  std::uint64_t flows_first_seen{0};
  std::uint64_t nodes_promoted{0};
  std::uint64_t stale_events_dropped{0};
};

// Emitted whenever a node-stage window rotates out, plus once per live
// window at finalize. Counters are the tallies accumulated since the
// previous report.
struct WindowReport {
  std::uint64_t window_start_ms;
  BloomFilter node_b2;
  WindowCounters counters;
};

// Every node-stage probe, for callers that shadow the structure's decisions.
struct NodeObservation {
  std::array<std::uint8_t, kEndNodeTupleBytes> key;
  std::uint64_t at_ms;
  std::int64_t window_id;
  RbbfOutcome outcome;
};

class DetectionPipeline {
 public:
  using ReportSink = std::function<void(WindowReport&&)>;
  using NodeProbeSink = std::function<void(const NodeObservation&)>;

  explicit DetectionPipeline(PipelineConfig config, ReportSink report_sink = {},
                             NodeProbeSink node_probe_sink = {});

  // Records must arrive in non-decreasing start order; older records are
  // dropped and counted.
  std::vector<ServiceNodeEvent> process_flow(const FlowRecord& record);

  // Stage 2 alone: observe both end nodes of an already-validated flow.
  std::vector<ServiceNodeEvent> detect_dup_node(const FlowKey& key,
                                                std::uint64_t at_ms);

  // Flushes the live node windows as reports. The pipeline is done after
  // this; further records are refused.
  std::vector<WindowReport> finalize();

  const WindowCounters& totals() const { return totals_; }
  const PipelineConfig& config() const { return config_; }
  const RbbfWindowSet& flow_windows() const { return flow_windows_; }
  const RbbfWindowSet& node_windows() const { return node_windows_; }

  std::uint64_t allocated_filter_bits() const {
    return flow_windows_.allocated_filter_bits() +
           node_windows_.allocated_filter_bits();
  }

 private:
  WindowReport make_report(EvictedWindow&& evicted);

  PipelineConfig config_;
  RbbfWindowSet flow_windows_;
  RbbfWindowSet node_windows_;
  ReportSink report_sink_;
  NodeProbeSink node_probe_sink_;
  WindowCounters totals_;
  WindowCounters pending_;  // since the last window report
  bool finalized_{false};
};

}  // namespace svcdisco
