#include "svcdisco/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace svcdisco {

unsigned PipelineConfig::flow_windows_for(std::uint32_t timeout_seconds,
                                          std::uint32_t t0_seconds) {
  if (t0_seconds == 0) throw std::invalid_argument("t0 must be positive");
  return static_cast<unsigned>(
             (timeout_seconds + t0_seconds - 1) / t0_seconds) +
         1;
}

PipelineConfig PipelineConfig::sized(double epsilon, double flows_per_window,
                                     double r_d, unsigned node_windows,
                                     std::uint32_t t0_seconds,
                                     std::uint32_t timeout_seconds) {
  if (!(r_d > 0.0 && r_d <= 1.0)) {
    throw std::invalid_argument("r_d must be in (0,1]");
  }
  PipelineConfig cfg;
  cfg.t0_seconds = t0_seconds;
  cfg.timeout_seconds = timeout_seconds;
  unsigned n_flow = flow_windows_for(timeout_seconds, t0_seconds);
  const double flow_elements = 2.0 * flows_per_window * r_d;
  const double node_elements =
      std::max(2.0 * flows_per_window * (1.0 - r_d), flows_per_window * 0.05);
  auto flow_sizing =
      optimal_params(epsilon, std::max(1.0, n_flow * flow_elements));
  auto node_sizing =
      optimal_params(epsilon, std::max(1.0, node_windows * node_elements));
  cfg.family = HashFamily::with_k(flow_sizing.k_opt);
  cfg.flow_stage = {n_flow, flow_sizing.m_min_bits, t0_seconds};
  cfg.node_stage = {node_windows, node_sizing.m_min_bits, t0_seconds};
  return cfg;
}

DetectionPipeline::DetectionPipeline(PipelineConfig config,
                                     ReportSink report_sink,
                                     NodeProbeSink node_probe_sink)
    : config_(std::move(config)),
      flow_windows_(config_.flow_stage.windows, config_.flow_stage.m_bits,
                    config_.family, config_.flow_stage.window_seconds),
      node_windows_(config_.node_stage.windows, config_.node_stage.m_bits,
                    config_.family, config_.node_stage.window_seconds),
      report_sink_(std::move(report_sink)),
      node_probe_sink_(std::move(node_probe_sink)) {}

WindowReport DetectionPipeline::make_report(EvictedWindow&& evicted) {
  WindowReport report{evicted.window_start_ms, std::move(evicted.b2),
                      pending_};
  pending_ = WindowCounters{};
  return report;
}

std::vector<ServiceNodeEvent> DetectionPipeline::process_flow(
    const FlowRecord& record) {
  if (finalized_) throw std::logic_error("pipeline already finalized");
  ++totals_.flows_in;
  ++pending_.flows_in;

  auto advanced = flow_windows_.advance(record.start_ms);
  if (!advanced.accepted) {
    ++totals_.stale_events_dropped;
    ++pending_.stale_events_dropped;
    return {};
  }
  // Flow-stage evictions carry no reportable payload; only the node stage
  // outputs B2 planes.

  const auto key = serialize_key(record.key);
  const auto comp = serialize_key(conjugate(record.key));
  switch (flow_windows_.observe(key, comp)) {
    case RbbfOutcome::SkipKnown:
      ++totals_.flows_skipped_known;
      ++pending_.flows_skipped_known;
      return {};
    case RbbfOutcome::FirstSeen:
      ++totals_.flows_first_seen;
      ++pending_.flows_first_seen;
      return {};
    case RbbfOutcome::PromotedCurrent:
    case RbbfOutcome::PromotedHistory:
      ++totals_.flows_validated;
      ++pending_.flows_validated;
      return detect_dup_node(record.key, record.start_ms);
  }
  return {};
}

std::vector<ServiceNodeEvent> DetectionPipeline::detect_dup_node(
    const FlowKey& key, std::uint64_t at_ms) {
  if (finalized_) throw std::logic_error("pipeline already finalized");
  std::vector<ServiceNodeEvent> events;
  const auto nodes = end_nodes(key);
  for (const EndNodeTuple& tuple : {nodes.src, nodes.dst}) {
    auto advanced = node_windows_.advance(at_ms);
    if (!advanced.accepted) continue;  // node clock ahead of this timestamp
    for (auto& evicted : advanced.evicted) {
      if (report_sink_) report_sink_(make_report(std::move(evicted)));
    }
    const auto tuple_key = serialize_tuple(tuple);
    const RbbfOutcome outcome = node_windows_.observe(tuple_key);
    if (node_probe_sink_) {
      const std::int64_t window_id = static_cast<std::int64_t>(
          at_ms / (static_cast<std::uint64_t>(
                       config_.node_stage.window_seconds) *
                   1000));
      node_probe_sink_({tuple_key, at_ms, window_id, outcome});
    }
    if (outcome == RbbfOutcome::PromotedCurrent ||
        outcome == RbbfOutcome::PromotedHistory) {
      ++totals_.nodes_promoted;
      ++pending_.nodes_promoted;
      events.push_back(ServiceNodeEvent{tuple, at_ms, outcome, key});
    }
  }
  return events;
}

std::vector<WindowReport> DetectionPipeline::finalize() {
  if (finalized_) throw std::logic_error("pipeline already finalized");
  finalized_ = true;
  std::vector<WindowReport> reports;
  auto live = node_windows_.snapshot_live_windows();
  if (live.empty()) {
    reports.push_back(WindowReport{
        0, BloomFilter(config_.node_stage.m_bits, config_.family), pending_});
    pending_ = WindowCounters{};
  } else {
    for (std::size_t i = 0; i < live.size(); ++i) {
      if (i + 1 == live.size()) {
        reports.push_back(make_report(std::move(live[i])));
      } else {
        reports.push_back(WindowReport{live[i].window_start_ms,
                                       std::move(live[i].b2),
                                       WindowCounters{}});
      }
    }
  }
  if (report_sink_) {
    for (auto& r : reports) {
      report_sink_(WindowReport{r.window_start_ms, r.node_b2, r.counters});
    }
  }
  return reports;
}

}  // namespace svcdisco
