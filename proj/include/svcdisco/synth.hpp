#pragma once

// Deterministic labeled workload generator. A stream is assembled from
// per-window stories: bidirectional session pairs (a flow plus its conjugate
// after a short gap), split continuations of those pairs, unidirectional
// noise singles, and optional scan bursts. The pair/single mix is solved
// from the target distinct ratio, so the emitted stream lands within
// rounding of it. Planted service tuples receive one bidirectional story
// per client, with the first two clients of each service in the same window
// so every ground-truth tuple is reachable within any horizon.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "svcdisco/flow.hpp"

namespace svcdisco {

struct GapModel {
  std::uint64_t body_lo_ms{32};
  std::uint64_t body_hi_ms{1024};
  double tail_weight{0.05};        // probability of a long-lived session
  std::uint64_t tail_max_ms{300000};
};

struct ServiceSpec {
  EndNodeTuple tuple;
  unsigned clients{2};
};

struct ScanSpec {
  Addr source;
  unsigned flows_per_window{100};
  std::uint16_t port_lo{1};
  std::uint16_t port_hi{1024};
};

struct SynthConfig {
  std::uint64_t seed{1};
  std::uint32_t duration_seconds{600};
  std::uint32_t window_seconds{300};
  std::uint64_t flows_per_window{1000};
  double r_d{0.5};
  double bidirectional_fraction{-1.0};  // <0: derived from r_d
  GapModel gap;
  std::vector<ServiceSpec> services;
  double split_flow_fraction{0.0};
  std::optional<ScanSpec> scan;
  // Fraction of pairs whose conjugate is forced across the next window
  // boundary.
  double straddle_fraction{0.0};
  // Reproduces the NAT/scanner pitfall: one client keeps its ephemeral
  // port across sessions and so looks like a service.
  bool reuse_client_ports{false};
};

enum class RecordLabel : std::uint8_t {
  ValidBidirectional,
  SplitArtifact,
  Scan,
  Noise,
};

const char* record_label_name(RecordLabel label);

struct LabeledRecord {
  FlowRecord rec;
  RecordLabel label;
};

struct LabeledStream {
  std::vector<LabeledRecord> records;
  std::vector<EndNodeTuple> true_services;

  double empirical_r_d() const;
};

// Streaming form: records are delivered sorted by start time with bounded
// buffering; the full stream is never materialized.
void generate_stream(const SynthConfig& config,
                     const std::function<void(const LabeledRecord&)>& sink);

LabeledStream generate(const SynthConfig& config);

}  // namespace svcdisco
