#include "svcdisco/synth.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace svcdisco {

namespace {

struct WindowMix {
  std::uint64_t pairs;    // plain bidirectional stories (2 records)
  std::uint64_t splits;   // bidirectional + one split record (3 records)
  std::uint64_t singles;  // unidirectional records, scans included
};

WindowMix solve_mix(const SynthConfig& cfg) {
  const double T = static_cast<double>(cfg.flows_per_window);
  const double s = cfg.split_flow_fraction;
  if (!(cfg.r_d > 0.0 && cfg.r_d <= 1.0)) {
    throw std::invalid_argument("r_d must be in (0,1]");
  }
  if (s < 0.0 || s >= 1.0) {
    throw std::invalid_argument("split_flow_fraction must be in [0,1)");
  }
  if (cfg.r_d >= 1.0 && cfg.bidirectional_fraction > 0.0) {
    throw std::invalid_argument(
        "r_d=1 leaves no room for bidirectional pairs");
  }
  if (cfg.bidirectional_fraction >= 0.0) {
    const double implied = (2.0 + s) * (1.0 - cfg.r_d) / (1.0 + s);
    if (std::abs(cfg.bidirectional_fraction - implied) > 0.05) {
      throw std::invalid_argument(
          "bidirectional_fraction inconsistent with r_d target");
    }
  }

  // Preferred mix honours the configured split fraction; when r_d is below
  // what pairs alone can reach (1/(2+s)), singles drop to zero and the
  // pair/split balance is re-solved for the target. Below 1/3 even
  // all-splits cannot get there.
  std::uint64_t pairs, splits;
  const double stories = T * (1.0 - cfg.r_d) / (1.0 + s);
  splits = static_cast<std::uint64_t>(std::llround(stories * s));
  auto pairs_total = static_cast<std::uint64_t>(std::llround(stories));
  if (splits > pairs_total) splits = pairs_total;
  pairs = pairs_total - splits;
  if (2 * pairs + 3 * splits > cfg.flows_per_window) {
    if (cfg.r_d < 1.0 / 3.0 - 1e-9) {
      throw std::invalid_argument(
          "r_d target below 1/3 is infeasible with sessions of at most "
          "three records");
    }
    splits = static_cast<std::uint64_t>(std::llround(T * (1.0 - 2.0 * cfg.r_d)));
    auto records_left = cfg.flows_per_window - 3 * splits;
    pairs = records_left / 2;  // r_d*T*3 - T, rounded via the record budget
  }
  const std::uint64_t paired_records = 2 * pairs + 3 * splits;
  if (paired_records > cfg.flows_per_window) {
    throw std::invalid_argument("r_d target infeasible at this window size");
  }
  const std::uint64_t singles = cfg.flows_per_window - paired_records;
  const std::uint64_t scan_records =
      cfg.scan ? cfg.scan->flows_per_window : 0;
  if (scan_records > singles) {
    throw std::invalid_argument("scan burst exceeds the unidirectional budget");
  }
  return {pairs, splits, singles};
}

class StoryFactory {
 public:
  explicit StoryFactory(const SynthConfig& cfg)
      : cfg_(cfg), rng_(cfg.seed) {}

  std::uint64_t draw_gap() {
    if (cfg_.gap.tail_weight > 0.0 && unit_(rng_) < cfg_.gap.tail_weight) {
      return draw_log_uniform(cfg_.gap.body_hi_ms, cfg_.gap.tail_max_ms);
    }
    return draw_log_uniform(cfg_.gap.body_lo_ms, cfg_.gap.body_hi_ms);
  }

  Addr next_server_addr() {
    const std::uint32_t c = server_counter_++;
    return make_addr_v4(10, static_cast<std::uint8_t>(c >> 16),
                        static_cast<std::uint8_t>(c >> 8),
                        static_cast<std::uint8_t>(c));
  }

  EndNodeTuple next_client() {
    const std::uint32_t c = client_counter_++;
    Addr addr = make_addr_v4(static_cast<std::uint8_t>(172),
                             static_cast<std::uint8_t>(16 + ((c >> 16) & 15)),
                             static_cast<std::uint8_t>(c >> 8),
                             static_cast<std::uint8_t>(c));
    std::uint16_t port = ephemeral_(rng_);
    return {addr, port, kProtoTcp};
  }

  std::mt19937_64& rng() { return rng_; }
  double unit() { return unit_(rng_); }

 private:
  std::uint64_t draw_log_uniform(std::uint64_t lo, std::uint64_t hi) {
    if (hi <= lo) return lo;
    const double llo = std::log(static_cast<double>(lo));
    const double lhi = std::log(static_cast<double>(hi));
    const double v = std::exp(llo + unit_(rng_) * (lhi - llo));
    auto ms = static_cast<std::uint64_t>(v);
    return std::clamp(ms, lo, hi);
  }

  const SynthConfig& cfg_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::uniform_int_distribution<std::uint16_t> ephemeral_{49152, 65535};
  std::uint32_t server_counter_{0};
  std::uint32_t client_counter_{0};
};

struct Pending {
  LabeledRecord item;
  std::uint64_t seq;
};

struct PendingAfter {
  bool operator()(const Pending& a, const Pending& b) const {
    if (a.item.rec.start_ms != b.item.rec.start_ms) {
      return a.item.rec.start_ms > b.item.rec.start_ms;
    }
    return a.seq > b.seq;
  }
};

FlowRecord make_record(const FlowKey& key, std::uint64_t start_ms,
                       std::uint64_t duration_ms, std::uint64_t packets,
                       std::uint64_t bytes) {
  return FlowRecord{key, start_ms, start_ms + duration_ms, packets, bytes};
}

}  // namespace

const char* record_label_name(RecordLabel label) {
  switch (label) {
    case RecordLabel::ValidBidirectional: return "valid_bidirectional";
    case RecordLabel::SplitArtifact: return "split_artifact";
    case RecordLabel::Scan: return "scan";
    case RecordLabel::Noise: return "noise";
  }
  return "?";
}

double LabeledStream::empirical_r_d() const {
  if (records.empty()) return 0.0;
  std::set<std::array<std::uint8_t, kFlowKeyBytes>> distinct;
  for (const auto& r : records) {
    distinct.insert(canonical_flow_key(r.rec.key));
  }
  return static_cast<double>(distinct.size()) /
         static_cast<double>(records.size());
}

void generate_stream(const SynthConfig& cfg,
                     const std::function<void(const LabeledRecord&)>& sink) {
  if (cfg.window_seconds == 0) {
    throw std::invalid_argument("window_seconds must be positive");
  }
  if (cfg.duration_seconds < cfg.window_seconds) {
    throw std::invalid_argument("duration shorter than one window");
  }
  if (cfg.straddle_fraction < 0.0 || cfg.straddle_fraction > 1.0) {
    throw std::invalid_argument("straddle_fraction must be in [0,1]");
  }
  for (const auto& svc : cfg.services) {
    if (svc.tuple.proto != kProtoTcp && svc.tuple.proto != kProtoUdp) {
      throw std::invalid_argument("service proto must be TCP or UDP");
    }
  }

  const WindowMix mix = solve_mix(cfg);
  const std::uint64_t gamma_ms =
      static_cast<std::uint64_t>(cfg.window_seconds) * 1000;
  const std::uint64_t window_count = cfg.duration_seconds / cfg.window_seconds;

  // Service stories per window: clients 0 and 1 share the service's home
  // window, the rest round-robin across the run.
  std::vector<std::vector<ServiceSpec>> service_stories(window_count);
  for (std::size_t si = 0; si < cfg.services.size(); ++si) {
    const auto& svc = cfg.services[si];
    const std::uint64_t home = si % window_count;
    for (unsigned c = 0; c < svc.clients; ++c) {
      const std::uint64_t w =
          c < 2 ? home : (home + (c - 1)) % window_count;
      service_stories[w].push_back({svc.tuple, 1});
    }
  }
  for (std::uint64_t w = 0; w < window_count; ++w) {
    if (service_stories[w].size() > mix.pairs) {
      throw std::invalid_argument(
          "service profile exceeds the bidirectional budget per window");
    }
  }

  StoryFactory factory(cfg);
  std::priority_queue<Pending, std::vector<Pending>, PendingAfter> heap;
  std::uint64_t seq = 0;
  auto push = [&](const FlowRecord& rec, RecordLabel label) {
    heap.push(Pending{LabeledRecord{rec, label}, seq++});
  };
  auto flush_until = [&](std::uint64_t limit_ms) {
    while (!heap.empty() && heap.top().item.rec.start_ms < limit_ms) {
      sink(heap.top().item);
      heap.pop();
    }
  };

  const EndNodeTuple nat_client{make_addr_v4(172, 31, 255, 1), 55555,
                                kProtoTcp};

  for (std::uint64_t w = 0; w < window_count; ++w) {
    const std::uint64_t win_start = w * gamma_ms;
    const std::uint64_t win_end = win_start + gamma_ms;
    std::uniform_int_distribution<std::uint64_t> in_window(win_start,
                                                           win_end - 1);

    auto emit_pair = [&](const EndNodeTuple& server,
                         const EndNodeTuple& client, bool straddle,
                         bool split) {
      std::uint64_t gap = factory.draw_gap();
      std::uint64_t t_req;
      if (straddle) {
        gap = std::min<std::uint64_t>(factory.draw_gap(), 1024);
        if (gap == 0) gap = 1;
        const std::uint64_t lo =
            win_end > gap ? win_end - gap : win_start;
        std::uniform_int_distribution<std::uint64_t> near_edge(lo, win_end - 1);
        t_req = near_edge(factory.rng());
      } else {
        t_req = in_window(factory.rng());
      }
      FlowKey request{client.addr, server.addr, client.port, server.port,
                      server.proto};
      push(make_record(request, t_req, gap, 4, 512),
           RecordLabel::ValidBidirectional);
      push(make_record(conjugate(request), t_req + gap, 10, 3, 1024),
           RecordLabel::ValidBidirectional);
      if (split) {
        std::uniform_int_distribution<std::uint64_t> delta(1, gamma_ms / 2);
        push(make_record(request, t_req + delta(factory.rng()), 5, 2, 256),
             RecordLabel::SplitArtifact);
      }
    };

    std::uint64_t pair_budget = mix.pairs;
    for (const auto& svc : service_stories[w]) {
      emit_pair(svc.tuple, factory.next_client(),
                factory.unit() < cfg.straddle_fraction, false);
      --pair_budget;
    }
    if (cfg.reuse_client_ports && pair_budget > 0) {
      EndNodeTuple server{factory.next_server_addr(), 443, kProtoTcp};
      emit_pair(server, nat_client, false, false);
      --pair_budget;
    }
    for (std::uint64_t i = 0; i < pair_budget; ++i) {
      EndNodeTuple server{factory.next_server_addr(), 8000, kProtoTcp};
      emit_pair(server, factory.next_client(),
                factory.unit() < cfg.straddle_fraction, false);
    }
    for (std::uint64_t i = 0; i < mix.splits; ++i) {
      EndNodeTuple server{factory.next_server_addr(), 8000, kProtoTcp};
      emit_pair(server, factory.next_client(),
                factory.unit() < cfg.straddle_fraction, true);
    }

    std::uint64_t single_budget = mix.singles;
    if (cfg.scan) {
      const auto& scan = *cfg.scan;
      const std::uint32_t span =
          static_cast<std::uint32_t>(scan.port_hi - scan.port_lo) + 1;
      const Addr target = make_addr_v4(192, 0, 2, 1);
      for (unsigned i = 0; i < scan.flows_per_window; ++i) {
        EndNodeTuple probe_src = factory.next_client();
        FlowKey key{scan.source, target, probe_src.port,
                    static_cast<std::uint16_t>(scan.port_lo + (i % span)),
                    kProtoTcp};
        push(make_record(key, in_window(factory.rng()), 1, 1, 40),
             RecordLabel::Scan);
        --single_budget;
      }
    }
    for (std::uint64_t i = 0; i < single_budget; ++i) {
      EndNodeTuple server{factory.next_server_addr(), 9000, kProtoTcp};
      EndNodeTuple client = factory.next_client();
      FlowKey key{client.addr, server.addr, client.port, server.port,
                  kProtoTcp};
      push(make_record(key, in_window(factory.rng()), 2, 1, 64),
           RecordLabel::Noise);
    }

    flush_until(win_end);
  }
  flush_until(~0ull);
}

LabeledStream generate(const SynthConfig& cfg) {
  LabeledStream stream;
  generate_stream(cfg, [&](const LabeledRecord& r) {
    stream.records.push_back(r);
  });
  for (const auto& svc : cfg.services) {
    if (svc.clients >= 2) stream.true_services.push_back(svc.tuple);
  }
  return stream;
}

}  // namespace svcdisco
