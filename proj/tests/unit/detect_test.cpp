#include <doctest.h>

#include <set>

#include "svcdisco/detect.hpp"

using namespace svcdisco;

namespace {

constexpr std::uint64_t kGammaMs = 300 * 1000;

PipelineConfig tight_config() {
  // Generous sizing so collision noise cannot blur small scenarios.
  // eps 0.005 is the tightest target the 8-member hash family can carry.
  auto cfg = PipelineConfig::sized(0.005, 2000, 0.5);
  return cfg;
}

FlowRecord flow(const Addr& src, std::uint16_t sport, const Addr& dst,
                std::uint16_t dport, std::uint64_t at_ms) {
  FlowRecord rec;
  rec.key = FlowKey{src, dst, sport, dport, kProtoTcp};
  rec.start_ms = at_ms;
  rec.end_ms = at_ms + 10;
  rec.packets = 3;
  rec.bytes = 128;
  return rec;
}

FlowRecord reply(const FlowRecord& request, std::uint64_t at_ms) {
  FlowRecord rec = request;
  rec.key = conjugate(request.key);
  rec.start_ms = at_ms;
  rec.end_ms = at_ms + 10;
  return rec;
}

}  // namespace

TEST_CASE("flow window count follows the timeout rule") {
  CHECK(PipelineConfig::flow_windows_for(900, 300) == 4);
  CHECK(PipelineConfig::flow_windows_for(900, 450) == 3);
  CHECK(PipelineConfig::flow_windows_for(1000, 300) == 5);
  CHECK_THROWS_AS(PipelineConfig::flow_windows_for(900, 0),
                  std::invalid_argument);
}

TEST_CASE("a lone unidirectional flow produces nothing") {
  DetectionPipeline p(tight_config());
  auto f = flow(make_addr_v4(10, 0, 0, 1), 50000, make_addr_v4(10, 0, 0, 2),
                80, 1000);
  CHECK(p.process_flow(f).empty());
  CHECK(p.totals().flows_first_seen == 1);
  CHECK(p.totals().flows_validated == 0);
  CHECK(p.totals().nodes_promoted == 0);
}

TEST_CASE("a bidirectional session validates on the reply") {
  DetectionPipeline p(tight_config());
  auto f = flow(make_addr_v4(10, 0, 0, 1), 50000, make_addr_v4(10, 0, 0, 2),
                80, 1000);
  CHECK(p.process_flow(f).empty());
  // First session alone cannot promote a tuple; both end nodes are fresh.
  auto events = p.process_flow(reply(f, 1100));
  CHECK(events.empty());
  CHECK(p.totals().flows_validated == 1);
  // But both tuples entered the node stage: a second session to the same
  // server from another client promotes the server tuple.
  auto g = flow(make_addr_v4(10, 0, 0, 3), 51111, make_addr_v4(10, 0, 0, 2),
                80, 2000);
  CHECK(p.process_flow(g).empty());
  events = p.process_flow(reply(g, 2100));
  REQUIRE(events.size() == 1);
  CHECK(events[0].tuple.addr == make_addr_v4(10, 0, 0, 2));
  CHECK(events[0].tuple.port == 80);
  CHECK(events[0].via == RbbfOutcome::PromotedCurrent);
  CHECK(events[0].detected_at_ms == 2100);
}

TEST_CASE("split flows hit the node stage exactly once") {
  DetectionPipeline p(tight_config());
  auto f = flow(make_addr_v4(10, 1, 0, 1), 50000, make_addr_v4(10, 1, 0, 2),
                443, 1000);
  p.process_flow(f);
  p.process_flow(reply(f, 1200));  // validates, node stage runs once
  CHECK(p.totals().flows_validated == 1);

  FlowRecord split = f;
  split.start_ms = 5000;
  split.end_ms = 5010;
  CHECK(p.process_flow(split).empty());
  CHECK(p.totals().flows_skipped_known == 1);
  CHECK(p.totals().flows_validated == 1);  // no second validation
}

TEST_CASE("exact repeats of the same 5-tuple do not re-enter the node stage") {
  DetectionPipeline p(tight_config());
  auto f = flow(make_addr_v4(10, 2, 0, 1), 50000, make_addr_v4(10, 2, 0, 2),
                80, 1000);
  p.process_flow(f);
  FlowRecord again = f;
  again.start_ms = 1500;
  auto events = p.process_flow(again);  // same orientation repeat: split
  CHECK(events.empty());
  CHECK(p.totals().flows_validated == 1);
  // Third copy is already remembered.
  again.start_ms = 1600;
  CHECK(p.process_flow(again).empty());
  CHECK(p.totals().flows_skipped_known == 1);
}

TEST_CASE("server across node windows is re-found through history") {
  auto cfg = tight_config();
  DetectionPipeline p(cfg);
  const auto server = make_addr_v4(10, 3, 0, 2);

  // Window 0: one validated session.
  auto f1 = flow(make_addr_v4(10, 3, 0, 1), 50000, server, 80, 1000);
  p.process_flow(f1);
  p.process_flow(reply(f1, 1100));

  // Window 1: another client, same service.
  auto f2 = flow(make_addr_v4(10, 3, 0, 7), 50500, server, 80, kGammaMs + 500);
  p.process_flow(f2);
  auto events = p.process_flow(reply(f2, kGammaMs + 600));
  REQUIRE(events.size() == 1);
  CHECK(events[0].via == RbbfOutcome::PromotedHistory);
  CHECK(events[0].tuple.addr == server);
}

TEST_CASE("stale records are dropped and counted") {
  DetectionPipeline p(tight_config());
  auto f = flow(make_addr_v4(10, 4, 0, 1), 50000, make_addr_v4(10, 4, 0, 2),
                80, 10 * kGammaMs);
  p.process_flow(f);
  auto old = flow(make_addr_v4(10, 4, 0, 3), 50001, make_addr_v4(10, 4, 0, 4),
                  81, 5 * kGammaMs);
  CHECK(p.process_flow(old).empty());
  CHECK(p.totals().stale_events_dropped == 1);
  CHECK(p.totals().flows_in == 2);
}

TEST_CASE("finalize on an empty pipeline reports zero counters") {
  DetectionPipeline p(tight_config());
  auto reports = p.finalize();
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].counters.flows_in == 0);
  CHECK(reports[0].counters.nodes_promoted == 0);
  CHECK(reports[0].node_b2.popcount() == 0);
  CHECK_THROWS_AS(p.process_flow(flow(make_addr_v4(1, 2, 3, 4), 1,
                                      make_addr_v4(5, 6, 7, 8), 2, 0)),
                  std::logic_error);
}

TEST_CASE("counter conservation across reports") {
  DetectionPipeline p(tight_config());
  std::uint64_t t = 1000;
  for (int i = 0; i < 40; ++i) {
    auto f = flow(make_addr_v4(10, 5, 0, static_cast<std::uint8_t>(i)),
                  static_cast<std::uint16_t>(50000 + i),
                  make_addr_v4(10, 5, 1, static_cast<std::uint8_t>(i)), 80, t);
    p.process_flow(f);
    if (i % 2 == 0) p.process_flow(reply(f, t + 50));
    t += kGammaMs / 10;
  }
  auto reports = p.finalize();
  WindowCounters sum;
  for (const auto& r : reports) {
    sum.flows_in += r.counters.flows_in;
    sum.flows_validated += r.counters.flows_validated;
    sum.flows_skipped_known += r.counters.flows_skipped_known;
    sum.flows_first_seen += r.counters.flows_first_seen;
    sum.nodes_promoted += r.counters.nodes_promoted;
    sum.stale_events_dropped += r.counters.stale_events_dropped;
  }
  CHECK(sum.flows_in == p.totals().flows_in);
  CHECK(sum.flows_in == sum.flows_validated + sum.flows_skipped_known +
                            sum.flows_first_seen + sum.stale_events_dropped);
}

TEST_CASE("final reports answer membership for every emitted tuple") {
  auto cfg = tight_config();
  std::vector<WindowReport> sunk;
  DetectionPipeline p(cfg, [&](WindowReport&& r) { sunk.push_back(std::move(r)); });

  std::vector<ServiceNodeEvent> events;
  std::uint64_t t = 1000;
  for (int s = 0; s < 10; ++s) {
    const auto server = make_addr_v4(10, 6, 0, static_cast<std::uint8_t>(s));
    for (int c = 0; c < 3; ++c) {
      auto f = flow(make_addr_v4(10, 7, static_cast<std::uint8_t>(s),
                                 static_cast<std::uint8_t>(c)),
                    static_cast<std::uint16_t>(50000 + 10 * s + c), server,
                    8080, t);
      p.process_flow(f);
      auto evs = p.process_flow(reply(f, t + 20));
      events.insert(events.end(), evs.begin(), evs.end());
      t += 777;
    }
  }
  p.finalize();
  REQUIRE(!events.empty());
  REQUIRE(!sunk.empty());
  for (const auto& ev : events) {
    bool found = false;
    const auto key = serialize_tuple(ev.tuple);
    for (const auto& r : sunk) {
      if (ev.detected_at_ms / kGammaMs * kGammaMs == r.window_start_ms &&
          r.node_b2.contains(key)) {
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("single emission per horizon, re-emission after eviction") {
  auto cfg = tight_config();
  DetectionPipeline p(cfg);
  const auto server = make_addr_v4(10, 8, 0, 2);
  std::set<std::uint64_t> event_times;

  std::uint64_t t = 1000;
  int emitted = 0;
  // Continuously active service: one validated session per window for 14
  // windows (M = 6).
  for (int w = 0; w < 14; ++w) {
    auto f = flow(make_addr_v4(10, 8, 1, static_cast<std::uint8_t>(w)),
                  static_cast<std::uint16_t>(50000 + w), server, 80, t);
    p.process_flow(f);
    for (const auto& ev : p.process_flow(reply(f, t + 30))) {
      if (ev.tuple.addr == server) {
        ++emitted;
        event_times.insert(ev.detected_at_ms);
      }
    }
    t += kGammaMs;
  }
  // One promotion when first repeated, one re-promotion after the horizon
  // rotates the remembered window out. 14 windows cover two traversals.
  CHECK(emitted == 2);
}

TEST_CASE("detect_dup_node observes both tuples directly") {
  auto cfg = tight_config();
  std::vector<NodeObservation> probes;
  DetectionPipeline p(cfg, {}, [&](const NodeObservation& o) {
    probes.push_back(o);
  });
  FlowKey key{make_addr_v4(10, 9, 0, 1), make_addr_v4(10, 9, 0, 2), 50000, 80,
              kProtoTcp};
  p.process_flow(flow(key.src_addr, 1, key.dst_addr, 2, 500));  // start clock
  auto events = p.detect_dup_node(key, 1000);
  CHECK(events.empty());  // both fresh
  CHECK(probes.size() == 2);
  auto events2 = p.detect_dup_node(key, 1500);
  CHECK(events2.size() == 2);  // both repeat now
  CHECK(probes.size() == 4);
}
