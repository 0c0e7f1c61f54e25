// Acceptance suite: runs every contract criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. argv[1] must point at the
// svcdisco CLI binary; criteria that define operator-facing behaviour drive
// the real binary.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "svcdisco/detect.hpp"
#include "svcdisco/exact.hpp"
#include "svcdisco/summary.hpp"
#include "svcdisco/synth.hpp"

using namespace svcdisco;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Context {
  std::string cli;
  fs::path tmp;
  // Cumulative comparison-run tallies shared between criteria 2 and 3.
  std::uint64_t cum_node_events = 0;
  std::uint64_t cum_false_negatives = 0;
  std::uint64_t cum_flows = 0;
};

struct Failure {
  std::string message;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw Failure{message};
}

template <typename T>
std::string str(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int run_cli(const Context& ctx, const std::string& args, std::string* out,
            std::string* err = nullptr) {
  const fs::path out_path = ctx.tmp / "cli_stdout.txt";
  const fs::path err_path = ctx.tmp / "cli_stderr.txt";
  const std::string cmd = ctx.cli + " " + args + " >" + out_path.string() +
                          " 2>" + err_path.string();
  int rc = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  if (out) *out = slurp(out_path);
  if (err) *err = slurp(err_path);
  return WEXITSTATUS(rc);
}

std::vector<FlowRecord> plain_records(const LabeledStream& s) {
  std::vector<FlowRecord> out;
  out.reserve(s.records.size());
  for (const auto& r : s.records) out.push_back(r.rec);
  return out;
}

// Smallest x with P[Binomial(n,p) <= x] >= q.
int binomial_quantile(int n, double p, double q) {
  double pmf = std::pow(1.0 - p, n);
  double cdf = pmf;
  int x = 0;
  while (cdf < q && x < n) {
    pmf *= (double(n - x) / double(x + 1)) * (p / (1.0 - p));
    ++x;
    cdf += pmf;
  }
  return x;
}

// --------------------------------------------------------------------------
// 1. Sizing reproduction: params at (0.05, 2.5e6, r_d 1) gives k=5 and the
//    ~4.375 MB buddy-pair figure (the quoted figure rounds the 14.43
//    bits-per-element constant down to 14; the exact formula value is
//    4.508 MB, both inside the rounding allowance).
void criterion_1(Context& ctx) {
  std::string out;
  int rc = run_cli(ctx, "params --epsilon 0.05 --n 2500000 --rd 1.0", &out);
  require(rc == 0, "params exited with " + str(rc));
  auto j = json::parse(out);
  require(j["k_opt"] == 5, "k_opt = " + str(j["k_opt"]) + ", want 5");
  const std::uint64_t m_min = j["m_min_bits"];
  require(m_min == 18033689,
          "m_min_bits = " + str(m_min) + ", want ceil(log2e*5*2.5e6)");
  const double mb = j["bbf_total_mb"];
  require(std::abs(mb - 4.375) <= 0.14,
          "BBF total " + str(mb) + " MB not within 4.375 +- 0.14");
}

// --------------------------------------------------------------------------
// 2. FP bound at desk scale: 1e5 flows/window, r_d 0.5, k=5, m from the
//    sizing formula; measured node-stage FP rate per seed must stay within
//    1.5x the horizon bound and under 0.075 absolute.
void criterion_2(Context& ctx) {
  const double flows = 100000;
  const auto cfg = PipelineConfig::sized(0.05, flows, 0.5);
  require(cfg.family.k() == 5, "sizing must pick k=5 at eps 0.05");
  const unsigned windows_run = 6;

  for (std::uint64_t seed : {101, 102, 103, 104, 105}) {
    SynthConfig synth;
    synth.seed = seed;
    synth.duration_seconds = windows_run * 300;
    synth.flows_per_window = static_cast<std::uint64_t>(flows);
    synth.r_d = 0.5;
    synth.services = {
        {EndNodeTuple{make_addr_v4(192, 0, 43, 10), 80, kProtoTcp}, 40},
        {EndNodeTuple{make_addr_v4(192, 0, 43, 11), 443, kProtoTcp}, 25},
    };
    auto stream = plain_records(generate(synth));
    auto report = compare_runs(stream, cfg);

    ctx.cum_node_events += report.events_compared;
    ctx.cum_false_negatives += report.false_negatives;
    ctx.cum_flows += report.flows_processed;

    require(report.events_compared > 100000,
            "node stage saw too few events: " + str(report.events_compared));
    const double n_per_window =
        double(report.events_compared) / double(windows_run);
    const double rd_node = double(report.node_distinct_tuples) /
                           double(report.events_compared);
    auto bound = rbbf_fp_bound(cfg.family.k(),
                               double(cfg.node_stage.m_bits),
                               cfg.node_stage.windows, n_per_window, rd_node);
    require(report.fp_rate <= 1.5 * bound.cap,
            "seed " + str(seed) + ": fp " + str(report.fp_rate) + " > 1.5*" +
                str(bound.cap));
    require(report.fp_rate <= 0.075,
            "seed " + str(seed) + ": fp " + str(report.fp_rate) + " > 0.075");
  }
}

// --------------------------------------------------------------------------
// 3. Zero false negatives over >= 1e6 cumulative node events, including
//    extra runs at other window counts and hash sizes.
void criterion_3(Context& ctx) {
  struct Extra {
    std::uint64_t seed;
    double eps;
    unsigned node_windows;
    double r_d;
  };
  for (const Extra& e : {Extra{201, 0.01, 3, 0.6}, Extra{202, 0.05, 8, 0.45}}) {
    SynthConfig synth;
    synth.seed = e.seed;
    synth.duration_seconds = 1800;
    synth.flows_per_window = 20000;
    synth.r_d = e.r_d;
    synth.split_flow_fraction = 0.1;
    auto cfg = PipelineConfig::sized(e.eps, 20000, e.r_d, e.node_windows);
    auto report = compare_runs(plain_records(generate(synth)), cfg);
    ctx.cum_node_events += report.events_compared;
    ctx.cum_false_negatives += report.false_negatives;
    ctx.cum_flows += report.flows_processed;
  }
  require(ctx.cum_node_events >= 1000000,
          "only " + str(ctx.cum_node_events) + " cumulative node events");
  require(ctx.cum_false_negatives == 0,
          str(ctx.cum_false_negatives) + " false negatives");
  std::cout << "      (" << ctx.cum_node_events << " node events over "
            << ctx.cum_flows << " flows, 0 false negatives)\n";
}

// --------------------------------------------------------------------------
// 4. Boundary-effect elimination: all conjugate gaps straddle a boundary;
//    one flow window misses them, the default four find every pair.
void criterion_4(Context&) {
  for (std::uint64_t seed : {301, 302}) {
    SynthConfig synth;
    synth.seed = seed;
    synth.duration_seconds = 1200;
    synth.flows_per_window = 4000;
    synth.r_d = 0.5;
    synth.straddle_fraction = 1.0;
    auto stream = generate(synth);

    // Pair bookkeeping: second record of each canonical key decides.
    auto run = [&](unsigned windows) {
      auto sizing = optimal_params(0.005, 2.0 * 4000 * windows);
      RbbfWindowSet set(windows, sizing.m_min_bits,
                        HashFamily::with_k(sizing.k_opt), 300);
      std::map<std::array<std::uint8_t, kFlowKeyBytes>, int> seen;
      std::uint64_t pairs = 0, detected = 0;
      for (const auto& r : stream.records) {
        set.advance(r.rec.start_ms);
        auto outcome = set.observe(serialize_key(r.rec.key),
                                   serialize_key(conjugate(r.rec.key)));
        int n = ++seen[canonical_flow_key(r.rec.key)];
        if (n == 2) {
          ++pairs;
          if (outcome != RbbfOutcome::FirstSeen) ++detected;
        }
      }
      require(pairs > 3000, "not enough straddling pairs generated");
      return double(detected) / double(pairs);
    };

    const double recall_single = run(1);
    const double recall_default = run(4);
    require(recall_single < 1.0, "single window detected every straddler (" +
                                     str(recall_single) + ")");
    require(recall_default == 1.0,
            "four windows missed straddlers, recall " + str(recall_default));
  }
}

// --------------------------------------------------------------------------
// 5. Space exactness: allocated filter bits are exactly 2*(M+1)*m.
void criterion_5(Context&) {
  for (unsigned m_windows : {1u, 4u, 6u, 12u}) {
    for (std::uint64_t m_bits : {64ull, 43281ull, 1ull << 22}) {
      RbbfWindowSet set(m_windows, m_bits, HashFamily::with_k(5), 300);
      require(set.allocated_filter_bits() == 2ull * (m_windows + 1) * m_bits,
              "allocation mismatch at M=" + str(m_windows));
    }
  }
  auto cfg = PipelineConfig::sized(0.05, 50000, 0.5);
  DetectionPipeline p(cfg);
  require(p.allocated_filter_bits() ==
              2ull * (cfg.flow_stage.windows + 1) * cfg.flow_stage.m_bits +
                  2ull * (cfg.node_stage.windows + 1) * cfg.node_stage.m_bits,
          "pipeline allocation mismatch");
}

// --------------------------------------------------------------------------
// 6. O(1) per-event time: medians of chunked per-event cost at 1e6 and 1e7
//    events differ by < 20%, no within-run growth trend, and the exact
//    baseline's memory grows with distinct count while filters stay flat.
void criterion_6(Context& ctx) {
  using clock = std::chrono::steady_clock;
  const std::uint64_t flows_per_window = 100000;
  const auto cfg = PipelineConfig::sized(0.05, double(flows_per_window), 0.5);

  auto timed_run = [&](std::uint32_t duration_s) {
    SynthConfig synth;
    synth.seed = 401;
    synth.duration_seconds = duration_s;
    synth.flows_per_window = flows_per_window;
    synth.r_d = 0.5;

    DetectionPipeline pipeline(cfg);
    std::vector<FlowRecord> chunk;
    chunk.reserve(100000);
    std::vector<double> ns_per_event;
    std::uint64_t total = 0;

    auto flush = [&] {
      if (chunk.empty()) return;
      auto t0 = clock::now();
      for (const auto& rec : chunk) pipeline.process_flow(rec);
      auto t1 = clock::now();
      ns_per_event.push_back(
          std::chrono::duration<double, std::nano>(t1 - t0).count() /
          double(chunk.size()));
      total += chunk.size();
      chunk.clear();
    };
    generate_stream(synth, [&](const LabeledRecord& r) {
      chunk.push_back(r.rec);
      if (chunk.size() == 100000) flush();
    });
    flush();

    struct Result {
      double median_ns;
      std::vector<double> chunks_in_order;
      std::uint64_t events;
      std::uint64_t filter_bits;
    } res{0.0, ns_per_event, total, pipeline.allocated_filter_bits()};
    // First chunk pays cold caches and page faults; the claim under test is
    // the steady-state cost.
    ns_per_event.erase(ns_per_event.begin());
    std::sort(ns_per_event.begin(), ns_per_event.end());
    res.median_ns = ns_per_event[ns_per_event.size() / 2];
    return res;
  };

  auto short_run = timed_run(3000);    // 10 windows  = 1e6 events
  auto long_run = timed_run(30000);    // 100 windows = 1e7 events
  require(short_run.events == 1000000, "short run size " + str(short_run.events));
  require(long_run.events == 10000000, "long run size " + str(long_run.events));

  const double lo = std::min(short_run.median_ns, long_run.median_ns);
  const double hi = std::max(short_run.median_ns, long_run.median_ns);
  require((hi - lo) / lo < 0.20,
          "per-event cost drifted " + str(100.0 * (hi - lo) / lo) + "% (" +
              str(short_run.median_ns) + " vs " + str(long_run.median_ns) +
              " ns)");
  require(short_run.filter_bits == long_run.filter_bits,
          "filter allocation changed with stream length");

  // No growth trend inside the long run: the first and last deciles of
  // steady chunk costs stay within the same 20%.
  const auto& chunks = long_run.chunks_in_order;
  const std::size_t decile = chunks.size() / 10;
  auto mean = [](auto first, auto last) {
    double s = 0;
    for (auto it = first; it != last; ++it) s += *it;
    return s / double(last - first);
  };
  const double head = mean(chunks.begin() + 1, chunks.begin() + 1 + decile);
  const double tail = mean(chunks.end() - decile, chunks.end());
  require(tail < head * 1.20,
          "per-event cost grew within the run: " + str(head) + " -> " +
              str(tail) + " ns");

  // Baseline memory scales with distinct keys.
  ExactTable table(6);
  std::mt19937_64 rng(402);
  auto feed = [&](int n) {
    std::array<std::uint8_t, kFlowKeyBytes> key{};
    for (int i = 0; i < n; ++i) {
      for (auto& b : key) b = static_cast<std::uint8_t>(rng());
      table.observe(key, 0);
    }
  };
  feed(100000);
  const auto mem_small = table.memory_bytes();
  feed(900000);
  const auto mem_large = table.memory_bytes();
  require(mem_large >= 5 * mem_small, "exact memory did not grow linearly");

  // Operator surface: bench prints the comparison and an FN count of zero.
  std::string out;
  int rc = run_cli(ctx,
                   "bench --flows-per-window 20000 --duration 1200 --rd 0.5 "
                   "--seed 7",
                   &out);
  require(rc == 0, "bench exited with " + str(rc));
  auto j = json::parse(out);
  require(j["false_negatives"] == 0, "bench reported false negatives");
  require(j["exact_memory_bytes"].get<std::uint64_t>() > 0 &&
              j["approx_memory_bytes"].get<std::uint64_t>() > 0,
          "bench missing memory figures");
  std::cout << "      (median " << short_run.median_ns << " ns vs "
            << long_run.median_ns << " ns per event; exact memory "
            << mem_small << " -> " << mem_large << " bytes)\n";
}

// --------------------------------------------------------------------------
// 7. Summary coherence for 1e3 tracked keys over randomized histories, and
//    the bitwise union superset property.
void criterion_7(Context&) {
  std::mt19937_64 rng(501);
  auto random_key = [&](std::size_t n) {
    std::vector<std::uint8_t> key(n);
    for (auto& b : key) b = static_cast<std::uint8_t>(rng());
    return key;
  };

  RbbfWindowSet set(6, 1 << 16, HashFamily::with_k(5), 300);
  set.advance(0);
  std::vector<std::vector<std::uint8_t>> tracked;
  for (int i = 0; i < 1000; ++i) tracked.push_back(random_key(19));

  std::uint64_t t = 0;
  for (int jump = 0; jump < 30; ++jump) {
    for (int i = 0; i < 200; ++i) set.observe(tracked[rng() % tracked.size()]);
    t += 300000ull * (1 + rng() % 2);
    set.advance(t);
    const unsigned cur = set.current_index();
    for (const auto& key : tracked) {
      bool b1 = false, b2 = false;
      for (unsigned w = 0; w < set.window_count(); ++w) {
        if (w == cur) continue;
        b1 = b1 || set.window(w).b1().contains(key);
        b2 = b2 || set.window(w).b2().contains(key);
      }
      require(set.summary().b1().contains(key) == b1,
              "summary B1 diverged from the OR of live windows");
      require(set.summary().b2().contains(key) == b2,
              "summary B2 diverged from the OR of live windows");
    }
  }

  auto family = HashFamily::with_k(5);
  BloomFilter a(8192, family), b(8192, family);
  for (int i = 0; i < 400; ++i) (i % 2 ? a : b).insert(random_key(19));
  auto u = BloomFilter::united(a, b);
  for (std::size_t i = 0; i < u.bytes().size(); ++i) {
    require((a.bytes()[i] & ~u.bytes()[i]) == 0 &&
                (b.bytes()[i] & ~u.bytes()[i]) == 0,
            "union dropped a bit");
  }
}

// --------------------------------------------------------------------------
// 8. Persistence round-trip and file skipping: 100-file corpora over 20
//    seeds, target tuple in 2 files and never omitted; extras bounded by
//    the binomial tail; header-only reads.
void criterion_8(Context& ctx) {
  const double eps = 0.05;
  const int files_per_corpus = 100;
  const int tuples_per_file = 500;
  auto sizing = optimal_params(eps, tuples_per_file);
  auto family = HashFamily::with_k(sizing.k_opt);
  const std::size_t header_len =
      SummaryRecord{SummaryRecord::kVersion, SummaryRecord::kKindNodeB2, 0,
                    300, BloomFilter(sizing.m_min_bits, family)}
          .byte_size();

  std::uint64_t pooled_extras = 0;
  int pooled_candidates = 0;
  fs::path first_corpus;
  EndNodeTuple first_target{};

  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(600 + seed);
    auto dir = ctx.tmp / ("corpus_" + std::to_string(seed));
    fs::create_directories(dir);

    EndNodeTuple target;
    for (auto& byte : target.addr) byte = static_cast<std::uint8_t>(rng());
    target.port = static_cast<std::uint16_t>(rng());
    target.proto = kProtoTcp;
    const auto target_key = serialize_tuple(target);

    const int in_a = 17, in_b = 71;
    std::vector<std::string> paths;
    for (int i = 0; i < files_per_corpus; ++i) {
      BloomFilter f(sizing.m_min_bits, family);
      EndNodeTuple t;
      for (int n = 0; n < tuples_per_file; ++n) {
        for (auto& byte : t.addr) byte = static_cast<std::uint8_t>(rng());
        t.port = static_cast<std::uint16_t>(rng());
        t.proto = kProtoTcp;
        f.insert(serialize_tuple(t));
      }
      if (i == in_a || i == in_b) f.insert(target_key);
      SummaryRecord rec{SummaryRecord::kVersion, SummaryRecord::kKindNodeB2,
                        std::uint64_t(i) * 300000, 300, f};
      auto path = dir / ("f" + std::to_string(i) + ".dat");
      std::ofstream out(path, std::ios::binary);
      write_summary(out, rec);
      out << "0,1,10.0.0.1,1,10.0.0.2,2,6,1,1\n";  // body, never read
      paths.push_back(path.string());
    }

    auto results = filter_files(paths, target_key);
    int extras = 0;
    bool a_found = false, b_found = false;
    for (int i = 0; i < files_per_corpus; ++i) {
      require(results[i].error.empty(), "file error: " + results[i].error);
      require(results[i].header_bytes == header_len,
              "read " + str(results[i].header_bytes) + " bytes, header is " +
                  str(header_len));
      if (i == in_a) a_found = results[i].matched;
      else if (i == in_b) b_found = results[i].matched;
      else if (results[i].matched) ++extras;
    }
    require(a_found && b_found, "a true file was omitted (seed " +
                                    str(seed) + ")");
    pooled_extras += extras;
    pooled_candidates += files_per_corpus - 2;

    if (seed == 0) {
      first_corpus = dir;
      first_target = target;
    }
  }

  const int pooled_q99 = binomial_quantile(pooled_candidates, eps, 0.99);
  require(pooled_extras <= std::uint64_t(pooled_q99),
          str(pooled_extras) + " pooled extras > Binomial(" +
              str(pooled_candidates) + ", 0.05) q99 = " + str(pooled_q99));

  // Same corpus through the CLI surface.
  std::string args = "query --tuple \"" + format_addr(first_target.addr) +
                     "," + std::to_string(first_target.port) + ",tcp\"";
  for (int i = 0; i < files_per_corpus; ++i) {
    args += " " + (first_corpus / ("f" + std::to_string(i) + ".dat")).string();
  }
  std::string out;
  int rc = run_cli(ctx, args, &out);
  require(rc == 0, "query exited with " + str(rc));
  auto j = json::parse(out);
  std::set<std::string> matches(j["matches"].begin(), j["matches"].end());
  require(matches.count((first_corpus / "f17.dat").string()) == 1 &&
              matches.count((first_corpus / "f71.dat").string()) == 1,
          "CLI query omitted a true file");
  for (const auto& f : j["files"]) {
    require(f["header_bytes"].get<std::uint64_t>() == header_len,
            "CLI read beyond the header");
  }
  std::cout << "      (pooled extras " << pooled_extras << " over "
            << pooled_candidates << " candidates, q99 " << pooled_q99 << ")\n";
}

// --------------------------------------------------------------------------
// 9. End-to-end recall through the CLI: 50 planted services, each emitted
//    exactly once; split flows validate exactly once each.
void criterion_9(Context& ctx) {
  const std::uint64_t seed = 701;
  auto dir = ctx.tmp / "e2e";
  fs::create_directories(dir);
  const auto stream_path = dir / "stream.csv";
  const auto truth_path = dir / "truth.json";

  std::string gen_args = "gen --seed " + std::to_string(seed) +
                         " --duration 600 --flows-per-window 5000 --rd 0.5 "
                         "--split-fraction 0.1 --out " +
                         stream_path.string() + " --truth " +
                         truth_path.string();
  SynthConfig reference;
  reference.seed = seed;
  reference.duration_seconds = 600;
  reference.flows_per_window = 5000;
  reference.r_d = 0.5;
  reference.split_flow_fraction = 0.1;
  for (int s = 0; s < 50; ++s) {
    EndNodeTuple tuple{make_addr_v4(198, 18, 0, static_cast<std::uint8_t>(s)),
                       static_cast<std::uint16_t>(1000 + s), kProtoTcp};
    reference.services.push_back({tuple, 3});
    gen_args += " --service " + format_addr(tuple.addr) + ":" +
                std::to_string(tuple.port) + ":tcp:3";
  }
  std::string out;
  require(run_cli(ctx, gen_args, &out) == 0, "gen failed");

  std::string detect_args =
      "detect --input " + stream_path.string() +
      " --epsilon 0.005 --expected-flows 5000 --rd 0.5";
  std::string events_text, stats_text;
  require(run_cli(ctx, detect_args, &events_text, &stats_text) == 0,
          "detect failed");

  // Events: every planted tuple exactly once. Collision-driven extras are
  // precision territory (criterion 2); hold them to a token allowance so a
  // real defect cannot hide.
  std::map<std::string, int> emitted;
  std::istringstream events_in(events_text);
  std::string line;
  while (std::getline(events_in, line)) {
    auto ev = json::parse(line);
    emitted[ev["addr"].get<std::string>() + ":" +
            str(ev["port"].get<int>())]++;
  }
  for (const auto& svc : reference.services) {
    auto key = format_addr(svc.tuple.addr) + ":" + str(svc.tuple.port);
    auto it = emitted.find(key);
    require(it != emitted.end(), "service " + key + " never emitted");
    require(it->second == 1,
            "service " + key + " emitted " + str(it->second) + " times");
  }
  require(emitted.size() <= 55, str(emitted.size() - 50) +
                                    " false-positive tuples beyond the "
                                    "50 planted services");

  // Split-flow clause: replay stage 1 and require every split story to
  // promote exactly once (the artifact repeat must neither re-trigger the
  // node stage nor pre-empt the genuine promotion).
  auto local = generate(reference);
  const auto cfg = PipelineConfig::sized(0.005, 5000, 0.5);
  RbbfWindowSet stage1(cfg.flow_stage.windows, cfg.flow_stage.m_bits,
                       cfg.family, cfg.flow_stage.window_seconds);
  std::map<std::array<std::uint8_t, kFlowKeyBytes>, int> promotions;
  std::set<std::array<std::uint8_t, kFlowKeyBytes>> split_stories;
  std::uint64_t validated = 0, skipped = 0;
  for (const auto& r : local.records) {
    if (r.label == RecordLabel::SplitArtifact) {
      split_stories.insert(canonical_flow_key(r.rec.key));
    }
    stage1.advance(r.rec.start_ms);
    auto outcome = stage1.observe(serialize_key(r.rec.key),
                                  serialize_key(conjugate(r.rec.key)));
    if (outcome == RbbfOutcome::PromotedCurrent ||
        outcome == RbbfOutcome::PromotedHistory) {
      ++validated;
      promotions[canonical_flow_key(r.rec.key)]++;
    } else if (outcome == RbbfOutcome::SkipKnown) {
      ++skipped;
    }
  }
  require(!split_stories.empty(), "no split stories generated");
  for (const auto& k : split_stories) {
    require(promotions[k] == 1, "a split story promoted " +
                                    str(promotions[k]) + " times");
  }

  // The CLI run must agree with the library replay, decision for decision.
  json totals;
  std::istringstream stats_in(stats_text);
  while (std::getline(stats_in, line)) {
    auto j = json::parse(line);
    if (j["type"] == "totals") totals = j;
  }
  require(totals["flows_validated"] == validated,
          "CLI validated " + str(totals["flows_validated"]) +
              ", library replay " + str(validated));
  require(totals["flows_skipped_known"] == skipped,
          "CLI skipped " + str(totals["flows_skipped_known"]) +
              ", library replay " + str(skipped));
}

// --------------------------------------------------------------------------
// 10. History re-identification: consecutive windows re-find a tuple via
//     the history path; six silent windows forget it.
void criterion_10(Context&) {
  auto cfg = PipelineConfig::sized(0.005, 2000, 0.5);
  require(cfg.node_stage.windows == 6, "default M must be 6");
  DetectionPipeline p(cfg);

  const auto server = make_addr_v4(198, 18, 5, 5);
  const std::uint64_t gamma_ms = 300000;
  int session = 0;
  auto touch = [&](std::uint64_t at_ms) {
    FlowRecord f;
    f.key = FlowKey{make_addr_v4(198, 18, 6, static_cast<std::uint8_t>(session)),
                    server, static_cast<std::uint16_t>(51000 + session), 80,
                    kProtoTcp};
    ++session;
    f.start_ms = at_ms;
    f.end_ms = at_ms + 10;
    f.packets = 2;
    f.bytes = 100;
    std::vector<ServiceNodeEvent> events;
    auto e1 = p.process_flow(f);
    FlowRecord r = f;
    r.key = conjugate(f.key);
    r.start_ms = at_ms + 40;
    r.end_ms = at_ms + 50;
    auto e2 = p.process_flow(r);
    events.insert(events.end(), e1.begin(), e1.end());
    events.insert(events.end(), e2.begin(), e2.end());
    std::vector<ServiceNodeEvent> server_events;
    for (const auto& ev : events) {
      if (ev.tuple.addr == server) server_events.push_back(ev);
    }
    return server_events;
  };

  // Window 0: first sighting, no event.
  require(touch(1000).empty(), "fresh tuple must not emit");
  // Window 1: re-found through the history summary.
  auto evs = touch(gamma_ms + 1000);
  require(evs.size() == 1, "expected one history event");
  require(evs[0].via == RbbfOutcome::PromotedHistory,
          "event not via the history path");

  // Silent for 6 windows: the tuple must be forgotten...
  auto after_gap = touch(gamma_ms + 1000 + 6 * gamma_ms);
  require(after_gap.empty(), "tuple was remembered past its horizon");
  // ...and needs a fresh repeat to be promoted again.
  auto again = touch(gamma_ms + 1000 + 7 * gamma_ms);
  require(again.size() == 1, "tuple not re-promoted after relearning");
  require(again[0].via == RbbfOutcome::PromotedHistory, "wrong re-find path");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance_tests <path-to-svcdisco-cli>\n";
    return 2;
  }
  Context ctx;
  ctx.cli = argv[1];
  ctx.tmp = fs::temp_directory_path() / "svcdisco_acceptance";
  fs::remove_all(ctx.tmp);
  fs::create_directories(ctx.tmp);

  // Preflight: the documented exit codes (0 ok, 2 config, 3 I/O, 4 format)
  // before grading the criteria proper.
  {
    std::string out;
    int ok = run_cli(ctx, "params --epsilon 0.05 --n 10", &out);
    int config = run_cli(ctx, "params --epsilon 2.0 --n 10", &out);
    int io = run_cli(ctx, "detect --input /nonexistent/flows.csv", &out);
    const fs::path bad = ctx.tmp / "bad.csv";
    std::ofstream(bad) << "0,1000,not-an-address,1,10.0.0.2,2,tcp,1,1\n";
    int format = run_cli(ctx, "detect --input " + bad.string(), &out);
    if (ok != 0 || config != 2 || io != 3 || format != 4) {
      std::printf("FAIL preflight: exit codes ok=%d config=%d io=%d format=%d\n",
                  ok, config, io, format);
      return 1;
    }
  }

  struct Criterion {
    int number;
    const char* name;
    std::function<void(Context&)> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "sizing reproduction (params, 4.375 MB figure)", criterion_1},
      {2, "false-positive rate within the horizon bound", criterion_2},
      {3, "zero false negatives over 1e6+ events", criterion_3},
      {4, "boundary-effect elimination (straddling pairs)", criterion_4},
      {5, "space exactness 2*(M+1)*m", criterion_5},
      {6, "O(1) per-event time, flat filter memory", criterion_6},
      {7, "summary coherence and union superset", criterion_7},
      {8, "persistence round-trip and file skipping", criterion_8},
      {9, "end-to-end recall of 50 planted services", criterion_9},
      {10, "history re-identification and eviction", criterion_10},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.fn(ctx);
      auto secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      std::printf("PASS  %2d  %s  (%.1fs)\n", c.number, c.name, secs);
    } catch (const Failure& f) {
      std::printf("FAIL  %2d  %s: %s\n", c.number, c.name, f.message.c_str());
      ++failures;
    } catch (const std::exception& e) {
      std::printf("FAIL  %2d  %s: unexpected error: %s\n", c.number, c.name,
                  e.what());
      ++failures;
    }
    std::fflush(stdout);
  }

  fs::remove_all(ctx.tmp);
  if (failures) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
