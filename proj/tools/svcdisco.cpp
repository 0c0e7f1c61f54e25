// svcdisco: discover service nodes from unidirectional flow records by
// approximate duplicate detection.
//
// Subcommands: detect, query, bench, params, gen. Exit codes: 0 success,
// 2 configuration error, 3 I/O error, 4 input format error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "svcdisco/detect.hpp"
#include "svcdisco/exact.hpp"
#include "svcdisco/summary.hpp"
#include "svcdisco/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace svcdisco;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitFormat = 4;

struct Preset {
  double r_d;
  std::uint64_t pair_bytes;  // allocation for one B1+B2 pair
  std::uint64_t expected_flows_per_window;
};

const std::map<std::string, Preset>& presets() {
  static const std::map<std::string, Preset> table = {
      {"core-r1", {0.45, 4ull << 20, 850000}},
      {"core-r2", {0.49, 4ull << 20, 1500000}},
      {"edge-r3", {0.53, 8ull << 20, 4500000}},
  };
  return table;
}

struct CommonOpts {
  double epsilon = 0.05;
  std::uint64_t bits_per_array = 0;  // 0: derive from epsilon/preset
  unsigned hashes = 0;               // 0: derive from epsilon
  unsigned node_windows = 6;
  std::uint32_t window_seconds = 0;  // 0: same as t0
  std::uint32_t t0_seconds = 300;
  std::uint32_t timeout_seconds = 900;
  std::string preset;
  double expected_flows = 100000;
  double r_d = 0.5;
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--epsilon", opts.epsilon,
                  "Target false-positive rate (default 0.05)");
  cmd->add_option("--bits-per-array", opts.bits_per_array,
                  "Fixed bit-array length per filter plane");
  cmd->add_option("--hashes", opts.hashes, "Hash function count (1-8)");
  cmd->add_option("--windows-node", opts.node_windows,
                  "Node-stage window count M (default 6)");
  cmd->add_option("--window-seconds", opts.window_seconds,
                  "Node window width (default: t0)");
  cmd->add_option("--t0", opts.t0_seconds,
                  "Flow file period in seconds (default 300)");
  cmd->add_option("--timeout", opts.timeout_seconds,
                  "Flow timeout in seconds (default 900)");
  cmd->add_option("--preset", opts.preset,
                  "Source preset: core-r1 | core-r2 | edge-r3")
      ->check(CLI::IsMember({"core-r1", "core-r2", "edge-r3"}));
  cmd->add_option("--expected-flows", opts.expected_flows,
                  "Expected flows per window for sizing");
  cmd->add_option("--rd", opts.r_d, "Expected distinct ratio for sizing");
}

// Flags beat preset values, preset beats defaults.
PipelineConfig resolve_config(const CommonOpts& opts, bool flows_given,
                              bool rd_given) {
  double expected_flows = opts.expected_flows;
  double r_d = opts.r_d;
  std::uint64_t m_bits = opts.bits_per_array;
  if (!opts.preset.empty()) {
    const Preset& p = presets().at(opts.preset);
    if (!flows_given) expected_flows = static_cast<double>(p.expected_flows_per_window);
    if (!rd_given) r_d = p.r_d;
    if (m_bits == 0) m_bits = p.pair_bytes * 8 / 2;
  }

  const std::uint32_t gamma =
      opts.window_seconds ? opts.window_seconds : opts.t0_seconds;
  PipelineConfig cfg = PipelineConfig::sized(opts.epsilon, expected_flows, r_d,
                                             opts.node_windows, opts.t0_seconds,
                                             opts.timeout_seconds);
  cfg.node_stage.window_seconds = gamma;
  if (m_bits != 0) {
    cfg.flow_stage.m_bits = m_bits;
    cfg.node_stage.m_bits = m_bits;
  }
  if (opts.hashes != 0) cfg.family = HashFamily::with_k(opts.hashes);
  return cfg;
}

json tuple_json(const EndNodeTuple& t) {
  return json{{"addr", format_addr(t.addr)},
              {"port", t.port},
              {"proto", t.proto}};
}

json event_json(const ServiceNodeEvent& ev) {
  json j = tuple_json(ev.tuple);
  j["detected_at_ms"] = ev.detected_at_ms;
  j["via"] = rbbf_outcome_name(ev.via);
  j["flow"] = json{{"src_addr", format_addr(ev.triggering_flow.src_addr)},
                   {"src_port", ev.triggering_flow.src_port},
                   {"dst_addr", format_addr(ev.triggering_flow.dst_addr)},
                   {"dst_port", ev.triggering_flow.dst_port},
                   {"proto", ev.triggering_flow.proto}};
  return j;
}

json counters_json(const WindowCounters& c) {
  return json{{"flows_in", c.flows_in},
              {"flows_validated", c.flows_validated},
              {"flows_skipped_known", c.flows_skipped_known},
              {"flows_first_seen", c.flows_first_seen},
              {"nodes_promoted", c.nodes_promoted},
              {"stale_events_dropped", c.stale_events_dropped}};
}

std::uint16_t parse_port_arg(const std::string& text) {
  unsigned long v = std::stoul(text);
  if (v > 0xffff) throw std::invalid_argument("port out of range: " + text);
  return static_cast<std::uint16_t>(v);
}

EndNodeTuple parse_tuple_arg(const std::string& text) {
  // addr,port,proto with proto as number or tcp/udp
  auto first = text.rfind(',');
  if (first == std::string::npos) {
    throw std::invalid_argument("tuple must be addr,port,proto");
  }
  auto second = text.rfind(',', first - 1);
  if (second == std::string::npos) {
    throw std::invalid_argument("tuple must be addr,port,proto");
  }
  EndNodeTuple t;
  t.addr = parse_addr(text.substr(0, second));
  t.port = parse_port_arg(text.substr(second + 1, first - second - 1));
  std::string proto = text.substr(first + 1);
  if (proto == "tcp" || proto == "6") {
    t.proto = kProtoTcp;
  } else if (proto == "udp" || proto == "17") {
    t.proto = kProtoUdp;
  } else {
    throw std::invalid_argument("proto must be tcp or udp");
  }
  return t;
}

// ---------------------------------------------------------------- detect --

struct DetectOpts {
  CommonOpts common;
  std::string input = "-";
  std::string output_dir;
  std::string format = "auto";
  bool address_summaries = false;
};

int run_detect(const DetectOpts& opts, bool flows_given, bool rd_given) {
  PipelineConfig cfg = resolve_config(opts.common, flows_given, rd_given);

  std::ifstream file_in;
  std::istream* in = &std::cin;
  if (opts.input != "-") {
    file_in.open(opts.input);
    if (!file_in) {
      std::cerr << "cannot open input: " << opts.input << "\n";
      return kExitIo;
    }
    in = &file_in;
  }
  if (!opts.output_dir.empty()) {
    std::error_code ec;
    fs::create_directories(opts.output_dir, ec);
    if (ec) {
      std::cerr << "cannot create output dir: " << ec.message() << "\n";
      return kExitIo;
    }
  }

  const std::uint64_t gamma_node_ms =
      static_cast<std::uint64_t>(cfg.node_stage.window_seconds) * 1000;
  const std::uint64_t gamma_flow_ms =
      static_cast<std::uint64_t>(cfg.flow_stage.window_seconds) * 1000;

  // Window bodies buffered for data files, keyed by node window start.
  std::map<std::uint64_t, std::vector<FlowRecord>> bodies;

  auto write_window_file = [&](const WindowReport& report) {
    if (opts.output_dir.empty()) return;
    std::vector<FlowRecord> body;
    if (auto it = bodies.find(report.window_start_ms); it != bodies.end()) {
      body = std::move(it->second);
      bodies.erase(it);
    }
    SummaryRecord rec{SummaryRecord::kVersion, SummaryRecord::kKindNodeB2,
                      report.window_start_ms, cfg.node_stage.window_seconds,
                      report.node_b2};
    fs::path path = fs::path(opts.output_dir) /
                    ("window_" + std::to_string(report.window_start_ms) + ".dat");
    std::ofstream out(path, std::ios::binary);
    write_data_file(out, rec, body);

    if (opts.address_summaries) {
      BloomFilter addrs(cfg.node_stage.m_bits, cfg.family);
      for (const auto& r : body) {
        addrs.insert(r.key.src_addr);
        addrs.insert(r.key.dst_addr);
      }
      SummaryRecord arec{SummaryRecord::kVersion, SummaryRecord::kKindAddrSet,
                         report.window_start_ms, cfg.node_stage.window_seconds,
                         std::move(addrs)};
      fs::path apath = fs::path(opts.output_dir) /
                       ("window_" + std::to_string(report.window_start_ms) +
                        ".addr.dat");
      std::ofstream aout(apath, std::ios::binary);
      write_data_file(aout, arec, body);
    }
  };

  DetectionPipeline pipeline(cfg, [&](WindowReport&& report) {
    json j = counters_json(report.counters);
    j["type"] = "node_window";
    j["window_start_ms"] = report.window_start_ms;
    std::cerr << j.dump() << "\n";
    write_window_file(report);
  });

  // Per flow-window distinct ratio.
  std::uint64_t rd_window_start = 0;
  bool rd_window_open = false;
  std::uint64_t rd_flows = 0;
  std::unordered_set<std::string> rd_distinct;
  auto flush_rd = [&]() {
    if (!rd_window_open) return;
    json j{{"type", "flow_window"},
           {"window_start_ms", rd_window_start},
           {"flows", rd_flows},
           {"distinct", rd_distinct.size()},
           {"r_d", rd_flows ? static_cast<double>(rd_distinct.size()) /
                                  static_cast<double>(rd_flows)
                            : 0.0}};
    std::cerr << j.dump() << "\n";
    rd_flows = 0;
    rd_distinct.clear();
  };

  FlowFormat fmt = FlowFormat::Auto;
  if (opts.format == "csv") fmt = FlowFormat::Csv;
  if (opts.format == "jsonl") fmt = FlowFormat::Jsonl;
  FlowReader reader(*in, fmt);

  FlowRecord rec;
  try {
    while (reader.next(rec)) {
      const std::uint64_t flow_win = rec.start_ms / gamma_flow_ms * gamma_flow_ms;
      if (!rd_window_open || flow_win != rd_window_start) {
        flush_rd();
        rd_window_open = true;
        rd_window_start = flow_win;
      }
      ++rd_flows;
      auto canon = canonical_flow_key(rec.key);
      rd_distinct.emplace(reinterpret_cast<const char*>(canon.data()),
                          canon.size());

      if (!opts.output_dir.empty()) {
        bodies[rec.start_ms / gamma_node_ms * gamma_node_ms].push_back(rec);
      }
      for (const auto& ev : pipeline.process_flow(rec)) {
        std::cout << event_json(ev).dump() << "\n";
      }
    }
  } catch (const FlowFormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitFormat;
  }
  flush_rd();

  auto reports = pipeline.finalize();
  // Any buffered window that never produced a report gets an empty summary.
  for (auto& [start, body] : bodies) {
    WindowReport empty{start, BloomFilter(cfg.node_stage.m_bits, cfg.family),
                       WindowCounters{}};
    write_window_file(empty);
  }

  json totals = counters_json(pipeline.totals());
  totals["type"] = "totals";
  totals["records_skipped_proto"] = reader.records_skipped();
  totals["effective_m_bits_per_array"] = cfg.node_stage.m_bits;
  totals["effective_bytes_per_array_pair"] = cfg.node_stage.m_bits / 8 * 2;
  totals["k"] = cfg.family.k();
  totals["flow_windows"] = cfg.flow_stage.windows;
  totals["node_windows"] = cfg.node_stage.windows;
  std::cerr << totals.dump() << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- query --

int run_query(const std::string& tuple_arg, const std::string& addr_arg,
              const std::vector<std::string>& files) {
  std::vector<std::uint8_t> key;
  if (!tuple_arg.empty()) {
    auto t = parse_tuple_arg(tuple_arg);
    auto bytes = serialize_tuple(t);
    key.assign(bytes.begin(), bytes.end());
  } else if (!addr_arg.empty()) {
    auto a = parse_addr(addr_arg);
    key.assign(a.begin(), a.end());
  } else {
    std::cerr << "query needs --tuple or --address\n";
    return kExitConfig;
  }

  auto results = filter_files(files, key);
  json out;
  out["files"] = json::array();
  std::uint64_t total_bytes = 0;
  for (const auto& r : results) {
    json f{{"path", r.path},
           {"matched", r.matched},
           {"header_bytes", r.header_bytes}};
    if (!r.error.empty()) f["error"] = r.error;
    out["files"].push_back(std::move(f));
    total_bytes += r.header_bytes;
  }
  out["matches"] = matching_paths(results);
  out["total_header_bytes"] = total_bytes;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- bench --

struct BenchOpts {
  CommonOpts common;
  std::string input;
  std::uint64_t seed = 1;
  std::uint32_t duration = 1800;
  std::uint64_t flows_per_window = 100000;
};

int run_bench(const BenchOpts& opts, bool flows_given, bool rd_given) {
  CommonOpts sized = opts.common;
  if (!flows_given) sized.expected_flows = static_cast<double>(opts.flows_per_window);
  PipelineConfig cfg = resolve_config(sized, true, rd_given);

  std::vector<FlowRecord> stream;
  if (!opts.input.empty()) {
    std::ifstream in(opts.input);
    if (!in) {
      std::cerr << "cannot open input: " << opts.input << "\n";
      return kExitIo;
    }
    FlowReader reader(in);
    FlowRecord rec;
    try {
      while (reader.next(rec)) stream.push_back(rec);
    } catch (const FlowFormatError& e) {
      std::cerr << "input error: " << e.what() << "\n";
      return kExitFormat;
    }
  } else {
    SynthConfig synth;
    synth.seed = opts.seed;
    synth.duration_seconds = opts.duration;
    synth.window_seconds = opts.common.t0_seconds;
    synth.flows_per_window = opts.flows_per_window;
    synth.r_d = opts.common.r_d;
    auto labeled = generate(synth);
    stream.reserve(labeled.records.size());
    for (const auto& r : labeled.records) stream.push_back(r.rec);
  }

  ComparisonReport report = compare_runs(stream, cfg);
  json j{{"flows_processed", report.flows_processed},
         {"events_compared", report.events_compared},
         {"agreements", report.agreements},
         {"false_positives", report.false_positives},
         {"false_negatives", report.false_negatives},
         {"fp_rate", report.fp_rate},
         {"exact_memory_bytes", report.exact_memory_bytes},
         {"approx_memory_bytes", report.approx_memory_bytes},
         {"exact_ns_per_flow", report.exact_ns_per_flow},
         {"approx_ns_per_flow", report.approx_ns_per_flow},
         {"service_events", report.service_events}};
  std::cout << j.dump(2) << "\n";
  if (report.false_negatives != 0) {
    std::cerr << "false negatives detected: structure guarantee violated\n";
    return 1;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- params --

int run_params(double epsilon, double n, double r_d, unsigned m_windows) {
  auto sizing = optimal_params(epsilon, std::max(1.0, n * r_d));
  const std::uint64_t bbf_bits = 2 * sizing.m_min_bits;
  const std::uint64_t rbbf_bits = 2 * (m_windows + 1ull) * sizing.m_min_bits;
  json j{{"epsilon", epsilon},
         {"n", n},
         {"r_d", r_d},
         {"n_distinct", n * r_d},
         {"k_opt", sizing.k_opt},
         {"m_min_bits", sizing.m_min_bits},
         {"bbf_total_bits", bbf_bits},
         {"bbf_total_bytes", static_cast<double>(bbf_bits) / 8.0},
         {"bbf_total_mb", static_cast<double>(bbf_bits) / 8.0 / 1e6},
         {"rbbf_windows", m_windows},
         {"rbbf_total_bits", rbbf_bits},
         {"rbbf_total_bytes", static_cast<double>(rbbf_bits) / 8.0}};
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- gen --

struct GenOpts {
  SynthConfig config;
  std::vector<std::string> service_args;
  std::string scan_arg;
  std::string out_path = "-";
  std::string truth_path;
  std::string format = "csv";
};

int run_gen(GenOpts& opts) {
  for (const auto& arg : opts.service_args) {
    // addr:port:proto:clients, e.g. 10.1.2.3:80:tcp:5
    std::vector<std::string> parts;
    std::stringstream ss(arg);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() < 4) {
      std::cerr << "service spec must be addr:port:proto:clients\n";
      return kExitConfig;
    }
    // IPv6 literals contain ':'; the last three fields are port:proto:clients.
    std::string addr_text = arg.substr(
        0, arg.size() - (parts[parts.size() - 1].size() +
                         parts[parts.size() - 2].size() +
                         parts[parts.size() - 3].size() + 3));
    ServiceSpec svc;
    svc.tuple.addr = parse_addr(addr_text);
    svc.tuple.port = parse_port_arg(parts[parts.size() - 3]);
    const std::string& proto = parts[parts.size() - 2];
    svc.tuple.proto = (proto == "udp" || proto == "17") ? kProtoUdp : kProtoTcp;
    svc.clients = static_cast<unsigned>(std::stoul(parts.back()));
    opts.config.services.push_back(svc);
  }
  if (!opts.scan_arg.empty()) {
    // addr:rate:lo-hi
    auto p1 = opts.scan_arg.rfind(':');
    auto p2 = opts.scan_arg.rfind(':', p1 - 1);
    if (p1 == std::string::npos || p2 == std::string::npos) {
      std::cerr << "scan spec must be addr:rate:portlo-porthi\n";
      return kExitConfig;
    }
    ScanSpec scan;
    scan.source = parse_addr(opts.scan_arg.substr(0, p2));
    scan.flows_per_window = static_cast<unsigned>(
        std::stoul(opts.scan_arg.substr(p2 + 1, p1 - p2 - 1)));
    std::string range = opts.scan_arg.substr(p1 + 1);
    auto dash = range.find('-');
    if (dash == std::string::npos) {
      std::cerr << "scan port range must be lo-hi\n";
      return kExitConfig;
    }
    scan.port_lo = parse_port_arg(range.substr(0, dash));
    scan.port_hi = parse_port_arg(range.substr(dash + 1));
    opts.config.scan = scan;
  }

  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (opts.out_path != "-") {
    file_out.open(opts.out_path);
    if (!file_out) {
      std::cerr << "cannot open output: " << opts.out_path << "\n";
      return kExitIo;
    }
    out = &file_out;
  }

  const bool as_json = opts.format == "jsonl";
  json labels = json::array();
  LabeledStream stream = generate(opts.config);
  for (const auto& r : stream.records) {
    *out << (as_json ? format_flow_json(r.rec) : format_flow_csv(r.rec))
         << "\n";
    labels.push_back(record_label_name(r.label));
  }
  if (!*out) {
    std::cerr << "stream write failed\n";
    return kExitIo;
  }

  if (!opts.truth_path.empty()) {
    json truth;
    truth["seed"] = opts.config.seed;
    truth["r_d_target"] = opts.config.r_d;
    truth["r_d_empirical"] = stream.empirical_r_d();
    truth["records"] = stream.records.size();
    truth["services"] = json::array();
    for (const auto& t : stream.true_services) {
      truth["services"].push_back(tuple_json(t));
    }
    truth["labels"] = std::move(labels);
    std::ofstream tf(opts.truth_path);
    if (!tf) {
      std::cerr << "cannot open truth file: " << opts.truth_path << "\n";
      return kExitIo;
    }
    tf << truth.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"service-node discovery from flow records"};
  app.require_subcommand(1);

  DetectOpts detect_opts;
  auto* detect = app.add_subcommand("detect",
                                    "stream flows through the two-stage "
                                    "detector; events as JSONL on stdout");
  add_common_flags(detect, detect_opts.common);
  detect->add_option("--input,-i", detect_opts.input,
                     "flow file or - for stdin");
  detect->add_option("--output,-o", detect_opts.output_dir,
                     "directory for per-window data files");
  detect->add_option("--format", detect_opts.format, "csv | jsonl | auto")
      ->check(CLI::IsMember({"csv", "jsonl", "auto"}));
  detect->add_flag("--address-summaries", detect_opts.address_summaries,
                   "also write address-set summary files per window");

  std::string query_tuple, query_addr;
  std::vector<std::string> query_files;
  auto* query = app.add_subcommand(
      "query", "membership check against data-file summary headers");
  query->add_option("--tuple", query_tuple, "addr,port,proto");
  query->add_option("--address", query_addr, "bare address (kind-2 files)");
  query->add_option("files", query_files, "data files")->required();

  BenchOpts bench_opts;
  auto* bench = app.add_subcommand(
      "bench", "compare approximate detection with the exact hash table");
  add_common_flags(bench, bench_opts.common);
  bench->add_option("--input", bench_opts.input,
                    "replay a flow file instead of synthetic load");
  bench->add_option("--seed", bench_opts.seed, "synthetic seed");
  bench->add_option("--duration", bench_opts.duration,
                    "synthetic duration in seconds");
  bench->add_option("--flows-per-window", bench_opts.flows_per_window,
                    "synthetic flows per window");

  double params_epsilon = 0.05, params_n = 1e6, params_rd = 1.0;
  unsigned params_m = 6;
  auto* params =
      app.add_subcommand("params", "filter sizing for a target error rate");
  params->add_option("--epsilon", params_epsilon, "target FP rate")->required();
  params->add_option("--n", params_n, "elements per window")->required();
  params->add_option("--rd", params_rd, "distinct ratio");
  params->add_option("--windows-node", params_m, "RBBF window count");

  GenOpts gen_opts;
  auto* gen = app.add_subcommand("gen", "generate a labeled synthetic stream");
  gen->add_option("--seed", gen_opts.config.seed, "RNG seed");
  gen->add_option("--duration", gen_opts.config.duration_seconds, "seconds");
  gen->add_option("--window-seconds", gen_opts.config.window_seconds,
                  "window width");
  gen->add_option("--flows-per-window", gen_opts.config.flows_per_window,
                  "records per window");
  gen->add_option("--rd", gen_opts.config.r_d, "distinct-ratio target");
  gen->add_option("--bidirectional-fraction",
                  gen_opts.config.bidirectional_fraction,
                  "cross-check against rd");
  gen->add_option("--split-fraction", gen_opts.config.split_flow_fraction,
                  "fraction of sessions with a split continuation");
  gen->add_option("--straddle-fraction", gen_opts.config.straddle_fraction,
                  "fraction of pairs forced across a window boundary");
  gen->add_option("--tail-weight", gen_opts.config.gap.tail_weight,
                  "probability of a long-lived session");
  gen->add_option("--service", gen_opts.service_args,
                  "planted service addr:port:proto:clients (repeatable)");
  gen->add_option("--scan", gen_opts.scan_arg, "scan burst addr:rate:lo-hi");
  gen->add_flag("--reuse-client-ports", gen_opts.config.reuse_client_ports,
                "reproduce the NAT/scanner false-positive case");
  gen->add_option("--out", gen_opts.out_path, "stream path or -");
  gen->add_option("--truth", gen_opts.truth_path, "ground-truth JSON path");
  gen->add_option("--format", gen_opts.format, "csv | jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (detect->parsed()) {
      return run_detect(detect_opts,
                        detect->count("--expected-flows") > 0,
                        detect->count("--rd") > 0);
    }
    if (query->parsed()) {
      return run_query(query_tuple, query_addr, query_files);
    }
    if (bench->parsed()) {
      return run_bench(bench_opts, bench->count("--expected-flows") > 0,
                       bench->count("--rd") > 0);
    }
    if (params->parsed()) {
      return run_params(params_epsilon, params_n, params_rd, params_m);
    }
    if (gen->parsed()) {
      return run_gen(gen_opts);
    }
  } catch (const FlowFormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const SummaryFormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
