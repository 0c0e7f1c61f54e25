#include "svcdisco/flow.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <istream>

#include <json.hpp>

namespace svcdisco {

namespace {

constexpr std::array<std::uint8_t, 12> kV4MappedPrefix = {
    0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0xff, 0xff};

std::uint64_t parse_u64_field(std::string_view text, const char* what) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw FlowFormatError(std::string("bad ") + what + ": '" +
                          std::string(text) + "'");
  }
  return value;
}

std::uint16_t parse_port_field(std::string_view text, const char* what) {
  std::uint64_t v = parse_u64_field(text, what);
  if (v > 0xffff) {
    throw FlowFormatError(std::string(what) + " out of range: " +
                          std::string(text));
  }
  return static_cast<std::uint16_t>(v);
}

// Returns the protocol number, or -1 for a recognized-but-out-of-scope name.
int parse_proto_field(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "tcp") return kProtoTcp;
  if (lower == "udp") return kProtoUdp;
  if (!lower.empty() && std::all_of(lower.begin(), lower.end(), [](char c) {
        return c >= '0' && c <= '9';
      })) {
    std::uint64_t v = parse_u64_field(lower, "proto");
    if (v > 0xff) throw FlowFormatError("proto out of range: " + lower);
    return static_cast<int>(v);
  }
  // Known protocol names outside scope fall through as skippable.
  if (lower == "icmp" || lower == "icmp6" || lower == "igmp" ||
      lower == "sctp" || lower == "gre" || lower == "esp") {
    return -1;
  }
  throw FlowFormatError("bad proto: '" + std::string(text) + "'");
}

void validate_record(const FlowRecord& rec) {
  if (rec.end_ms < rec.start_ms) {
    throw FlowFormatError("end_ms precedes start_ms");
  }
  if (rec.packets < 1) throw FlowFormatError("packets must be >= 1");
}

ParseResult finish_record(FlowRecord& out, int proto) {
  if (proto < 0 || (proto != kProtoTcp && proto != kProtoUdp)) {
    return ParseResult::SkippedProto;
  }
  out.key.proto = static_cast<std::uint8_t>(proto);
  validate_record(out);
  return ParseResult::Ok;
}

void put_u16_be(std::uint8_t* dst, std::uint16_t v) {
  dst[0] = static_cast<std::uint8_t>(v >> 8);
  dst[1] = static_cast<std::uint8_t>(v & 0xff);
}

std::uint16_t get_u16_be(const std::uint8_t* src) {
  return static_cast<std::uint16_t>((src[0] << 8) | src[1]);
}

}  // namespace

Addr make_addr_v4(std::uint8_t a, std::uint8_t b, std::uint8_t c,
                  std::uint8_t d) {
  Addr addr{};
  std::copy(kV4MappedPrefix.begin(), kV4MappedPrefix.end(), addr.begin());
  addr[12] = a;
  addr[13] = b;
  addr[14] = c;
  addr[15] = d;
  return addr;
}

bool is_v4_mapped(const Addr& addr) {
  return std::equal(kV4MappedPrefix.begin(), kV4MappedPrefix.end(),
                    addr.begin());
}

Addr parse_addr(std::string_view text) {
  std::string buf(text);
  in_addr v4{};
  if (inet_pton(AF_INET, buf.c_str(), &v4) == 1) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v4.s_addr);
    return make_addr_v4(p[0], p[1], p[2], p[3]);
  }
  in6_addr v6{};
  if (inet_pton(AF_INET6, buf.c_str(), &v6) == 1) {
    Addr addr{};
    std::memcpy(addr.data(), v6.s6_addr, 16);
    return addr;
  }
  throw FlowFormatError("bad address: '" + buf + "'");
}

std::string format_addr(const Addr& addr) {
  char buf[INET6_ADDRSTRLEN] = {};
  if (is_v4_mapped(addr)) {
    in_addr v4{};
    std::memcpy(&v4.s_addr, addr.data() + 12, 4);
    inet_ntop(AF_INET, &v4, buf, sizeof(buf));
  } else {
    in6_addr v6{};
    std::memcpy(v6.s6_addr, addr.data(), 16);
    inet_ntop(AF_INET6, &v6, buf, sizeof(buf));
  }
  return buf;
}

FlowKey conjugate(const FlowKey& key) {
  FlowKey out = key;
  std::swap(out.src_addr, out.dst_addr);
  std::swap(out.src_port, out.dst_port);
  return out;
}

EndNodes end_nodes(const FlowKey& key) {
  return {EndNodeTuple{key.src_addr, key.src_port, key.proto},
          EndNodeTuple{key.dst_addr, key.dst_port, key.proto}};
}

std::array<std::uint8_t, kFlowKeyBytes> serialize_key(const FlowKey& key) {
  std::array<std::uint8_t, kFlowKeyBytes> out{};
  std::copy(key.src_addr.begin(), key.src_addr.end(), out.begin());
  std::copy(key.dst_addr.begin(), key.dst_addr.end(), out.begin() + 16);
  put_u16_be(out.data() + 32, key.src_port);
  put_u16_be(out.data() + 34, key.dst_port);
  out[36] = key.proto;
  // out[37..39] stay zero: alignment padding, included in hashing.
  return out;
}

FlowKey parse_key(std::span<const std::uint8_t, kFlowKeyBytes> bytes) {
  FlowKey key;
  std::copy(bytes.begin(), bytes.begin() + 16, key.src_addr.begin());
  std::copy(bytes.begin() + 16, bytes.begin() + 32, key.dst_addr.begin());
  key.src_port = get_u16_be(bytes.data() + 32);
  key.dst_port = get_u16_be(bytes.data() + 34);
  key.proto = bytes[36];
  return key;
}

std::array<std::uint8_t, kEndNodeTupleBytes> serialize_tuple(
    const EndNodeTuple& tuple) {
  std::array<std::uint8_t, kEndNodeTupleBytes> out{};
  std::copy(tuple.addr.begin(), tuple.addr.end(), out.begin());
  put_u16_be(out.data() + 16, tuple.port);
  out[18] = tuple.proto;
  return out;
}

std::array<std::uint8_t, kFlowKeyBytes> canonical_flow_key(const FlowKey& key) {
  auto a = serialize_key(key);
  auto b = serialize_key(conjugate(key));
  return a <= b ? a : b;
}

ParseResult parse_flow_line(std::string_view line, FlowRecord& out) {
  std::array<std::string_view, 9> fields;
  std::size_t n = 0;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    std::string_view field = comma == std::string_view::npos
                                 ? line.substr(pos)
                                 : line.substr(pos, comma - pos);
    if (n == 9) throw FlowFormatError("expected 9 comma-separated fields");
    fields[n++] = field;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (n != 9) {
    throw FlowFormatError("expected 9 comma-separated fields");
  }

  FlowRecord rec;
  rec.start_ms = parse_u64_field(fields[0], "start_ms");
  rec.end_ms = parse_u64_field(fields[1], "end_ms");
  rec.key.src_addr = parse_addr(fields[2]);
  rec.key.src_port = parse_port_field(fields[3], "src_port");
  rec.key.dst_addr = parse_addr(fields[4]);
  rec.key.dst_port = parse_port_field(fields[5], "dst_port");
  int proto = parse_proto_field(fields[6]);
  rec.packets = parse_u64_field(fields[7], "packets");
  rec.bytes = parse_u64_field(fields[8], "bytes");

  out = rec;
  return finish_record(out, proto);
}

ParseResult parse_flow_json(std::string_view line, FlowRecord& out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FlowFormatError(std::string("bad json: ") + e.what());
  }
  try {
    FlowRecord rec;
    rec.start_ms = j.at("start_ms").get<std::uint64_t>();
    rec.end_ms = j.at("end_ms").get<std::uint64_t>();
    rec.key.src_addr = parse_addr(j.at("src_addr").get<std::string>());
    rec.key.src_port = j.at("src_port").get<std::uint16_t>();
    rec.key.dst_addr = parse_addr(j.at("dst_addr").get<std::string>());
    rec.key.dst_port = j.at("dst_port").get<std::uint16_t>();
    int proto;
    const auto& p = j.at("proto");
    if (p.is_string()) {
      proto = parse_proto_field(p.get<std::string>());
    } else {
      proto = p.get<int>();
      if (proto < 0 || proto > 0xff) throw FlowFormatError("proto out of range");
    }
    rec.packets = j.at("packets").get<std::uint64_t>();
    rec.bytes = j.at("bytes").get<std::uint64_t>();
    out = rec;
    return finish_record(out, proto);
  } catch (const nlohmann::json::exception& e) {
    throw FlowFormatError(std::string("bad json record: ") + e.what());
  }
}

std::string format_flow_csv(const FlowRecord& rec) {
  std::string out;
  out += std::to_string(rec.start_ms);
  out += ',';
  out += std::to_string(rec.end_ms);
  out += ',';
  out += format_addr(rec.key.src_addr);
  out += ',';
  out += std::to_string(rec.key.src_port);
  out += ',';
  out += format_addr(rec.key.dst_addr);
  out += ',';
  out += std::to_string(rec.key.dst_port);
  out += ',';
  out += std::to_string(rec.key.proto);
  out += ',';
  out += std::to_string(rec.packets);
  out += ',';
  out += std::to_string(rec.bytes);
  return out;
}

std::string format_flow_json(const FlowRecord& rec) {
  nlohmann::json j{
      {"start_ms", rec.start_ms},
      {"end_ms", rec.end_ms},
      {"src_addr", format_addr(rec.key.src_addr)},
      {"src_port", rec.key.src_port},
      {"dst_addr", format_addr(rec.key.dst_addr)},
      {"dst_port", rec.key.dst_port},
      {"proto", rec.key.proto},
      {"packets", rec.packets},
      {"bytes", rec.bytes},
  };
  return j.dump();
}

FlowReader::FlowReader(std::istream& in, FlowFormat format)
    : in_(in), format_(format) {}

bool FlowReader::next(FlowRecord& out) {
  std::string line;
  while (std::getline(in_, line)) {
    ++lines_;
    std::string_view v(line);
    while (!v.empty() && (v.back() == '\r' || v.back() == ' ')) {
      v.remove_suffix(1);
    }
    if (v.empty() || v.front() == '#') continue;
    try {
      ParseResult r = (format_ == FlowFormat::Jsonl ||
                       (format_ == FlowFormat::Auto && v.front() == '{'))
                          ? parse_flow_json(v, out)
                          : parse_flow_line(v, out);
      if (r == ParseResult::SkippedProto) {
        ++skipped_;
        continue;
      }
      ++parsed_;
      return true;
    } catch (const FlowFormatError& e) {
      throw FlowFormatError("line " + std::to_string(lines_) + ": " +
                            e.what());
    }
  }
  return false;
}

}  // namespace svcdisco
