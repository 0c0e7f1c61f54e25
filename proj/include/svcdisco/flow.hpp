#pragma once

// Flow records and their canonical byte layouts. A flow key serializes to
// exactly 40 bytes (320 bits): src addr (16) | dst addr (16) | src port
// (2, BE) | dst port (2, BE) | proto (1) | zero pad (3). IPv4 addresses are
// carried as IPv4-mapped IPv6 (::ffff:a.b.c.d) so one layout serves both
// families. The padding is part of the hashed bytes.
//
// The text interchange format is CSV
//   start_ms,end_ms,src_addr,src_port,dst_addr,dst_port,proto,packets,bytes
// or JSONL with the same field names. Only TCP (6) and UDP (17) records are
// in scope; other protocols are counted and skipped.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace svcdisco {

using Addr = std::array<std::uint8_t, 16>;

constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;

constexpr std::size_t kFlowKeyBytes = 40;
constexpr std::size_t kEndNodeTupleBytes = 19;

Addr make_addr_v4(std::uint8_t a, std::uint8_t b, std::uint8_t c,
                  std::uint8_t d);
bool is_v4_mapped(const Addr& addr);

// Accepts dotted-quad IPv4 (mapped on the fly) and any textual IPv6 form.
Addr parse_addr(std::string_view text);
// Canonical text: dotted quad for v4-mapped addresses, compressed IPv6
// otherwise.
std::string format_addr(const Addr& addr);

struct FlowKey {
  Addr src_addr{};
  Addr dst_addr{};
  std::uint16_t src_port{0};
  std::uint16_t dst_port{0};
  std::uint8_t proto{kProtoTcp};

  auto operator<=>(const FlowKey&) const = default;
};

struct EndNodeTuple {
  Addr addr{};
  std::uint16_t port{0};
  std::uint8_t proto{kProtoTcp};

  auto operator<=>(const EndNodeTuple&) const = default;
};

struct FlowRecord {
  FlowKey key;
  std::uint64_t start_ms{0};
  std::uint64_t end_ms{0};
  std::uint64_t packets{1};
  std::uint64_t bytes{0};

  auto operator<=>(const FlowRecord&) const = default;
};

// Source and destination sides exchanged; the reply direction of a session.
FlowKey conjugate(const FlowKey& key);

struct EndNodes {
  EndNodeTuple src;
  EndNodeTuple dst;
};
EndNodes end_nodes(const FlowKey& key);

std::array<std::uint8_t, kFlowKeyBytes> serialize_key(const FlowKey& key);
FlowKey parse_key(std::span<const std::uint8_t, kFlowKeyBytes> bytes);

std::array<std::uint8_t, kEndNodeTupleBytes> serialize_tuple(
    const EndNodeTuple& tuple);

// Lexicographically smaller of the key's and its conjugate's serialization;
// a direction-free identity for exact tables.
std::array<std::uint8_t, kFlowKeyBytes> canonical_flow_key(const FlowKey& key);

struct FlowFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ParseResult {
  Ok,
  SkippedProto,  // well-formed record outside TCP/UDP
};

ParseResult parse_flow_line(std::string_view line, FlowRecord& out);
ParseResult parse_flow_json(std::string_view line, FlowRecord& out);

std::string format_flow_csv(const FlowRecord& rec);
std::string format_flow_json(const FlowRecord& rec);

enum class FlowFormat { Auto, Csv, Jsonl };

// Line-oriented reader over either text format. Malformed lines throw
// FlowFormatError with the line number; out-of-scope protocols are skipped
// and counted.
class FlowReader {
 public:
  explicit FlowReader(std::istream& in, FlowFormat format = FlowFormat::Auto);

  bool next(FlowRecord& out);

  std::uint64_t lines_read() const { return lines_; }
  std::uint64_t records_parsed() const { return parsed_; }
  std::uint64_t records_skipped() const { return skipped_; }

 private:
  std::istream& in_;
  FlowFormat format_;
  std::uint64_t lines_{0};
  std::uint64_t parsed_{0};
  std::uint64_t skipped_{0};
};

}  // namespace svcdisco
