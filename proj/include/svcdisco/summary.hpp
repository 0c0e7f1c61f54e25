#pragma once

// Summary records: a window's B2 bit array (or a plain address-set filter)
// embedded at the head of a data file. The header carries the full hash
// family, so any process can rebuild the writer's hash functions and query
// membership without shared configuration, or skip a whole file after
// reading only the header.
//
// Layout, all integers little-endian:
//   magic "RBBF" | version u16 | kind u8 | m u32 | k u8 |
//   k x member-id u8 | k x seed u64 | window_start u64 (epoch ms) |
//   window_width u32 (s) | bit array ceil(m/8) bytes (bit i = byte i/8,
//   bit i%8)

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "svcdisco/bloom.hpp"
#include "svcdisco/flow.hpp"

namespace svcdisco {

struct SummaryFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SummaryRecord {
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::uint8_t kKindNodeB2 = 1;   // end-node tuples (19 B)
  static constexpr std::uint8_t kKindAddrSet = 2;  // bare addresses (16 B)

  std::uint16_t version{kVersion};
  std::uint8_t kind{kKindNodeB2};
  std::uint64_t window_start_ms{0};
  std::uint32_t window_seconds{0};
  BloomFilter filter;

  std::size_t byte_size() const {
    return 12 + 9 * static_cast<std::size_t>(filter.family().k()) + 12 +
           filter.bytes().size();
  }

  std::size_t key_bytes() const {
    return kind == kKindAddrSet ? 16 : kEndNodeTupleBytes;
  }
};

std::size_t write_summary(std::ostream& out, const SummaryRecord& record);

// Reads exactly one header; never touches the file body. bytes_read, when
// given, receives the number of bytes consumed.
SummaryRecord read_summary(std::istream& in, std::uint64_t* bytes_read = nullptr);

bool query_summary(const SummaryRecord& record,
                   std::span<const std::uint8_t> key);

struct FileQueryResult {
  std::string path;
  bool matched{false};
  std::uint64_t header_bytes{0};
  std::string error;  // empty unless the file could not be used
};

// Header-only scan: opens each file, reads its summary record, and reports
// whether the key may be present. Unreadable files get an error entry and
// the scan continues.
std::vector<FileQueryResult> filter_files(
    const std::vector<std::string>& paths, std::span<const std::uint8_t> key);

std::vector<std::string> matching_paths(
    const std::vector<FileQueryResult>& results);

// Data file = summary header followed by the window's records in CSV.
void write_data_file(std::ostream& out, const SummaryRecord& record,
                     std::span<const FlowRecord> body);

}  // namespace svcdisco
