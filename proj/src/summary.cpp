#include "svcdisco/summary.hpp"

#include <cstring>
#include <fstream>
#include <ostream>

namespace svcdisco {

namespace {

constexpr char kMagic[4] = {'R', 'B', 'B', 'F'};

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

class Cursor {
 public:
  explicit Cursor(std::istream& in) : in_(in) {}

  void read(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw SummaryFormatError(std::string("truncated summary record (") +
                               what + ")");
    }
    consumed_ += n;
  }

  template <typename T>
  T get_le(const char* what) {
    std::uint8_t buf[sizeof(T)];
    read(buf, sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(buf[i]) << (8 * i);
    }
    return v;
  }

  std::uint64_t consumed() const { return consumed_; }

 private:
  std::istream& in_;
  std::uint64_t consumed_{0};
};

}  // namespace

std::size_t write_summary(std::ostream& out, const SummaryRecord& record) {
  const auto& family = record.filter.family();
  if (record.filter.bit_count() > 0xffffffffull) {
    throw std::invalid_argument("summary filter too large for u32 bit count");
  }
  if (record.kind != SummaryRecord::kKindNodeB2 &&
      record.kind != SummaryRecord::kKindAddrSet) {
    throw std::invalid_argument("unknown summary kind");
  }
  std::string buf;
  buf.reserve(record.byte_size());
  buf.append(kMagic, 4);
  put_le<std::uint16_t>(buf, record.version);
  buf.push_back(static_cast<char>(record.kind));
  put_le<std::uint32_t>(buf,
                        static_cast<std::uint32_t>(record.filter.bit_count()));
  buf.push_back(static_cast<char>(family.k()));
  for (const auto& m : family.members()) {
    buf.push_back(static_cast<char>(m.alg));
  }
  for (const auto& m : family.members()) {
    put_le<std::uint64_t>(buf, m.seed);
  }
  put_le<std::uint64_t>(buf, record.window_start_ms);
  put_le<std::uint32_t>(buf, record.window_seconds);
  buf.append(reinterpret_cast<const char*>(record.filter.bytes().data()),
             record.filter.bytes().size());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("summary write failed");
  return buf.size();
}

SummaryRecord read_summary(std::istream& in, std::uint64_t* bytes_read) {
  Cursor cur(in);
  char magic[4];
  cur.read(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw SummaryFormatError("bad magic: not a summary record");
  }
  auto version = cur.get_le<std::uint16_t>("version");
  if (version != SummaryRecord::kVersion) {
    throw SummaryFormatError("unsupported summary version " +
                             std::to_string(version) + " (supported: " +
                             std::to_string(SummaryRecord::kVersion) + ")");
  }
  auto kind = cur.get_le<std::uint8_t>("kind");
  if (kind != SummaryRecord::kKindNodeB2 &&
      kind != SummaryRecord::kKindAddrSet) {
    throw SummaryFormatError("unknown summary kind " + std::to_string(kind));
  }
  auto m = cur.get_le<std::uint32_t>("bit count");
  if (m < 8) throw SummaryFormatError("bit count too small");
  auto k = cur.get_le<std::uint8_t>("k");
  if (k < 1 || k > 8) throw SummaryFormatError("k out of range");

  std::vector<HashMember> members(k);
  for (auto& mem : members) {
    auto id = cur.get_le<std::uint8_t>("hash member id");
    if (id >= kHashAlgCount) {
      throw SummaryFormatError("unknown hash member id " + std::to_string(id));
    }
    mem.alg = static_cast<HashAlg>(id);
  }
  for (auto& mem : members) {
    mem.seed = cur.get_le<std::uint64_t>("hash seed");
  }

  SummaryRecord record{
      version,
      kind,
      cur.get_le<std::uint64_t>("window start"),
      cur.get_le<std::uint32_t>("window width"),
      BloomFilter(8, HashFamily::with_k(1)),
  };
  std::vector<std::uint8_t> bits((static_cast<std::size_t>(m) + 7) / 8);
  cur.read(bits.data(), bits.size(), "bit array");
  try {
    HashFamily family{std::move(members)};
    record.filter =
        BloomFilter::from_bits(m, std::move(family), std::move(bits));
  } catch (const std::invalid_argument& e) {
    throw SummaryFormatError(std::string("bad hash family in header: ") +
                             e.what());
  }
  if (bytes_read) *bytes_read = cur.consumed();
  return record;
}

bool query_summary(const SummaryRecord& record,
                   std::span<const std::uint8_t> key) {
  if (key.size() != record.key_bytes()) {
    throw std::invalid_argument(
        "key length " + std::to_string(key.size()) +
        " does not match summary kind (expects " +
        std::to_string(record.key_bytes()) + " bytes)");
  }
  return record.filter.contains(key);
}

std::vector<FileQueryResult> filter_files(
    const std::vector<std::string>& paths,
    std::span<const std::uint8_t> key) {
  std::vector<FileQueryResult> out;
  out.reserve(paths.size());
  for (const auto& path : paths) {
    FileQueryResult r;
    r.path = path;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      r.error = "cannot open";
      out.push_back(std::move(r));
      continue;
    }
    try {
      SummaryRecord record = read_summary(in, &r.header_bytes);
      r.matched = query_summary(record, key);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::string> matching_paths(
    const std::vector<FileQueryResult>& results) {
  std::vector<std::string> out;
  for (const auto& r : results) {
    if (r.error.empty() && r.matched) out.push_back(r.path);
  }
  return out;
}

void write_data_file(std::ostream& out, const SummaryRecord& record,
                     std::span<const FlowRecord> body) {
  write_summary(out, record);
  for (const auto& rec : body) {
    out << format_flow_csv(rec) << '\n';
  }
  if (!out) throw std::runtime_error("data file write failed");
}

}  // namespace svcdisco
