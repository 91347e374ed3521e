#include "ftm/snapshot.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "ftm/error.hpp"

namespace ftm {

namespace {

constexpr std::string_view kMagic = "FTMSNAP1";
constexpr std::string_view kMagicStem = "FTMSNAP";

constexpr std::uint32_t tag(const char (&s)[5]) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[0])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(s[3])) << 24;
}

constexpr std::uint32_t kDict = tag("DICT");
constexpr std::uint32_t kTrpl = tag("TRPL");
constexpr std::uint32_t kLabl = tag("LABL");
constexpr std::uint32_t kStat = tag("STAT");

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
  }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() { return std::string(take(u64())); }
  /// Element count, sanity-checked against the bytes left so corrupt counts cannot trigger huge allocations.
  std::size_t count(std::size_t min_element_size) {
    std::uint64_t n = u64();
    if (n > remaining() / std::max<std::size_t>(1, min_element_size)) fail("element count exceeds section size");
    return static_cast<std::size_t>(n);
  }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view take(std::uint64_t n) {
    if (n > remaining()) fail("section payload ends early");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  [[noreturn]] static void fail(const std::string& msg) { throw SnapshotError(SnapshotError::Kind::Format, msg); }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t pos = 0;
  while (pos < payload.size()) {
    auto chunk = static_cast<uInt>(std::min<std::size_t>(payload.size() - pos, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data() + pos), chunk);
    pos += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void write_section(std::ofstream& out, std::uint32_t section_tag, const std::string& payload) {
  Writer header;
  header.u32(section_tag);
  header.u64(payload.size());
  std::string h = header.take();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  Writer trailer;
  trailer.u32(crc32_of(payload));
  std::string t = trailer.take();
  out.write(t.data(), static_cast<std::streamsize>(t.size()));
}

GraphParts decode_parts(const std::array<std::string_view, 4>& sections);

}  // namespace

void snapshot_save(const KnowledgeGraph& kg, const std::filesystem::path& path) {
  GraphParts parts = kg.to_parts();

  Writer dict;
  dict.u64(parts.iris.size());
  for (const auto& iri : parts.iris) dict.str(iri);
  dict.u64(parts.literals.size());
  for (const auto& lit : parts.literals) {
    dict.str(lit.raw);
    dict.u8(static_cast<std::uint8_t>((lit.datatype ? 1 : 0) | (lit.language ? 2 : 0)));
    if (lit.datatype) dict.str(lit.datatype->str());
    if (lit.language) dict.str(*lit.language);
  }

  Writer trpl;
  trpl.u64(parts.triples.size());
  for (const auto& t : parts.triples) {
    trpl.u32(t.subject);
    trpl.u32(t.predicate);
    trpl.u8(t.object.is_literal ? 1 : 0);
    trpl.u32(t.object.id);
  }

  Writer labl;
  labl.u64(parts.labels.size());
  for (const auto& labels : parts.labels) {
    labl.u64(labels.size());
    for (const auto& l : labels) labl.str(l);
  }

  Writer stat;
  stat.u64(parts.stats.size());
  for (const auto& s : parts.stats) {
    stat.str(s.predicate.str());
    stat.u64(s.triple_count);
    stat.u64(s.distinct_subjects);
    stat.u64(s.distinct_objects);
    stat.f64(s.functionality);
    stat.f64(s.inverse_functionality);
    stat.f64(s.unique_ratio);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::Io, "cannot open snapshot for writing: " + path.string());
  out.write(kMagic.data(), static_cast<std::streamsize>(kMagic.size()));
  write_section(out, kDict, dict.take());
  write_section(out, kTrpl, trpl.take());
  write_section(out, kLabl, labl.take());
  write_section(out, kStat, stat.take());
  out.close();
  if (!out) throw Error(ErrorCategory::Io, "failed writing snapshot: " + path.string());
}

KnowledgeGraph snapshot_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::Ingest, "cannot open snapshot: " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  using Kind = SnapshotError::Kind;
  if (data.size() < kMagic.size()) {
    if (std::string_view(data) == kMagic.substr(0, data.size()))
      throw SnapshotError(Kind::Checksum, "snapshot truncated before header: " + path.string());
    throw SnapshotError(Kind::Format, "not a snapshot file: " + path.string());
  }
  if (data.compare(0, kMagic.size(), kMagic) != 0) {
    if (data.compare(0, kMagicStem.size(), kMagicStem) == 0 && std::isdigit(static_cast<unsigned char>(data[7])))
      throw SnapshotError(Kind::Version, std::string("snapshot version ") + data[7] + " is not supported (expected 1)");
    throw SnapshotError(Kind::Format, "not a snapshot file: " + path.string());
  }

  std::array<std::string_view, 4> sections{};
  std::array<bool, 4> seen{};
  std::string_view rest = std::string_view(data).substr(kMagic.size());
  while (!rest.empty()) {
    if (rest.size() < 12) throw SnapshotError(Kind::Checksum, "snapshot truncated in section header");
    Reader header(rest.substr(0, 12));
    std::uint32_t section_tag = header.u32();
    std::uint64_t length = header.u64();
    if (length > rest.size() - 12 || rest.size() - 12 - length < 4)
      throw SnapshotError(Kind::Checksum, "snapshot truncated in section payload");
    std::string_view payload = rest.substr(12, length);
    std::uint32_t stored = Reader(rest.substr(12 + length, 4)).u32();
    if (stored != crc32_of(payload)) throw SnapshotError(Kind::Checksum, "snapshot section checksum mismatch");
    int index = section_tag == kDict ? 0 : section_tag == kTrpl ? 1 : section_tag == kLabl ? 2 : section_tag == kStat ? 3 : -1;
    if (index < 0) throw SnapshotError(Kind::Format, "unknown snapshot section");
    if (seen[index]) throw SnapshotError(Kind::Format, "duplicate snapshot section");
    seen[index] = true;
    sections[index] = payload;
    rest.remove_prefix(12 + length + 4);
  }
  for (bool s : seen) {
    if (!s) throw SnapshotError(Kind::Checksum, "snapshot is missing a section");
  }

  try {
    return KnowledgeGraph(decode_parts(sections));
  } catch (const ContractViolation& e) {
    throw SnapshotError(Kind::Format, std::string("inconsistent snapshot: ") + e.what());
  }
}

namespace {

GraphParts decode_parts(const std::array<std::string_view, 4>& sections) {
  GraphParts parts;
  Reader dict(sections[0]);
  parts.iris.resize(dict.count(8));
  for (auto& iri : parts.iris) iri = dict.str();
  const std::size_t n_literals = dict.count(9);
  parts.literals.reserve(n_literals);
  for (std::size_t i = 0; i < n_literals; ++i) {
    std::string raw = dict.str();
    std::uint8_t flags = dict.u8();
    std::optional<Iri> datatype;
    std::optional<std::string> language;
    if (flags & 1) datatype = Iri(dict.str());
    if (flags & 2) language = dict.str();
    parts.literals.push_back(classify_literal(std::move(raw), std::move(datatype), std::move(language)));
  }

  Reader trpl(sections[1]);
  parts.triples.resize(trpl.count(13));
  for (auto& t : parts.triples) {
    t.subject = trpl.u32();
    t.predicate = trpl.u32();
    t.object.is_literal = trpl.u8() != 0;
    t.object.id = trpl.u32();
  }

  Reader labl(sections[2]);
  parts.labels.resize(labl.count(8));
  for (auto& labels : parts.labels) {
    labels.resize(labl.count(8));
    for (auto& l : labels) l = labl.str();
  }

  Reader stat(sections[3]);
  std::size_t n_stats = stat.count(56);
  for (std::size_t i = 0; i < n_stats; ++i) {
    PredicateStats s{Iri(stat.str())};
    s.triple_count = stat.u64();
    s.distinct_subjects = stat.u64();
    s.distinct_objects = stat.u64();
    s.functionality = stat.f64();
    s.inverse_functionality = stat.f64();
    s.unique_ratio = stat.f64();
    parts.stats.push_back(std::move(s));
  }
  if (!dict.done() || !trpl.done() || !labl.done() || !stat.done())
    throw SnapshotError(SnapshotError::Kind::Format, "trailing bytes in snapshot section");
  return parts;
}

}  // namespace

}  // namespace ftm
