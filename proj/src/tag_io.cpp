#include "sppq/tag_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sppq/errors.hpp"

namespace sppq {
namespace {

static_assert(std::endian::native == std::endian::little, "tag files assume a little-endian host");

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

std::uint64_t get_u64(std::string_view bytes, std::size_t at) {
  std::uint64_t v = 0;
  std::memcpy(&v, bytes.data() + at, 8);
  return v;
}

std::uint64_t parse_u64(std::string_view field, std::uint64_t offset, const char* what) {
  std::uint64_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(field) + "'", offset);
  }
  return v;
}

}  // namespace

std::string encode_tags(const TagSet& tags) {
  const auto records = tags.merged();
  std::string out;
  out.reserve(kTagHeaderBytes + records.size() * kTagRecordBytes);
  out.append(kTagMagic);
  put_u64(out, records.size());
  put_u64(out, tags.duration_ps);
  for (const auto& r : records) {
    out.push_back(static_cast<char>(r.channel));
    put_u64(out, r.time_ps);
  }
  return out;
}

TagSet decode_tags(std::string_view bytes) {
  if (bytes.size() < kTagMagic.size() || bytes.substr(0, kTagMagic.size()) != kTagMagic) {
    throw ParseError("bad magic, expected QTT1", 0);
  }
  if (bytes.size() < kTagHeaderBytes) throw ParseError("truncated header", bytes.size());
  const std::uint64_t count = get_u64(bytes, 4);
  const std::uint64_t duration = get_u64(bytes, 12);

  TagSet tags;
  tags.duration_ps = duration;
  Timestamp last = 0;
  std::size_t at = kTagHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i, at += kTagRecordBytes) {
    if (bytes.size() - at < kTagRecordBytes) throw ParseError("truncated record " + std::to_string(i), at);
    const auto ch = static_cast<std::uint8_t>(bytes[at]);
    if (ch >= kChannelCount) throw ParseError("unknown channel " + std::to_string(ch), at);
    const Timestamp t = get_u64(bytes, at + 1);
    if (t < last) throw ParseError("unsorted record " + std::to_string(i), at + 1);
    if (t >= duration) throw ParseError("record " + std::to_string(i) + " beyond run duration", at + 1);
    last = t;
    tags.streams[ch].push_back(t);
  }
  if (at != bytes.size()) throw ParseError("trailing bytes after last record", at);
  return tags;
}

std::string encode_tags_csv(const TagSet& tags) {
  std::ostringstream os;
  os << "# duration_ps=" << tags.duration_ps << "\nchannel,time_ps\n";
  for (const auto& r : tags.merged()) os << static_cast<int>(r.channel) << ',' << r.time_ps << '\n';
  return os.str();
}

TagSet decode_tags_csv(std::string_view text) {
  TagSet tags;
  bool have_duration = false;
  bool have_header = false;
  Timestamp last = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::uint64_t offset = pos;
    pos = eol + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "# duration_ps=";
      if (line.starts_with(key)) {
        tags.duration_ps = parse_u64(line.substr(key.size()), offset + key.size(), "duration");
        have_duration = true;
      }
      continue;
    }
    if (!have_header) {
      if (line != "channel,time_ps") throw ParseError("expected header 'channel,time_ps'", offset);
      have_header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos) throw ParseError("expected 'channel,time_ps'", offset);
    const auto ch = parse_u64(line.substr(0, comma), offset, "channel");
    if (ch >= kChannelCount) throw ParseError("unknown channel " + std::to_string(ch), offset);
    const auto t = parse_u64(line.substr(comma + 1), offset + comma + 1, "time");
    if (t < last) throw ParseError("unsorted record", offset);
    if (have_duration && t >= tags.duration_ps) throw ParseError("record beyond run duration", offset);
    last = t;
    tags.streams[ch].push_back(t);
  }
  if (!have_header) throw ParseError("missing header 'channel,time_ps'", text.size());
  if (!have_duration) tags.duration_ps = last + 1;
  return tags;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

void write_tags(const std::filesystem::path& path, const TagSet& tags) { write_file(path, encode_tags(tags)); }

TagSet read_tags(const std::filesystem::path& path) { return decode_tags(read_file(path)); }

void write_tags_csv(const std::filesystem::path& path, const TagSet& tags) { write_file(path, encode_tags_csv(tags)); }

TagSet read_tags_csv(const std::filesystem::path& path) { return decode_tags_csv(read_file(path)); }

}  // namespace sppq
