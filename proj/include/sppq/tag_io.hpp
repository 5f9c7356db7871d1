#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sppq/time_tags.hpp"

namespace sppq {

/// Binary layout: "QTT1", u64 record count, u64 duration_ps, then 9-byte
/// records (u8 channel, u64 time_ps). Everything little-endian, records in
/// time order.
inline constexpr std::string_view kTagMagic = "QTT1";
inline constexpr std::size_t kTagHeaderBytes = 20;
inline constexpr std::size_t kTagRecordBytes = 9;

std::string encode_tags(const TagSet& tags);

/// Throws ParseError with the byte offset of the first bad field.
TagSet decode_tags(std::string_view bytes);

void write_tags(const std::filesystem::path& path, const TagSet& tags);
TagSet read_tags(const std::filesystem::path& path);

/// CSV form: a "# duration_ps=N" line, a "channel,time_ps" header, one record per line.
std::string encode_tags_csv(const TagSet& tags);
TagSet decode_tags_csv(std::string_view text);

void write_tags_csv(const std::filesystem::path& path, const TagSet& tags);
TagSet read_tags_csv(const std::filesystem::path& path);

/// Reads whole files; throws InputError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace sppq
