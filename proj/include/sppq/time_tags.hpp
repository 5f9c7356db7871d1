#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sppq {

/// Detection time in integer picoseconds since run start.
using Timestamp = std::uint64_t;

/// Sorted timestamps of one channel.
using TagStream = std::vector<Timestamp>;

enum class Channel : std::uint8_t { A = 0, B1 = 1, B2 = 2 };

inline constexpr std::size_t kChannelCount = 3;

inline constexpr std::uint64_t kPicosecondsPerSecond = 1'000'000'000'000ULL;

inline constexpr std::size_t index(Channel c) noexcept { return static_cast<std::size_t>(c); }

std::string_view channel_name(Channel c) noexcept;

struct TimeTag {
  Channel channel = Channel::A;
  Timestamp time_ps = 0;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

/// One acquisition: a sorted stream per channel plus the run length.
struct TagSet {
  std::array<TagStream, kChannelCount> streams;
  std::uint64_t duration_ps = 0;

  TagStream& operator[](Channel c) { return streams[index(c)]; }
  const TagStream& operator[](Channel c) const { return streams[index(c)]; }

  /// Interleaves all channels into one time-ordered record list (ties broken by channel).
  std::vector<TimeTag> merged() const;

  /// Splits a record list back into per-channel streams. Throws InputError on an
  /// unknown channel or a record at or beyond `duration_ps`.
  static TagSet from_records(std::span<const TimeTag> records, std::uint64_t duration_ps);

  friend bool operator==(const TagSet&, const TagSet&) = default;
};

bool is_sorted_stream(std::span<const Timestamp> s) noexcept;

inline std::uint64_t seconds_to_ps(double seconds) {
  return static_cast<std::uint64_t>(seconds * static_cast<double>(kPicosecondsPerSecond) + 0.5);
}

inline double ps_to_seconds(std::uint64_t ps) { return static_cast<double>(ps) / static_cast<double>(kPicosecondsPerSecond); }

}  // namespace sppq
