#include "sppq/time_tags.hpp"

#include <algorithm>
#include <string>

#include "sppq/errors.hpp"

namespace sppq {

std::string_view channel_name(Channel c) noexcept {
  switch (c) {
    case Channel::A:
      return "A";
    case Channel::B1:
      return "B1";
    case Channel::B2:
      return "B2";
  }
  return "?";
}

bool is_sorted_stream(std::span<const Timestamp> s) noexcept { return std::is_sorted(s.begin(), s.end()); }

std::vector<TimeTag> TagSet::merged() const {
  std::vector<TimeTag> out;
  std::size_t total = 0;
  for (const auto& s : streams) total += s.size();
  out.reserve(total);
  std::array<std::size_t, kChannelCount> pos{};
  while (out.size() < total) {
    std::size_t best = kChannelCount;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      if (pos[c] == streams[c].size()) continue;
      if (best == kChannelCount || streams[c][pos[c]] < streams[best][pos[best]]) best = c;
    }
    out.push_back({static_cast<Channel>(best), streams[best][pos[best]++]});
  }
  return out;
}

TagSet TagSet::from_records(std::span<const TimeTag> records, std::uint64_t duration_ps) {
  TagSet set;
  set.duration_ps = duration_ps;
  for (const auto& r : records) {
    const auto c = static_cast<std::size_t>(r.channel);
    if (c >= kChannelCount) throw InputError("unknown channel id " + std::to_string(c));
    if (r.time_ps >= duration_ps) {
      throw InputError("tag at " + std::to_string(r.time_ps) + " ps lies beyond run duration " +
                       std::to_string(duration_ps) + " ps");
    }
    set.streams[c].push_back(r.time_ps);
  }
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    if (!is_sorted_stream(set.streams[c])) {
      throw InputError("channel " + std::string(channel_name(static_cast<Channel>(c))) + " is not time-ordered");
    }
  }
  return set;
}

}  // namespace sppq
