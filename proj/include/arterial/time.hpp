#pragma once

// Timestamps at 1-second resolution on a flat calendar: a single timezone,
// no DST, ISO-8601 text of the form YYYY-MM-DDTHH:MM:SS.

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "arterial/error.hpp"

namespace arterial {

inline constexpr std::int64_t kMinute = 60;
inline constexpr std::int64_t kHour = 3600;
inline constexpr std::int64_t kDay = 86400;
inline constexpr std::int64_t kWeek = 7 * kDay;

struct Timestamp {
  std::int64_t seconds = 0;  // since 1970-01-01T00:00:00

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
  friend constexpr Timestamp operator+(Timestamp t, std::int64_t s) { return {t.seconds + s}; }
  friend constexpr Timestamp operator-(Timestamp t, std::int64_t s) { return {t.seconds - s}; }
  friend constexpr std::int64_t operator-(Timestamp a, Timestamp b) { return a.seconds - b.seconds; }
};

/// Half-open interval [begin, end).
struct TimeWindow {
  Timestamp begin;
  Timestamp end;

  [[nodiscard]] constexpr std::int64_t length() const { return end - begin; }
  friend constexpr bool operator==(TimeWindow, TimeWindow) = default;
};

[[nodiscard]] inline std::int64_t seconds_of_day(Timestamp t) {
  std::int64_t r = t.seconds % kDay;
  return r < 0 ? r + kDay : r;
}

/// 0 = Sunday ... 6 = Saturday.
[[nodiscard]] inline unsigned day_of_week(Timestamp t) {
  using namespace std::chrono;
  auto days = sys_days{} + std::chrono::days{(t.seconds - seconds_of_day(t)) / kDay};
  return weekday{days}.c_encoding();
}

[[nodiscard]] inline Timestamp floor_to_day(Timestamp t) { return {t.seconds - seconds_of_day(t)}; }

[[nodiscard]] inline Timestamp make_timestamp(int y, unsigned mo, unsigned d, int hh = 0, int mm = 0,
                                              int ss = 0) {
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  auto days = sys_days{ymd}.time_since_epoch().count();
  return {static_cast<std::int64_t>(days) * kDay + hh * kHour + mm * kMinute + ss};
}

/// Accepts "YYYY-MM-DDTHH:MM:SS", "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM" or "YYYY-MM-DD".
[[nodiscard]] inline Timestamp parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  char sep = 'T';
  std::string buf(text);
  int n = std::sscanf(buf.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &hh, &mm, &ss);
  bool ok = (n == 3 && buf.size() == 10) || ((n == 6 || n == 7) && (sep == 'T' || sep == ' '));
  if (!ok || mo < 1 || mo > 12 || d < 1 || d > 31 || hh < 0 || hh > 23 || mm < 0 || mm > 59 || ss < 0 ||
      ss > 60) {
    throw DataError("invalid ISO-8601 timestamp: '" + buf + "'");
  }
  try {
    return make_timestamp(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), hh, mm, ss);
  } catch (const std::invalid_argument&) {
    throw DataError("invalid ISO-8601 timestamp: '" + buf + "'");
  }
}

[[nodiscard]] inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  std::int64_t sod = seconds_of_day(t);
  auto days = sys_days{} + std::chrono::days{(t.seconds - sod) / kDay};
  year_month_day ymd{days};
  char out[32];
  std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(sod / kHour), static_cast<int>(sod % kHour / kMinute),
                static_cast<int>(sod % kMinute));
  return out;
}

}  // namespace arterial
