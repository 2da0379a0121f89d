#pragma once

// Matched case-control dataset construction: one crash plus m non-crash
// events per stratum, matched on segment, clock time and day of week.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arterial/error.hpp"
#include "arterial/features.hpp"
#include "arterial/random.hpp"
#include "arterial/time.hpp"

namespace arterial {

struct Crash {
  Id segment_id;
  Timestamp timestamp;

  friend auto operator<=>(const Crash&, const Crash&) = default;
};

struct Event {
  Id stratum_id;
  Id event_id;
  bool is_crash = false;
  Id segment_id;
  Timestamp timestamp;
  std::array<FeatureVector, kSlices> slices{};
};

struct MatchingKey {
  Id segment_id;
  std::int64_t time_of_day = 0;  // seconds after midnight
  unsigned day_of_week = 0;

  friend bool operator==(const MatchingKey&, const MatchingKey&) = default;
};

[[nodiscard]] inline MatchingKey matching_key(std::string_view segment, Timestamp t) {
  return {std::string(segment), seconds_of_day(t), day_of_week(t)};
}

struct Stratum {
  Id id;
  Event case_event;
  std::vector<Event> controls;
  MatchingKey key;

  [[nodiscard]] std::size_t size() const { return controls.size() + 1; }
};

enum class Split { train, validation };

[[nodiscard]] inline std::string_view to_string(Split s) { return s == Split::train ? "train" : "validation"; }

[[nodiscard]] inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "validation") return Split::validation;
  throw DataError("unknown split label '" + std::string(s) + "'");
}

struct Dataset {
  std::vector<Stratum> strata;
  int m = 4;
  std::vector<Split> split;  // one label per stratum; empty until split_dataset

  [[nodiscard]] bool is_split() const { return split.size() == strata.size() && !strata.empty(); }
  [[nodiscard]] std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count(split.begin(), split.end(), s));
  }
};

/// Study period [start, end).
struct StudyCalendar {
  Timestamp start;
  Timestamp end;
};

enum class TimeMatching { exact_clock, hour_bucket };

struct ControlSelection {
  std::int64_t exclusion_window_s = 3 * kHour;
  TimeMatching matching = TimeMatching::exact_clock;
  std::int64_t grid_s = 5 * kMinute;  // candidate spacing inside an hour bucket
};

/// Sorted crash times per segment for the ±window exclusion test.
class CrashIndex {
 public:
  explicit CrashIndex(std::span<const Crash> crashes) {
    for (const auto& c : crashes) times_[c.segment_id].push_back(c.timestamp);
    for (auto& [id, v] : times_) std::sort(v.begin(), v.end());
  }

  [[nodiscard]] bool crash_within(std::string_view segment, Timestamp t, std::int64_t window) const {
    auto it = times_.find(std::string(segment));
    if (it == times_.end()) return false;
    const auto& v = it->second;
    auto lo = std::lower_bound(v.begin(), v.end(), t - window);
    return lo != v.end() && *lo <= t + window;
  }

 private:
  std::map<Id, std::vector<Timestamp>> times_;
};

/// Same segment, same clock time (or hour bucket), same weekday, other
/// weeks inside the study period, and no crash on the segment within the
/// exclusion window.
[[nodiscard]] inline std::vector<Timestamp> candidate_controls(const Crash& crash, const StudyCalendar& calendar,
                                                               const CrashIndex& crashes,
                                                               const ControlSelection& sel = {}) {
  std::vector<Timestamp> offsets_in_hour;
  if (sel.matching == TimeMatching::exact_clock) {
    offsets_in_hour.push_back(crash.timestamp);
  } else {
    Timestamp hour_start = crash.timestamp - seconds_of_day(crash.timestamp) % kHour;
    for (std::int64_t s = 0; s < kHour; s += sel.grid_s) offsets_in_hour.push_back(hour_start + s);
  }
  auto inside = [&](Timestamp t) {
    return t - kSlices * kSliceLength >= calendar.start && t < calendar.end;
  };
  std::vector<Timestamp> out;
  std::int64_t span_weeks = (calendar.end - calendar.start) / kWeek + 2;
  for (std::int64_t w = -span_weeks; w <= span_weeks; ++w) {
    if (w == 0) continue;
    for (Timestamp base : offsets_in_hour) {
      Timestamp t = base + w * kWeek;
      if (!inside(t)) continue;
      if (crashes.crash_within(crash.segment_id, t, sel.exclusion_window_s)) continue;
      out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

[[nodiscard]] inline std::vector<Timestamp> candidate_controls(const Crash& crash, const StudyCalendar& calendar,
                                                               std::span<const Crash> crash_log,
                                                               const ControlSelection& sel = {}) {
  return candidate_controls(crash, calendar, CrashIndex{crash_log}, sel);
}

enum class Rejection { none, too_few_candidates, low_bluetooth_sampling, missing_source };

[[nodiscard]] inline std::string_view to_string(Rejection r) {
  switch (r) {
    case Rejection::none: return "none";
    case Rejection::too_few_candidates: return "too_few_candidates";
    case Rejection::low_bluetooth_sampling: return "low_bluetooth_sampling";
    case Rejection::missing_source: return "missing_source";
  }
  return "unknown";
}

inline constexpr int kMinBluetoothSamples = 2;

/// Why an event's slices are unusable, or Rejection::none.
[[nodiscard]] inline Rejection screen_slices(const std::array<SliceFeatures, kSlices>& slices) {
  for (const auto& s : slices)
    if (s.values.sample_count < kMinBluetoothSamples) return Rejection::low_bluetooth_sampling;
  for (const auto& s : slices)
    if (!s.complete()) return Rejection::missing_source;
  return Rejection::none;
}

struct AssemblyResult {
  std::optional<Stratum> stratum;
  Rejection rejection = Rejection::none;
  int controls_replaced = 0;
  int stale_weather_events = 0;
};

[[nodiscard]] inline Event make_event(const Id& stratum_id, int member, bool is_crash, Id segment, Timestamp t,
                                      const std::array<SliceFeatures, kSlices>& slices) {
  Event e;
  e.stratum_id = stratum_id;
  e.event_id = stratum_id + "-" + std::to_string(member);
  e.is_crash = is_crash;
  e.segment_id = std::move(segment);
  e.timestamp = t;
  for (int k = 0; k < kSlices; ++k) e.slices[k] = slices[k].values;
  return e;
}

/// Draws m controls uniformly without replacement; invalid controls are
/// replaced from the remaining candidates before the stratum is rejected.
[[nodiscard]] inline AssemblyResult assemble_stratum(const Id& stratum_id, const Crash& crash,
                                                     std::vector<Timestamp> candidates, int m,
                                                     std::uint64_t rng_seed, const FeatureStore& store) {
  if (m < 1) throw std::invalid_argument("assemble_stratum: m must be >= 1");
  AssemblyResult result;
  auto stale = [](const std::array<SliceFeatures, kSlices>& s) {
    return std::any_of(s.begin(), s.end(), [](const SliceFeatures& f) { return f.stale_weather; });
  };

  auto case_slices = store.extract_slices(crash.segment_id, crash.timestamp);
  if (auto r = screen_slices(case_slices); r != Rejection::none) {
    result.rejection = r;
    return result;
  }
  if (candidates.size() < static_cast<std::size_t>(m)) {
    result.rejection = Rejection::too_few_candidates;
    return result;
  }

  Rng rng{rng_seed};
  std::shuffle(candidates.begin(), candidates.end(), rng);

  Stratum st;
  st.id = stratum_id;
  st.key = matching_key(crash.segment_id, crash.timestamp);
  st.case_event = make_event(stratum_id, 0, true, crash.segment_id, crash.timestamp, case_slices);
  result.stale_weather_events += stale(case_slices) ? 1 : 0;

  bool saw_low_sampling = false;
  for (Timestamp t : candidates) {
    if (st.controls.size() == static_cast<std::size_t>(m)) break;
    auto slices = store.extract_slices(crash.segment_id, t);
    auto r = screen_slices(slices);
    if (r != Rejection::none) {
      saw_low_sampling |= (r == Rejection::low_bluetooth_sampling);
      ++result.controls_replaced;
      continue;
    }
    result.stale_weather_events += stale(slices) ? 1 : 0;
    st.controls.push_back(
        make_event(stratum_id, static_cast<int>(st.controls.size()) + 1, false, crash.segment_id, t, slices));
  }
  if (st.controls.size() < static_cast<std::size_t>(m)) {
    result.rejection = saw_low_sampling ? Rejection::low_bluetooth_sampling : Rejection::missing_source;
    result.controls_replaced = 0;
    return result;
  }
  result.stratum = std::move(st);
  return result;
}

struct AttritionReport {
  std::size_t input_crashes = 0;
  std::size_t kept = 0;
  std::size_t too_few_candidates = 0;
  std::size_t low_bluetooth_sampling = 0;
  std::size_t missing_source = 0;
  std::size_t controls_replaced = 0;
  std::size_t stale_weather_events = 0;
  std::size_t raw_bluetooth_samples = 0;
  std::size_t retained_bluetooth_samples = 0;
  std::size_t train_strata = 0;
  std::size_t validation_strata = 0;

  [[nodiscard]] bool balanced() const {
    return input_crashes == kept + too_few_candidates + low_bluetooth_sampling + missing_source;
  }
};

struct CaseControlConfig {
  int m = 4;
  ControlSelection selection;
  double split_fraction = 0.8;
  std::uint64_t seed = 0;
};

[[nodiscard]] inline Id stratum_label(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "S%05zu", index + 1);
  return buf;
}

[[nodiscard]] inline std::uint64_t stratum_seed(std::uint64_t seed, const Crash& c) {
  return derive_seed(seed, "stratum:" + c.segment_id + "@" + std::to_string(c.timestamp.seconds));
}

/// Uniform whole-stratum assignment with |train| = round(fraction * N).
inline void split_dataset(Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0, 1)");
  if (ds.strata.empty()) throw DataError("cannot split an empty dataset");
  std::size_t n = ds.strata.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, "split");
  std::shuffle(order.begin(), order.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  ds.split.assign(n, Split::validation);
  for (std::size_t i = 0; i < n_train; ++i) ds.split[order[i]] = Split::train;
}

struct BuildResult {
  Dataset dataset;
  AttritionReport attrition;
};

/// Builds every stratum, then splits. Crashes are processed in (segment,
/// time) order; stratum ids follow that order so they do not depend on the
/// order of the input log.
[[nodiscard]] inline BuildResult build_dataset(const FeatureStore& store, std::vector<Crash> crashes,
                                               const StudyCalendar& calendar, const CaseControlConfig& cfg,
                                               bool split = true) {
  std::sort(crashes.begin(), crashes.end());
  CrashIndex index{crashes};
  BuildResult out;
  out.dataset.m = cfg.m;
  auto& a = out.attrition;
  a.input_crashes = crashes.size();
  a.raw_bluetooth_samples = store.raw_sample_count();
  a.retained_bluetooth_samples = store.retained_sample_count();
  for (std::size_t i = 0; i < crashes.size(); ++i) {
    const auto& c = crashes[i];
    auto candidates = candidate_controls(c, calendar, index, cfg.selection);
    auto r = assemble_stratum(stratum_label(i), c, std::move(candidates), cfg.m, stratum_seed(cfg.seed, c), store);
    switch (r.rejection) {
      case Rejection::none:
        ++a.kept;
        a.controls_replaced += static_cast<std::size_t>(r.controls_replaced);
        a.stale_weather_events += static_cast<std::size_t>(r.stale_weather_events);
        out.dataset.strata.push_back(std::move(*r.stratum));
        break;
      case Rejection::too_few_candidates: ++a.too_few_candidates; break;
      case Rejection::low_bluetooth_sampling: ++a.low_bluetooth_sampling; break;
      case Rejection::missing_source: ++a.missing_source; break;
    }
  }
  if (split && !out.dataset.strata.empty()) {
    split_dataset(out.dataset, cfg.split_fraction, cfg.seed);
    a.train_strata = out.dataset.count(Split::train);
    a.validation_strata = out.dataset.count(Split::validation);
  }
  return out;
}

}  // namespace arterial
