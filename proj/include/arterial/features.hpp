#pragma once

// Per-slice covariates for a (segment, timestamp) query, built from Bluetooth
// traversals, signal phase logs, 15-minute volume bins and weather records.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "arterial/error.hpp"
#include "arterial/stats.hpp"
#include "arterial/time.hpp"

namespace arterial {

using Id = std::string;

enum class Movement { through, left };

[[nodiscard]] inline std::string_view to_string(Movement m) { return m == Movement::through ? "through" : "left"; }

[[nodiscard]] inline Movement parse_movement(std::string_view s) {
  if (s == "through" || s == "T" || s == "thru") return Movement::through;
  if (s == "left" || s == "L" || s == "lt") return Movement::left;
  throw DataError("unknown movement '" + std::string(s) + "'");
}

struct Segment {
  Id id;
  double length_mi = 0.0;
  double speed_limit_mph = 0.0;
  Id upstream_intersection;
  Id downstream_intersection;

  void validate() const {
    if (!(length_mi > 0.0)) throw DataError("segment " + id + ": length must be positive");
    if (!(speed_limit_mph > 0.0)) throw DataError("segment " + id + ": speed limit must be positive");
    if (upstream_intersection == downstream_intersection)
      throw DataError("segment " + id + ": upstream and downstream intersections coincide");
  }

  /// Nominal platoon travel time: length over speed limit.
  [[nodiscard]] double ideal_offset_s() const { return length_mi / speed_limit_mph * 3600.0; }
};

struct TraversalSample {
  Id segment_id;
  Timestamp exit_time;
  double travel_time_s = 0.0;
  double speed_mph = 0.0;
};

struct PhaseInterval {
  Id intersection_id;
  Movement movement = Movement::through;
  Timestamp start;
  Timestamp end;
};

struct VolumeRecord {
  Id intersection_id;
  Movement movement = Movement::through;
  Timestamp bin_start;
  double count = 0.0;
  std::int64_t bin_length_s = 15 * kMinute;
};

struct WeatherRecord {
  Timestamp timestamp;
  bool rainy = false;
  double visibility_mi = 10.0;
};

struct FeatureVector {
  double avg_speed = 0.0;
  double std_speed = 0.0;
  double up_vol = 0.0;
  double down_vol = 0.0;
  double up_vol_lt = 0.0;
  double down_vol_lt = 0.0;
  double up_green_ratio = 0.0;
  double down_green_ratio = 0.0;
  double signal_coordination = 0.0;
  double rainy = 0.0;
  double visibility = 0.0;
  int sample_count = 0;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

/// Covariate names in dataset column order.
inline constexpr std::array<std::string_view, 11> kFeatureNames = {
    "avg_speed",      "std_speed",        "up_vol",              "down_vol", "up_vol_lt", "down_vol_lt",
    "up_green_ratio", "down_green_ratio", "signal_coordination", "rainy",    "visibility"};

[[nodiscard]] inline bool is_feature_name(std::string_view name) {
  return std::find(kFeatureNames.begin(), kFeatureNames.end(), name) != kFeatureNames.end();
}

[[nodiscard]] inline double& feature_ref(FeatureVector& f, std::string_view name) {
  if (name == "avg_speed") return f.avg_speed;
  if (name == "std_speed") return f.std_speed;
  if (name == "up_vol") return f.up_vol;
  if (name == "down_vol") return f.down_vol;
  if (name == "up_vol_lt") return f.up_vol_lt;
  if (name == "down_vol_lt") return f.down_vol_lt;
  if (name == "up_green_ratio") return f.up_green_ratio;
  if (name == "down_green_ratio") return f.down_green_ratio;
  if (name == "signal_coordination") return f.signal_coordination;
  if (name == "rainy") return f.rainy;
  if (name == "visibility") return f.visibility;
  throw std::invalid_argument("unknown covariate '" + std::string(name) + "'");
}

[[nodiscard]] inline double feature_value(const FeatureVector& f, std::string_view name) {
  return feature_ref(const_cast<FeatureVector&>(f), name);
}

/// Field-range check; returns an empty string when every invariant holds.
[[nodiscard]] inline std::string feature_violation(const FeatureVector& f) {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(f.avg_speed) || f.avg_speed <= 0.0) return "avg_speed";
  if (!finite(f.std_speed) || f.std_speed < 0.0) return "std_speed";
  for (double v : {f.up_vol, f.down_vol, f.up_vol_lt, f.down_vol_lt})
    if (!finite(v) || v < 0.0) return "volume";
  if (!(f.up_green_ratio > 0.0 && f.up_green_ratio <= 100.0)) return "up_green_ratio";
  if (!(f.down_green_ratio > 0.0 && f.down_green_ratio <= 100.0)) return "down_green_ratio";
  if (!(f.signal_coordination >= 0.0 && f.signal_coordination <= 1.0)) return "signal_coordination";
  if (f.rainy != 0.0 && f.rainy != 1.0) return "rainy";
  if (!(f.visibility > 0.0 && f.visibility <= 10.0)) return "visibility";
  if (f.sample_count < 0) return "sample_count";
  return {};
}

// --------------------------------------------------------------------------
// Speeds

[[nodiscard]] inline double space_mean_speed(const Segment& segment, double travel_time_s) {
  if (!(travel_time_s > 0.0) || !std::isfinite(travel_time_s)) {
    throw RejectedSample("segment " + segment.id + ": non-positive travel time");
  }
  double mph = segment.length_mi / (travel_time_s / 3600.0);
  if (!std::isfinite(mph)) throw RejectedSample("segment " + segment.id + ": non-finite speed");
  return mph;
}

/// central: keep |s - median| <= c*IQR. fences: keep s in [Q1 - c*IQR, Q3 + c*IQR].
enum class BandRule { central, fences };

/// Which preceding samples form the reference window: every raw sample on
/// the segment, or only the retained ones.
enum class HistorySource { raw, retained };

struct SpeedFilterConfig {
  std::size_t history = 15;
  double band_multiplier = 0.75;
  BandRule rule = BandRule::central;
  HistorySource source = HistorySource::raw;
};

[[nodiscard]] inline bool within_iqr_band(std::span<const double> recent, double speed, double band_multiplier,
                                          BandRule rule = BandRule::central) {
  std::vector<double> s(recent.begin(), recent.end());
  std::sort(s.begin(), s.end());
  double q1 = stats::quantile_sorted(s, 0.25), q3 = stats::quantile_sorted(s, 0.75);
  double iqr = q3 - q1;
  if (rule == BandRule::central) return std::abs(speed - stats::quantile_sorted(s, 0.5)) <= band_multiplier * iqr;
  return speed >= q1 - band_multiplier * iqr && speed <= q3 + band_multiplier * iqr;
}

/// Drops signal-delay outliers against the `history` preceding samples of
/// the same segment; the first `history` samples of a segment always pass.
/// Input must be ordered by exit_time within segment.
[[nodiscard]] inline std::vector<TraversalSample> filter_speed_samples(std::span<const TraversalSample> samples,
                                                                       const SpeedFilterConfig& cfg = {}) {
  std::vector<TraversalSample> kept;
  kept.reserve(samples.size());
  std::unordered_map<Id, std::deque<double>> recent;
  for (const auto& s : samples) {
    auto& hist = recent[s.segment_id];
    bool retain = hist.size() < cfg.history;
    if (!retain) {
      std::vector<double> window(hist.begin(), hist.end());
      retain = within_iqr_band(window, s.speed_mph, cfg.band_multiplier, cfg.rule);
    }
    if (retain) kept.push_back(s);
    if (retain || cfg.source == HistorySource::raw) {
      hist.push_back(s.speed_mph);
      if (hist.size() > cfg.history) hist.pop_front();
    }
  }
  return kept;
}

// --------------------------------------------------------------------------
// Volumes

enum class MovementFilter { through, left, through_and_left };

[[nodiscard]] inline bool matches(MovementFilter f, Movement m) {
  switch (f) {
    case MovementFilter::through: return m == Movement::through;
    case MovementFilter::left: return m == Movement::left;
    case MovementFilter::through_and_left: return true;
  }
  return false;
}

/// Vehicles in the window, apportioning each 15-minute bin uniformly over its
/// length. nullopt when no bin of a matching movement overlaps the window.
[[nodiscard]] inline std::optional<double> slice_volume(std::span<const VolumeRecord> records,
                                                        std::string_view intersection, TimeWindow window,
                                                        MovementFilter filter) {
  double total = 0.0;
  bool any = false;
  for (const auto& r : records) {
    if (r.intersection_id != intersection || !matches(filter, r.movement)) continue;
    std::int64_t lo = std::max(r.bin_start.seconds, window.begin.seconds);
    std::int64_t hi = std::min(r.bin_start.seconds + r.bin_length_s, window.end.seconds);
    if (hi <= lo) continue;
    any = true;
    total += r.count * static_cast<double>(hi - lo) / static_cast<double>(r.bin_length_s);
  }
  if (!any) return std::nullopt;
  return total;
}

// --------------------------------------------------------------------------
// Signal phases

namespace detail {

struct Span {
  std::int64_t lo;
  std::int64_t hi;
};

inline std::int64_t overlap(Span a, Span b) { return std::max<std::int64_t>(0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo)); }

/// Total length of (A ∩ B ∩ window) for two sorted, non-overlapping lists.
inline double intersection_length(std::span<const Span> a, std::span<const Span> b, Span window) {
  double total = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    Span cut{std::max({a[i].lo, b[j].lo, window.lo}), std::min({a[i].hi, b[j].hi, window.hi})};
    if (cut.hi > cut.lo) total += static_cast<double>(cut.hi - cut.lo);
    if (a[i].hi < b[j].hi) ++i;
    else ++j;
  }
  return total;
}

inline std::vector<Span> green_spans(std::span<const PhaseInterval> phases, std::string_view intersection,
                                     Movement movement, std::int64_t shift = 0) {
  std::vector<Span> out;
  for (const auto& p : phases) {
    if (p.intersection_id == intersection && p.movement == movement)
      out.push_back({p.start.seconds + shift, p.end.seconds + shift});
  }
  std::sort(out.begin(), out.end(), [](Span x, Span y) { return x.lo < y.lo; });
  return out;
}

/// The phase log of an intersection is taken to cover [first start, last end].
inline bool covers(std::span<const PhaseInterval> phases, std::string_view intersection, TimeWindow w) {
  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  for (const auto& p : phases) {
    if (p.intersection_id != intersection) continue;
    lo = std::min(lo, p.start.seconds);
    hi = std::max(hi, p.end.seconds);
  }
  return lo <= w.begin.seconds && hi >= w.end.seconds;
}

inline double green_seconds(std::span<const Span> spans, Span window) {
  double total = 0.0;
  for (auto s : spans) total += static_cast<double>(overlap(s, window));
  return total;
}

}  // namespace detail

/// Percentage of the window with through green. nullopt when the
/// intersection's phase log does not cover the window.
[[nodiscard]] inline std::optional<double> green_ratio(std::span<const PhaseInterval> phases,
                                                       std::string_view intersection, TimeWindow window) {
  if (window.length() <= 0) throw std::invalid_argument("green_ratio: empty window");
  if (!detail::covers(phases, intersection, window)) return std::nullopt;
  auto spans = detail::green_spans(phases, intersection, Movement::through);
  return 100.0 * detail::green_seconds(spans, {window.begin.seconds, window.end.seconds}) /
         static_cast<double>(window.length());
}

/// Bandwidth ratio: upstream through green shifted by the ideal offset,
/// intersected with downstream through green inside the window, over the
/// upstream through green inside the window. 0 when there is no upstream
/// green. nullopt when either phase log misses the window.
[[nodiscard]] inline std::optional<double> signal_coordination(std::span<const PhaseInterval> up_phases,
                                                               std::span<const PhaseInterval> down_phases,
                                                               const Segment& segment, TimeWindow window) {
  if (!detail::covers(up_phases, segment.upstream_intersection, window) ||
      !detail::covers(down_phases, segment.downstream_intersection, window)) {
    return std::nullopt;
  }
  auto offset = static_cast<std::int64_t>(std::llround(segment.ideal_offset_s()));
  detail::Span w{window.begin.seconds, window.end.seconds};
  auto up = detail::green_spans(up_phases, segment.upstream_intersection, Movement::through);
  double up_green = detail::green_seconds(up, w);
  if (up_green <= 0.0) return 0.0;
  auto shifted = detail::green_spans(up_phases, segment.upstream_intersection, Movement::through, offset);
  auto down = detail::green_spans(down_phases, segment.downstream_intersection, Movement::through);
  double band = detail::intersection_length(shifted, down, w);
  return std::clamp(band / up_green, 0.0, 1.0);
}

// --------------------------------------------------------------------------
// Weather

inline constexpr std::int64_t kWeatherStaleAfter = 2 * kHour;

struct WeatherObservation {
  bool rainy = false;
  double visibility_mi = 10.0;
  bool stale = false;  // record older than kWeatherStaleAfter
};

/// Latest record at or before t. `records` must be time-ordered.
[[nodiscard]] inline std::optional<WeatherObservation> weather_at(std::span<const WeatherRecord> records,
                                                                  Timestamp t) {
  auto it = std::upper_bound(records.begin(), records.end(), t,
                             [](Timestamp x, const WeatherRecord& r) { return x < r.timestamp; });
  if (it == records.begin()) return std::nullopt;
  const auto& r = *std::prev(it);
  return WeatherObservation{r.rainy, r.visibility_mi, (t - r.timestamp) > kWeatherStaleAfter};
}

// --------------------------------------------------------------------------
// Slice extraction

inline constexpr int kSlices = 4;
inline constexpr std::int64_t kSliceLength = 5 * kMinute;

/// Slice k (1-based) ends 5(k - 1) minutes before t.
[[nodiscard]] inline TimeWindow slice_window(Timestamp t, int k) {
  if (k < 1 || k > kSlices) throw std::invalid_argument("slice index must be in 1..4");
  return {t - kSliceLength * k, t - kSliceLength * (k - 1)};
}

enum MissingSource : unsigned {
  kMissingNone = 0,
  kMissingSpeed = 1u << 0,
  kMissingVolume = 1u << 1,
  kMissingPhase = 1u << 2,
  kMissingWeather = 1u << 3,
  kUnknownSegment = 1u << 4,
};

struct SliceFeatures {
  FeatureVector values;
  unsigned missing = kMissingNone;
  bool stale_weather = false;

  [[nodiscard]] bool complete() const { return missing == kMissingNone; }
};

struct LogSet {
  std::vector<Segment> segments;
  std::vector<TraversalSample> bluetooth;
  std::vector<PhaseInterval> phases;
  std::vector<VolumeRecord> volumes;
  std::vector<WeatherRecord> weather;
};

/// Indexed, immutable view over a LogSet with the speed filter already
/// applied. Queries are const and safe to run concurrently.
class FeatureStore {
 public:
  explicit FeatureStore(LogSet logs, SpeedFilterConfig filter = {}) : logs_(std::move(logs)) {
    for (const auto& s : logs_.segments) {
      s.validate();
      segments_.emplace(s.id, s);
    }
    auto by_seg_time = [](const TraversalSample& a, const TraversalSample& b) {
      return std::tie(a.segment_id, a.exit_time) < std::tie(b.segment_id, b.exit_time);
    };
    std::stable_sort(logs_.bluetooth.begin(), logs_.bluetooth.end(), by_seg_time);
    raw_samples_ = logs_.bluetooth.size();
    std::vector<TraversalSample> valid;
    valid.reserve(logs_.bluetooth.size());
    for (auto& s : logs_.bluetooth) {
      auto it = segments_.find(s.segment_id);
      if (it == segments_.end()) continue;
      try {
        s.speed_mph = space_mean_speed(it->second, s.travel_time_s);
      } catch (const RejectedSample&) {
        continue;
      }
      valid.push_back(s);
    }
    auto kept = filter_speed_samples(valid, filter);
    for (auto& s : kept) speeds_[s.segment_id].push_back(std::move(s));

    for (const auto& p : logs_.phases) {
      if (!(p.end > p.start)) throw DataError("phase interval with end <= start at " + p.intersection_id);
      auto& idx = phases_[p.intersection_id];
      idx.lo = std::min(idx.lo, p.start.seconds);
      idx.hi = std::max(idx.hi, p.end.seconds);
      (p.movement == Movement::through ? idx.through : idx.left).push_back({p.start.seconds, p.end.seconds});
    }
    for (auto& [id, idx] : phases_) {
      auto by_lo = [](detail::Span a, detail::Span b) { return a.lo < b.lo; };
      std::sort(idx.through.begin(), idx.through.end(), by_lo);
      std::sort(idx.left.begin(), idx.left.end(), by_lo);
    }
    for (const auto& v : logs_.volumes) {
      if (v.count < 0.0) throw DataError("negative volume count at " + v.intersection_id);
      if (v.bin_length_s <= 0) throw DataError("non-positive volume bin length at " + v.intersection_id);
      max_bin_length_ = std::max(max_bin_length_, v.bin_length_s);
      volumes_[{v.intersection_id, v.movement}].push_back(v);
    }
    for (auto& [key, recs] : volumes_) {
      std::sort(recs.begin(), recs.end(),
                [](const VolumeRecord& a, const VolumeRecord& b) { return a.bin_start < b.bin_start; });
    }
    std::stable_sort(logs_.weather.begin(), logs_.weather.end(),
                     [](const WeatherRecord& a, const WeatherRecord& b) { return a.timestamp < b.timestamp; });
  }

  [[nodiscard]] const LogSet& logs() const { return logs_; }
  [[nodiscard]] std::size_t raw_sample_count() const { return raw_samples_; }
  [[nodiscard]] std::size_t retained_sample_count() const {
    std::size_t n = 0;
    for (const auto& [id, v] : speeds_) n += v.size();
    return n;
  }

  [[nodiscard]] const Segment* find_segment(std::string_view id) const {
    auto it = segments_.find(std::string(id));
    return it == segments_.end() ? nullptr : &it->second;
  }

  /// Retained speeds of a segment with exit_time in the window.
  [[nodiscard]] std::vector<double> speeds_in(std::string_view segment, TimeWindow w) const {
    std::vector<double> out;
    auto it = speeds_.find(std::string(segment));
    if (it == speeds_.end()) return out;
    const auto& v = it->second;
    auto lo = std::lower_bound(v.begin(), v.end(), w.begin,
                               [](const TraversalSample& s, Timestamp t) { return s.exit_time < t; });
    for (; lo != v.end() && lo->exit_time < w.end; ++lo) out.push_back(lo->speed_mph);
    return out;
  }

  [[nodiscard]] std::optional<double> volume(std::string_view intersection, TimeWindow w, MovementFilter f) const {
    std::optional<double> total;
    for (Movement m : {Movement::through, Movement::left}) {
      if (!matches(f, m)) continue;
      auto it = volumes_.find({std::string(intersection), m});
      if (it == volumes_.end()) continue;
      const auto& recs = it->second;
      auto first = std::lower_bound(recs.begin(), recs.end(), w.begin - max_bin_length_,
                                    [](const VolumeRecord& r, Timestamp t) { return r.bin_start < t; });
      auto last = std::lower_bound(first, recs.end(), w.end,
                                   [](const VolumeRecord& r, Timestamp t) { return r.bin_start < t; });
      auto part = slice_volume(std::span(first, last), intersection, w, f);
      if (part) total = total.value_or(0.0) + *part;
    }
    return total;
  }

  [[nodiscard]] std::optional<double> green_ratio(std::string_view intersection, TimeWindow w) const {
    const auto* idx = phase_index(intersection);
    if (!idx || idx->lo > w.begin.seconds || idx->hi < w.end.seconds) return std::nullopt;
    detail::Span win{w.begin.seconds, w.end.seconds};
    return 100.0 * detail::green_seconds(narrow(idx->through, win, 0), win) / static_cast<double>(w.length());
  }

  [[nodiscard]] std::optional<double> coordination(const Segment& seg, TimeWindow w) const {
    const auto* up = phase_index(seg.upstream_intersection);
    const auto* down = phase_index(seg.downstream_intersection);
    auto covered = [&](const PhaseIndex* i) { return i && i->lo <= w.begin.seconds && i->hi >= w.end.seconds; };
    if (!covered(up) || !covered(down)) return std::nullopt;
    auto offset = static_cast<std::int64_t>(std::llround(seg.ideal_offset_s()));
    detail::Span win{w.begin.seconds, w.end.seconds};
    auto up_green = detail::green_seconds(narrow(up->through, win, 0), win);
    if (up_green <= 0.0) return 0.0;
    auto shifted = narrow(up->through, win, offset);
    for (auto& s : shifted) {
      s.lo += offset;
      s.hi += offset;
    }
    double band = detail::intersection_length(shifted, narrow(down->through, win, 0), win);
    return std::clamp(band / up_green, 0.0, 1.0);
  }

  [[nodiscard]] std::optional<WeatherObservation> weather(Timestamp t) const { return weather_at(logs_.weather, t); }

  [[nodiscard]] SliceFeatures extract_slice(const Segment& seg, Timestamp t, int k,
                                            const std::optional<WeatherObservation>& wx) const {
    SliceFeatures out;
    auto w = slice_window(t, k);
    auto& f = out.values;

    auto speeds = speeds_in(seg.id, w);
    f.sample_count = static_cast<int>(speeds.size());
    if (speeds.empty()) {
      out.missing |= kMissingSpeed;
    } else {
      f.avg_speed = stats::mean(speeds);
      f.std_speed = stats::stddev(speeds);
    }

    auto up_vol = volume(seg.upstream_intersection, w, MovementFilter::through_and_left);
    auto up_lt = volume(seg.upstream_intersection, w, MovementFilter::left);
    auto down_vol = volume(seg.downstream_intersection, w, MovementFilter::through_and_left);
    auto down_lt = volume(seg.downstream_intersection, w, MovementFilter::left);
    if (!up_vol || !up_lt || !down_vol || !down_lt) out.missing |= kMissingVolume;
    f.up_vol = up_vol.value_or(0.0);
    f.up_vol_lt = up_lt.value_or(0.0);
    f.down_vol = down_vol.value_or(0.0);
    f.down_vol_lt = down_lt.value_or(0.0);

    auto ug = green_ratio(seg.upstream_intersection, w);
    auto dg = green_ratio(seg.downstream_intersection, w);
    auto sc = coordination(seg, w);
    if (!ug || !dg || !sc) out.missing |= kMissingPhase;
    f.up_green_ratio = ug.value_or(0.0);
    f.down_green_ratio = dg.value_or(0.0);
    f.signal_coordination = sc.value_or(0.0);

    if (!wx) {
      out.missing |= kMissingWeather;
    } else {
      f.rainy = wx->rainy ? 1.0 : 0.0;
      f.visibility = wx->visibility_mi;
      out.stale_weather = wx->stale;
    }
    return out;
  }

  /// Four slices preceding t; index 0 holds slice 1 (nearest to t). Weather
  /// is taken once at t and shared by all four.
  [[nodiscard]] std::array<SliceFeatures, kSlices> extract_slices(std::string_view segment_id, Timestamp t) const {
    std::array<SliceFeatures, kSlices> out{};
    const Segment* seg = find_segment(segment_id);
    if (!seg) {
      for (auto& s : out) s.missing = kUnknownSegment;
      return out;
    }
    auto wx = weather(t);
    for (int k = 1; k <= kSlices; ++k) out[k - 1] = extract_slice(*seg, t, k, wx);
    return out;
  }

 private:
  struct PhaseIndex {
    std::vector<detail::Span> through;
    std::vector<detail::Span> left;
    std::int64_t lo = INT64_MAX;
    std::int64_t hi = INT64_MIN;
  };

  [[nodiscard]] const PhaseIndex* phase_index(std::string_view id) const {
    auto it = phases_.find(std::string(id));
    return it == phases_.end() ? nullptr : &it->second;
  }

  /// Spans that, after adding `shift`, may overlap the window.
  static std::vector<detail::Span> narrow(const std::vector<detail::Span>& spans, detail::Span win,
                                          std::int64_t shift) {
    auto first = std::lower_bound(spans.begin(), spans.end(), win.lo - shift,
                                  [](detail::Span s, std::int64_t t) { return s.hi <= t; });
    std::vector<detail::Span> out;
    for (auto it = first; it != spans.end() && it->lo + shift < win.hi; ++it) out.push_back(*it);
    return out;
  }

  LogSet logs_;
  std::size_t raw_samples_ = 0;
  std::int64_t max_bin_length_ = 0;
  std::map<Id, Segment> segments_;
  std::unordered_map<Id, std::vector<TraversalSample>> speeds_;
  std::unordered_map<Id, PhaseIndex> phases_;
  std::map<std::pair<Id, Movement>, std::vector<VolumeRecord>> volumes_;
};

}  // namespace arterial
