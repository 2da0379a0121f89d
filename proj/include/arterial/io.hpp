#pragma once

// CSV tables and JSON configs/reports.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "arterial/case_control.hpp"
#include "arterial/error.hpp"
#include "arterial/evaluation.hpp"
#include "arterial/features.hpp"
#include "arterial/likelihoods.hpp"
#include "arterial/mcmc.hpp"
#include "arterial/synthetic_world.hpp"
#include "arterial/time.hpp"

namespace arterial::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Shortest text that parses back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return {buf, p};
}

[[nodiscard]] inline double parse_double(std::string_view s, std::string_view what) {
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw DataError("bad number '" + std::string(s) + "' in " + std::string(what));
  return v;
}

[[nodiscard]] inline std::int64_t parse_int(std::string_view s, std::string_view what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw DataError("bad integer '" + std::string(s) + "' in " + std::string(what));
  return v;
}

[[nodiscard]] inline bool parse_flag(std::string_view s, std::string_view what) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw DataError("bad flag '" + std::string(s) + "' in " + std::string(what));
}

[[nodiscard]] inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, std::string_view text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
  if (!out) throw DataError("write failed for " + p.string());
}

// --------------------------------------------------------------------------
// CSV: comma separated, header row, no quoting.

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
  [[nodiscard]] std::size_t col(std::string_view name) const {
    auto c = find(name);
    if (!c) throw DataError(source + ": missing column '" + std::string(name) + "'");
    return *c;
  }
};

[[nodiscard]] inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[nodiscard]] inline CsvTable parse_csv(std::string_view text, std::string source) {
  CsvTable t;
  t.source = std::move(source);
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw DataError(t.source + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                        std::to_string(cells.size()) + " fields, header has " + std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  if (first) throw DataError(t.source + ": empty file");
  return t;
}

[[nodiscard]] inline CsvTable read_csv(const fs::path& p) { return parse_csv(read_text(p), p.string()); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  [[nodiscard]] std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

// --------------------------------------------------------------------------
// Raw logs

inline constexpr const char* kSegmentsFile = "segments.csv";
inline constexpr const char* kBluetoothFile = "bluetooth.csv";
inline constexpr const char* kPhasesFile = "phases.csv";
inline constexpr const char* kVolumesFile = "volumes.csv";
inline constexpr const char* kWeatherFile = "weather.csv";
inline constexpr const char* kCrashesFile = "crashes.csv";

[[nodiscard]] inline std::vector<Segment> read_segments(const fs::path& p) {
  auto t = read_csv(p);
  auto ci = t.col("id"), cl = t.col("length_mi"), cs = t.col("speed_limit_mph");
  auto cu = t.find("up_int") ? t.col("up_int") : t.col("upstream_intersection");
  auto cd = t.find("down_int") ? t.col("down_int") : t.col("downstream_intersection");
  std::vector<Segment> out;
  for (const auto& r : t.rows)
    out.push_back({r[ci], parse_double(r[cl], t.source), parse_double(r[cs], t.source), r[cu], r[cd]});
  return out;
}

/// Speeds are derived later from the segment length.
[[nodiscard]] inline std::vector<TraversalSample> read_bluetooth(const fs::path& p) {
  auto t = read_csv(p);
  auto cs = t.col("segment_id"), ce = t.col("exit_time"), ct = t.col("travel_time_s");
  std::vector<TraversalSample> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) out.push_back({r[cs], parse_timestamp(r[ce]), parse_double(r[ct], t.source), 0.0});
  return out;
}

[[nodiscard]] inline std::vector<PhaseInterval> read_phases(const fs::path& p) {
  auto t = read_csv(p);
  auto ci = t.col("intersection_id"), cm = t.col("movement"), cs = t.col("start"), ce = t.col("end");
  std::vector<PhaseInterval> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    PhaseInterval ph{r[ci], parse_movement(r[cm]), parse_timestamp(r[cs]), parse_timestamp(r[ce])};
    if (ph.end < ph.start) throw DataError(t.source + ": phase ends before it starts");
    out.push_back(std::move(ph));
  }
  return out;
}

[[nodiscard]] inline std::vector<VolumeRecord> read_volumes(const fs::path& p) {
  auto t = read_csv(p);
  auto ci = t.col("intersection_id"), cm = t.col("movement"), cb = t.col("bin_start"), cc = t.col("count");
  auto cl = t.find("bin_length_s");
  std::vector<VolumeRecord> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    VolumeRecord v{r[ci], parse_movement(r[cm]), parse_timestamp(r[cb]), parse_double(r[cc], t.source)};
    if (cl) v.bin_length_s = parse_int(r[*cl], t.source);
    out.push_back(std::move(v));
  }
  return out;
}

[[nodiscard]] inline std::vector<WeatherRecord> read_weather(const fs::path& p) {
  auto t = read_csv(p);
  auto ct = t.col("timestamp"), cr = t.col("rainy"), cv = t.col("visibility_mi");
  std::vector<WeatherRecord> out;
  for (const auto& r : t.rows)
    out.push_back({parse_timestamp(r[ct]), parse_flag(r[cr], t.source), parse_double(r[cv], t.source)});
  return out;
}

[[nodiscard]] inline std::vector<Crash> read_crashes(const fs::path& p) {
  auto t = read_csv(p);
  auto cs = t.col("segment_id"), ct = t.col("timestamp");
  std::vector<Crash> out;
  for (const auto& r : t.rows) out.push_back({r[cs], parse_timestamp(r[ct])});
  return out;
}

[[nodiscard]] inline LogSet read_logs(const fs::path& dir) {
  LogSet logs;
  logs.segments = read_segments(dir / kSegmentsFile);
  logs.bluetooth = read_bluetooth(dir / kBluetoothFile);
  logs.phases = read_phases(dir / kPhasesFile);
  logs.volumes = read_volumes(dir / kVolumesFile);
  logs.weather = read_weather(dir / kWeatherFile);
  return logs;
}

inline void write_logs(const fs::path& dir, const LogSet& logs) {
  {
    CsvWriter w({"id", "length_mi", "speed_limit_mph", "up_int", "down_int"});
    for (const auto& s : logs.segments)
      w.row({s.id, format_double(s.length_mi), format_double(s.speed_limit_mph), s.upstream_intersection,
             s.downstream_intersection});
    write_text(dir / kSegmentsFile, w.str());
  }
  {
    CsvWriter w({"segment_id", "exit_time", "travel_time_s"});
    for (const auto& s : logs.bluetooth) w.row({s.segment_id, format_timestamp(s.exit_time), format_double(s.travel_time_s)});
    write_text(dir / kBluetoothFile, w.str());
  }
  {
    CsvWriter w({"intersection_id", "movement", "start", "end"});
    for (const auto& p : logs.phases)
      w.row({p.intersection_id, std::string(to_string(p.movement)), format_timestamp(p.start), format_timestamp(p.end)});
    write_text(dir / kPhasesFile, w.str());
  }
  {
    CsvWriter w({"intersection_id", "movement", "bin_start", "count", "bin_length_s"});
    for (const auto& v : logs.volumes)
      w.row({v.intersection_id, std::string(to_string(v.movement)), format_timestamp(v.bin_start), format_double(v.count),
             std::to_string(v.bin_length_s)});
    write_text(dir / kVolumesFile, w.str());
  }
  {
    CsvWriter w({"timestamp", "rainy", "visibility_mi"});
    for (const auto& r : logs.weather) w.row({format_timestamp(r.timestamp), r.rainy ? "1" : "0", format_double(r.visibility_mi)});
    write_text(dir / kWeatherFile, w.str());
  }
}

inline void write_crashes(const fs::path& p, const std::vector<Crash>& crashes) {
  CsvWriter w({"segment_id", "timestamp"});
  for (const auto& c : crashes) w.row({c.segment_id, format_timestamp(c.timestamp)});
  write_text(p, w.str());
}

/// Calendar spanned by the volume bins and phase intervals.
[[nodiscard]] inline StudyCalendar infer_calendar(const LogSet& logs) {
  std::int64_t lo = INT64_MAX, hi = INT64_MIN;
  for (const auto& v : logs.volumes) {
    lo = std::min(lo, v.bin_start.seconds);
    hi = std::max(hi, v.bin_start.seconds + v.bin_length_s);
  }
  for (const auto& p : logs.phases) {
    lo = std::min(lo, p.start.seconds);
    hi = std::max(hi, p.end.seconds);
  }
  if (lo >= hi) throw DataError("cannot infer the study calendar: no volume or phase records");
  return {Timestamp{lo}, Timestamp{hi}};
}

// --------------------------------------------------------------------------
// Dataset

[[nodiscard]] inline std::vector<std::string> dataset_header() {
  std::vector<std::string> h{"stratum_id", "event_id", "is_crash", "split", "segment_id", "timestamp"};
  for (int k = 1; k <= kSlices; ++k) {
    for (auto n : kFeatureNames) h.push_back(std::string(n) + "_s" + std::to_string(k));
    h.push_back("sample_count_s" + std::to_string(k));
  }
  return h;
}

[[nodiscard]] inline std::string dataset_csv(const Dataset& ds) {
  CsvWriter w(dataset_header());
  for (std::size_t i = 0; i < ds.strata.size(); ++i) {
    std::string split = ds.is_split() ? std::string(to_string(ds.split[i])) : std::string();
    auto emit = [&](const Event& e) {
      std::vector<std::string> r{e.stratum_id, e.event_id, e.is_crash ? "1" : "0", split, e.segment_id,
                                 format_timestamp(e.timestamp)};
      for (const auto& f : e.slices) {
        for (auto n : kFeatureNames) r.push_back(format_double(feature_value(f, n)));
        r.push_back(std::to_string(f.sample_count));
      }
      w.row(r);
    };
    emit(ds.strata[i].case_event);
    for (const auto& c : ds.strata[i].controls) emit(c);
  }
  return w.str();
}

inline void write_dataset(const fs::path& p, const Dataset& ds) { write_text(p, dataset_csv(ds)); }

[[nodiscard]] inline Dataset parse_dataset(const CsvTable& t) {
  Dataset ds;
  auto cs = t.col("stratum_id"), ce = t.col("event_id"), cc = t.col("is_crash"), csp = t.col("split"),
       cg = t.col("segment_id"), ct = t.col("timestamp");
  std::vector<std::array<std::size_t, 12>> slice_cols(kSlices);
  for (int k = 0; k < kSlices; ++k) {
    std::string suf = "_s" + std::to_string(k + 1);
    for (std::size_t n = 0; n < kFeatureNames.size(); ++n) slice_cols[k][n] = t.col(std::string(kFeatureNames[n]) + suf);
    slice_cols[k][11] = t.col("sample_count" + suf);
  }
  std::vector<std::string> split_labels;
  std::map<std::string, std::size_t> seen;
  for (const auto& r : t.rows) {
    Event e;
    e.stratum_id = r[cs];
    e.event_id = r[ce];
    e.is_crash = parse_flag(r[cc], t.source);
    e.segment_id = r[cg];
    e.timestamp = parse_timestamp(r[ct]);
    for (int k = 0; k < kSlices; ++k) {
      for (std::size_t n = 0; n < kFeatureNames.size(); ++n)
        feature_ref(e.slices[k], kFeatureNames[n]) = parse_double(r[slice_cols[k][n]], t.source);
      e.slices[k].sample_count = static_cast<int>(parse_int(r[slice_cols[k][11]], t.source));
    }
    if (ds.strata.empty() || ds.strata.back().id != e.stratum_id) {
      if (seen.count(e.stratum_id)) throw DataError(t.source + ": rows of stratum " + e.stratum_id + " are not contiguous");
      seen.emplace(e.stratum_id, ds.strata.size());
      Stratum st;
      st.id = e.stratum_id;
      ds.strata.push_back(std::move(st));
      split_labels.push_back(r[csp]);
    } else if (r[csp] != split_labels.back()) {
      throw DataError(t.source + ": stratum " + e.stratum_id + " spans both splits");
    }
    auto& st = ds.strata.back();
    if (e.is_crash) {
      if (!st.case_event.event_id.empty()) throw DataError(t.source + ": stratum " + st.id + " has two crashes");
      st.key = matching_key(e.segment_id, e.timestamp);
      st.case_event = std::move(e);
    } else {
      st.controls.push_back(std::move(e));
    }
  }
  for (const auto& st : ds.strata)
    if (st.case_event.event_id.empty()) throw DataError(t.source + ": stratum " + st.id + " has no crash event");
  bool any_split = std::any_of(split_labels.begin(), split_labels.end(), [](const auto& s) { return !s.empty(); });
  bool all_split = std::all_of(split_labels.begin(), split_labels.end(), [](const auto& s) { return !s.empty(); });
  if (any_split) {
    if (!all_split) throw DataError(t.source + ": split labels are only partially present");
    for (const auto& s : split_labels) ds.split.push_back(parse_split(s));
  }
  if (!ds.strata.empty()) ds.m = static_cast<int>(ds.strata.front().controls.size());
  return ds;
}

[[nodiscard]] inline Dataset read_dataset(const fs::path& p) { return parse_dataset(read_csv(p)); }

// --------------------------------------------------------------------------
// JSON helpers

[[nodiscard]] inline json read_json(const fs::path& p) {
  auto text = read_text(p);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

/// Runs a JSON decoding step, reporting type errors as configuration errors.
template <typename F>
auto decode(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

inline std::optional<std::uint64_t> get_seed(const json& j) {
  if (!j.contains("seed") || j.at("seed").is_null()) return std::nullopt;
  const auto& s = j.at("seed");
  if (!s.is_number_integer()) throw ConfigError("seed must be a non-negative integer");
  if (s.is_number_unsigned()) return s.get<std::uint64_t>();
  auto v = s.get<std::int64_t>();
  if (v < 0) throw ConfigError("seed must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

[[nodiscard]] inline json optional_number(const std::optional<double>& v) {
  return v && std::isfinite(*v) ? json(*v) : json(nullptr);
}

// --------------------------------------------------------------------------
// World and truth

[[nodiscard]] inline json to_json(const GroundTruth& t) {
  return {{"mode", std::string(to_string(t.mode))}, {"slice", t.slice},       {"covariates", t.covariates},
          {"beta", t.beta},                         {"sigma", t.sigma},       {"alpha", t.alpha},
          {"n_strata", t.n_strata},                 {"m", t.m}};
}

[[nodiscard]] inline GroundTruth truth_from_json(const json& j) {
  return decode("truth", [&] {
    GroundTruth t;
    if (j.contains("mode")) {
      auto m = j.at("mode").get<std::string>();
      if (m == "marginal") t.mode = GroundTruth::Mode::marginal;
      else if (m == "conditional") t.mode = GroundTruth::Mode::conditional;
      else throw ConfigError("truth mode must be 'marginal' or 'conditional'");
    }
    get_if(j, "slice", t.slice);
    get_if(j, "covariates", t.covariates);
    get_if(j, "beta", t.beta);
    get_if(j, "sigma", t.sigma);
    if (j.contains("alpha")) {
      const auto& a = j.at("alpha");
      if (a.is_string() && a.get<std::string>() == "-inf") t.alpha = -INFINITY;
      else t.alpha = a.get<double>();
    }
    get_if(j, "n_strata", t.n_strata);
    get_if(j, "m", t.m);
    return t;
  });
}

[[nodiscard]] inline WorldConfig world_from_json(const json& j) {
  return decode("world config", [&] {
    WorldConfig c;
    c.seed = get_seed(j);
    get_if(j, "n_segments", c.n_segments);
    get_if(j, "weeks", c.weeks);
    if (j.contains("start")) c.start = parse_timestamp(j.at("start").get<std::string>());
    get_if(j, "min_length_mi", c.min_length_mi);
    get_if(j, "max_length_mi", c.max_length_mi);
    get_if(j, "speed_limits_mph", c.speed_limits_mph);
    get_if(j, "peak_through_per_15min", c.peak_through_per_15min);
    get_if(j, "left_turn_share", c.left_turn_share);
    get_if(j, "night_factor", c.night_factor);
    get_if(j, "bluetooth_sampling_rate", c.bluetooth_sampling_rate);
    get_if(j, "speed_cv", c.speed_cv);
    get_if(j, "signal_delay_probability", c.signal_delay_probability);
    get_if(j, "signal_delay_max_s", c.signal_delay_max_s);
    get_if(j, "cycle_s", c.cycle_s);
    get_if(j, "min_split", c.min_split);
    get_if(j, "max_split", c.max_split);
    get_if(j, "free_plan_probability", c.free_plan_probability);
    get_if(j, "rain_onsets_per_week", c.rain_onsets_per_week);
    get_if(j, "mean_rain_hours", c.mean_rain_hours);
    if (j.contains("truth")) c.truth = truth_from_json(j.at("truth"));
    return c;
  });
}

[[nodiscard]] inline json to_json(const TruthManifest& m) {
  json j = to_json(m.truth);
  if (!std::isfinite(m.truth.alpha)) j["alpha"] = m.truth.alpha < 0 ? "-inf" : "inf";
  j["seed"] = m.seed;
  j["n_crashes"] = m.n_crashes;
  return j;
}

// --------------------------------------------------------------------------
// Attrition

[[nodiscard]] inline json to_json(const AttritionReport& a) {
  return {{"input_crashes", a.input_crashes},
          {"kept", a.kept},
          {"rejected",
           {{"too_few_candidates", a.too_few_candidates},
            {"low_bluetooth_sampling", a.low_bluetooth_sampling},
            {"missing_source", a.missing_source}}},
          {"controls_replaced", a.controls_replaced},
          {"stale_weather_events", a.stale_weather_events},
          {"bluetooth_samples", {{"raw", a.raw_bluetooth_samples}, {"retained", a.retained_bluetooth_samples}}},
          {"train_strata", a.train_strata},
          {"validation_strata", a.validation_strata}};
}

// --------------------------------------------------------------------------
// Model and sampler

[[nodiscard]] inline json to_json(const ModelSpec& s) {
  return {{"family", std::string(to_string(s.family))},
          {"covariates", s.covariates},
          {"random_set", s.random_set},
          {"slice", s.slice},
          {"prior_coef",
           {{"kind", s.prior_coef.kind == CoefPrior::Kind::normal ? "normal" : "logistic"},
            {"mean", s.prior_coef.mean},
            {"variance", s.prior_coef.variance},
            {"scale", s.prior_coef.scale}}},
          {"prior_var", {{"shape", s.prior_var.shape}, {"scale", s.prior_var.scale}}},
          {"standardize", s.standardize}};
}

[[nodiscard]] inline ModelSpec model_from_json(const json& j) {
  return decode("model config", [&] {
    ModelSpec s;
    if (j.contains("family")) s.family = parse_family(j.at("family").get<std::string>());
    get_if(j, "covariates", s.covariates);
    get_if(j, "random_set", s.random_set);
    get_if(j, "slice", s.slice);
    if (j.contains("prior_coef")) {
      const auto& p = j.at("prior_coef");
      if (p.contains("kind")) {
        auto k = p.at("kind").get<std::string>();
        if (k == "normal") s.prior_coef.kind = CoefPrior::Kind::normal;
        else if (k == "logistic") s.prior_coef.kind = CoefPrior::Kind::logistic;
        else throw ConfigError("prior_coef.kind must be 'normal' or 'logistic'");
      }
      get_if(p, "mean", s.prior_coef.mean);
      get_if(p, "variance", s.prior_coef.variance);
      get_if(p, "scale", s.prior_coef.scale);
    }
    if (j.contains("prior_var")) {
      get_if(j.at("prior_var"), "shape", s.prior_var.shape);
      get_if(j.at("prior_var"), "scale", s.prior_var.scale);
    }
    get_if(j, "standardize", s.standardize);
    s.validate();
    return s;
  });
}

[[nodiscard]] inline json to_json(const SamplerConfig& c) {
  json j = {{"n_chains", c.n_chains},           {"n_iter", c.n_iter},           {"burn_in", c.burn_in},
            {"thin", c.thin},                   {"target_accept", c.target_accept}, {"adapt_window", c.adapt_window},
            {"adapt_step", c.adapt_step}};
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  return j;
}

/// Thread count is an execution detail and never changes results, so it is
/// not serialized.
[[nodiscard]] inline SamplerConfig sampler_from_json(const json& j) {
  return decode("sampler config", [&] {
    SamplerConfig c;
    get_if(j, "n_chains", c.n_chains);
    get_if(j, "n_iter", c.n_iter);
    get_if(j, "burn_in", c.burn_in);
    get_if(j, "thin", c.thin);
    get_if(j, "target_accept", c.target_accept);
    get_if(j, "adapt_window", c.adapt_window);
    get_if(j, "adapt_step", c.adapt_step);
    get_if(j, "threads", c.threads);
    c.seed = get_seed(j);
    return c;
  });
}

// --------------------------------------------------------------------------
// Posterior output

[[nodiscard]] inline json to_json(const ParameterSummary& p) {
  return {{"name", p.name},
          {"kind", std::string(to_string(p.kind))},
          {"mean", p.mean},
          {"sd", p.sd},
          {"bci", {p.lower, p.upper}},
          {"hazard_ratio", optional_number(p.hazard_ratio)},
          {"rhat", optional_number(p.rhat)},
          {"mc_se", p.mc_se},
          {"significant", p.significant},
          {"flagged", p.flagged}};
}

[[nodiscard]] inline ParameterSummary parameter_from_json(const json& j) {
  ParameterSummary p;
  p.name = j.at("name").get<std::string>();
  auto kind = j.at("kind").get<std::string>();
  p.kind = kind == "coefficient" ? ParameterKind::coefficient
           : kind == "variance"  ? ParameterKind::variance
                                 : ParameterKind::sd;
  p.mean = j.at("mean").get<double>();
  p.sd = j.at("sd").get<double>();
  p.lower = j.at("bci").at(0).get<double>();
  p.upper = j.at("bci").at(1).get<double>();
  if (!j.at("hazard_ratio").is_null()) p.hazard_ratio = j.at("hazard_ratio").get<double>();
  if (!j.at("rhat").is_null()) p.rhat = j.at("rhat").get<double>();
  p.mc_se = j.at("mc_se").get<double>();
  p.significant = j.at("significant").get<bool>();
  p.flagged = j.at("flagged").get<bool>();
  return p;
}

/// summary.json: model, sampler, per-parameter summaries, plug-in point
/// (posterior means of every coefficient, variance and per-unit deviation)
/// and mean deviance, enough to reproduce DIC and event scores.
[[nodiscard]] inline json summary_json(const ChainSet& cs, const PosteriorSummary& ps, const SamplerConfig& sampler,
                                       std::size_t n_strata, std::size_t n_events) {
  auto pm = cs.posterior_mean();
  json j;
  j["model"] = to_json(cs.spec);
  j["sampler"] = to_json(sampler);
  j["n_strata"] = n_strata;
  j["n_events"] = n_events;
  j["n_chains"] = ps.n_chains;
  j["draws_per_chain"] = ps.draws_per_chain;
  json params = json::array();
  for (const auto& p : ps.parameters) params.push_back(to_json(p));
  j["parameters"] = params;
  j["columns"] = cs.spec.columns();
  j["posterior_mean"] = {{"beta", pm.beta}, {"sigma2", pm.sigma2}};
  auto dev = cs.pooled_deviance();
  j["deviance_mean"] = stats::mean(dev);
  json acc = json::array();
  for (const auto& c : cs.chains) acc.push_back(c.acceptance);
  j["acceptance"] = acc;
  json re = json::object();
  auto cols = cs.spec.columns();
  for (std::size_t r = 0; r < cs.random_columns.size(); ++r) {
    json units = json::object();
    for (std::size_t u = 0; u < cs.n_units(); ++u) units[cs.unit_ids[u]] = pm.phi[r * cs.n_units() + u];
    re[cols[cs.random_columns[r]]] = units;
  }
  j["random_effects"] = re;
  return j;
}

struct LoadedSummary {
  ModelSpec spec;
  PosteriorSummary summary;
  FittedModel fit;
  ParameterState posterior_mean;
  double deviance_mean = 0.0;
};

[[nodiscard]] inline LoadedSummary summary_from_json(const json& j) {
  return decode("summary", [&] {
    LoadedSummary out;
    out.spec = model_from_json(j.at("model"));
    out.summary.n_chains = j.at("n_chains").get<std::size_t>();
    out.summary.draws_per_chain = j.at("draws_per_chain").get<std::size_t>();
    for (const auto& p : j.at("parameters")) out.summary.parameters.push_back(parameter_from_json(p));
    auto& pm = out.posterior_mean;
    pm.beta = j.at("posterior_mean").at("beta").get<std::vector<double>>();
    pm.sigma2 = j.at("posterior_mean").at("sigma2").get<std::vector<double>>();
    out.deviance_mean = j.at("deviance_mean").get<double>();
    auto cols = out.spec.columns();
    auto rc = out.spec.random_columns();
    if (pm.beta.size() != cols.size() || pm.sigma2.size() != rc.size())
      throw DataError("summary: posterior mean does not match the model");
    const auto& re = j.at("random_effects");
    out.fit.spec = out.spec;
    out.fit.beta = pm.beta;
    if (!rc.empty()) {
      const auto& first = re.at(cols[rc[0]]);
      for (auto it = first.begin(); it != first.end(); ++it) out.fit.unit_ids.push_back(it.key());
      std::size_t nu = out.fit.unit_ids.size();
      pm.n_units = nu;
      pm.phi.assign(rc.size() * nu, 0.0);
      for (std::size_t r = 0; r < rc.size(); ++r) {
        const auto& units = re.at(cols[rc[r]]);
        for (std::size_t u = 0; u < nu; ++u) pm.phi[r * nu + u] = units.at(out.fit.unit_ids[u]).get<double>();
      }
    }
    out.fit.phi_mean = pm.phi;
    return out;
  });
}

/// chains.csv: chain, iter, one column per stored scalar, deviance.
[[nodiscard]] inline std::string chains_csv(const ChainSet& cs, const SamplerConfig& cfg) {
  std::vector<std::string> h{"chain", "iter"};
  h.insert(h.end(), cs.names.begin(), cs.names.end());
  h.emplace_back("deviance");
  CsvWriter w(h);
  for (std::size_t c = 0; c < cs.chains.size(); ++c) {
    const auto& ch = cs.chains[c];
    for (std::size_t d = 0; d < ch.n_draws(); ++d) {
      std::vector<std::string> r{std::to_string(c + 1),
                                 std::to_string(static_cast<std::size_t>(cfg.burn_in) + d * static_cast<std::size_t>(cfg.thin) + 1)};
      for (std::size_t k = 0; k < ch.n_scalars; ++k) r.push_back(format_double(ch.at(d, k)));
      r.push_back(format_double(ch.deviance[d]));
      w.row(r);
    }
  }
  return w.str();
}

/// Rebuilds a chain set from chains.csv. Per-unit deviations are not stored
/// there, so only models without random coefficients roundtrip completely.
[[nodiscard]] inline ChainSet read_chains(const fs::path& p, const ModelSpec& spec) {
  auto t = read_csv(p);
  spec.validate();
  ChainSet cs;
  cs.spec = spec;
  cs.names = spec.columns();
  cs.n_beta = cs.names.size();
  cs.random_columns = spec.random_columns();
  if (!cs.random_columns.empty())
    throw DataError("chains.csv does not carry per-unit deviations; evaluate random-parameter fits from summary.json");
  auto cc = t.col("chain"), cd = t.col("deviance");
  std::vector<std::size_t> cols;
  for (const auto& n : cs.names) cols.push_back(t.col(n));
  std::map<std::int64_t, std::size_t> chain_index;
  for (const auto& r : t.rows) {
    auto id = parse_int(r[cc], t.source);
    auto [it, inserted] = chain_index.emplace(id, cs.chains.size());
    if (inserted) {
      cs.chains.emplace_back();
      cs.chains.back().n_scalars = cs.names.size();
    }
    auto& ch = cs.chains[it->second];
    for (auto c : cols) ch.draws.push_back(parse_double(r[c], t.source));
    ch.deviance.push_back(parse_double(r[cd], t.source));
  }
  if (cs.chains.empty()) throw DataError(t.source + ": no draws");
  return cs;
}

}  // namespace arterial::io
