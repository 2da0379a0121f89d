#pragma once

// Synthetic corridors with known ground truth: segments, signal plans,
// 15-minute volumes, Bluetooth traversals, weather, and crash labels drawn
// from a logistic model on the pipeline's own covariates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "arterial/case_control.hpp"
#include "arterial/error.hpp"
#include "arterial/features.hpp"
#include "arterial/likelihoods.hpp"
#include "arterial/random.hpp"
#include "arterial/stats.hpp"
#include "arterial/time.hpp"

namespace arterial {

struct GroundTruth {
  enum class Mode { conditional, marginal };
  Mode mode = Mode::marginal;
  int slice = 2;
  std::vector<std::string> covariates{"avg_speed", "up_vol_lt", "down_green_ratio", "rainy"};
  std::vector<double> beta{-0.025, 0.024, -0.042, 0.667};
  std::vector<double> sigma;  // per covariate (0 = fixed) or empty
  double alpha = -3.2;        // marginal mode intercept
  int n_strata = 300;         // conditional mode
  int m = 4;                  // conditional mode members per stratum minus one

  void validate() const {
    if (slice < 1 || slice > kSlices) throw ConfigError("truth slice must be in 1..4");
    if (covariates.size() != beta.size()) throw ConfigError("truth covariates and beta differ in length");
    if (!sigma.empty() && sigma.size() != beta.size()) throw ConfigError("truth sigma must match beta");
    for (const auto& c : covariates)
      if (!is_feature_name(c)) throw ConfigError("unknown truth covariate '" + c + "'");
    for (double b : beta)
      if (!std::isfinite(b)) throw ConfigError("truth beta must be finite");
    for (double s : sigma)
      if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("truth sigma must be finite and >= 0");
    if (mode == Mode::conditional && (n_strata < 1 || m < 1)) throw ConfigError("conditional truth needs n_strata, m >= 1");
  }
};

[[nodiscard]] inline std::string_view to_string(GroundTruth::Mode m) {
  return m == GroundTruth::Mode::conditional ? "conditional" : "marginal";
}

struct WorldConfig {
  std::optional<std::uint64_t> seed;
  int n_segments = 6;
  int weeks = 10;
  Timestamp start = make_timestamp(2017, 3, 6);  // a Monday
  double min_length_mi = 0.25;
  double max_length_mi = 0.9;
  std::vector<double> speed_limits_mph{35.0, 40.0, 45.0};

  double peak_through_per_15min = 560.0;
  double left_turn_share = 0.12;
  double night_factor = 0.08;

  double bluetooth_sampling_rate = 0.0605;
  double speed_cv = 0.4;
  double signal_delay_probability = 0.25;
  double signal_delay_max_s = 60.0;

  int cycle_s = 120;
  double min_split = 0.15;
  double max_split = 0.85;
  double free_plan_probability = 0.02;

  double rain_onsets_per_week = 4.0;
  double mean_rain_hours = 2.0;

  GroundTruth truth;

  void validate() const {
    if (!seed) throw ConfigError("world seed is mandatory");
    if (n_segments < 1 || weeks < 1) throw ConfigError("n_segments and weeks must be positive");
    if (!(min_length_mi > 0.0 && max_length_mi >= min_length_mi)) throw ConfigError("bad segment length range");
    if (speed_limits_mph.empty()) throw ConfigError("speed_limits_mph must not be empty");
    for (double s : speed_limits_mph)
      if (!(s > 0.0)) throw ConfigError("speed limits must be positive");
    if (!(peak_through_per_15min > 0.0) || left_turn_share < 0.0 || night_factor < 0.0)
      throw ConfigError("bad volume profile");
    if (!(bluetooth_sampling_rate >= 0.0 && bluetooth_sampling_rate <= 1.0))
      throw ConfigError("bluetooth_sampling_rate must lie in [0, 1]");
    if (cycle_s < 10) throw ConfigError("cycle_s too short");
    if (!(min_split > 0.0 && max_split <= 1.0 && min_split <= max_split)) throw ConfigError("bad split range");
    if (rain_onsets_per_week < 0.0 || !(mean_rain_hours > 0.0)) throw ConfigError("bad rain process");
    truth.validate();
  }

  [[nodiscard]] StudyCalendar calendar() const { return {start, start + weeks * kWeek}; }
};

struct TruthManifest {
  GroundTruth truth;
  std::uint64_t seed = 0;
  std::size_t n_crashes = 0;
};

[[nodiscard]] inline std::string intersection_name(int i) { return "I" + std::to_string(i); }
[[nodiscard]] inline std::string segment_name(int i) { return "S" + std::to_string(i); }

namespace detail {

inline double round_to(double v, double step) { return std::round(v / step) * step; }

/// Weekday / weekend demand shape in [night, 1].
inline double demand_profile(Timestamp t, double night) {
  double h = static_cast<double>(seconds_of_day(t)) / 3600.0;
  unsigned dow = day_of_week(t);
  auto bump = [h](double c, double w) { return std::exp(-(h - c) * (h - c) / (2.0 * w * w)); };
  double g = (dow == 0 || dow == 6) ? 0.65 * bump(14.0, 3.5)
                                    : std::min(1.0, 0.85 * bump(8.0, 1.2) + 1.0 * bump(17.5, 1.5) + 0.6 * bump(12.5, 3.0));
  return night + (1.0 - night) * g;
}

struct SignalPlan {
  double split = 0.5;
  double left = 0.1;
  std::int64_t offset = 0;
};

}  // namespace detail

/// Emits the five raw logs. Every stochastic component draws from its own
/// stream derived from the world seed.
[[nodiscard]] inline LogSet generate_logs(const WorldConfig& cfg) {
  cfg.validate();
  const std::uint64_t seed = *cfg.seed;
  const auto cal = cfg.calendar();
  const int n_int = cfg.n_segments + 1;
  const std::int64_t plan_len = kSliceLength;
  const std::int64_t n_plans = (cal.end - cal.start) / plan_len;
  const std::int64_t n_bins = (cal.end - cal.start) / (15 * kMinute);
  LogSet logs;

  // Layout
  Rng layout = make_rng(seed, "layout");
  std::uniform_real_distribution<double> length(cfg.min_length_mi, cfg.max_length_mi);
  std::uniform_int_distribution<std::size_t> limit_pick(0, cfg.speed_limits_mph.size() - 1);
  for (int s = 0; s < cfg.n_segments; ++s) {
    Segment seg{segment_name(s), detail::round_to(length(layout), 0.01), cfg.speed_limits_mph[limit_pick(layout)],
                intersection_name(s), intersection_name(s + 1)};
    logs.segments.push_back(seg);
  }
  std::vector<double> demand_factor(n_int), left_factor(n_int), base_split(n_int), base_offset(n_int);
  double offset_acc = std::uniform_real_distribution<double>(0.0, cfg.cycle_s)(layout);
  for (int i = 0; i < n_int; ++i) {
    demand_factor[i] = std::uniform_real_distribution<double>(0.8, 1.2)(layout);
    left_factor[i] = std::uniform_real_distribution<double>(0.5, 1.5)(layout);
    base_split[i] = std::uniform_real_distribution<double>(0.35, 0.6)(layout);
    base_offset[i] = offset_acc;
    if (i < cfg.n_segments) offset_acc += logs.segments[i].ideal_offset_s() + 25.0 * standard_normal(layout);
  }

  // Volumes: 15-minute through / left counts per intersection.
  std::vector<std::vector<double>> through5(n_int);  // apportioned per 5-minute plan, for Bluetooth demand
  std::vector<std::vector<double>> left5(n_int);
  std::vector<double> day_factor(static_cast<std::size_t>(cfg.weeks) * 7);
  {
    Rng r = make_rng(seed, "day-factors");
    for (auto& d : day_factor) d = std::exp(0.08 * standard_normal(r));
  }
  for (int i = 0; i < n_int; ++i) {
    Rng r = make_rng(seed, "volumes:" + intersection_name(i));
    through5[i].assign(static_cast<std::size_t>(n_plans), 0.0);
    left5[i].assign(static_cast<std::size_t>(n_plans), 0.0);
    for (std::int64_t b = 0; b < n_bins; ++b) {
      Timestamp t = cal.start + b * 15 * kMinute;
      double df = day_factor[static_cast<std::size_t>((t - cal.start) / kDay)];
      double lam = cfg.peak_through_per_15min * demand_factor[i] * df *
                   detail::demand_profile(t + 450, cfg.night_factor);
      auto thr = static_cast<double>(std::poisson_distribution<long>(lam)(r));
      auto lt = static_cast<double>(std::poisson_distribution<long>(lam * cfg.left_turn_share * left_factor[i])(r));
      logs.volumes.push_back({intersection_name(i), Movement::through, t, thr});
      logs.volumes.push_back({intersection_name(i), Movement::left, t, lt});
      for (int p = 0; p < 3; ++p) {
        through5[i][static_cast<std::size_t>(b * 3 + p)] = thr / 3.0;
        left5[i][static_cast<std::size_t>(b * 3 + p)] = lt / 3.0;
      }
    }
  }

  // Signals: fixed cycle, splits and offsets re-planned every 5 minutes.
  std::vector<std::vector<double>> through_split(n_int);
  for (int i = 0; i < n_int; ++i) {
    Rng r = make_rng(seed, "signals:" + intersection_name(i));
    through_split[i].resize(static_cast<std::size_t>(n_plans));
    const auto cycle = static_cast<std::int64_t>(cfg.cycle_s);
    for (std::int64_t p = 0; p < n_plans; ++p) {
      Timestamp T = cal.start + p * plan_len;
      detail::SignalPlan plan;
      bool free = std::uniform_real_distribution<double>(0.0, 1.0)(r) < cfg.free_plan_probability;
      plan.split = free ? 1.0 : std::clamp(base_split[i] + 0.12 * standard_normal(r), cfg.min_split, cfg.max_split);
      plan.left = free ? 0.0 : std::min(1.0 - plan.split, std::uniform_real_distribution<double>(0.05, 0.12)(r));
      double off = std::fmod(base_offset[i] + 15.0 * standard_normal(r), static_cast<double>(cycle));
      if (off < 0.0) off += static_cast<double>(cycle);
      plan.offset = static_cast<std::int64_t>(std::llround(off)) % cycle;
      through_split[i][static_cast<std::size_t>(p)] = plan.split;
      if (free) {
        logs.phases.push_back({intersection_name(i), Movement::through, T, T + plan_len});
        continue;
      }
      auto g = static_cast<std::int64_t>(std::llround(plan.split * static_cast<double>(cycle)));
      auto l = static_cast<std::int64_t>(std::llround(plan.left * static_cast<double>(cycle)));
      for (std::int64_t cs = T.seconds + plan.offset - cycle; cs < T.seconds + plan_len; cs += cycle) {
        auto emit = [&](Movement mv, std::int64_t lo, std::int64_t hi) {
          lo = std::max(lo, T.seconds);
          hi = std::min(hi, T.seconds + plan_len);
          if (hi > lo) logs.phases.push_back({intersection_name(i), mv, Timestamp{lo}, Timestamp{hi}});
        };
        emit(Movement::through, cs, cs + g);
        emit(Movement::left, cs + g, cs + g + l);
      }
    }
  }

  // Weather: hourly records from a two-state rain process.
  {
    Rng r = make_rng(seed, "weather");
    double p_start = cfg.rain_onsets_per_week / 168.0;
    double p_stop = 1.0 / cfg.mean_rain_hours;
    bool rain = false;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (Timestamp t = cal.start; t < cal.end; t = t + kHour) {
      rain = rain ? (u(r) >= p_stop) : (p_start > 0.0 && u(r) < p_start);
      double vis = rain ? detail::round_to(std::uniform_real_distribution<double>(1.0, 7.0)(r), 0.25)
                        : (u(r) < 0.9 ? 10.0 : detail::round_to(std::uniform_real_distribution<double>(6.0, 10.0)(r), 0.25));
      logs.weather.push_back({t, rain, vis});
    }
  }

  // Bluetooth traversals.
  for (int s = 0; s < cfg.n_segments; ++s) {
    const auto& seg = logs.segments[s];
    Rng r = make_rng(seed, "bluetooth:" + seg.id);
    double capacity5 = cfg.peak_through_per_15min / 3.0 * 1.25;
    double ar = 0.0;
    std::vector<TraversalSample> seg_samples;
    for (std::int64_t p = 0; p < n_plans; ++p) {
      Timestamp T = cal.start + p * plan_len;
      auto pi = static_cast<std::size_t>(p);
      double vol5 = through5[s][pi] + left5[s][pi];
      double c = std::min(1.3, vol5 / capacity5);
      ar = 0.92 * ar + 0.04 * standard_normal(r);
      std::size_t hour = static_cast<std::size_t>((T - cal.start) / kHour);
      bool raining = hour < logs.weather.size() && logs.weather[hour].rainy;
      double base = seg.speed_limit_mph * (0.92 - 0.5 * c * c) * std::exp(ar) * (raining ? 0.9 : 1.0);
      base *= 0.75 + 0.5 * through_split[s + 1][pi];  // downstream green eases the approach
      base = std::max(base, 6.0);
      long n = std::poisson_distribution<long>(std::max(0.0, vol5 * cfg.bluetooth_sampling_rate))(r);
      std::vector<std::int64_t> exits;
      for (long v = 0; v < n; ++v) exits.push_back(std::uniform_int_distribution<std::int64_t>(0, plan_len - 1)(r));
      std::sort(exits.begin(), exits.end());
      for (auto off : exits) {
        double v = base * std::exp(cfg.speed_cv * standard_normal(r));
        double tt = seg.length_mi / v * 3600.0;
        if (std::uniform_real_distribution<double>(0.0, 1.0)(r) < cfg.signal_delay_probability)
          tt += std::uniform_real_distribution<double>(10.0, std::max(10.0, cfg.signal_delay_max_s))(r);
        tt = std::clamp(tt, seg.length_mi / 60.0 * 3600.0, seg.length_mi / 4.0 * 3600.0);
        tt = detail::round_to(tt, 0.1);
        tt = std::clamp(tt, std::ceil(seg.length_mi / 60.0 * 36000.0) / 10.0,
                        std::floor(seg.length_mi / 4.0 * 36000.0) / 10.0);
        TraversalSample ts{seg.id, T + off, tt, 0.0};
        ts.speed_mph = space_mean_speed(seg, tt);
        seg_samples.push_back(std::move(ts));
      }
    }
    logs.bluetooth.insert(logs.bluetooth.end(), seg_samples.begin(), seg_samples.end());
  }
  return logs;
}

/// Index drawn with probability proportional to exp(eta_j).
[[nodiscard]] inline std::size_t softmax_draw(std::span<const double> eta, Rng& rng) {
  double lse = stats::log_sum_exp(eta);
  double u = uniform_open(rng);
  double acc = 0.0;
  for (std::size_t j = 0; j < eta.size(); ++j) {
    acc += std::exp(eta[j] - lse);
    if (u < acc) return j;
  }
  return eta.size() - 1;
}

namespace detail {

inline std::vector<double> truth_row(const GroundTruth& t, const FeatureVector& f) {
  std::vector<double> x;
  for (const auto& c : t.covariates) x.push_back(feature_value(f, c));
  return x;
}

inline double truth_eta(const GroundTruth& t, std::span<const double> x, std::span<const double> phi) {
  double eta = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) eta += (t.beta[k] + (phi.empty() ? 0.0 : phi[k])) * x[k];
  return eta;
}

inline std::vector<double> draw_phi(const GroundTruth& t, Rng& rng) {
  std::vector<double> phi(t.beta.size(), 0.0);
  for (std::size_t k = 0; k < t.sigma.size(); ++k)
    if (t.sigma[k] > 0.0) phi[k] = t.sigma[k] * standard_normal(rng);
  return phi;
}

}  // namespace detail

/// Crash log from the ground truth, evaluated on the pipeline's own
/// covariates at the truth slice.
///
/// marginal: every 5-minute grid time with an observable truth slice is a
/// crash with probability logit⁻¹(α + xᵀβ).
/// conditional: n_strata anchors, each with m + 1 members sharing segment,
/// weekday and clock time in distinct weeks; the crash member is drawn with
/// probability ∝ exp(xᵀβ).
[[nodiscard]] inline std::vector<Crash> label_crashes(const FeatureStore& store, const WorldConfig& cfg) {
  cfg.validate();
  const auto& truth = cfg.truth;
  const auto cal = cfg.calendar();
  Rng rng = make_rng(*cfg.seed, "crashes");
  std::vector<Crash> crashes;
  const std::int64_t first_offset = kSlices * kSliceLength;

  if (truth.mode == GroundTruth::Mode::marginal) {
    for (const auto& seg : store.logs().segments) {
      for (Timestamp t = cal.start + first_offset; t < cal.end; t = t + kSliceLength) {
        auto wx = store.weather(t);
        auto f = store.extract_slice(seg, t, truth.slice, wx);
        double u = uniform_open(rng);  // drawn for every window so streams stay aligned
        auto phi = detail::draw_phi(truth, rng);
        if (!f.complete() || f.values.sample_count < 1) continue;
        auto x = detail::truth_row(truth, f.values);
        double p = stats::inv_logit(truth.alpha + detail::truth_eta(truth, x, phi));
        if (u < p) crashes.push_back({seg.id, t});
      }
    }
    return crashes;
  }

  const auto& segs = store.logs().segments;
  if (cfg.weeks < truth.m + 1) throw ConfigError("conditional truth needs weeks >= m + 1");
  CrashIndex none{std::span<const Crash>{}};
  std::int64_t slots_per_week = kWeek / kSliceLength;
  int attempts = 0;
  while (static_cast<int>(crashes.size()) < truth.n_strata) {
    if (++attempts > 200 * truth.n_strata) throw DataError("conditional labelling: too few observable strata");
    const auto& seg = segs[std::uniform_int_distribution<std::size_t>(0, segs.size() - 1)(rng)];
    std::int64_t slot = std::uniform_int_distribution<std::int64_t>(0, slots_per_week - 1)(rng);
    std::vector<int> weeks(static_cast<std::size_t>(cfg.weeks));
    std::iota(weeks.begin(), weeks.end(), 0);
    std::shuffle(weeks.begin(), weeks.end(), rng);
    weeks.resize(static_cast<std::size_t>(truth.m + 1));
    auto phi = detail::draw_phi(truth, rng);
    double u = uniform_open(rng);
    std::vector<Timestamp> members;
    std::vector<double> eta;
    bool ok = true;
    for (int w : weeks) {
      Timestamp t = cal.start + w * kWeek + slot * kSliceLength;
      if (t - first_offset < cal.start) {
        ok = false;
        break;
      }
      auto slices = store.extract_slices(seg.id, t);
      if (screen_slices(slices) != Rejection::none) {
        ok = false;
        break;
      }
      auto x = detail::truth_row(truth, slices[static_cast<std::size_t>(truth.slice - 1)].values);
      members.push_back(t);
      eta.push_back(detail::truth_eta(truth, x, phi));
    }
    if (!ok) continue;
    CrashIndex existing{crashes};
    bool clash = std::any_of(members.begin(), members.end(), [&](Timestamp t) {
      return existing.crash_within(seg.id, t, 3 * kHour);
    });
    if (clash) continue;
    // inverse-CDF draw on the pre-drawn uniform
    double lse = stats::log_sum_exp(eta), acc = 0.0;
    std::size_t pick = eta.size() - 1;
    for (std::size_t j = 0; j < eta.size(); ++j) {
      acc += std::exp(eta[j] - lse);
      if (u < acc) {
        pick = j;
        break;
      }
    }
    crashes.push_back({seg.id, members[pick]});
  }
  std::sort(crashes.begin(), crashes.end());
  return crashes;
}

// --------------------------------------------------------------------------
// Direct design-level simulation for parameter-recovery studies.

struct StrataSimulation {
  int n_strata = 500;
  int m = 4;
  std::vector<double> beta{-0.8, 0.5};
  std::vector<double> sigma;         // per-stratum random-coefficient sd (0 = fixed) or empty
  std::vector<double> covariate_sd;  // within-stratum sd per covariate; default 1
  double stratum_mean_sd = 1.0;      // shared stratum-level shift (cancels in the conditional likelihood)
};

/// Strata whose case is drawn by softmax of (β + φ_i)ᵀx over the m + 1
/// members, φ_i ~ N(0, σ²) per stratum.
[[nodiscard]] inline ModelData simulate_conditional_strata(const StrataSimulation& sim, Rng& rng) {
  std::size_t k = sim.beta.size();
  if (k == 0 || sim.m < 1 || sim.n_strata < 0) throw std::invalid_argument("simulate_conditional_strata: bad config");
  if (!sim.sigma.empty() && sim.sigma.size() != k) throw DimensionMismatch("sigma must match beta");
  ModelData md;
  md.n_columns = k;
  auto members = static_cast<std::size_t>(sim.m + 1);
  std::vector<double> rows(members * k), eta(members), shift(k);
  std::vector<int> y(members);
  for (int i = 0; i < sim.n_strata; ++i) {
    for (auto& s : shift) s = sim.stratum_mean_sd * standard_normal(rng);
    std::vector<double> b = sim.beta;
    for (std::size_t c = 0; c < sim.sigma.size(); ++c) b[c] += sim.sigma[c] * standard_normal(rng);
    for (std::size_t j = 0; j < members; ++j) {
      for (std::size_t c = 0; c < k; ++c) {
        double sd = c < sim.covariate_sd.size() ? sim.covariate_sd[c] : 1.0;
        rows[j * k + c] = shift[c] + sd * standard_normal(rng);
      }
      eta[j] = linear_predictor(b, std::span<const double>(rows).subspan(j * k, k));
    }
    std::size_t pick = softmax_draw(eta, rng);
    // case first, like assembled strata
    std::fill(y.begin(), y.end(), 0);
    if (pick != 0)
      for (std::size_t c = 0; c < k; ++c) std::swap(rows[c], rows[pick * k + c]);
    y[0] = 1;
    md.add_stratum(rows, y);
  }
  return md;
}

}  // namespace arterial
