#pragma once

// Deviance, DIC, event scoring by adjusted odds ratios or probabilities,
// ROC/AUC.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "arterial/error.hpp"
#include "arterial/likelihoods.hpp"
#include "arterial/mcmc.hpp"
#include "arterial/stats.hpp"

namespace arterial {

/// -2 log-likelihood; the prior is not part of the deviance.
[[nodiscard]] inline double deviance(const ModelSpec& spec, const ParameterState& theta, const ModelData& data) {
  return -2.0 * log_likelihood(theta, spec, data);
}

struct DicResult {
  double dic = 0.0;
  double mean_deviance = 0.0;       // D-bar
  double pd = 0.0;                  // effective number of parameters
  double deviance_at_mean = 0.0;    // D(theta-bar)
};

[[nodiscard]] inline DicResult dic_from_deviances(std::span<const double> deviance_draws, double deviance_at_mean) {
  DicResult r;
  r.mean_deviance = stats::mean(deviance_draws);
  r.deviance_at_mean = deviance_at_mean;
  r.pd = r.mean_deviance - deviance_at_mean;
  r.dic = r.mean_deviance + r.pd;
  return r;
}

/// Generic DIC over explicit parameter draws: `dev(theta)` gives the
/// deviance of one draw, `theta_bar` the plug-in point.
template <typename Theta, typename DevianceFn>
[[nodiscard]] DicResult dic_from_draws(std::span<const Theta> draws, const Theta& theta_bar, DevianceFn&& dev) {
  std::vector<double> d;
  d.reserve(draws.size());
  for (const auto& t : draws) d.push_back(dev(t));
  return dic_from_deviances(d, dev(theta_bar));
}

/// θ̄ includes the posterior means of the per-unit deviations.
[[nodiscard]] inline DicResult dic(const ChainSet& chains, const ModelData& data) {
  auto dev = chains.pooled_deviance();
  return dic_from_deviances(dev, deviance(chains.spec, chains.posterior_mean(), data));
}

// --------------------------------------------------------------------------
// Scoring

/// Plug-in point estimate used for scoring.
struct FittedModel {
  ModelSpec spec;
  std::vector<double> beta;
  std::vector<std::string> unit_ids;
  std::vector<double> phi_mean;  // [random index * n_units + unit]

  [[nodiscard]] static FittedModel from_chains(const ChainSet& cs) {
    auto m = cs.posterior_mean();
    return {cs.spec, m.beta, cs.unit_ids, m.phi};
  }
};

struct ScoringOptions {
  bool leave_one_out = true;     // controls exclude themselves from the reference mean
  bool use_unit_effects = true;  // apply fitted φ̄ to units seen in training
};

namespace detail {

inline std::map<std::string, std::size_t> unit_lookup(const FittedModel& f) {
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < f.unit_ids.size(); ++i) out.emplace(f.unit_ids[i], i);
  return out;
}

}  // namespace detail

/// Divides every score by the maximum score.
[[nodiscard]] inline std::vector<double> adjust_by_maximum(std::vector<double> scores) {
  if (scores.empty()) return scores;
  double mx = *std::max_element(scores.begin(), scores.end());
  if (!(mx > 0.0) || !std::isfinite(mx)) throw DataError("degenerate scores: maximum is not a positive finite value");
  for (auto& s : scores) s /= mx;
  return scores;
}

namespace detail {

inline std::vector<double> raw_scores(const FittedModel& fit, const ModelData& data, const ScoringOptions& opt) {
  const auto& spec = fit.spec;
  if (data.n_columns != fit.beta.size()) throw DimensionMismatch("score_events: model/data column mismatch");
  auto rc = spec.random_columns();
  auto lookup = unit_lookup(fit);
  std::size_t nu = fit.unit_ids.size();
  auto beta_for = [&](const std::string& unit_id) {
    std::vector<double> b = fit.beta;
    if (!opt.use_unit_effects || nu == 0) return b;
    auto it = lookup.find(unit_id);
    if (it == lookup.end()) return b;
    for (std::size_t r = 0; r < rc.size(); ++r) b[rc[r]] += fit.phi_mean[r * nu + it->second];
    return b;
  };

  std::vector<double> scores(data.n_events(), 0.0);
  if (!is_conditional(spec.family)) {
    for (std::size_t e = 0; e < data.n_events(); ++e)
      scores[e] = stats::inv_logit(linear_predictor(beta_for(data.event_ids[e]), data.row(e)));
    return scores;
  }

  for (std::size_t i = 0; i < data.n_strata(); ++i) {
    auto b = beta_for(data.stratum_ids[i]);
    std::size_t lo = data.stratum_offsets[i], hi = data.stratum_offsets[i + 1];
    for (std::size_t e = lo; e < hi; ++e) {
      std::vector<double> ref;
      for (std::size_t j = lo; j < hi; ++j) {
        if (data.y[j] == 1) continue;
        if (opt.leave_one_out && j == e) continue;
        auto r = data.row(j);
        ref.insert(ref.end(), r.begin(), r.end());
      }
      if (ref.empty()) {  // a lone control has only itself to compare with
        auto r = data.row(e);
        ref.assign(r.begin(), r.end());
      }
      scores[e] = odds_ratio_vs_mean(b, data.row(e), ref);
    }
  }
  return scores;
}

}  // namespace detail

/// Conditional families: odds ratio of each event against the mean of its
/// stratum's other non-crash events, divided by the maximum over `data`.
/// rp_logistic: predicted probability. Units not present in the fit
/// (validation data) get φ = 0.
[[nodiscard]] inline std::vector<double> score_events(const FittedModel& fit, const ModelData& data,
                                                      const ScoringOptions& opt = {}) {
  auto s = detail::raw_scores(fit, data, opt);
  return is_conditional(fit.spec.family) ? adjust_by_maximum(std::move(s)) : s;
}

/// Posterior-predictive variant: raw scores averaged over every stored draw
/// of the population coefficients (per-unit deviations at their posterior
/// means), then divided by the maximum.
[[nodiscard]] inline std::vector<double> score_events_posterior(const ChainSet& cs, const ModelData& data,
                                                                const ScoringOptions& opt = {}) {
  FittedModel fit = FittedModel::from_chains(cs);
  std::vector<double> acc(data.n_events(), 0.0);
  std::size_t n = 0;
  for (const auto& ch : cs.chains) {
    for (std::size_t d = 0; d < ch.n_draws(); ++d, ++n) {
      for (std::size_t k = 0; k < cs.n_beta; ++k) fit.beta[k] = ch.at(d, k);
      auto s = detail::raw_scores(fit, data, opt);
      for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += s[e];
    }
  }
  if (n == 0) throw std::invalid_argument("score_events_posterior: no draws");
  for (auto& a : acc) a /= static_cast<double>(n);
  return is_conditional(cs.spec.family) ? adjust_by_maximum(acc) : acc;
}

// --------------------------------------------------------------------------
// ROC / AUC

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct AucResult {
  double auc = 0.0;
  std::vector<RocPoint> roc;  // (0,0) first, (1,1) last
};

/// AUC as the trapezoidal area under the ROC swept over every distinct
/// score, which equals the pairwise concordance with ties counted one half.
/// The area is accumulated in integers so both readings agree exactly.
[[nodiscard]] inline AucResult auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionMismatch("auc: scores and labels differ in length");
  std::uint64_t pos = 0, neg = 0;
  for (int l : labels) {
    if (l == 1) ++pos;
    else if (l == 0) ++neg;
    else throw std::invalid_argument("auc: labels must be 0 or 1");
  }
  if (pos == 0 || neg == 0) throw std::invalid_argument("auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  AucResult out;
  out.roc.push_back({INFINITY, 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0, area2 = 0;  // twice the area, in count units
  for (std::size_t i = 0; i < order.size();) {
    double thr = scores[order[i]];
    std::uint64_t gtp = 0, gfp = 0;
    for (; i < order.size() && scores[order[i]] == thr; ++i) (labels[order[i]] == 1 ? gtp : gfp)++;
    area2 += gfp * (2 * tp + gtp);
    tp += gtp;
    fp += gfp;
    out.roc.push_back({thr, static_cast<double>(fp) / static_cast<double>(neg),
                       static_cast<double>(tp) / static_cast<double>(pos)});
  }
  out.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return out;
}

// --------------------------------------------------------------------------
// Report

struct EvaluationReport {
  FittedModel fit;
  DicResult dic;
  std::optional<AucResult> training;
  std::optional<AucResult> validation;
  PosteriorSummary summary;
};

[[nodiscard]] inline std::optional<AucResult> auc_for(const FittedModel& fit, const ModelData& data,
                                                      const ScoringOptions& opt) {
  if (data.n_events() == 0) return std::nullopt;
  auto s = score_events(fit, data, opt);
  return auc(s, data.y);
}

}  // namespace arterial
