#pragma once

// Log-likelihoods, priors and odds-ratio kernels for the three model
// families: conditional logistic, random-parameters logistic, and
// random-parameters conditional logistic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arterial/error.hpp"
#include "arterial/stats.hpp"

namespace arterial {

enum class Family { conditional_logistic, rp_logistic, rp_conditional_logistic };

[[nodiscard]] inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::conditional_logistic: return "conditional_logistic";
    case Family::rp_logistic: return "rp_logistic";
    case Family::rp_conditional_logistic: return "rp_conditional_logistic";
  }
  return "unknown";
}

[[nodiscard]] inline Family parse_family(std::string_view s) {
  if (s == "conditional_logistic") return Family::conditional_logistic;
  if (s == "rp_logistic") return Family::rp_logistic;
  if (s == "rp_conditional_logistic") return Family::rp_conditional_logistic;
  throw ConfigError("unknown model family '" + std::string(s) + "'");
}

[[nodiscard]] inline bool is_conditional(Family f) { return f != Family::rp_logistic; }

inline constexpr std::string_view kIntercept = "intercept";

/// Prior on every population coefficient. Normal is parameterised by its
/// variance; Logistic(0, 1) on a lone intercept is the uniform prior on the
/// success probability.
struct CoefPrior {
  enum class Kind { normal, logistic };
  Kind kind = Kind::normal;
  double mean = 0.0;
  double variance = 1e6;
  double scale = 1.0;  // logistic only

  [[nodiscard]] double logpdf(double b) const {
    return kind == Kind::normal ? stats::normal_logpdf(b, mean, variance) : stats::logistic_logpdf(b, mean, scale);
  }
  /// Negative second derivative at the mean.
  [[nodiscard]] double curvature() const { return kind == Kind::normal ? 1.0 / variance : 0.5 / (scale * scale); }
};

/// Inverse-gamma prior on each random-coefficient variance.
struct VarPrior {
  double shape = 0.001;
  double scale = 0.001;
};

struct ModelSpec {
  Family family = Family::conditional_logistic;
  std::vector<std::string> covariates;
  std::vector<std::string> random_set;  // subset of covariates, plus "intercept" for rp_logistic
  int slice = 2;
  CoefPrior prior_coef;
  VarPrior prior_var;
  bool standardize = false;

  [[nodiscard]] bool has_intercept() const { return family == Family::rp_logistic; }

  /// Design columns: the intercept first (rp_logistic only), then covariates.
  [[nodiscard]] std::vector<std::string> columns() const {
    std::vector<std::string> out;
    if (has_intercept()) out.emplace_back(kIntercept);
    out.insert(out.end(), covariates.begin(), covariates.end());
    return out;
  }

  /// Column index of each random coefficient, in column order.
  [[nodiscard]] std::vector<std::size_t> random_columns() const {
    auto cols = columns();
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (std::find(random_set.begin(), random_set.end(), cols[c]) != random_set.end()) out.push_back(c);
    }
    return out;
  }

  void validate() const {
    if (slice < 1 || slice > 4) throw ConfigError("slice must be in 1..4");
    if (!has_intercept() && covariates.empty()) throw ConfigError("conditional families need at least one covariate");
    for (std::size_t i = 0; i < covariates.size(); ++i) {
      if (covariates[i] == kIntercept) throw ConfigError("'intercept' is not a covariate");
      for (std::size_t j = 0; j < i; ++j)
        if (covariates[i] == covariates[j]) throw ConfigError("duplicate covariate '" + covariates[i] + "'");
    }
    auto cols = columns();
    for (const auto& r : random_set) {
      if (std::find(cols.begin(), cols.end(), r) == cols.end())
        throw ConfigError("random coefficient '" + r + "' is not a model column");
    }
    if (family == Family::conditional_logistic && !random_set.empty())
      throw ConfigError("conditional_logistic has no random coefficients");
    if (prior_coef.kind == CoefPrior::Kind::normal && !(prior_coef.variance > 0.0))
      throw ConfigError("coefficient prior variance must be positive");
    if (!(prior_var.shape > 0.0 && prior_var.scale > 0.0)) throw ConfigError("variance prior must be positive");
  }
};

/// Design data for one model: row-major covariate matrix, outcomes and
/// stratum boundaries. For rp_logistic the intercept column is included.
struct ModelData {
  std::size_t n_columns = 0;
  std::vector<double> x;
  std::vector<int> y;
  std::vector<std::size_t> stratum_offsets{0};  // n_strata + 1 entries
  std::vector<std::size_t> case_index;          // event index of each stratum's case
  std::vector<std::string> stratum_ids;
  std::vector<std::string> event_ids;

  [[nodiscard]] std::size_t n_events() const { return y.size(); }
  [[nodiscard]] std::size_t n_strata() const { return stratum_offsets.size() - 1; }
  [[nodiscard]] std::span<const double> row(std::size_t e) const {
    return std::span<const double>(x).subspan(e * n_columns, n_columns);
  }

  /// Appends one stratum; rows are (members x n_columns) row-major.
  void add_stratum(std::span<const double> rows, std::span<const int> outcomes, std::string id = {}) {
    if (n_columns == 0 || rows.size() != outcomes.size() * n_columns)
      throw DimensionMismatch("add_stratum: rows do not match n_columns");
    if (std::count(outcomes.begin(), outcomes.end(), 1) != 1 ||
        std::any_of(outcomes.begin(), outcomes.end(), [](int v) { return v != 0 && v != 1; })) {
      throw DataError("stratum must contain exactly one case");
    }
    if (id.empty()) id = "S" + std::to_string(n_strata());
    std::size_t first = y.size();
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
      y.push_back(outcomes[j]);
      if (outcomes[j] == 1) case_index.push_back(first + j);
      event_ids.push_back(id + "-" + std::to_string(j));
    }
    x.insert(x.end(), rows.begin(), rows.end());
    stratum_ids.push_back(std::move(id));
    stratum_offsets.push_back(y.size());
  }

  /// Appends an unstratified observation (Bernoulli families only).
  void add_observation(std::span<const double> row, int outcome, std::string id = {}) {
    if (n_columns == 0 || row.size() != n_columns) throw DimensionMismatch("add_observation: row size mismatch");
    if (outcome != 0 && outcome != 1) throw DataError("outcome must be 0 or 1");
    event_ids.push_back(id.empty() ? "E" + std::to_string(y.size()) : std::move(id));
    y.push_back(outcome);
    x.insert(x.end(), row.begin(), row.end());
  }

  [[nodiscard]] bool fully_stratified() const { return stratum_offsets.back() == y.size(); }
};

/// Population coefficients, per-unit deviations and their variances.
/// phi is laid out [random index * n_units + unit].
struct ParameterState {
  std::vector<double> beta;
  std::vector<double> sigma2;
  std::vector<double> phi;
  std::size_t n_units = 0;

  [[nodiscard]] double phi_at(std::size_t r, std::size_t unit) const { return phi[r * n_units + unit]; }
};

/// Number of random-effect units: observations for rp_logistic, strata for
/// rp_conditional_logistic, none otherwise.
[[nodiscard]] inline std::size_t unit_count(const ModelSpec& spec, const ModelData& data) {
  if (spec.random_set.empty()) return 0;
  switch (spec.family) {
    case Family::rp_logistic: return data.n_events();
    case Family::rp_conditional_logistic: return data.n_strata();
    case Family::conditional_logistic: return 0;
  }
  return 0;
}

[[nodiscard]] inline ParameterState zero_state(const ModelSpec& spec, const ModelData& data) {
  ParameterState s;
  s.beta.assign(spec.columns().size(), 0.0);
  auto rc = spec.random_columns();
  s.sigma2.assign(rc.size(), 1.0);
  s.n_units = unit_count(spec, data);
  s.phi.assign(rc.size() * s.n_units, 0.0);
  return s;
}

// --------------------------------------------------------------------------

[[nodiscard]] inline double linear_predictor(std::span<const double> beta, std::span<const double> x) {
  if (beta.size() != x.size()) throw DimensionMismatch("linear_predictor: coefficient/covariate size mismatch");
  double eta = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) eta += beta[k] * x[k];
  return eta;
}

/// log of the case's softmax share among the stratum's linear predictors.
[[nodiscard]] inline double conditional_loglik_eta(std::span<const double> eta, std::size_t case_pos) {
  return eta[case_pos] - stats::log_sum_exp(eta);
}

[[nodiscard]] inline double conditional_loglik_stratum(std::span<const double> beta_eff, const ModelData& data,
                                                       std::size_t stratum) {
  std::size_t lo = data.stratum_offsets[stratum], hi = data.stratum_offsets[stratum + 1];
  std::vector<double> eta(hi - lo);
  for (std::size_t e = lo; e < hi; ++e) eta[e - lo] = linear_predictor(beta_eff, data.row(e));
  return conditional_loglik_eta(eta, data.case_index[stratum] - lo);
}

/// beta + phi for one unit.
[[nodiscard]] inline std::vector<double> effective_beta(const ParameterState& s, std::span<const std::size_t> random_cols,
                                                        std::optional<std::size_t> unit) {
  std::vector<double> b = s.beta;
  if (unit && s.n_units > 0) {
    for (std::size_t r = 0; r < random_cols.size(); ++r) b[random_cols[r]] += s.phi_at(r, *unit);
  }
  return b;
}

[[nodiscard]] inline double conditional_loglik_total(const ParameterState& s, const ModelSpec& spec,
                                                     const ModelData& data) {
  auto rc = spec.random_columns();
  bool per_stratum = spec.family == Family::rp_conditional_logistic && s.n_units > 0;
  double total = 0.0;
  std::vector<double> b = s.beta;
  for (std::size_t i = 0; i < data.n_strata(); ++i) {
    if (per_stratum) b = effective_beta(s, rc, i);
    total += conditional_loglik_stratum(b, data, i);
  }
  return total;
}

/// Σ y η − log(1 + e^η) with η = (β + φ_i)ᵀ(1, x_i).
[[nodiscard]] inline double bernoulli_loglik(const ParameterState& s, const ModelSpec& spec, const ModelData& data) {
  auto rc = spec.random_columns();
  double total = 0.0;
  for (std::size_t e = 0; e < data.n_events(); ++e) {
    auto b = effective_beta(s, rc, s.n_units > 0 ? std::optional<std::size_t>(e) : std::nullopt);
    double eta = linear_predictor(b, data.row(e));
    total += data.y[e] * eta - stats::log1p_exp(eta);
  }
  return total;
}

[[nodiscard]] inline double log_likelihood(const ParameterState& s, const ModelSpec& spec, const ModelData& data) {
  return is_conditional(spec.family) ? conditional_loglik_total(s, spec, data) : bernoulli_loglik(s, spec, data);
}

[[nodiscard]] inline double log_prior(const ParameterState& s, const ModelSpec& spec) {
  double lp = 0.0;
  for (double b : s.beta) lp += spec.prior_coef.logpdf(b);
  for (std::size_t r = 0; r < s.sigma2.size(); ++r) {
    double v = s.sigma2[r];
    if (!(v > 0.0)) throw std::domain_error("log_prior: variance must be positive");
    lp += stats::inv_gamma_logpdf(v, spec.prior_var.shape, spec.prior_var.scale);
    for (std::size_t u = 0; u < s.n_units; ++u) lp += stats::normal_logpdf(s.phi_at(r, u), 0.0, v);
  }
  return lp;
}

/// ∂/∂β of the conditional log-likelihood (population coefficients, φ held
/// fixed). Used to check the likelihood, not by the sampler.
[[nodiscard]] inline std::vector<double> conditional_loglik_gradient(const ParameterState& s, const ModelSpec& spec,
                                                                     const ModelData& data) {
  auto rc = spec.random_columns();
  bool per_stratum = spec.family == Family::rp_conditional_logistic && s.n_units > 0;
  std::vector<double> g(data.n_columns, 0.0);
  std::vector<double> b = s.beta;
  std::vector<double> eta;
  for (std::size_t i = 0; i < data.n_strata(); ++i) {
    if (per_stratum) b = effective_beta(s, rc, i);
    std::size_t lo = data.stratum_offsets[i], hi = data.stratum_offsets[i + 1];
    eta.resize(hi - lo);
    for (std::size_t e = lo; e < hi; ++e) eta[e - lo] = linear_predictor(b, data.row(e));
    double lse = stats::log_sum_exp(eta);
    for (std::size_t k = 0; k < data.n_columns; ++k) {
      double expected = 0.0;
      for (std::size_t e = lo; e < hi; ++e) expected += std::exp(eta[e - lo] - lse) * data.row(e)[k];
      g[k] += data.row(data.case_index[i])[k] - expected;
    }
  }
  return g;
}

/// Diagonal of the observed information at β = 0, φ = 0: within-stratum
/// covariate variance (conditional) or Σ x²/4 (Bernoulli). Seeds proposal
/// scales.
[[nodiscard]] inline std::vector<double> information_at_zero(const ModelSpec& spec, const ModelData& data) {
  std::vector<double> info(data.n_columns, 0.0);
  if (is_conditional(spec.family)) {
    for (std::size_t i = 0; i < data.n_strata(); ++i) {
      std::size_t lo = data.stratum_offsets[i], hi = data.stratum_offsets[i + 1];
      double n = static_cast<double>(hi - lo);
      for (std::size_t k = 0; k < data.n_columns; ++k) {
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t e = lo; e < hi; ++e) {
          double v = data.row(e)[k];
          m1 += v / n;
          m2 += v * v / n;
        }
        info[k] += m2 - m1 * m1;
      }
    }
  } else {
    for (std::size_t e = 0; e < data.n_events(); ++e)
      for (std::size_t k = 0; k < data.n_columns; ++k) info[k] += 0.25 * data.row(e)[k] * data.row(e)[k];
  }
  return info;
}

// --------------------------------------------------------------------------
// Odds ratios

[[nodiscard]] inline double odds_ratio_pair(std::span<const double> beta, std::span<const double> x1,
                                            std::span<const double> x2) {
  if (beta.size() != x1.size() || x1.size() != x2.size()) throw DimensionMismatch("odds_ratio_pair: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < beta.size(); ++k) s += beta[k] * (x1[k] - x2[k]);
  return std::exp(s);
}

/// Odds of `x` relative to the covariate mean of `reference` rows
/// (row-major, beta.size() columns).
[[nodiscard]] inline double odds_ratio_vs_mean(std::span<const double> beta, std::span<const double> x,
                                               std::span<const double> reference) {
  std::size_t k = beta.size();
  if (k == 0 || reference.empty() || reference.size() % k != 0 || x.size() != k)
    throw DimensionMismatch("odds_ratio_vs_mean: bad reference rows");
  std::size_t n = reference.size() / k;
  std::vector<double> mean(k, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < k; ++c) mean[c] += reference[r * k + c] / static_cast<double>(n);
  return odds_ratio_pair(beta, x, mean);
}

/// Case odds against the mean of the stratum's non-crash events.
[[nodiscard]] inline double odds_ratio_vs_stratum_mean(std::span<const double> beta, std::span<const double> case_x,
                                                       const ModelData& data, std::size_t stratum) {
  std::size_t lo = data.stratum_offsets[stratum], hi = data.stratum_offsets[stratum + 1];
  std::vector<double> controls;
  for (std::size_t e = lo; e < hi; ++e) {
    if (data.y[e] == 1) continue;
    auto r = data.row(e);
    controls.insert(controls.end(), r.begin(), r.end());
  }
  if (controls.empty()) throw DataError("odds_ratio_vs_stratum_mean: stratum has no controls");
  return odds_ratio_vs_mean(beta, case_x, controls);
}

[[nodiscard]] inline double hazard_ratio(double coef) {
  if (!std::isfinite(coef)) throw std::domain_error("hazard_ratio: non-finite coefficient");
  return std::exp(coef);
}

}  // namespace arterial
