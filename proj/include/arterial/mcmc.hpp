#pragma once

// Metropolis-within-Gibbs: component-wise Gaussian random-walk updates for
// every population coefficient and every per-unit deviation, conjugate
// inverse-gamma draws for the random-coefficient variances. Several
// independent chains, adaptation during burn-in only, BGR diagnostic and
// pooled posterior summaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "arterial/error.hpp"
#include "arterial/likelihoods.hpp"
#include "arterial/random.hpp"
#include "arterial/stats.hpp"

namespace arterial {

struct SamplerConfig {
  int n_chains = 3;
  int n_iter = 20000;
  int burn_in = 5000;
  int thin = 1;
  std::optional<std::uint64_t> seed;
  double target_accept = 0.44;
  int adapt_window = 50;
  double adapt_step = 0.05;  // log-scale change per window
  int threads = 1;

  void validate() const {
    if (!seed) throw ConfigError("sampler seed is mandatory");
    if (n_chains < 1) throw ConfigError("n_chains must be >= 1");
    if (n_iter < 1 || burn_in < 0 || burn_in >= n_iter) throw ConfigError("need 0 <= burn_in < n_iter");
    if (thin < 1) throw ConfigError("thin must be >= 1");
    if (adapt_window < 1) throw ConfigError("adapt_window must be >= 1");
    if (!(target_accept > 0.0 && target_accept < 1.0)) throw ConfigError("target_accept must lie in (0, 1)");
  }

  [[nodiscard]] std::size_t stored_per_chain() const {
    return static_cast<std::size_t>((n_iter - burn_in + thin - 1) / thin);
  }
};

struct Chain {
  std::size_t n_scalars = 0;
  std::vector<double> draws;     // stored iterations x scalars, row-major
  std::vector<double> deviance;  // -2 loglik at each stored iteration
  std::vector<double> phi_mean;  // posterior mean of each per-unit deviation
  std::vector<double> acceptance;
  std::vector<double> scale_at_burn_in;  // proposal scales when adaptation stopped
  std::vector<double> scale_final;

  [[nodiscard]] std::size_t n_draws() const { return n_scalars == 0 ? 0 : draws.size() / n_scalars; }
  [[nodiscard]] double at(std::size_t draw, std::size_t scalar) const { return draws[draw * n_scalars + scalar]; }
  [[nodiscard]] std::vector<double> column(std::size_t scalar) const {
    std::vector<double> out(n_draws());
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = at(d, scalar);
    return out;
  }
};

/// Draws of every chain. Scalars are the model columns' coefficients
/// followed by "sigma2[<column>]" for each random coefficient.
struct ChainSet {
  ModelSpec spec;
  std::vector<std::string> names;
  std::size_t n_beta = 0;
  std::vector<std::size_t> random_columns;
  std::vector<std::string> unit_ids;  // stratum or event ids, one per unit
  std::vector<Chain> chains;

  [[nodiscard]] std::size_t n_scalars() const { return names.size(); }
  [[nodiscard]] std::size_t n_units() const { return unit_ids.size(); }

  [[nodiscard]] std::vector<std::vector<double>> per_chain(std::size_t scalar) const {
    std::vector<std::vector<double>> out;
    for (const auto& c : chains) out.push_back(c.column(scalar));
    return out;
  }
  [[nodiscard]] std::vector<double> pooled(std::size_t scalar) const {
    std::vector<double> out;
    for (const auto& c : chains) {
      auto col = c.column(scalar);
      out.insert(out.end(), col.begin(), col.end());
    }
    return out;
  }
  [[nodiscard]] std::vector<double> pooled_deviance() const {
    std::vector<double> out;
    for (const auto& c : chains) out.insert(out.end(), c.deviance.begin(), c.deviance.end());
    return out;
  }

  /// Pooled posterior mean of (beta, sigma2, phi).
  [[nodiscard]] ParameterState posterior_mean() const {
    ParameterState s;
    s.n_units = n_units();
    for (std::size_t k = 0; k < n_scalars(); ++k) {
      double m = stats::mean(pooled(k));
      (k < n_beta ? s.beta : s.sigma2).push_back(m);
    }
    s.phi.assign(random_columns.size() * s.n_units, 0.0);
    for (std::size_t i = 0; i < s.phi.size(); ++i) {
      std::vector<double> per_chain;
      for (const auto& c : chains) per_chain.push_back(c.phi_mean[i]);
      s.phi[i] = stats::mean(per_chain);
    }
    return s;
  }
};

/// Exact conjugate draw σ² ~ InvGamma(shape + n/2, scale + Σφ²/2); with no
/// units this is a prior draw. Clamped into the positive finite range.
[[nodiscard]] inline double gibbs_sigma(std::span<const double> phi, const VarPrior& prior, Rng& rng) {
  double ss = 0.0;
  for (double p : phi) ss += p * p;
  double shape = prior.shape + 0.5 * static_cast<double>(phi.size());
  double scale = prior.scale + 0.5 * ss;
  double log_v = std::log(scale) - log_gamma_variate(rng, shape);
  constexpr double lo = std::numeric_limits<double>::min();
  constexpr double hi = std::numeric_limits<double>::max();
  if (log_v > std::log(hi)) return hi;
  return std::max(lo, std::exp(log_v));
}

/// Metropolis rule for a symmetric proposal: accept with probability
/// min(1, exp(log_ratio)). Non-finite ratios are rejected.
[[nodiscard]] inline bool metropolis_accept(double log_ratio, Rng& rng) {
  if (!std::isfinite(log_ratio)) return false;
  return log_ratio >= 0.0 || std::log(uniform_open(rng)) < log_ratio;
}

namespace detail {

class ChainRunner {
 public:
  ChainRunner(const ModelSpec& spec, const ModelData& data, const SamplerConfig& cfg)
      : spec_(spec), data_(data), cfg_(cfg), rc_(spec.random_columns()), k_(data.n_columns) {
    n_units_ = unit_count(spec, data);
    conditional_ = is_conditional(spec.family);
    if (conditional_ && !data.fully_stratified())
      throw DataError("conditional families need every event inside a stratum");
    stratum_of_.assign(data.n_events(), 0);
    for (std::size_t i = 0; i < data.n_strata(); ++i)
      for (std::size_t e = data.stratum_offsets[i]; e < data.stratum_offsets[i + 1]; ++e) stratum_of_[e] = i;

    auto info = information_at_zero(spec, data);
    beta_scale0_.resize(k_);
    for (std::size_t k = 0; k < k_; ++k)
      beta_scale0_[k] = 2.38 / std::sqrt(info[k] + spec.prior_coef.curvature());
    phi_scale0_.resize(rc_.size() * n_units_);
    for (std::size_t r = 0; r < rc_.size(); ++r) {
      for (std::size_t u = 0; u < n_units_; ++u) {
        double iu = unit_information(rc_[r], u);
        phi_scale0_[r * n_units_ + u] = 2.38 / std::sqrt(iu + 1.0);
      }
    }
  }

  [[nodiscard]] Chain run(int chain_index, std::uint64_t seed) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(chain_index));
    init(chain_index);
    double lp0 = total_ll_ + log_prior(state_, spec_);
    if (!std::isfinite(lp0)) throw DataError("non-finite log posterior at initialisation");

    Chain out;
    out.n_scalars = k_ + rc_.size();
    out.draws.reserve(cfg_.stored_per_chain() * out.n_scalars);
    out.phi_mean.assign(state_.phi.size(), 0.0);
    std::vector<double> beta_scale = beta_scale0_, phi_scale = phi_scale0_;
    std::vector<int> beta_acc_win(k_, 0), phi_acc_win(phi_scale.size(), 0);
    std::vector<std::size_t> beta_acc(k_, 0);
    std::vector<std::size_t> phi_acc(rc_.size(), 0);
    std::size_t post_iters = 0;

    for (int it = 0; it < cfg_.n_iter; ++it) {
      bool burning = it < cfg_.burn_in;
      for (std::size_t k = 0; k < k_; ++k) {
        bool a = update_beta(k, beta_scale[k], rng);
        beta_acc_win[k] += a;
        if (!burning) beta_acc[k] += a;
      }
      for (std::size_t r = 0; r < rc_.size(); ++r) {
        for (std::size_t u = 0; u < n_units_; ++u) {
          std::size_t idx = r * n_units_ + u;
          bool a = update_phi(r, u, phi_scale[idx], rng);
          phi_acc_win[idx] += a;
          if (!burning) phi_acc[r] += a;
        }
      }
      if (!rc_.empty()) total_ll_ = sum(ll_);
      for (std::size_t r = 0; r < rc_.size(); ++r) {
        state_.sigma2[r] = gibbs_sigma(std::span<const double>(state_.phi).subspan(r * n_units_, n_units_),
                                       spec_.prior_var, rng);
      }

      if (burning && (it + 1) % cfg_.adapt_window == 0) {
        adapt(beta_scale, beta_acc_win);
        adapt(phi_scale, phi_acc_win);
      }
      if (it + 1 == cfg_.burn_in || (cfg_.burn_in == 0 && it == 0)) {
        out.scale_at_burn_in = beta_scale;
        out.scale_at_burn_in.insert(out.scale_at_burn_in.end(), phi_scale.begin(), phi_scale.end());
      }
      if (!burning) {
        ++post_iters;
        if ((it - cfg_.burn_in) % cfg_.thin == 0) {
          out.draws.insert(out.draws.end(), state_.beta.begin(), state_.beta.end());
          out.draws.insert(out.draws.end(), state_.sigma2.begin(), state_.sigma2.end());
          out.deviance.push_back(-2.0 * total_ll_);
          for (std::size_t i = 0; i < state_.phi.size(); ++i) out.phi_mean[i] += state_.phi[i];
        }
      }
    }
    double stored = static_cast<double>(out.deviance.size());
    for (auto& p : out.phi_mean) p /= stored;
    for (std::size_t k = 0; k < k_; ++k)
      out.acceptance.push_back(static_cast<double>(beta_acc[k]) / static_cast<double>(post_iters));
    for (std::size_t r = 0; r < rc_.size(); ++r)
      out.acceptance.push_back(static_cast<double>(phi_acc[r]) /
                               static_cast<double>(post_iters * std::max<std::size_t>(1, n_units_)));
    out.scale_final = beta_scale;
    out.scale_final.insert(out.scale_final.end(), phi_scale.begin(), phi_scale.end());
    return out;
  }

 private:
  [[nodiscard]] double unit_information(std::size_t col, std::size_t u) const {
    if (spec_.family == Family::rp_logistic) {
      double v = data_.row(u)[col];
      return 0.25 * v * v;
    }
    std::size_t lo = data_.stratum_offsets[u], hi = data_.stratum_offsets[u + 1];
    double n = static_cast<double>(hi - lo), m1 = 0.0, m2 = 0.0;
    for (std::size_t e = lo; e < hi; ++e) {
      double v = data_.row(e)[col];
      m1 += v / n;
      m2 += v * v / n;
    }
    return m2 - m1 * m1;
  }

  void init(int chain_index) {
    state_ = zero_state(spec_, data_);
    // 0, +1, -1, +2, -2, ... times 0.5
    int c = chain_index;
    double mult = c == 0 ? 0.0 : ((c + 1) / 2) * (c % 2 == 1 ? 1.0 : -1.0);
    for (auto& b : state_.beta) b = 0.5 * mult;
    eta_.assign(data_.n_events(), 0.0);
    for (std::size_t e = 0; e < data_.n_events(); ++e) eta_[e] = eta_of(e);
    ll_.assign(conditional_ ? data_.n_strata() : data_.n_events(), 0.0);
    for (std::size_t i = 0; i < ll_.size(); ++i) ll_[i] = unit_ll(eta_, i);
    total_ll_ = sum(ll_);
    eta_new_ = eta_;
    ll_new_ = ll_;
  }

  [[nodiscard]] double eta_of(std::size_t e) const {
    auto x = data_.row(e);
    double eta = linear_predictor(state_.beta, x);
    if (n_units_ > 0) {
      std::size_t u = spec_.family == Family::rp_logistic ? e : stratum_of_[e];
      for (std::size_t r = 0; r < rc_.size(); ++r) eta += state_.phi_at(r, u) * x[rc_[r]];
    }
    return eta;
  }

  /// Log-likelihood contribution of stratum i (conditional) or event i.
  [[nodiscard]] double unit_ll(const std::vector<double>& eta, std::size_t i) const {
    if (conditional_) {
      std::size_t lo = data_.stratum_offsets[i], hi = data_.stratum_offsets[i + 1];
      return conditional_loglik_eta(std::span<const double>(eta).subspan(lo, hi - lo), data_.case_index[i] - lo);
    }
    return data_.y[i] * eta[i] - stats::log1p_exp(eta[i]);
  }

  static double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }

  bool update_beta(std::size_t k, double scale, Rng& rng) {
    double delta = scale * standard_normal(rng);
    double old_b = state_.beta[k];
    for (std::size_t e = 0; e < eta_.size(); ++e) eta_new_[e] = eta_[e] + delta * data_.x[e * k_ + k];
    for (std::size_t i = 0; i < ll_.size(); ++i) ll_new_[i] = unit_ll(eta_new_, i);
    double total_new = sum(ll_new_);
    double log_ratio = total_new - total_ll_ + spec_.prior_coef.logpdf(old_b + delta) - spec_.prior_coef.logpdf(old_b);
    if (!metropolis_accept(log_ratio, rng)) return false;
    state_.beta[k] = old_b + delta;
    std::swap(eta_, eta_new_);
    std::swap(ll_, ll_new_);
    total_ll_ = total_new;
    return true;
  }

  bool update_phi(std::size_t r, std::size_t u, double scale, Rng& rng) {
    std::size_t col = rc_[r];
    double delta = scale * standard_normal(rng);
    double& phi = state_.phi[r * n_units_ + u];
    double var = state_.sigma2[r];
    double prior_diff = (phi * phi - (phi + delta) * (phi + delta)) / (2.0 * var);
    std::size_t lo, hi;
    if (conditional_) {
      lo = data_.stratum_offsets[u];
      hi = data_.stratum_offsets[u + 1];
    } else {
      lo = u;
      hi = u + 1;
    }
    for (std::size_t e = lo; e < hi; ++e) eta_new_[e] = eta_[e] + delta * data_.x[e * k_ + col];
    double ll_old = ll_[u];
    double ll_new = unit_ll(eta_new_, u);
    double log_ratio = ll_new - ll_old + prior_diff;
    if (!metropolis_accept(log_ratio, rng)) {
      for (std::size_t e = lo; e < hi; ++e) eta_new_[e] = eta_[e];
      return false;
    }
    phi += delta;
    for (std::size_t e = lo; e < hi; ++e) eta_[e] = eta_new_[e];
    ll_[u] = ll_new;
    ll_new_[u] = ll_new;
    total_ll_ += ll_new - ll_old;
    return true;
  }

  template <typename Counts>
  void adapt(std::vector<double>& scale, Counts& acc) const {
    for (std::size_t i = 0; i < scale.size(); ++i) {
      double rate = static_cast<double>(acc[i]) / cfg_.adapt_window;
      scale[i] *= std::exp(rate > cfg_.target_accept ? cfg_.adapt_step : -cfg_.adapt_step);
      acc[i] = 0;
    }
  }

  const ModelSpec& spec_;
  const ModelData& data_;
  const SamplerConfig& cfg_;
  std::vector<std::size_t> rc_;
  std::size_t k_;
  std::size_t n_units_ = 0;
  bool conditional_ = true;
  std::vector<std::size_t> stratum_of_;
  std::vector<double> beta_scale0_, phi_scale0_;

  ParameterState state_;
  std::vector<double> eta_, eta_new_, ll_, ll_new_;
  double total_ll_ = 0.0;
};

/// Column standard deviations used for optional scaling (intercept and
/// constant columns keep scale 1).
inline std::vector<double> column_scales(const ModelSpec& spec, const ModelData& data) {
  std::vector<double> s(data.n_columns, 1.0);
  if (!spec.standardize || data.n_events() < 2) return s;
  for (std::size_t k = spec.has_intercept() ? 1 : 0; k < data.n_columns; ++k) {
    std::vector<double> col(data.n_events());
    for (std::size_t e = 0; e < col.size(); ++e) col[e] = data.row(e)[k];
    double sd = stats::stddev(col);
    if (sd > 0.0) s[k] = sd;
  }
  return s;
}

}  // namespace detail

/// Runs every chain from its own derived RNG stream. With spec.standardize
/// set, columns are divided by their standard deviation for sampling and all
/// draws are mapped back to the raw covariate scale.
[[nodiscard]] inline ChainSet run_chains(const ModelSpec& spec, const ModelData& data, const SamplerConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (data.n_columns != spec.columns().size()) throw DimensionMismatch("run_chains: data columns do not match model");

  auto scales = detail::column_scales(spec, data);
  ModelData scaled = data;
  bool rescale = std::any_of(scales.begin(), scales.end(), [](double s) { return s != 1.0; });
  if (rescale) {
    for (std::size_t e = 0; e < scaled.n_events(); ++e)
      for (std::size_t k = 0; k < scaled.n_columns; ++k) scaled.x[e * scaled.n_columns + k] /= scales[k];
  }

  ChainSet out;
  out.spec = spec;
  out.names = spec.columns();
  out.n_beta = out.names.size();
  out.random_columns = spec.random_columns();
  for (auto c : out.random_columns) out.names.push_back("sigma2[" + spec.columns()[c] + "]");
  std::size_t n_units = unit_count(spec, data);
  if (n_units > 0) out.unit_ids = spec.family == Family::rp_logistic ? data.event_ids : data.stratum_ids;

  out.chains.resize(static_cast<std::size_t>(cfg.n_chains));
  auto work = [&](int c) {
    detail::ChainRunner runner(spec, rescale ? scaled : data, cfg);
    out.chains[static_cast<std::size_t>(c)] = runner.run(c, *cfg.seed);
  };
  int threads = std::max(1, std::min(cfg.threads, cfg.n_chains));
  if (threads == 1) {
    for (int c = 0; c < cfg.n_chains; ++c) work(c);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.n_chains));
    for (int first = 0; first < cfg.n_chains; first += threads) {
      std::vector<std::thread> pool;
      for (int c = first; c < std::min(cfg.n_chains, first + threads); ++c) {
        pool.emplace_back([&, c] {
          try {
            work(c);
          } catch (...) {
            errors[static_cast<std::size_t>(c)] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  if (rescale) {
    std::size_t nr = out.random_columns.size();
    for (auto& ch : out.chains) {
      for (std::size_t d = 0; d < ch.n_draws(); ++d) {
        for (std::size_t k = 0; k < out.n_beta; ++k) ch.draws[d * ch.n_scalars + k] /= scales[k];
        for (std::size_t r = 0; r < nr; ++r) {
          double s = scales[out.random_columns[r]];
          ch.draws[d * ch.n_scalars + out.n_beta + r] /= s * s;
        }
      }
      for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t u = 0; u < n_units; ++u) ch.phi_mean[r * n_units + u] /= scales[out.random_columns[r]];
    }
  }
  return out;
}

// --------------------------------------------------------------------------
// Diagnostics and summaries

/// Scale-reduction factor sqrt(((n-1)/n W + B/n) / W). nullopt when the
/// within-chain variance is zero (undefined, flagged by callers).
[[nodiscard]] inline std::optional<double> bgr(std::span<const std::vector<double>> chains) {
  if (chains.size() < 2) throw std::invalid_argument("bgr: need at least two chains");
  std::size_t n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) throw DimensionMismatch("bgr: chains differ in length");
  if (n < 2) throw std::invalid_argument("bgr: need at least two draws per chain");
  auto m = static_cast<double>(chains.size());
  auto nd = static_cast<double>(n);
  std::vector<double> means;
  double w = 0.0;
  for (const auto& c : chains) {
    means.push_back(stats::mean(c));
    w += stats::variance(c) / m;
  }
  double grand = stats::mean(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nd / (m - 1.0);
  if (!(w > 0.0)) return std::nullopt;
  double v = (nd - 1.0) / nd * w + b / nd;
  return std::sqrt(v / w);
}

enum class ParameterKind { coefficient, variance, sd };

[[nodiscard]] inline std::string_view to_string(ParameterKind k) {
  switch (k) {
    case ParameterKind::coefficient: return "coefficient";
    case ParameterKind::variance: return "variance";
    case ParameterKind::sd: return "sd";
  }
  return "unknown";
}

struct ParameterSummary {
  std::string name;
  ParameterKind kind = ParameterKind::coefficient;
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
  double mc_se = 0.0;
  std::optional<double> hazard_ratio;  // coefficients only
  std::optional<double> rhat;          // nullopt: undefined or fewer than two chains
  bool significant = false;            // 95% BCI excludes zero
  bool flagged = false;                // BCI misses the mean or R-hat undefined
};

struct PosteriorSummary {
  std::vector<ParameterSummary> parameters;
  std::size_t n_chains = 0;
  std::size_t draws_per_chain = 0;

  [[nodiscard]] const ParameterSummary* find(std::string_view name) const {
    for (const auto& p : parameters)
      if (p.name == name) return &p;
    return nullptr;
  }
};

[[nodiscard]] inline ParameterSummary summarize_scalar(std::string name, ParameterKind kind,
                                                       const std::vector<std::vector<double>>& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  if (pooled.empty()) throw std::invalid_argument("summarize: no draws");
  ParameterSummary s;
  s.name = std::move(name);
  s.kind = kind;
  s.mean = stats::mean(pooled);
  s.sd = stats::stddev(pooled);
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  s.lower = stats::quantile_sorted(sorted, 0.025);
  s.upper = stats::quantile_sorted(sorted, 0.975);
  double se2 = 0.0;
  for (const auto& c : chains) {
    double se = stats::batch_means_se(c);
    se2 += se * se;
  }
  s.mc_se = std::sqrt(se2) / static_cast<double>(chains.size());
  if (kind == ParameterKind::coefficient) s.hazard_ratio = hazard_ratio(s.mean);
  bool chains_ok = chains.size() >= 2 && chains.front().size() >= 2;
  if (chains_ok) s.rhat = bgr(chains);
  s.significant = s.lower > 0.0 || s.upper < 0.0;
  s.flagged = !(s.lower <= s.mean && s.mean <= s.upper) || (chains_ok && !s.rhat);
  return s;
}

/// Pooled summaries of every stored scalar; variances also get a derived
/// standard-deviation entry "sigma[<column>]".
[[nodiscard]] inline PosteriorSummary summarize(const ChainSet& cs) {
  PosteriorSummary out;
  out.n_chains = cs.chains.size();
  out.draws_per_chain = cs.chains.empty() ? 0 : cs.chains.front().n_draws();
  auto cols = cs.spec.columns();
  for (std::size_t k = 0; k < cs.n_scalars(); ++k) {
    auto per = cs.per_chain(k);
    if (k < cs.n_beta) {
      out.parameters.push_back(summarize_scalar(cs.names[k], ParameterKind::coefficient, per));
    } else {
      out.parameters.push_back(summarize_scalar(cs.names[k], ParameterKind::variance, per));
      for (auto& c : per)
        for (auto& v : c) v = std::sqrt(v);
      out.parameters.push_back(
          summarize_scalar("sigma[" + cols[cs.random_columns[k - cs.n_beta]] + "]", ParameterKind::sd, per));
    }
  }
  return out;
}

}  // namespace arterial
