#include "catch_amalgamated.hpp"

#include <random>

#include "arterial/evaluation.hpp"
#include "arterial/synthetic_world.hpp"

using namespace arterial;
using Catch::Approx;

namespace {

ModelSpec spec_for(std::size_t k) {
  ModelSpec s;
  for (std::size_t c = 0; c < k; ++c) s.covariates.push_back("x" + std::to_string(c));
  return s;
}

ModelData strata_of(std::vector<std::vector<double>> strata) {
  ModelData md;
  md.n_columns = 1;
  for (auto& rows : strata) {
    std::vector<int> y(rows.size(), 0);
    y[0] = 1;
    md.add_stratum(rows, y);
  }
  return md;
}

double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1.0;
        num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return num / pairs;
}

/// One chain whose every stored draw is `beta`.
ChainSet constant_chains(const ModelSpec& spec, const ModelData& md, std::vector<double> beta, std::size_t n) {
  ChainSet cs;
  cs.spec = spec;
  cs.names = spec.columns();
  cs.n_beta = beta.size();
  ParameterState s;
  s.beta = beta;
  double dev = deviance(spec, s, md);
  for (int c = 0; c < 2; ++c) {
    Chain ch;
    ch.n_scalars = beta.size();
    for (std::size_t d = 0; d < n; ++d) {
      ch.draws.insert(ch.draws.end(), beta.begin(), beta.end());
      ch.deviance.push_back(dev);
    }
    cs.chains.push_back(ch);
  }
  return cs;
}

}  // namespace

TEST_CASE("deviance of the conditional likelihood", "[evaluation]") {
  auto spec = spec_for(1);
  ParameterState zero;
  zero.beta = {0.0};
  auto one = strata_of({{3, 1, 4, 1, 5}});
  CHECK(deviance(spec, zero, one) == Approx(2.0 * std::log(5.0)));
  CHECK(deviance(spec, zero, one) == Approx(3.2189).margin(5e-5));
  std::vector<std::vector<double>> many(17, std::vector<double>{1, 2, 3, 4, 5});
  CHECK(deviance(spec, zero, strata_of(many)) == Approx(2.0 * 17 * std::log(5.0)));

  std::mt19937_64 rng(3);
  StrataSimulation sim;
  sim.n_strata = 30;
  Rng r2 = make_rng(3, "dev");
  auto md = simulate_conditional_strata(sim, r2);
  std::normal_distribution<double> z(0.0, 1.0);
  auto spec2 = spec_for(2);
  for (int rep = 0; rep < 20; ++rep) {
    ParameterState s;
    s.beta = {z(rng), z(rng)};
    CHECK(deviance(spec2, s, md) == -2.0 * conditional_loglik_total(s, spec2, md));
  }
}

TEST_CASE("DIC decomposition", "[evaluation]") {
  auto spec = spec_for(1);
  auto md = strata_of({{1, 0, 2, 0, 1}, {0, 1, 1, 3, 0}, {2, 2, 0, 1, 1}});
  auto cs = constant_chains(spec, md, {0.4}, 50);
  auto d = dic(cs, md);
  CHECK(d.pd == 0.0);
  CHECK(d.dic == d.mean_deviance);
  CHECK(d.dic == Approx(deviance(spec, cs.posterior_mean(), md)));

  std::vector<double> devs{10.0, 12.5, 11.0, 9.5};
  auto r = dic_from_deviances(devs, 9.0);
  CHECK(std::abs(r.dic - (r.mean_deviance + r.pd)) < 1e-9);
  CHECK(r.mean_deviance == Approx(10.75));
  CHECK(r.pd == Approx(1.75));
}

TEST_CASE("DIC on a conjugate normal model counts its free parameters", "[evaluation]") {
  // y_gj ~ N(mu_g, 1), flat prior: mu_g | y ~ N(ybar_g, 1/n_g)
  Rng rng = make_rng(17, "normal-dic");
  for (int groups : {1, 2, 3}) {
    std::vector<std::vector<double>> y(static_cast<std::size_t>(groups), std::vector<double>(40));
    for (int g = 0; g < groups; ++g)
      for (auto& v : y[static_cast<std::size_t>(g)]) v = g + standard_normal(rng);
    auto dev = [&](const std::vector<double>& mu) {
      double d = 0.0;
      for (std::size_t g = 0; g < y.size(); ++g)
        for (double v : y[g]) d += std::log(2.0 * stats::kPi) + (v - mu[g]) * (v - mu[g]);
      return d;
    };
    std::vector<std::vector<double>> draws(20000, std::vector<double>(static_cast<std::size_t>(groups)));
    std::vector<double> bar(static_cast<std::size_t>(groups), 0.0);
    for (auto& d : draws)
      for (std::size_t g = 0; g < d.size(); ++g) {
        d[g] = stats::mean(y[g]) + standard_normal(rng) / std::sqrt(40.0);
        bar[g] += d[g] / 20000.0;
      }
    auto r = dic_from_draws<std::vector<double>>(draws, bar, dev);
    CHECK(r.pd == Approx(groups).margin(0.3));
    CHECK(std::abs(r.dic - (r.mean_deviance + r.pd)) < 1e-9);

    // duplicating the data doubles both deviance terms
    auto y1 = y;
    for (std::size_t g = 0; g < y.size(); ++g) y[g].insert(y[g].end(), y1[g].begin(), y1[g].end());
    auto r2 = dic_from_draws<std::vector<double>>(draws, bar, dev);
    CHECK(r2.mean_deviance == Approx(2.0 * r.mean_deviance).epsilon(1e-12));
    CHECK(r2.deviance_at_mean == Approx(2.0 * r.deviance_at_mean).epsilon(1e-12));
  }
}

TEST_CASE("adjusted odds-ratio scores", "[evaluation]") {
  auto adj = adjust_by_maximum({2.0, 4.0, 1.0});
  CHECK(adj == std::vector<double>{0.5, 1.0, 0.25});
  CHECK_THROWS_AS(adjust_by_maximum({0.0, 0.0}), DataError);
  CHECK(adjust_by_maximum({}).empty());

  auto spec = spec_for(1);
  auto same = strata_of({{2, 2, 2, 2, 2}, {2, 2, 2, 2, 2}});
  FittedModel fit{spec, {0.7}, {}, {}};
  for (double s : score_events(fit, same)) CHECK(s == 1.0);

  auto varied = strata_of({{3, 1, 4, 1, 5}, {9, 2, 6, 5, 3}});
  FittedModel zero{spec, {0.0}, {}, {}};
  for (double s : score_events(zero, varied)) CHECK(s == 1.0);

  SECTION("controls are scored against the other controls") {
    FittedModel f{spec, {0.3}, {}, {}};
    auto s = score_events(f, varied);
    ScoringOptions raw_all;
    raw_all.leave_one_out = false;
    auto all = score_events(f, varied, raw_all);
    // raw values before rescaling: case 3 vs mean{1,4,1,5} = 2.75, control 4 vs mean{1,1,5}
    std::vector<double> raw{std::exp(0.3 * (3 - 2.75)), std::exp(0.3 * (1 - 10.0 / 3)), std::exp(0.3 * (4 - 7.0 / 3)),
                            std::exp(0.3 * (1 - 10.0 / 3)), std::exp(0.3 * (5 - 2.0))};
    std::vector<double> raw2{std::exp(0.3 * (9 - 4.0)), std::exp(0.3 * (2 - 14.0 / 3)), std::exp(0.3 * (6 - 10.0 / 3)),
                             std::exp(0.3 * (5 - 11.0 / 3)), std::exp(0.3 * (3 - 13.0 / 3))};
    raw.insert(raw.end(), raw2.begin(), raw2.end());
    auto expected = adjust_by_maximum(raw);
    REQUIRE(s.size() == expected.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == Approx(expected[i]).epsilon(1e-12));
    CHECK(*std::max_element(s.begin(), s.end()) == 1.0);
    // case scores do not depend on leave-one-out; control scores do
    CHECK(all[0] / s[0] == Approx(all[5] / s[5]).epsilon(1e-12));
    CHECK(all[1] / s[1] != Approx(all[0] / s[0]));
  }
}

TEST_CASE("random-parameter scoring applies fitted unit effects only to seen units", "[evaluation]") {
  ModelSpec spec = spec_for(1);
  spec.family = Family::rp_conditional_logistic;
  spec.random_set = {"x0"};
  auto md = strata_of({{3, 1, 4, 1, 5}, {9, 2, 6, 5, 3}});
  FittedModel fit{spec, {0.3}, {md.stratum_ids[0]}, {0.5}};
  ScoringOptions so;
  so.leave_one_out = false;
  FittedModel plain{spec_for(1), {0.8}, {}, {}};
  FittedModel plain2{spec_for(1), {0.3}, {}, {}};
  auto s = score_events(fit, md, so);
  auto a = score_events(plain, strata_of({{3, 1, 4, 1, 5}}), so);
  auto b = score_events(plain2, strata_of({{9, 2, 6, 5, 3}}), so);
  // rescaling is global, so compare within-stratum ratios
  CHECK(s[0] / s[4] == Approx(a[0] / a[4]).epsilon(1e-12));
  CHECK(s[5] / s[6] == Approx(b[0] / b[1]).epsilon(1e-12));

  ModelSpec bern;
  bern.family = Family::rp_logistic;
  bern.covariates = {"x"};
  bern.random_set = {"intercept"};
  ModelData obs;
  obs.n_columns = 2;
  obs.add_observation(std::vector<double>{1.0, 2.0}, 1, "seen");
  obs.add_observation(std::vector<double>{1.0, 2.0}, 0, "unseen");
  FittedModel bf{bern, {-1.0, 0.5}, {"seen"}, {1.0}};
  auto p = score_events(bf, obs);
  CHECK(p[0] == Approx(stats::inv_logit(1.0)));
  CHECK(p[1] == Approx(stats::inv_logit(0.0)));
  ScoringOptions pop;
  pop.use_unit_effects = false;
  CHECK(score_events(bf, obs, pop)[0] == Approx(0.5));
}

TEST_CASE("posterior-predictive scoring averages over draws", "[evaluation]") {
  auto spec = spec_for(1);
  auto md = strata_of({{3, 1, 4, 1, 5}, {9, 2, 6, 5, 3}});
  auto cs = constant_chains(spec, md, {0.3}, 10);
  auto plug = score_events(FittedModel::from_chains(cs), md);
  auto post = score_events_posterior(cs, md);
  for (std::size_t i = 0; i < plug.size(); ++i) CHECK(post[i] == Approx(plug[i]).epsilon(1e-12));

  cs.chains[1].draws.assign(10, -0.3);
  auto mixed = score_events_posterior(cs, md);
  std::vector<double> raw(md.n_events());
  FittedModel up{spec, {0.3}, {}, {}}, down{spec, {-0.3}, {}, {}};
  auto su = detail::raw_scores(up, md, {}), sd = detail::raw_scores(down, md, {});
  for (std::size_t e = 0; e < raw.size(); ++e) raw[e] = 0.5 * (su[e] + sd[e]);
  auto expected = adjust_by_maximum(raw);
  for (std::size_t e = 0; e < raw.size(); ++e) CHECK(mixed[e] == Approx(expected[e]).epsilon(1e-12));
}

TEST_CASE("AUC and ROC", "[evaluation]") {
  std::vector<double> s{0.9, 0.8, 0.7, 0.6, 0.5};
  std::vector<int> y{1, 0, 1, 0, 0};
  auto r = auc(s, y);
  CHECK(r.auc == Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK(r.roc.front().fpr == 0.0);
  CHECK(r.roc.front().tpr == 0.0);
  CHECK(r.roc.back().fpr == 1.0);
  CHECK(r.roc.back().tpr == 1.0);
  CHECK(r.roc.size() == 6);

  CHECK(auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0}).auc == 1.0);
  CHECK(auc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}).auc == 0.5);
  CHECK_THROWS(auc(std::vector<double>{0.5, 0.4}, std::vector<int>{1, 1}));
  CHECK_THROWS(auc(std::vector<double>{0.5}, std::vector<int>{1, 0}));

  Rng rng = make_rng(4, "auc");
  std::vector<double> rs(10000);
  std::vector<int> ry(10000);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    rs[i] = uniform_open(rng);
    ry[i] = uniform_open(rng) < 0.3;
  }
  CHECK(auc(rs, ry).auc == Approx(0.5).margin(0.02));
}

TEST_CASE("AUC properties on random inputs with ties", "[evaluation][property]") {
  Rng rng = make_rng(8, "auc-props");
  for (int rep = 0; rep < 100; ++rep) {
    std::size_t n = 5 + static_cast<std::size_t>(uniform_open(rng) * 60);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::floor(uniform_open(rng) * 8.0) + 0.5;
      y[i] = i < 2 ? static_cast<int>(i) : uniform_open(rng) < 0.4;
    }
    auto r = auc(s, y);
    CHECK(r.auc == pairwise_auc(s, y));
    for (std::size_t i = 1; i < r.roc.size(); ++i) {
      CHECK(r.roc[i].fpr >= r.roc[i - 1].fpr);
      CHECK(r.roc[i].tpr >= r.roc[i - 1].tpr);
      CHECK(r.roc[i].threshold < r.roc[i - 1].threshold);
    }
    CHECK(r.roc.back().fpr == 1.0);
    CHECK(r.roc.back().tpr == 1.0);
    auto scaled = adjust_by_maximum(s);
    CHECK(auc(scaled, y).auc == r.auc);
    std::vector<double> logs(n);
    for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(s[i]) * 3.0 - 1.0;
    CHECK(auc(logs, y).auc == r.auc);
  }
}
