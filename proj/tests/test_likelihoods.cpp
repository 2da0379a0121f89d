#include "catch_amalgamated.hpp"

#include <random>

#include "arterial/likelihoods.hpp"

using namespace arterial;
using Catch::Approx;

namespace {

ModelSpec conditional_spec(std::size_t k) {
  ModelSpec s;
  for (std::size_t c = 0; c < k; ++c) s.covariates.push_back("x" + std::to_string(c));
  return s;
}

ModelData one_stratum(std::vector<double> rows, std::vector<int> y, std::size_t k = 1) {
  ModelData md;
  md.n_columns = k;
  md.add_stratum(rows, y);
  return md;
}

ModelData random_strata(std::mt19937_64& rng, std::size_t n, std::size_t k, std::size_t members = 5) {
  std::normal_distribution<double> z(0.0, 1.5);
  std::uniform_int_distribution<std::size_t> pos(0, members - 1);
  ModelData md;
  md.n_columns = k;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> rows(members * k);
    for (auto& v : rows) v = z(rng);
    std::vector<int> y(members, 0);
    y[pos(rng)] = 1;
    md.add_stratum(rows, y);
  }
  return md;
}

/// Independent evaluation: plain exp-sum without stabilisation.
double brute_conditional(const std::vector<double>& beta, const ModelData& md) {
  double total = 0.0;
  for (std::size_t i = 0; i < md.n_strata(); ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t e = md.stratum_offsets[i]; e < md.stratum_offsets[i + 1]; ++e) {
      double eta = 0.0;
      for (std::size_t k = 0; k < beta.size(); ++k) eta += beta[k] * md.x[e * md.n_columns + k];
      den += std::exp(eta);
      if (md.y[e] == 1) num = std::exp(eta);
    }
    total += std::log(num / den);
  }
  return total;
}

}  // namespace

TEST_CASE("linear predictor", "[likelihoods]") {
  std::vector<double> zero{0.0, 0.0}, x{3.0, 4.0};
  CHECK(linear_predictor(zero, x) == 0.0);
  CHECK(linear_predictor(std::vector<double>{-0.025}, std::vector<double>{30.0}) == Approx(-0.75));
  CHECK(linear_predictor(std::vector<double>{1.0, 2.0}, x) == 11.0);
  CHECK_THROWS_AS(linear_predictor(std::vector<double>{1.0}, x), DimensionMismatch);
}

TEST_CASE("conditional stratum likelihood", "[likelihoods]") {
  auto equal = one_stratum({2, 2, 2, 2, 2}, {1, 0, 0, 0, 0});
  for (double b : {-3.0, 0.0, 0.7, 25.0})
    CHECK(conditional_loglik_stratum(std::vector<double>{b}, equal, 0) == Approx(std::log(0.2)).epsilon(1e-12));
  CHECK(std::log(0.2) == Approx(-1.6094).margin(5e-5));

  auto exposed = one_stratum({1, 0, 0, 0, 0}, {1, 0, 0, 0, 0});
  double v = conditional_loglik_stratum(std::vector<double>{0.5}, exposed, 0);
  CHECK(v == Approx(std::log(std::exp(0.5) / (std::exp(0.5) + 4.0))).epsilon(1e-14));
  CHECK(v == Approx(-1.2314).margin(5e-5));
  CHECK(conditional_loglik_stratum(std::vector<double>{0.0}, exposed, 0) == Approx(std::log(0.2)));

  auto later = one_stratum({0, 0, 1, 0, 0}, {0, 0, 1, 0, 0});
  CHECK(conditional_loglik_stratum(std::vector<double>{0.5}, later, 0) == Approx(v).epsilon(1e-14));
}

TEST_CASE("conditional total sums strata", "[likelihoods]") {
  auto spec = conditional_spec(1);
  ParameterState s;
  s.beta = {0.5};
  auto single = one_stratum({1, 0, 0, 0, 0}, {1, 0, 0, 0, 0});
  CHECK(conditional_loglik_total(s, spec, single) == conditional_loglik_stratum(s.beta, single, 0));
  auto twice = single;
  twice.add_stratum(std::vector<double>{1, 0, 0, 0, 0}, std::vector<int>{1, 0, 0, 0, 0});
  CHECK(conditional_loglik_total(s, spec, twice) == Approx(2.0 * conditional_loglik_total(s, spec, single)));

  std::mt19937_64 rng(2);
  auto md = random_strata(rng, 5, 3);
  std::normal_distribution<double> z(0.0, 1.0);
  auto spec3 = conditional_spec(3);
  for (int rep = 0; rep < 20; ++rep) {
    ParameterState st;
    st.beta = {z(rng), z(rng), z(rng)};
    CHECK(std::abs(conditional_loglik_total(st, spec3, md) - brute_conditional(st.beta, md)) < 1e-10);
  }
}

TEST_CASE("random-parameter conditional likelihood uses per-stratum coefficients", "[likelihoods]") {
  std::mt19937_64 rng(4);
  auto md = random_strata(rng, 6, 2);
  ModelSpec spec = conditional_spec(2);
  spec.family = Family::rp_conditional_logistic;
  spec.random_set = {"x1"};
  auto s = zero_state(spec, md);
  REQUIRE(s.n_units == 6);
  REQUIRE(s.phi.size() == 6);
  s.beta = {0.3, -0.2};
  std::normal_distribution<double> z(0.0, 0.5);
  for (auto& p : s.phi) p = z(rng);
  double expected = 0.0;
  for (std::size_t i = 0; i < md.n_strata(); ++i) {
    std::vector<double> b{0.3, -0.2 + s.phi[i]};
    expected += conditional_loglik_stratum(b, md, i);
  }
  CHECK(conditional_loglik_total(s, spec, md) == Approx(expected).epsilon(1e-14));
}

TEST_CASE("conditional likelihood properties", "[likelihoods][property]") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(0.0, 2.0);
  std::uniform_int_distribution<std::size_t> pos(0, 4);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> eta(5);
    for (auto& e : eta) e = z(rng);
    std::size_t c = pos(rng);
    double base = conditional_loglik_eta(eta, c);
    CHECK(base <= 0.0);

    auto shifted = eta;
    double shift = 8.0 * z(rng);
    for (auto& e : shifted) e += shift;
    CHECK(std::abs(conditional_loglik_eta(shifted, c) - base) < 1e-12);

    auto huge = eta;
    for (auto& e : huge) e += 1000.0;
    CHECK(std::isfinite(conditional_loglik_eta(huge, c)));
    CHECK(std::abs(conditional_loglik_eta(huge, c) - base) < 1e-9);

    double total = 0.0;
    for (std::size_t j = 0; j < 5; ++j) total += std::exp(conditional_loglik_eta(eta, j));
    CHECK(std::abs(total - 1.0) < 1e-12);
  }
  std::vector<double> flat(5, 1.7);
  CHECK(conditional_loglik_eta(flat, 2) == Approx(-std::log(5.0)).epsilon(1e-14));
  // the maximum over case positions exceeds the uniform value unless all are equal
  std::vector<double> uneven{0.0, 0.0, 0.0, 0.0, 0.1};
  CHECK(conditional_loglik_eta(uneven, 4) > -std::log(5.0));
  CHECK(conditional_loglik_eta(uneven, 0) < -std::log(5.0));
}

TEST_CASE("analytic gradient matches central differences", "[likelihoods][property]") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> z(0.0, 0.7);
  auto md = random_strata(rng, 30, 4);
  auto spec = conditional_spec(4);
  for (int rep = 0; rep < 10; ++rep) {
    ParameterState s;
    s.beta = {z(rng), z(rng), z(rng), z(rng)};
    auto g = conditional_loglik_gradient(s, spec, md);
    for (std::size_t k = 0; k < 4; ++k) {
      auto up = s, dn = s;
      up.beta[k] += 1e-5;
      dn.beta[k] -= 1e-5;
      double fd = (conditional_loglik_total(up, spec, md) - conditional_loglik_total(dn, spec, md)) / 2e-5;
      CHECK(std::abs(fd - g[k]) / std::max(1.0, std::abs(g[k])) < 1e-6);
    }
  }
}

TEST_CASE("Bernoulli likelihood", "[likelihoods]") {
  ModelSpec spec;
  spec.family = Family::rp_logistic;
  spec.covariates = {"x"};
  ModelData md;
  md.n_columns = 2;
  md.add_observation(std::vector<double>{1.0, 0.0}, 1);
  ParameterState s;
  s.beta = {0.0, 0.0};
  CHECK(bernoulli_loglik(s, spec, md) == Approx(std::log(0.5)));
  s.beta = {800.0, 0.0};
  CHECK(bernoulli_loglik(s, spec, md) == 0.0);
  s.beta = {-800.0, 0.0};
  CHECK(bernoulli_loglik(s, spec, md) == Approx(-800.0));

  std::mt19937_64 rng(21);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution coin(0.4);
  ModelData rnd;
  rnd.n_columns = 2;
  for (int i = 0; i < 40; ++i) rnd.add_observation(std::vector<double>{1.0, z(rng)}, coin(rng));
  spec.random_set = {"intercept"};
  auto st = zero_state(spec, rnd);
  REQUIRE(st.n_units == 40);
  st.beta = {-0.4, 0.8};
  for (auto& p : st.phi) p = 0.3 * z(rng);
  double direct = 0.0;
  for (std::size_t e = 0; e < rnd.n_events(); ++e) {
    double eta = st.beta[0] + st.phi[e] + st.beta[1] * rnd.row(e)[1];
    double p = 1.0 / (1.0 + std::exp(-eta));
    direct += rnd.y[e] ? std::log(p) : std::log(1.0 - p);
  }
  CHECK(std::abs(bernoulli_loglik(st, spec, rnd) - direct) < 1e-12);
}

TEST_CASE("log prior", "[likelihoods]") {
  ModelSpec spec = conditional_spec(3);
  ParameterState s;
  s.beta = {0.0, 0.0, 0.0};
  CHECK(log_prior(s, spec) == Approx(-0.5 * 3 * std::log(2.0 * stats::kPi * 1e6)).epsilon(1e-14));

  spec.family = Family::rp_conditional_logistic;
  spec.random_set = {"x0"};
  s.sigma2 = {1.0};
  s.n_units = 4;
  s.phi.assign(4, 0.0);
  const double ig = -6.915086640662837;  // reference value of the density at 1
  CHECK(stats::inv_gamma_logpdf(1.0, 0.001, 0.001) == Approx(ig).epsilon(1e-13));
  double expected = -1.5 * std::log(2.0 * stats::kPi * 1e6) + ig - 4 * 0.5 * std::log(2.0 * stats::kPi);
  CHECK(log_prior(s, spec) == Approx(expected).epsilon(1e-13));

  s.sigma2 = {0.0};
  CHECK_THROWS(log_prior(s, spec));
}

TEST_CASE("inverse-gamma density integrates to one", "[likelihoods]") {
  // Simpson's rule on [1e-4, 200] for a proper, well-conditioned member
  auto f = [](double x) { return std::exp(stats::inv_gamma_logpdf(x, 3.0, 2.0)); };
  const int n = 200000;
  double a = 1e-4, b = 200.0, h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  CHECK(s * h / 3.0 == Approx(1.0).margin(1e-4));
  CHECK(stats::inv_gamma_logpdf(-1.0, 3.0, 2.0) == -INFINITY);
}

TEST_CASE("odds ratios", "[likelihoods]") {
  std::vector<double> b{0.024}, x1{10.0}, x2{0.0};
  CHECK(odds_ratio_pair(b, x1, x1) == 1.0);
  CHECK(odds_ratio_pair(b, x1, x2) == Approx(1.2712).margin(5e-5));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> bb{z(rng), z(rng)}, a{z(rng), z(rng)}, c{z(rng), z(rng)};
    CHECK(odds_ratio_pair(bb, a, c) * odds_ratio_pair(bb, c, a) == Approx(1.0).epsilon(1e-14));
    CHECK(odds_ratio_pair(bb, a, c) > 0.0);
  }

  auto md = one_stratum({10, 0, 0, 0, 0}, {1, 0, 0, 0, 0});
  CHECK(odds_ratio_vs_stratum_mean(b, md.row(0), md, 0) == Approx(1.2712).margin(5e-5));
  auto flat = one_stratum({3, 1, 5, 2, 4}, {1, 0, 0, 0, 0});
  CHECK(odds_ratio_vs_stratum_mean(b, flat.row(0), flat, 0) == Approx(1.0));
  auto moved = one_stratum({13, 11, 15, 12, 14}, {1, 0, 0, 0, 0});
  auto orig = one_stratum({10, 1, 7, 2, 4}, {1, 0, 0, 0, 0});
  auto orig_shift = one_stratum({110, 101, 107, 102, 104}, {1, 0, 0, 0, 0});
  CHECK(odds_ratio_vs_stratum_mean(b, orig.row(0), orig, 0) ==
        Approx(odds_ratio_vs_stratum_mean(b, orig_shift.row(0), orig_shift, 0)).epsilon(1e-12));
  CHECK(odds_ratio_vs_stratum_mean(b, moved.row(0), moved, 0) == Approx(1.0));
}

TEST_CASE("hazard ratios are the exponential of the coefficient", "[likelihoods]") {
  CHECK(hazard_ratio(-0.025) == Approx(0.975).margin(5e-4));
  CHECK(hazard_ratio(0.667) == Approx(1.948).margin(5e-4));
  CHECK(hazard_ratio(-0.042) == Approx(0.959).margin(5e-4));
  CHECK_THROWS(hazard_ratio(NAN));
}

TEST_CASE("model specifications are validated", "[likelihoods]") {
  ModelSpec s;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.covariates = {"a", "b"};
  CHECK_NOTHROW(s.validate());
  s.random_set = {"a"};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.family = Family::rp_conditional_logistic;
  CHECK_NOTHROW(s.validate());
  s.random_set = {"intercept"};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.family = Family::rp_logistic;
  CHECK_NOTHROW(s.validate());
  CHECK(s.columns() == std::vector<std::string>{"intercept", "a", "b"});
  CHECK(s.random_columns() == std::vector<std::size_t>{0});
  s.slice = 5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.slice = 2;
  s.covariates = {"a", "a"};
  CHECK_THROWS_AS(s.validate(), ConfigError);
  CHECK_THROWS_AS(parse_family("probit"), ConfigError);

  ModelData md;
  md.n_columns = 1;
  CHECK_THROWS_AS(md.add_stratum(std::vector<double>{1, 2}, std::vector<int>{1, 1}), DataError);
  CHECK_THROWS_AS(md.add_stratum(std::vector<double>{1, 2, 3}, std::vector<int>{1, 0}), DimensionMismatch);
}
