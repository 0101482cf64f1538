#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rng.hpp"
#include "stats.hpp"

using namespace firetree;

TEST_CASE("reference samplers hit their first moments") {
  Rng rng(1);
  const std::uint64_t reps = 1000000;

  double total = 0.0;
  ReferenceLaw exp1 = ReferenceLaw::exponential(1.0);
  for (std::uint64_t i = 0; i < reps; ++i) total += sample_reference(exp1, rng);
  CHECK(std::abs(total / reps - 1.0) <= 0.01);

  ReferenceLaw atom = ReferenceLaw::truncated_exp_with_atom(1.0);
  std::uint64_t at_one = 0;
  for (std::uint64_t i = 0; i < reps; ++i) {
    if (sample_reference(atom, rng) == 1.0) ++at_one;
  }
  CHECK(std::abs(static_cast<double>(at_one) / reps - std::exp(-1.0)) <= 0.005);

  ReferenceLaw g2 = ReferenceLaw::gamma(2.0, 0.5);
  total = 0.0;
  for (std::uint64_t i = 0; i < reps; ++i) total += sample_reference(g2, rng);
  CHECK(std::abs(total / reps - 4.0) <= 0.04);  // mean 2/c, 1%
}

TEST_CASE("cdf shapes and atoms") {
  ReferenceLaw atom = ReferenceLaw::truncated_exp_with_atom(2.0);
  CHECK(atom.cdf(1.0) == 1.0);
  CHECK(atom.cdf_left(1.0) == doctest::Approx(1.0 - std::exp(-2.0)));
  CHECK(atom.cdf(0.5) == doctest::Approx(1.0 - std::exp(-1.0)));

  ReferenceLaw beta2 = ReferenceLaw::beta(2.0);
  CHECK(beta2.cdf(0.5) == doctest::Approx(0.25));

  ReferenceLaw cond = ReferenceLaw::conditioned_exp(3.0);
  CHECK(cond.cdf(1.0) == 1.0);
  CHECK(cond.cdf(0.0) == 0.0);

  // Gamma cdf against the Erlang closed form 1 - e^-x sum x^i/i!.
  for (int j = 1; j <= 5; ++j) {
    ReferenceLaw g = ReferenceLaw::gamma(static_cast<double>(j), 1.0);
    for (double x : {0.1, 0.7, 1.3, 2.9, 7.7}) {
      double partial = 0.0, term = 1.0;
      for (int i = 0; i < j; ++i) {
        partial += term;
        term *= x / (i + 1);
      }
      double closed = 1.0 - std::exp(-x) * partial;
      CHECK(g.cdf(x) == doctest::Approx(closed).epsilon(1e-10));
    }
  }
}

TEST_CASE("samplers match their own cdfs (KS self-tests)") {
  Rng rng(2024);
  for (ReferenceLaw law : {ReferenceLaw::exponential(1.7),
                           ReferenceLaw::truncated_exp_with_atom(0.8),
                           ReferenceLaw::beta(3.0), ReferenceLaw::gamma(3.0, 2.0),
                           ReferenceLaw::conditioned_exp(2.5)}) {
    std::vector<double> sample(10000);
    for (double& x : sample) x = law.sample(rng);
    double d = ks_statistic(sample, law);
    CHECK(d <= 0.03);  // ~1.63/sqrt(N) is the 1% null quantile
  }
}

TEST_CASE("ks statistic exact cases") {
  // Constant sample vs Exp(1): D = max(F(x0), 1 - F(x0)).
  std::vector<double> constant(100, 0.2);
  ReferenceLaw exp1 = ReferenceLaw::exponential(1.0);
  double f = 1.0 - std::exp(-0.2);
  CHECK(ks_statistic(constant, exp1) == doctest::Approx(std::max(f, 1.0 - f)));

  // Shifting a sample away from the law increases the statistic.
  Rng rng(33);
  std::vector<double> base(5000);
  for (double& x : base) x = exp1.sample(rng);
  double d0 = ks_statistic(base, exp1);
  double prev = d0;
  for (double shift : {0.1, 0.2, 0.4, 0.8}) {
    std::vector<double> moved(base);
    for (double& x : moved) x += shift;
    double d = ks_statistic(moved, exp1);
    CHECK(d >= prev - 1e-12);
    prev = d;
  }
  CHECK(prev > d0);

  CHECK_THROWS_AS(ks_statistic({}, exp1), std::invalid_argument);
}

TEST_CASE("two-sample ks") {
  Rng rng(9);
  ReferenceLaw exp1 = ReferenceLaw::exponential(1.0);
  std::vector<double> a(4000), b(4000), c(4000);
  for (double& x : a) x = exp1.sample(rng);
  for (double& x : b) x = exp1.sample(rng);
  for (double& x : c) x = exp1.sample(rng) + 1.0;
  CHECK(ks_two_sample(a, b) <= 0.05);
  CHECK(ks_two_sample(a, c) >= 0.3);
}

TEST_CASE("chi-square test basics") {
  // Exact match gives a comfortable p-value.
  std::vector<std::uint64_t> obs = {250, 250, 250, 250};
  std::vector<double> probs = {0.25, 0.25, 0.25, 0.25};
  TestReport perfect = chi_square_test("perfect", obs, probs, 0.001);
  CHECK(perfect.passed);
  CHECK(perfect.p_value > 0.9);

  // Disjoint support: p ~ 0.
  std::vector<std::uint64_t> wrong = {1000, 0};
  std::vector<double> other = {0.0001, 0.9999};
  TestReport bad = chi_square_test("disjoint", wrong, other, 0.001);
  CHECK_FALSE(bad.passed);
  CHECK(bad.p_value < 1e-9);

  CHECK_THROWS_AS(chi_square_test("mismatch", {1, 2}, {1.0}, 0.001),
                  std::invalid_argument);
  CHECK_THROWS_AS(chi_square_test("mass", {1, 2}, {0.3, 0.3}, 0.001),
                  std::invalid_argument);
}

TEST_CASE("chi-square null calibration: p-values roughly uniform") {
  Rng rng(555);
  const int reps = 1000;
  const std::uint64_t N = 2000;
  std::vector<double> probs = {0.1, 0.2, 0.25, 0.15, 0.2, 0.1};
  std::vector<double> pvals;
  for (int r = 0; r < reps; ++r) {
    std::vector<std::uint64_t> counts(probs.size(), 0);
    for (std::uint64_t i = 0; i < N; ++i) {
      double u = rng.uniform();
      double acc = 0.0;
      for (std::size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc || k + 1 == probs.size()) {
          ++counts[k];
          break;
        }
      }
    }
    pvals.push_back(chi_square_test("null", counts, probs, 0.001).p_value);
  }
  std::sort(pvals.begin(), pvals.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < pvals.size(); ++i) {
    double fn_hi = static_cast<double>(i + 1) / pvals.size();
    double fn_lo = static_cast<double>(i) / pvals.size();
    ks = std::max(ks, std::abs(fn_hi - pvals[i]));
    ks = std::max(ks, std::abs(fn_lo - pvals[i]));
  }
  CHECK(ks <= 0.05);
}

TEST_CASE("moment of min(Exp(c),1)") {
  CHECK(moment_eps_min_one(1.0, 1) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-10));
  CHECK(moment_eps_min_one(1e-9, 1) == doctest::Approx(1.0).epsilon(1e-6));

  // Monotone in k and in c.
  double prev = 1.0;
  for (unsigned k = 1; k <= 5; ++k) {
    double m = moment_eps_min_one(2.0, k);
    CHECK(m < prev);
    prev = m;
  }
  CHECK(moment_eps_min_one(0.5, 2) > moment_eps_min_one(1.5, 2));

  // Monte Carlo cross-check within 3 SE.
  Rng rng(22);
  for (double c : {1.0, 2.0}) {
    ReferenceLaw law = ReferenceLaw::truncated_exp_with_atom(c);
    for (unsigned k : {1u, 2u, 3u}) {
      const std::uint64_t reps = 1000000;
      double sum = 0.0, sumsq = 0.0;
      for (std::uint64_t i = 0; i < reps; ++i) {
        double x = std::pow(law.sample(rng), static_cast<double>(k));
        sum += x;
        sumsq += x * x;
      }
      double mean = sum / reps;
      double se = std::sqrt((sumsq / reps - mean * mean) / reps);
      CHECK(std::abs(mean - moment_eps_min_one(c, k)) <= 3.0 * se + 1e-9);
    }
  }
}

TEST_CASE("q_j series") {
  CHECK(q_j(1.0, 0) == doctest::Approx(1.0));
  for (double c : {0.3, 1.0, 2.5}) {
    CHECK(q_j(c, 1) == doctest::Approx(1.0 / (c + 1.0)).epsilon(1e-12));
  }
  CHECK(std::abs(q_j(1.0, 30) - std::exp(-1.0)) <= 1e-3);

  // Strictly decreasing in j, in (0,1], converging to e^-c.
  for (double c : {0.5, 1.0, 2.0}) {
    double prev = 1.0;
    for (unsigned j = 1; j <= 30; ++j) {
      double q = q_j(c, j);
      CHECK(q > 0.0);
      CHECK(q < prev);
      prev = q;
    }
    CHECK(std::abs(prev - std::exp(-c)) <= 2e-3);
  }

  // Monte Carlo over gamma chains, j <= 5, 3 SE.
  Rng rng(1212);
  for (double c : {1.0, 2.0}) {
    for (unsigned j = 1; j <= 5; ++j) {
      const std::uint64_t reps = 1000000;
      double sum = 0.0, sumsq = 0.0;
      for (std::uint64_t i = 0; i < reps; ++i) {
        double g = 0.0, prod = 1.0;
        for (unsigned t = 0; t < j; ++t) {
          g += rng.exponential(c);
          prod *= -std::expm1(-g);
        }
        sum += prod;
        sumsq += prod * prod;
      }
      double mean = sum / reps;
      double se = std::sqrt((sumsq / reps - mean * mean) / reps);
      CHECK(std::abs(mean - q_j(c, j)) <= 3.0 * se + 1e-9);
    }
  }
}

TEST_CASE("test report json") {
  TestReport t;
  t.name = "demo";
  t.statistic = 0.25;
  t.threshold = 0.05;
  t.p_value = 0.75;
  t.n_samples = 123;
  t.passed = true;
  std::string j = t.to_json();
  CHECK(j.find("\"name\":\"demo\"") != std::string::npos);
  CHECK(j.find("\"verdict\":\"pass\"") != std::string::npos);
  CHECK(j.find("\"n_samples\":123") != std::string::npos);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ReferenceLaw::exponential(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ReferenceLaw::beta(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(ReferenceLaw::gamma(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(moment_eps_min_one(0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(moment_eps_min_one(1.0, 0), std::invalid_argument);
}
