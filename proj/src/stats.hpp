#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rng.hpp"

namespace firetree {

// Limit laws appearing in the critical and subcritical regimes.
//  - Exponential(rate)
//  - TruncatedExpWithAtom(c): law of min(Exp(c), 1); atom of mass e^-c at 1
//  - Beta(k, 1): density k x^(k-1) on [0,1]
//  - Gamma(j, c): Erlang, sum of j independent Exp(c)
//  - ConditionedExp(gamma): Exp(gamma) conditioned to be smaller than 1
struct ReferenceLaw {
  enum class Kind { Exponential, TruncatedExpWithAtom, Beta, Gamma, ConditionedExp };
  Kind kind;
  double a = 0.0;  // rate / c / k / shape j / gamma
  double b = 0.0;  // Gamma rate

  static ReferenceLaw exponential(double rate);
  static ReferenceLaw truncated_exp_with_atom(double c);
  static ReferenceLaw beta(double k);
  static ReferenceLaw gamma(double shape, double rate);
  static ReferenceLaw conditioned_exp(double gamma);

  double cdf(double x) const;
  double cdf_left(double x) const;  // left limit; differs from cdf only at atoms
  double sample(Rng& rng) const;
  std::string describe() const;
};

double sample_reference(const ReferenceLaw& law, Rng& rng);

// sup_x |F_N(x) - F(x)| with atoms handled through the left limit of F.
double ks_statistic(std::vector<double> sample, const ReferenceLaw& law);

// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Result of one statistical check, serializable as JSON.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  double p_value = -1.0;  // -1 when not applicable
  std::uint64_t n_samples = 0;
  bool passed = false;

  const char* verdict() const { return passed ? "pass" : "fail"; }
  std::string to_json() const;
};

// Pearson chi-square against expected probabilities, with adjacent-bin
// merging so that every expected count is at least 5. Passes when the
// p-value exceeds p_floor.
TestReport chi_square_test(const std::string& name,
                           const std::vector<std::uint64_t>& observed,
                           const std::vector<double>& expected_probs,
                           double p_floor);

// Survival function of the chi-square distribution.
double chi_square_sf(double x, double dof);

// Regularized incomplete gamma functions.
double gamma_p(double a, double x);  // lower
double gamma_q(double a, double x);  // upper

// E[(eps_c ^ 1)^k] = e^-c + \int_0^1 c e^-cx x^k dx by adaptive quadrature.
double moment_eps_min_one(double c, unsigned k);

// q_j = E[prod_{i=1..j} (1 - e^-gamma_i)] for the Erlang chain with rate c,
// via exact dynamic programming over the alternating nested series.
double q_j(double c, unsigned j);

// Mean, standard error and KS helpers used by experiments.
struct MeanCi {
  double mean = 0.0;
  double se = 0.0;
  std::uint64_t n = 0;
};
MeanCi mean_ci(std::span<const double> sample);

}  // namespace firetree
