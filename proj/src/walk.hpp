#pragma once

#include <cstdint>
#include <vector>

#include "rng.hpp"
#include "tree.hpp"

namespace firetree {

// One positive integer with pmf P(xi = k) = 1/(k(k+1)): exact inversion,
// floor(1/U) for U uniform on (0,1).
std::uint64_t sample_xi(Rng& rng);

// Trajectory of the xi-walk run until the partial sum would reach n.
// lambda = max{j >= 1 : S_j < n}; steps holds xi_1..xi_lambda only. If the
// very first step already reaches n (probability 1/n) the last-passage time
// is undefined; we record lambda = 0, undershoot = n and flag the path as
// degenerate so that experiments can drop and count it.
struct WalkPath {
  std::vector<std::uint64_t> steps;
  std::vector<std::uint64_t> partial_sums;
  std::uint64_t lambda = 0;
  std::uint64_t undershoot = 0;
  bool degenerate = false;
};

WalkPath run_walk_to(std::uint64_t n, Rng& rng);

// Scaled steps (ln n / n) * xi_i above the cutoff, for comparing against the
// Poisson random measure with intensity x^-2 dx.
std::vector<double> max_step_measure(const WalkPath& path, std::uint64_t n,
                                     double cutoff = 0.1);

// Sequential uniform remainders of n: S(0) uniform on [n], then uniform on
// what is left until the total is exhausted. Parts are positive and sum to n.
struct StickBreaking {
  std::vector<std::uint64_t> parts;
  std::uint64_t total = 0;
  std::uint64_t kappa() const { return parts.size() - 1; }
};

StickBreaking stick_breaking(std::uint64_t n, Rng& rng);

// A part chosen with probability proportional to its size.
std::uint64_t size_biased_pick(const StickBreaking& parts, Rng& rng);

// P(|subtree stemming from v| = ell + 1) in a random recursive tree of size n
// (a beta-binomial law). Exact in log space; valid for 2 <= v <= n,
// 0 <= ell <= n - v.
double beta_binomial_pmf(std::uint64_t n, std::uint64_t v, std::uint64_t ell);

// One sample per trial of (ln n / n) * (h(X) + sum_i zeta_i(|T_i|)) for X
// uniform: the number of cuts needed to isolate the whole root-to-X branch,
// with independent fragmentations on the spine components.
std::vector<double> spine_cut_count_estimate(std::uint64_t n, std::uint64_t trials,
                                             Rng& rng);

}  // namespace firetree
