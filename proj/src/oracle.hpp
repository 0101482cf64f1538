#pragma once

#include <cstdint>
#include <map>
#include <tuple>

#include "tree.hpp"

namespace firetree {

// Exact joint law of (I_n, b0, root fire index) for the dynamics on a small
// fixed tree; root_fire_index 0 encodes a fireproof root (and then b0 = 0).
struct OracleLaw {
  std::uint64_t n = 0;
  std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, double> joint;

  std::map<std::uint32_t, double> fireproof_pmf() const;   // law of I_n
  std::map<std::uint32_t, double> root_block_pmf() const;  // law of b0
  double root_burn_probability() const;
  double total_mass() const;
};

// Exact law by memoized recursion over forest states: from a set of live
// components, each live edge is picked with probability 1/#edges, deleted
// with weight 1-p or burning its whole component with weight p. Limited to
// n <= 8 (state space).
OracleLaw brute_force_I_distribution(const Tree& tree, double p);

// Uniform average over all prod_{i=2..n} (i-1) recursive trees; n <= 6.
OracleLaw brute_force_avg_over_trees(std::uint32_t n, double p);

}  // namespace firetree
