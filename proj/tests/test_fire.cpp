#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "fire.hpp"
#include "oracle.hpp"
#include "stats.hpp"
#include "tree.hpp"

using namespace firetree;

namespace {

EdgeRandomness forced_marks(const Tree& tree, bool value, Rng& rng) {
  EdgeRandomness r = draw_edge_randomness(tree, value ? 1.0 : 0.0, rng);
  return r;
}

}  // namespace

TEST_CASE("randomness draw validates p and matches Bernoulli mean") {
  Rng rng(3);
  Tree t = Tree::generate_recursive(10000, rng);
  CHECK_THROWS_AS(draw_edge_randomness(t, -0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(draw_edge_randomness(t, 1.1, rng), std::invalid_argument);

  EdgeRandomness r0 = draw_edge_randomness(t, 0.0, rng);
  for (std::uint8_t m : r0.mark) CHECK(m == 0);
  EdgeRandomness r1 = draw_edge_randomness(t, 1.0, rng);
  for (std::uint8_t m : r1.mark) CHECK(m == 1);

  EdgeRandomness r = draw_edge_randomness(t, 0.3, rng);
  double freq = 0.0;
  for (std::uint8_t m : r.mark) freq += m;
  freq /= static_cast<double>(r.mark.size());
  CHECK(std::abs(freq - 0.3) <= 0.02);
}

TEST_CASE("degenerate runs: all fireproof / all fire") {
  Rng rng(17);
  Tree t = Tree::generate_recursive(300, rng);

  FireOutcome calm = run_fire_dynamics(t, forced_marks(t, false, rng));
  CHECK(calm.fireproof_count == 300);
  CHECK(calm.fires.empty());
  CHECK(largest_fireproof_component(calm) == 300);
  CHECK(calm.root_fire_index == 0);

  FireOutcome blaze = run_fire_dynamics(t, forced_marks(t, true, rng));
  CHECK(blaze.fires.size() == 1);
  CHECK(blaze.fires[0].theta == 0);
  CHECK(blaze.fires[0].block.size() == 300);
  CHECK(blaze.fireproof_count == 0);
  CHECK(blaze.root_block_size == 300);
  CHECK(blaze.root_fire_index == 1);
  CHECK(largest_fireproof_component(blaze) == 0);
}

TEST_CASE("single edge: P(I=2) = 1-p, P(I=0) = p") {
  const double p = 0.3;
  const std::uint64_t reps = 100000;
  std::uint64_t both = 0, none = 0;
  for (std::uint64_t s = 0; s < reps; ++s) {
    Rng rng(derive_seed(2024, s));
    Tree t = Tree::generate_recursive(2, rng);
    FireOutcome out = run_fire_dynamics(t, draw_edge_randomness(t, p, rng));
    if (out.fireproof_count == 2) ++both;
    if (out.fireproof_count == 0) ++none;
  }
  CHECK(std::abs(static_cast<double>(both) / reps - 0.7) <= 0.01);
  CHECK(std::abs(static_cast<double>(none) / reps - 0.3) <= 0.01);
}

TEST_CASE("structural invariants on random instances") {
  Rng meta(99);
  for (int rep = 0; rep < 200; ++rep) {
    std::uint64_t n = 2 + meta.below(120);
    double p = meta.uniform();
    Rng rng(meta.u64());
    Tree t = Tree::generate_recursive(n, rng);
    EdgeRandomness r = draw_edge_randomness(t, p, rng);
    FireOutcome out = run_fire_dynamics(t, r);

    // Partition: I_n + sum of block sizes = n; blocks pairwise disjoint.
    std::uint64_t burnt = 0;
    std::set<Vertex> seen;
    for (const FireEvent& ev : out.fires) {
      burnt += ev.block.size();
      for (Vertex v : ev.block) CHECK(seen.insert(v).second);
    }
    CHECK(out.fireproof_count + burnt == n);

    // Edge-wise characterization: v fireproof iff all incident edges fireproof.
    for (Vertex v = 1; v <= n; ++v) {
      bool all_fireproof = true;
      if (v != 1 && out.edge_state[Tree::edge_id(v)] != EdgeState::Fireproof) {
        all_fireproof = false;
      }
      for (Vertex c : t.children(v)) {
        if (out.edge_state[Tree::edge_id(c)] != EdgeState::Fireproof) {
          all_fireproof = false;
        }
      }
      CHECK((out.fate[v] == 0) == all_fireproof);
    }

    // Burnt blocks induce connected subgraphs.
    for (const FireEvent& ev : out.fires) {
      std::set<Vertex> block(ev.block.begin(), ev.block.end());
      std::uint64_t reachable = 0;
      std::vector<Vertex> stack = {ev.block.front()};
      std::set<Vertex> visited = {ev.block.front()};
      while (!stack.empty()) {
        Vertex v = stack.back();
        stack.pop_back();
        ++reachable;
        auto try_push = [&](Vertex w) {
          if (block.count(w) && !visited.count(w)) {
            visited.insert(w);
            stack.push_back(w);
          }
        };
        if (v != 1) try_push(t.parent(v));
        for (Vertex c : t.children(v)) try_push(c);
      }
      CHECK(reachable == ev.block.size());
    }

    // theta nondecreasing; f1 <= I_n.
    for (std::size_t i = 1; i < out.fires.size(); ++i) {
      CHECK(out.fires[i].theta >= out.fires[i - 1].theta);
    }
    CHECK(largest_fireproof_component(out) <= out.fireproof_count);
    if (!out.fires.empty()) CHECK(out.fires[0].theta <= n - 1);

    // Component sizes sum to I_n.
    std::uint64_t comp_total = 0;
    for (std::uint64_t s : out.fireproof_component_sizes) comp_total += s;
    CHECK(comp_total == out.fireproof_count);
  }
}

TEST_CASE("theta_1 is geometric(p) truncated at n-1") {
  const std::uint64_t n = 100;
  const double p = 0.1;
  const std::uint64_t reps = 100000;
  std::vector<std::uint64_t> counts(n, 0);  // theta_1 in 0..n-1 (n-1 = no fire)
  for (std::uint64_t s = 0; s < reps; ++s) {
    Rng rng(derive_seed(31415, s));
    Tree t = Tree::generate_recursive(n, rng);
    FireOutcome out = run_fire_dynamics(t, draw_edge_randomness(t, p, rng));
    std::uint64_t theta1 = out.fires.empty() ? n - 1 : out.fires[0].theta;
    ++counts[theta1];
  }
  std::vector<double> probs(n, 0.0);
  for (std::uint64_t k = 0; k + 1 < n; ++k) {
    probs[k] = std::pow(1.0 - p, static_cast<double>(k)) * p;
  }
  probs[n - 1] = std::pow(1.0 - p, static_cast<double>(n - 1));
  TestReport report = chi_square_test("theta1 geometric", counts, probs, 0.001);
  CHECK(report.passed);
}

TEST_CASE("fixed-tree law matches the exact oracle (chi-square)") {
  Rng rng(64);
  Tree t = Tree::generate_recursive(5, rng);
  OracleLaw law = brute_force_I_distribution(t, 0.4);

  const std::uint64_t reps = 1000000;
  std::vector<std::uint64_t> counts(6, 0);
  for (std::uint64_t s = 0; s < reps; ++s) {
    Rng r(derive_seed(271828, s));
    FireOutcome out = run_fire_dynamics(t, draw_edge_randomness(t, 0.4, r));
    ++counts[out.fireproof_count];
  }
  std::vector<double> probs(6, 0.0);
  for (const auto& [k, q] : law.fireproof_pmf()) probs[k] = q;
  TestReport report = chi_square_test("I law vs oracle", counts, probs, 0.001);
  CHECK(report.passed);
}

TEST_CASE("same_fireproof_component basics") {
  Rng rng(21);
  Tree t = Tree::generate_recursive(50, rng);
  FireOutcome calm = run_fire_dynamics(t, forced_marks(t, false, rng));
  CHECK(same_fireproof_component(calm, t, 7, 7));
  CHECK(same_fireproof_component(calm, t, 1, 50));

  FireOutcome blaze = run_fire_dynamics(t, forced_marks(t, true, rng));
  CHECK_FALSE(same_fireproof_component(blaze, t, 1, 2));
  CHECK_FALSE(same_fireproof_component(blaze, t, 3, 3));

  // Crafted instance where both endpoints survive but a path vertex burns:
  // tree 1-2, 2-3, 2-4; fireproof {1,2} and {2,3}, then fire {2,4} burns 2.
  Tree branchy(4, {1, 2, 2});
  EdgeRandomness r;
  r.p = 0.5;
  r.priority = {0.1, 0.2, 0.3};
  r.mark = {0, 0, 1};
  FireOutcome out = run_fire_dynamics(branchy, r);
  CHECK(out.fireproof_count == 2);
  CHECK(out.fate[1] == 0);
  CHECK(out.fate[3] == 0);
  CHECK(out.fate[2] == 1);
  CHECK_FALSE(same_fireproof_component(out, branchy, 1, 3));
}

TEST_CASE("summary CSV row shape") {
  Rng rng(8);
  Tree t = Tree::generate_recursive(40, rng);
  FireOutcome out = run_fire_dynamics(t, draw_edge_randomness(t, 0.2, rng));
  std::string header = fire_summary_csv_header(4);
  std::string row = fire_summary_csv_row(out, 40, 0.2, 123, 4);
  auto count_commas = [](const std::string& s) {
    std::size_t c = 0;
    for (char ch : s) {
      if (ch == ',') ++c;
    }
    return c;
  };
  CHECK(count_commas(header) == count_commas(row));
  CHECK(header.substr(0, 2) == "n,");
  CHECK(row.find("40,") == 0);
}

TEST_CASE("size mismatch is rejected") {
  Rng rng(2);
  Tree t = Tree::generate_recursive(10, rng);
  Tree t2 = Tree::generate_recursive(12, rng);
  EdgeRandomness r = draw_edge_randomness(t, 0.5, rng);
  CHECK_THROWS_AS(run_fire_dynamics(t2, r), std::invalid_argument);
}
