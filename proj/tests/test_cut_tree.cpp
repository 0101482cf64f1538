#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "cut_tree.hpp"
#include "stats.hpp"
#include "tree.hpp"

using namespace firetree;

namespace {

Tree star_tree(std::uint64_t n) { return Tree(n, std::vector<Vertex>(n - 1, 1)); }

EdgeRandomness randomness_from_order(const Tree& tree, const std::vector<int>& order,
                                     double p = 0.0) {
  // order[e] = removal rank of edge e.
  EdgeRandomness r;
  r.p = p;
  std::uint64_t m = tree.edge_count();
  r.priority.resize(m);
  r.mark.assign(m, 0);
  for (std::uint64_t e = 0; e < m; ++e) {
    r.priority[e] = (order[e] + 0.5) / static_cast<double>(m);
  }
  return r;
}

std::vector<Vertex> block_of(const CutTree& cut, std::uint32_t node) {
  std::vector<Vertex> v(cut.leaf_order.begin() + cut.leaf_begin[node],
                        cut.leaf_order.begin() + cut.leaf_end[node]);
  std::sort(v.begin(), v.end());
  return v;
}

// Reference fragmentation: removes edges in priority order, tracking blocks as
// explicit vertex sets. Quadratic; used as the independent oracle for the
// arena construction.
struct SlowNode {
  std::set<Vertex> block;
  int split_edge = -1;
  std::vector<int> children;
};

std::vector<SlowNode> slow_cut_tree(const Tree& tree, const EdgeRandomness& r) {
  std::uint64_t n = tree.size();
  std::vector<EdgeId> order(tree.edge_count());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](EdgeId a, EdgeId b) { return edge_before(r, a, b); });
  std::vector<SlowNode> nodes;
  SlowNode root;
  for (Vertex v = 1; v <= n; ++v) root.block.insert(v);
  nodes.push_back(root);
  std::vector<int> current(n + 1, 0);  // current node index per vertex

  auto split = [&](int node_idx, EdgeId e) {
    // component of child endpoint within the node's block, avoiding e
    std::set<Vertex>& blk = nodes[node_idx].block;
    std::set<Vertex> side;
    std::vector<Vertex> stack = {tree.edge_child(e)};
    side.insert(tree.edge_child(e));
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      auto consider = [&](Vertex w, EdgeId via) {
        if (via == e || !blk.count(w) || side.count(w)) return;
        side.insert(w);
        stack.push_back(w);
      };
      if (v != 1) consider(tree.parent(v), Tree::edge_id(v));
      for (Vertex c : tree.children(v)) consider(c, Tree::edge_id(c));
    }
    SlowNode a, b;
    a.block = side;
    for (Vertex v : blk) {
      if (!side.count(v)) b.block.insert(v);
    }
    nodes[node_idx].split_edge = static_cast<int>(e);
    int ia = static_cast<int>(nodes.size());
    nodes.push_back(a);
    int ib = static_cast<int>(nodes.size());
    nodes.push_back(b);
    nodes[node_idx].children = {ia, ib};
    for (Vertex v : nodes[ia].block) current[v] = ia;
    for (Vertex v : nodes[ib].block) current[v] = ib;
  };

  for (EdgeId e : order) {
    int node_idx = current[tree.edge_child(e)];
    split(node_idx, e);
  }
  return nodes;
}

}  // namespace

TEST_CASE("two-vertex cut tree") {
  Rng rng(1);
  Tree t = Tree::generate_recursive(2, rng);
  CutTree cut = build_cut_tree(t, draw_edge_randomness(t, 0.0, rng));
  CHECK(cut.node_count() == 3);
  CHECK(cut.block_size[0] == 2);
  CHECK(cut.split_edge[0] == 0);
  CHECK(block_of(cut, 0) == std::vector<Vertex>{1, 2});
  CHECK(zeta(cut) == 1);
  auto path = root_path_blocks(cut);
  REQUIRE(path.size() == 1);
  CHECK(path[0] == std::pair<std::uint32_t, std::uint32_t>{1, 1});
}

TEST_CASE("star: every split detaches a singleton and zeta = n-1") {
  const std::uint64_t n = 30;
  Tree s = star_tree(n);
  Rng rng(5);
  EdgeRandomness r = draw_edge_randomness(s, 0.0, rng);
  CutTree cut = build_cut_tree(s, r);
  CHECK(zeta(cut) == n - 1);
  for (std::uint32_t v = 0; v < cut.node_count(); ++v) {
    if (cut.is_leaf(v)) continue;
    std::uint32_t l = static_cast<std::uint32_t>(cut.left[v]);
    std::uint32_t rgt = static_cast<std::uint32_t>(cut.right[v]);
    CHECK(std::min(cut.block_size[l], cut.block_size[rgt]) == 1);
  }
}

TEST_CASE("exhaustive n=6: all 120 removal orders satisfy the block invariants") {
  Rng rng(9);
  Tree t = Tree::generate_recursive(6, rng);
  std::vector<int> order = {0, 1, 2, 3, 4};
  std::sort(order.begin(), order.end());
  do {
    EdgeRandomness r = randomness_from_order(t, order);
    CutTree cut = build_cut_tree(t, r);

    REQUIRE(cut.node_count() == 11);
    std::uint64_t leaves = 0;
    std::set<int> used_edges;
    for (std::uint32_t v = 0; v < cut.node_count(); ++v) {
      if (cut.is_leaf(v)) {
        ++leaves;
        CHECK(cut.leaf_vertex[v] >= 1);
        continue;
      }
      std::uint32_t l = static_cast<std::uint32_t>(cut.left[v]);
      std::uint32_t rgt = static_cast<std::uint32_t>(cut.right[v]);
      CHECK(cut.block_size[v] == cut.block_size[l] + cut.block_size[rgt]);
      CHECK(cut.parent[l] == static_cast<std::int32_t>(v));
      CHECK(cut.parent[rgt] == static_cast<std::int32_t>(v));
      CHECK(used_edges.insert(cut.split_edge[v]).second);

      // The splitting edge has minimum priority inside the block, and the
      // block equals the leaves below the node.
      auto blk = block_of(cut, v);
      std::set<Vertex> blk_set(blk.begin(), blk.end());
      int best = -1;
      for (Vertex w = 2; w <= 6; ++w) {
        EdgeId e = Tree::edge_id(w);
        if (blk_set.count(w) && blk_set.count(t.parent(w))) {
          if (best < 0 || edge_before(r, e, static_cast<EdgeId>(best))) {
            best = static_cast<int>(e);
          }
        }
      }
      CHECK(cut.split_edge[v] == best);
    }
    CHECK(leaves == 6);

    // Compare against the quadratic reference construction.
    auto slow = slow_cut_tree(t, r);
    std::set<std::string> fast_blocks, slow_blocks;
    for (std::uint32_t v = 0; v < cut.node_count(); ++v) {
      std::string key;
      for (Vertex w : block_of(cut, v)) key += static_cast<char>('a' + w);
      fast_blocks.insert(key);
    }
    for (const SlowNode& nd : slow) {
      std::string key;
      for (Vertex w : nd.block) key += static_cast<char>('a' + w);
      slow_blocks.insert(key);
    }
    CHECK(fast_blocks == slow_blocks);
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("mark process filtering") {
  Rng rng(12);
  Tree t = Tree::generate_recursive(60, rng);

  EdgeRandomness none = draw_edge_randomness(t, 0.0, rng);
  CutTree cut = build_cut_tree(t, none);
  MarkedCutTree m0 = apply_mark_process(cut, none);
  for (std::uint8_t m : m0.marked) CHECK(m == 0);

  EdgeRandomness all = draw_edge_randomness(t, 1.0, rng);
  CutTree cut1 = build_cut_tree(t, all);
  MarkedCutTree m1 = apply_mark_process(cut1, all);
  CHECK(m1.marked[0] == 1);
  for (std::uint32_t v = 1; v < cut1.node_count(); ++v) CHECK(m1.marked[v] == 0);

  // Antichain: no marked node has a marked strict ancestor.
  for (int rep = 0; rep < 50; ++rep) {
    std::uint64_t n = 2 + rng.below(100);
    double p = rng.uniform();
    Tree tr = Tree::generate_recursive(n, rng);
    EdgeRandomness r = draw_edge_randomness(tr, p, rng);
    CutTree c = build_cut_tree(tr, r);
    MarkedCutTree m = apply_mark_process(c, r);
    for (std::uint32_t v = 0; v < c.node_count(); ++v) {
      if (!m.marked[v]) continue;
      std::int32_t a = c.parent[v];
      while (a >= 0) {
        CHECK(m.marked[a] == 0);
        a = c.parent[a];
      }
    }
  }
}

TEST_CASE("outcome reconstruction degenerate cases") {
  Rng rng(23);
  Tree t = Tree::generate_recursive(40, rng);

  EdgeRandomness none = draw_edge_randomness(t, 0.0, rng);
  CutTree cut = build_cut_tree(t, none);
  FireOutcome out = fire_outcome_from_marks(apply_mark_process(cut, none), t, none);
  CHECK(out.fireproof_count == 40);
  CHECK(out.fires.empty());

  EdgeRandomness all = draw_edge_randomness(t, 1.0, rng);
  CutTree cut1 = build_cut_tree(t, all);
  FireOutcome out1 = fire_outcome_from_marks(apply_mark_process(cut1, all), t, all);
  CHECK(out1.fires.size() == 1);
  CHECK(out1.fires[0].theta == 0);
  CHECK(out1.fires[0].block.size() == 40);
}

TEST_CASE("exact coupling: cut-tree route equals the direct dynamics") {
  Rng meta(1234);
  for (int rep = 0; rep < 1000; ++rep) {
    std::uint64_t n = 2 + meta.below(199);
    double p = meta.uniform();
    Rng rng(meta.u64());
    Tree t = Tree::generate_recursive(n, rng);
    EdgeRandomness r = draw_edge_randomness(t, p, rng);
    FireOutcome direct = run_fire_dynamics(t, r);
    FireOutcome derived =
        fire_outcome_from_marks(apply_mark_process(build_cut_tree(t, r), r), t, r);
    REQUIRE(direct == derived);
  }
}

TEST_CASE("root path blocks: partition and direct agreement") {
  Rng meta(77);
  for (int rep = 0; rep < 300; ++rep) {
    std::uint64_t n = 2 + meta.below(300);
    Rng rng(meta.u64());
    Tree t = Tree::generate_recursive(n, rng);
    EdgeRandomness r = draw_edge_randomness(t, 0.0, rng);
    CutTree cut = build_cut_tree(t, r);
    auto path = root_path_blocks(cut);
    auto direct = root_path_blocks_direct(t, r);
    REQUIRE(path == direct);
    CHECK(path.size() == zeta(cut));
    CHECK(zeta_direct(t, r) == zeta(cut));

    std::uint64_t side_total = 0;
    for (auto [side, kept] : path) side_total += side;
    CHECK(side_total + 1 == n);
    CHECK(path.back().second == 1);

    // The first split removes the globally minimal edge, a uniform edge; the
    // detached block is the subtree below its child endpoint.
    EdgeId first = 0;
    for (EdgeId e = 1; e < t.edge_count(); ++e) {
      if (edge_before(r, e, first)) first = e;
    }
    CHECK(path.front().first == subtree_size(t, t.edge_child(first)));
  }
}

TEST_CASE("zeta matches the exact first-block recursion in the mean") {
  // Independent oracle: E[zeta(m)] = 1 + sum_j P(J=j) E[zeta(m-j)] with
  // P(J=j) = m / ((m-1) j (j+1)), 1 <= j <= m-1.
  const std::uint64_t N = 1000;
  std::vector<double> f1(N + 1, 0.0);
  for (std::uint64_t m = 2; m <= N; ++m) {
    double acc = 0.0;
    for (std::uint64_t j = 1; j <= m - 1; ++j) {
      double pj = static_cast<double>(m) /
                  (static_cast<double>(m - 1) * static_cast<double>(j) *
                   static_cast<double>(j + 1));
      acc += pj * f1[m - j];
    }
    f1[m] = 1.0 + acc;
  }
  CHECK(f1[3] == doctest::Approx(1.75).epsilon(1e-12));

  for (std::uint64_t n : {100ull, 1000ull}) {
    const int reps = 4000;
    double total = 0.0;
    for (int s = 0; s < reps; ++s) {
      Rng rng(derive_seed(8888 + n, static_cast<std::uint64_t>(s)));
      Tree t = Tree::generate_recursive(n, rng);
      EdgeRandomness r = draw_edge_randomness(t, 0.0, rng);
      total += static_cast<double>(zeta(build_cut_tree(t, r)));
    }
    double mc = total / reps;
    // MC standard error at these sizes is well under 1.5%.
    CHECK(mc == doctest::Approx(f1[n]).epsilon(0.05));
  }
}

TEST_CASE("first root-path block follows the xi law (finite-n exact pmf)") {
  // P(|C'_{n,1}| = j) = n / ((n-1) j (j+1)) exactly; chi-squared at n = 10^4
  // against the limit pmf 1/(j(j+1)) on j <= 20 with pooled tail.
  const std::uint64_t n = 10000;
  const std::uint64_t reps = 100000;
  std::vector<std::uint64_t> counts(21, 0);
  for (std::uint64_t s = 0; s < reps; ++s) {
    Rng rng(derive_seed(60000, s));
    Tree t = Tree::generate_recursive(n, rng);
    Vertex v = static_cast<Vertex>(rng.range(2, n));
    std::uint64_t size = subtree_size(t, v);
    if (size <= 20) {
      ++counts[size - 1];
    } else {
      ++counts[20];
    }
  }
  std::vector<double> probs(21, 0.0);
  double tail = 1.0;
  for (std::uint64_t j = 1; j <= 20; ++j) {
    probs[j - 1] = 1.0 / (static_cast<double>(j) * static_cast<double>(j + 1));
    tail -= probs[j - 1];
  }
  probs[20] = tail;
  TestReport rep = chi_square_test("first block xi pmf", counts, probs, 0.001);
  CHECK(rep.passed);
}

TEST_CASE("reduced tree") {
  Rng rng(3141);
  Tree t = Tree::generate_recursive(10, rng);
  EdgeRandomness r = draw_edge_randomness(t, 0.0, rng);
  CutTree cut = build_cut_tree(t, r);

  CHECK_THROWS_AS(reduced_tree(cut, 0, rng), std::invalid_argument);

  // k = 1 with the pick forced onto leaf {1}: L = X = zeta.
  std::uint64_t z = zeta(cut);
  bool found_seed = false;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    Rng probe(seed);
    if (probe.range(1, 10) == 1) {
      Rng use(seed);
      ReducedTreeStats st = reduced_tree(cut, 1, use);
      CHECK(st.length == z);
      CHECK(st.internal == z);
      found_seed = true;
      break;
    }
  }
  CHECK(found_seed);

  // 0 <= L - X <= k-1 on random instances; distinct variant has L - X = k-1.
  Rng meta(515);
  for (int rep = 0; rep < 200; ++rep) {
    std::uint64_t n = 2 + meta.below(150);
    Rng rr(meta.u64());
    Tree tr = Tree::generate_recursive(n, rr);
    CutTree c = build_cut_tree(tr, draw_edge_randomness(tr, 0.0, rr));
    std::uint64_t k = 1 + rr.below(5);
    ReducedTreeStats st = reduced_tree(c, k, rr);
    CHECK(st.length >= st.internal);
    CHECK(st.length - st.internal <= k - 1);
    if (k <= n) {
      ReducedTreeStats sd = reduced_tree(c, k, rr, false);
      CHECK(sd.length - sd.internal == k - 1);
    }
  }
}

TEST_CASE("single vertex cut tree") {
  Rng rng(2);
  Tree t = Tree::generate_recursive(1, rng);
  EdgeRandomness r = draw_edge_randomness(t, 0.5, rng);
  CutTree cut = build_cut_tree(t, r);
  CHECK(cut.node_count() == 1);
  CHECK(zeta(cut) == 0);
  CHECK(root_path_blocks(cut).empty());
  ReducedTreeStats st = reduced_tree(cut, 3, rng);
  CHECK(st.length == 0);
  CHECK(st.internal == 0);
}
