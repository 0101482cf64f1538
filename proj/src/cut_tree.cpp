#include "cut_tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace firetree {

namespace {

using PrioEdge = std::pair<double, EdgeId>;  // sorted ascending = removal order

// Work list of one pending block: edges sorted by priority with a cursor;
// entries whose endpoints have migrated to another label are skipped lazily.
struct BlockList {
  std::vector<PrioEdge> edges;
  std::size_t cursor = 0;
};

// Alternating bidirectional discovery of the two sides of a block split at
// edge e. One adjacency item is inspected per side per tick, so the finished
// side costs O(its incident edges) regardless of how lopsided the split is.
struct SideScan {
  std::vector<Vertex> found;
  std::size_t next_vertex = 0;   // index into found of the vertex being scanned
  std::size_t next_child = 0;    // position within children(found[next_vertex])
  bool parent_done = false;
  bool finished = false;
};

class SideStepper {
 public:
  SideStepper(const Tree& tree, const std::vector<std::uint32_t>& label,
              std::uint32_t block_label, EdgeId split, std::vector<std::uint32_t>& stamp,
              std::uint32_t stamp_value)
      : tree_(tree), label_(label), block_label_(block_label), split_(split),
        stamp_(stamp), stamp_value_(stamp_value) {}

  void seed(Vertex v) {
    stamp_[v] = stamp_value_;
    scan_.found.push_back(v);
  }

  // Advances by one adjacency inspection; returns false once exhausted.
  bool step() {
    while (scan_.next_vertex < scan_.found.size()) {
      Vertex v = scan_.found[scan_.next_vertex];
      if (!scan_.parent_done) {
        scan_.parent_done = true;
        if (v != 1) {
          visit(Tree::edge_id(v), tree_.parent(v));
          return true;
        }
        // fall through without consuming a tick for the missing parent edge
      }
      auto kids = tree_.children(v);
      if (scan_.next_child < kids.size()) {
        Vertex c = kids[scan_.next_child++];
        visit(Tree::edge_id(c), c);
        return true;
      }
      ++scan_.next_vertex;
      scan_.next_child = 0;
      scan_.parent_done = false;
    }
    scan_.finished = true;
    return false;
  }

  const std::vector<Vertex>& found() const { return scan_.found; }
  bool finished() const { return scan_.finished; }

 private:
  void visit(EdgeId via, Vertex w) {
    if (via == split_) return;                    // the removed edge
    if (label_[w] != block_label_) return;        // outside the block
    if (stamp_[w] == stamp_value_) return;        // already found on this side
    stamp_[w] = stamp_value_;
    scan_.found.push_back(w);
  }

  const Tree& tree_;
  const std::vector<std::uint32_t>& label_;
  std::uint32_t block_label_;
  EdgeId split_;
  std::vector<std::uint32_t>& stamp_;
  std::uint32_t stamp_value_;
  SideScan scan_;
};

}  // namespace

CutTree build_cut_tree(const Tree& tree, const EdgeRandomness& r) {
  std::uint64_t n = tree.size();
  if (r.priority.size() != tree.edge_count()) {
    throw std::invalid_argument("randomness does not match tree size");
  }

  CutTree cut;
  cut.n = static_cast<std::uint32_t>(n);
  std::uint32_t nodes = static_cast<std::uint32_t>(2 * n - 1);
  cut.parent.assign(nodes, -1);
  cut.left.assign(nodes, -1);
  cut.right.assign(nodes, -1);
  cut.block_size.assign(nodes, 0);
  cut.split_edge.assign(nodes, -1);
  cut.leaf_vertex.assign(nodes, 0);
  cut.leaf_node_of.assign(n + 1, 0);
  cut.leaf_order.reserve(n);

  if (n == 1) {
    cut.block_size[0] = 1;
    cut.leaf_vertex[0] = 1;
    cut.leaf_node_of[1] = 0;
    cut.leaf_order.push_back(1);
    cut.leaf_begin = {0};
    cut.leaf_end = {1};
    return cut;
  }

  std::vector<std::uint32_t> label(n + 1, 0);
  std::vector<std::uint32_t> stamp(n + 1, 0);
  std::uint32_t next_label = 1;
  std::uint32_t next_stamp = 1;
  std::uint32_t next_node = 1;

  struct Pending {
    std::uint32_t node;
    std::uint32_t label;
    std::uint32_t size;
    Vertex seed;  // any vertex of the block; the block's label locates the rest
    BlockList list;
  };

  BlockList root_list;
  root_list.edges.resize(n - 1);
  for (std::uint64_t e = 0; e < n - 1; ++e) {
    root_list.edges[e] = {r.priority[e], static_cast<EdgeId>(e)};
  }
  std::sort(root_list.edges.begin(), root_list.edges.end());

  cut.block_size[0] = static_cast<std::uint32_t>(n);
  std::vector<std::uint32_t> leaf_pos(nodes, 0);
  std::vector<Pending> stack;
  stack.push_back({0, 0, static_cast<std::uint32_t>(n), 1, std::move(root_list)});

  while (!stack.empty()) {
    Pending blk = std::move(stack.back());
    stack.pop_back();

    if (blk.size == 1) {
      cut.leaf_vertex[blk.node] = blk.seed;
      cut.leaf_node_of[blk.seed] = blk.node;
      leaf_pos[blk.node] = static_cast<std::uint32_t>(cut.leaf_order.size());
      cut.leaf_order.push_back(blk.seed);
      continue;
    }

    // Minimum-priority edge still internal to this block.
    EdgeId e = 0;
    for (;; ++blk.list.cursor) {
      const PrioEdge& cand = blk.list.edges[blk.list.cursor];
      Vertex a = tree.edge_child(cand.second);
      Vertex b = tree.edge_parent(cand.second);
      if (label[a] == blk.label && label[b] == blk.label) {
        e = cand.second;
        ++blk.list.cursor;
        break;
      }
    }
    cut.split_edge[blk.node] = static_cast<std::int32_t>(e);

    Vertex a = tree.edge_child(e);
    Vertex b = tree.edge_parent(e);
    SideStepper side_a(tree, label, blk.label, e, stamp, next_stamp);
    SideStepper side_b(tree, label, blk.label, e, stamp, next_stamp + 1);
    next_stamp += 2;
    side_a.seed(a);
    side_b.seed(b);
    while (true) {
      if (!side_a.finished() && !side_a.step()) break;
      if (!side_b.finished() && !side_b.step()) break;
    }
    SideStepper& done = side_a.finished() ? side_a : side_b;
    Vertex done_seed = side_a.finished() ? a : b;
    Vertex other_seed = side_a.finished() ? b : a;
    std::uint32_t done_size = static_cast<std::uint32_t>(done.found().size());
    std::uint32_t other_size = blk.size - done_size;

    // The finished side gets a fresh label and a rebuilt edge list; the other
    // side keeps this block's label and inherits the remaining list.
    std::uint32_t fresh = next_label++;
    for (Vertex v : done.found()) label[v] = fresh;
    BlockList done_list;
    if (done_size > 1) {
      done_list.edges.reserve(done_size - 1);
      for (Vertex v : done.found()) {
        if (v == 1) continue;
        EdgeId ev = Tree::edge_id(v);
        if (label[tree.parent(v)] == fresh) {
          done_list.edges.push_back({r.priority[ev], ev});
        }
      }
      std::sort(done_list.edges.begin(), done_list.edges.end());
    }

    // Children: left = side of the edge's child endpoint, right = parent side.
    std::uint32_t node_child_side = next_node++;
    std::uint32_t node_parent_side = next_node++;
    bool done_is_child_side = (done_seed == a);
    std::uint32_t done_node = done_is_child_side ? node_child_side : node_parent_side;
    std::uint32_t other_node = done_is_child_side ? node_parent_side : node_child_side;

    cut.left[blk.node] = static_cast<std::int32_t>(node_child_side);
    cut.right[blk.node] = static_cast<std::int32_t>(node_parent_side);
    cut.parent[node_child_side] = static_cast<std::int32_t>(blk.node);
    cut.parent[node_parent_side] = static_cast<std::int32_t>(blk.node);
    cut.block_size[done_node] = done_size;
    cut.block_size[other_node] = other_size;

    // Depth-first: push the inherited side first so the fresh side's subtree
    // is laid out contiguously before it.
    stack.push_back({other_node, blk.label, other_size, other_seed, std::move(blk.list)});
    stack.push_back({done_node, fresh, done_size, done_seed, std::move(done_list)});
  }

  // Leaf intervals: a subtree finishes before its sibling starts (LIFO), so
  // every block is contiguous in leaf_order. Children have larger node ids
  // than their parent, so a reverse id sweep sees children first.
  cut.leaf_begin.assign(nodes, 0);
  cut.leaf_end.assign(nodes, 0);
  for (std::uint32_t v = nodes; v-- > 0;) {
    if (cut.left[v] < 0) {
      cut.leaf_begin[v] = leaf_pos[v];
      cut.leaf_end[v] = leaf_pos[v] + 1;
    } else {
      cut.leaf_begin[v] = std::min(cut.leaf_begin[cut.left[v]],
                                   cut.leaf_begin[cut.right[v]]);
      cut.leaf_end[v] = std::max(cut.leaf_end[cut.left[v]],
                                 cut.leaf_end[cut.right[v]]);
    }
  }
  return cut;
}

MarkedCutTree apply_mark_process(const CutTree& cut, const EdgeRandomness& r) {
  MarkedCutTree m;
  m.cut = &cut;
  m.marked.assign(cut.node_count(), 0);
  if (r.mark.size() + 1 != cut.n) {
    throw std::invalid_argument("randomness does not match cut-tree size");
  }
  // Parents precede children in node ids, so one forward sweep suffices to
  // propagate the "has a marked ancestor" flag.
  std::vector<std::uint8_t> blocked(cut.node_count(), 0);
  for (std::uint32_t v = 0; v < cut.node_count(); ++v) {
    if (cut.parent[v] >= 0) {
      std::uint32_t p = static_cast<std::uint32_t>(cut.parent[v]);
      blocked[v] = static_cast<std::uint8_t>(blocked[p] | m.marked[p]);
    }
    if (!cut.is_leaf(v) && !blocked[v] && r.mark[cut.split_edge[v]]) {
      m.marked[v] = 1;
    }
  }
  return m;
}

FireOutcome fire_outcome_from_marks(const MarkedCutTree& marked, const Tree& tree,
                                    const EdgeRandomness& r) {
  const CutTree& cut = *marked.cut;
  FireOutcome out;
  out.fate.assign(cut.n + 1, 0);
  out.edge_state.assign(cut.n > 0 ? cut.n - 1 : 0, EdgeState::Alive);

  // Nodes whose block actually forms during the dynamics are exactly those
  // with no marked strict ancestor; among them the marked ones are fires and
  // the rest are fireproof decisions. Sorting them by splitting-edge priority
  // reproduces the dynamics timeline.
  std::vector<std::uint8_t> blocked(cut.node_count(), 0);
  std::vector<std::uint32_t> events;  // internal nodes that get decided
  for (std::uint32_t v = 0; v < cut.node_count(); ++v) {
    if (cut.parent[v] >= 0) {
      std::uint32_t p = static_cast<std::uint32_t>(cut.parent[v]);
      blocked[v] = static_cast<std::uint8_t>(blocked[p] | marked.marked[p]);
    }
    if (!cut.is_leaf(v) && !blocked[v]) events.push_back(v);
  }
  std::sort(events.begin(), events.end(), [&](std::uint32_t x, std::uint32_t y) {
    return edge_before(r, static_cast<EdgeId>(cut.split_edge[x]),
                       static_cast<EdgeId>(cut.split_edge[y]));
  });

  std::uint64_t fireproof_decisions = 0;
  for (std::uint32_t v : events) {
    if (!marked.marked[v]) {
      out.edge_state[cut.split_edge[v]] = EdgeState::Fireproof;
      ++fireproof_decisions;
      continue;
    }
    FireEvent ev;
    ev.ignited_edge = static_cast<EdgeId>(cut.split_edge[v]);
    ev.theta = fireproof_decisions;
    std::uint32_t fire_idx = static_cast<std::uint32_t>(out.fires.size()) + 1;
    ev.block.assign(cut.leaf_order.begin() + cut.leaf_begin[v],
                    cut.leaf_order.begin() + cut.leaf_end[v]);
    std::sort(ev.block.begin(), ev.block.end());
    for (Vertex w : ev.block) out.fate[w] = fire_idx;
    out.fires.push_back(std::move(ev));
  }

  // Edges interior to burnt blocks were retired without a decision.
  for (std::uint64_t e = 0; e < out.edge_state.size(); ++e) {
    if (out.edge_state[e] == EdgeState::Alive) {
      Vertex a = tree.edge_child(static_cast<EdgeId>(e));
      if (out.fate[a] != 0) out.edge_state[e] = EdgeState::Burnt;
    }
  }

  finalize_outcome(tree, out);
  return out;
}

std::uint64_t zeta(const CutTree& cut) {
  std::uint64_t depth = 0;
  std::uint32_t v = cut.leaf_node_of[1];
  while (cut.parent[v] >= 0) {
    v = static_cast<std::uint32_t>(cut.parent[v]);
    ++depth;
  }
  return depth;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> root_path_blocks(const CutTree& cut) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  std::uint32_t v = cut.leaf_node_of[1];
  while (cut.parent[v] >= 0) {
    std::uint32_t p = static_cast<std::uint32_t>(cut.parent[v]);
    std::uint32_t sib = static_cast<std::uint32_t>(
        cut.left[p] == static_cast<std::int32_t>(v) ? cut.right[p] : cut.left[p]);
    out.push_back({cut.block_size[sib], cut.block_size[v]});
    v = p;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> root_path_blocks_direct(
    const Tree& tree, const EdgeRandomness& r) {
  std::uint64_t n = tree.size();
  if (r.priority.size() != tree.edge_count()) {
    throw std::invalid_argument("randomness does not match tree size");
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  if (n == 1) return out;

  std::vector<std::uint32_t> label(n + 1, 0);
  std::vector<std::uint32_t> stamp(n + 1, 0);
  std::uint32_t cur_label = 0;
  std::uint32_t next_label = 1;
  std::uint32_t next_stamp = 1;
  std::uint32_t cur_size = static_cast<std::uint32_t>(n);

  BlockList list;
  list.edges.resize(n - 1);
  for (std::uint64_t e = 0; e < n - 1; ++e) {
    list.edges[e] = {r.priority[e], static_cast<EdgeId>(e)};
  }
  std::sort(list.edges.begin(), list.edges.end());

  while (cur_size > 1) {
    EdgeId e = 0;
    for (;; ++list.cursor) {
      const PrioEdge& cand = list.edges[list.cursor];
      Vertex a = tree.edge_child(cand.second);
      Vertex b = tree.edge_parent(cand.second);
      if (label[a] == cur_label && label[b] == cur_label) {
        e = cand.second;
        ++list.cursor;
        break;
      }
    }
    Vertex a = tree.edge_child(e);
    Vertex b = tree.edge_parent(e);
    SideStepper side_a(tree, label, cur_label, e, stamp, next_stamp);
    SideStepper side_b(tree, label, cur_label, e, stamp, next_stamp + 1);
    next_stamp += 2;
    side_a.seed(a);
    side_b.seed(b);
    while (true) {
      if (!side_a.finished() && !side_a.step()) break;
      if (!side_b.finished() && !side_b.step()) break;
    }
    SideStepper& done = side_a.finished() ? side_a : side_b;
    std::uint32_t done_size = static_cast<std::uint32_t>(done.found().size());
    std::uint32_t other_size = cur_size - done_size;

    bool done_has_root = false;
    for (Vertex v : done.found()) {
      if (v == 1) {
        done_has_root = true;
        break;
      }
    }

    std::uint32_t fresh = next_label++;
    for (Vertex v : done.found()) label[v] = fresh;
    if (done_has_root) {
      out.push_back({other_size, done_size});
      // Rebuild the list for the surviving side; the old one is discarded.
      BlockList fresh_list;
      if (done_size > 1) {
        fresh_list.edges.reserve(done_size - 1);
        for (Vertex v : done.found()) {
          if (v == 1) continue;
          EdgeId ev = Tree::edge_id(v);
          if (label[tree.parent(v)] == fresh) {
            fresh_list.edges.push_back({r.priority[ev], ev});
          }
        }
        std::sort(fresh_list.edges.begin(), fresh_list.edges.end());
      }
      list = std::move(fresh_list);
      cur_label = fresh;
      cur_size = done_size;
    } else {
      out.push_back({done_size, other_size});
      cur_size = other_size;
    }
  }
  return out;
}

std::uint64_t zeta_direct(const Tree& tree, const EdgeRandomness& r) {
  return root_path_blocks_direct(tree, r).size();
}

std::uint64_t zeta_of_random_recursive(std::uint64_t size, Rng& rng) {
  if (size <= 1) return 0;
  Tree t = Tree::generate_recursive(size, rng);
  EdgeRandomness r = draw_edge_randomness(t, 0.0, rng);
  return zeta_direct(t, r);
}

ReducedTreeStats reduced_tree(const CutTree& cut, std::uint64_t k, Rng& rng,
                              bool with_replacement) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!with_replacement && k > cut.n) {
    throw std::invalid_argument("k exceeds leaf count for distinct sampling");
  }
  std::vector<std::uint8_t> visited(cut.node_count(), 0);
  std::vector<std::uint8_t> chosen(cut.n + 1, 0);
  ReducedTreeStats stats;
  std::uint64_t distinct = 0;
  for (std::uint64_t i = 0; i < k; ++i) {
    Vertex v;
    if (with_replacement) {
      v = static_cast<Vertex>(rng.range(1, cut.n));
    } else {
      do {
        v = static_cast<Vertex>(rng.range(1, cut.n));
      } while (chosen[v]);
    }
    if (chosen[v]) continue;
    chosen[v] = 1;
    ++distinct;
    std::uint32_t node = cut.leaf_node_of[v];
    visited[node] = 1;
    while (cut.parent[node] >= 0) {
      node = static_cast<std::uint32_t>(cut.parent[node]);
      if (visited[node]) break;
      visited[node] = 1;
      ++stats.internal;
    }
  }
  stats.length = stats.internal + distinct - 1;
  return stats;
}

}  // namespace firetree
