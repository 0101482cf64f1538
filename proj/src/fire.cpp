#include "fire.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace firetree {

EdgeRandomness draw_edge_randomness(const Tree& tree, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("fire probability must lie in [0,1]");
  }
  EdgeRandomness r;
  r.p = p;
  std::uint64_t m = tree.edge_count();
  r.priority.resize(m);
  r.mark.resize(m);
  for (std::uint64_t e = 0; e < m; ++e) r.priority[e] = rng.uniform_open();
  for (std::uint64_t e = 0; e < m; ++e) r.mark[e] = rng.bernoulli(p) ? 1 : 0;
  return r;
}

bool FireOutcome::operator==(const FireOutcome& o) const {
  if (fate != o.fate || fires.size() != o.fires.size()) return false;
  for (std::size_t i = 0; i < fires.size(); ++i) {
    if (fires[i].ignited_edge != o.fires[i].ignited_edge) return false;
    if (fires[i].theta != o.fires[i].theta) return false;
    if (fires[i].block != o.fires[i].block) return false;
  }
  return fireproof_count == o.fireproof_count &&
         root_block_size == o.root_block_size &&
         root_fire_index == o.root_fire_index &&
         fireproof_component_sizes == o.fireproof_component_sizes;
}

FireOutcome run_fire_dynamics(const Tree& tree, const EdgeRandomness& r) {
  std::uint64_t n = tree.size();
  std::uint64_t m = tree.edge_count();
  if (r.priority.size() != m || r.mark.size() != m) {
    throw std::invalid_argument("randomness does not match tree size");
  }

  FireOutcome out;
  out.fate.assign(n + 1, 0);
  out.edge_state.assign(m, EdgeState::Alive);

  std::vector<EdgeId> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](EdgeId a, EdgeId b) { return edge_before(r, a, b); });

  std::uint64_t fireproof_decisions = 0;
  std::vector<Vertex> queue;
  for (EdgeId e : order) {
    if (out.edge_state[e] != EdgeState::Alive) continue;  // already burnt
    if (!r.mark[e]) {
      out.edge_state[e] = EdgeState::Fireproof;
      ++fireproof_decisions;
      continue;
    }
    // Fire: burn the whole flammable component of e. Fireproof edges are
    // deleted and stop the traversal; alive edges burn along the way.
    FireEvent ev;
    ev.ignited_edge = e;
    ev.theta = fireproof_decisions;
    std::uint32_t fire_idx = static_cast<std::uint32_t>(out.fires.size()) + 1;
    out.edge_state[e] = EdgeState::Burnt;
    queue.clear();
    Vertex a = tree.edge_child(e), b = tree.edge_parent(e);
    out.fate[a] = fire_idx;
    out.fate[b] = fire_idx;
    queue.push_back(a);
    queue.push_back(b);
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      Vertex v = queue[qi];
      if (v != 1) {
        EdgeId pe = Tree::edge_id(v);
        if (out.edge_state[pe] == EdgeState::Alive) {
          out.edge_state[pe] = EdgeState::Burnt;
          Vertex w = tree.parent(v);
          if (out.fate[w] == 0) {
            out.fate[w] = fire_idx;
            queue.push_back(w);
          }
        }
      }
      for (Vertex c : tree.children(v)) {
        EdgeId ce = Tree::edge_id(c);
        if (out.edge_state[ce] == EdgeState::Alive) {
          out.edge_state[ce] = EdgeState::Burnt;
          if (out.fate[c] == 0) {
            out.fate[c] = fire_idx;
            queue.push_back(c);
          }
        }
      }
    }
    ev.block = queue;
    std::sort(ev.block.begin(), ev.block.end());
    out.fires.push_back(std::move(ev));
  }

  finalize_outcome(tree, out);
  return out;
}

void finalize_outcome(const Tree& tree, FireOutcome& out) {
  std::uint64_t n = tree.size();
  std::uint64_t burnt = 0;
  for (const FireEvent& ev : out.fires) burnt += ev.block.size();
  out.fireproof_count = n - burnt;
  out.root_fire_index = out.fate[1];
  out.root_block_size =
      out.root_fire_index == 0 ? 0 : out.fires[out.root_fire_index - 1].block.size();

  out.fireproof_component_sizes.clear();
  std::vector<Vertex> stack;
  std::vector<std::uint8_t> seen(n + 1, 0);
  for (std::uint64_t v0 = 1; v0 <= n; ++v0) {
    if (out.fate[v0] != 0 || seen[v0]) continue;
    std::uint64_t size = 0;
    stack.push_back(static_cast<Vertex>(v0));
    seen[v0] = 1;
    while (!stack.empty()) {
      Vertex v = stack.back();
      stack.pop_back();
      ++size;
      if (v != 1) {
        Vertex p = tree.parent(v);
        if (out.fate[p] == 0 && !seen[p]) {
          seen[p] = 1;
          stack.push_back(p);
        }
      }
      for (Vertex c : tree.children(v)) {
        if (out.fate[c] == 0 && !seen[c]) {
          seen[c] = 1;
          stack.push_back(c);
        }
      }
    }
    out.fireproof_component_sizes.push_back(size);
  }
  std::sort(out.fireproof_component_sizes.rbegin(),
            out.fireproof_component_sizes.rend());
}

bool same_fireproof_component(const FireOutcome& outcome, const Tree& tree,
                              Vertex u, Vertex v) {
  tree.check_vertex(u);
  tree.check_vertex(v);
  if (outcome.fate[u] != 0 || outcome.fate[v] != 0) return false;
  std::uint64_t hu = vertex_height(tree, u);
  std::uint64_t hv = vertex_height(tree, v);
  while (hu > hv) {
    u = tree.parent(u);
    --hu;
    if (outcome.fate[u] != 0) return false;
  }
  while (hv > hu) {
    v = tree.parent(v);
    --hv;
    if (outcome.fate[v] != 0) return false;
  }
  while (u != v) {
    u = tree.parent(u);
    v = tree.parent(v);
    if (outcome.fate[u] != 0 || outcome.fate[v] != 0) return false;
  }
  return true;
}

std::uint64_t largest_fireproof_component(const FireOutcome& outcome) {
  return outcome.fireproof_component_sizes.empty()
             ? 0
             : outcome.fireproof_component_sizes.front();
}

std::string fire_summary_csv_header(unsigned K) {
  std::string h = "n,p,seed,I_n,b0,root_fire_index,num_fires,f1_down";
  for (unsigned i = 1; i <= K; ++i) h += ",theta_" + std::to_string(i);
  for (unsigned i = 1; i <= K; ++i) h += ",b_" + std::to_string(i);
  h += "\n";
  return h;
}

std::string fire_summary_csv_row(const FireOutcome& out, std::uint64_t n,
                                 double p, std::uint64_t seed, unsigned K) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  std::string row = std::to_string(n) + "," + buf + "," + std::to_string(seed);
  row += "," + std::to_string(out.fireproof_count);
  row += "," + std::to_string(out.root_block_size);
  row += "," + std::to_string(out.root_fire_index);
  row += "," + std::to_string(out.fires.size());
  row += "," + std::to_string(largest_fireproof_component(out));
  for (unsigned i = 0; i < K; ++i) {
    row += ",";
    if (i < out.fires.size()) row += std::to_string(out.fires[i].theta);
  }
  for (unsigned i = 0; i < K; ++i) {
    row += ",";
    if (i < out.fires.size()) row += std::to_string(out.fires[i].block.size());
  }
  row += "\n";
  return row;
}

}  // namespace firetree
