#include "tree.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace firetree {

Tree Tree::generate_recursive(std::uint64_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("tree size must be >= 1");
  std::vector<Vertex> parents;
  parents.reserve(n > 0 ? n - 1 : 0);
  for (std::uint64_t i = 2; i <= n; ++i) {
    parents.push_back(static_cast<Vertex>(1 + rng.below(i - 1)));
  }
  return Tree(n, std::move(parents));
}

Tree::Tree(std::uint64_t n, std::vector<Vertex> parents) : n_(n) {
  if (n < 1) throw std::invalid_argument("tree size must be >= 1");
  if (parents.size() != n - 1) {
    throw std::invalid_argument("parent array must have n-1 entries");
  }
  parents_.assign(n + 1, 0);
  for (std::uint64_t v = 2; v <= n; ++v) parents_[v] = parents[v - 2];
  validate();
  build_children();
}

void Tree::validate() {
  recursive_ = true;
  for (std::uint64_t v = 2; v <= n_; ++v) {
    Vertex p = parents_[v];
    if (p < 1 || p > n_ || p == v) {
      throw std::invalid_argument("parent out of range");
    }
    if (p >= v) recursive_ = false;
  }
  // Every vertex must reach the root by climbing; cycles never do.
  std::vector<std::uint8_t> state(n_ + 1, 0);  // 0 new, 1 on path, 2 done
  state[1] = 2;
  std::vector<Vertex> path;
  for (std::uint64_t v0 = 2; v0 <= n_; ++v0) {
    Vertex v = static_cast<Vertex>(v0);
    path.clear();
    while (state[v] == 0) {
      state[v] = 1;
      path.push_back(v);
      v = parents_[v];
    }
    if (state[v] == 1) throw std::invalid_argument("parent array contains a cycle");
    for (Vertex w : path) state[w] = 2;
  }
}

void Tree::build_children() {
  child_index_.assign(n_ + 2, 0);
  for (std::uint64_t v = 2; v <= n_; ++v) child_index_[parents_[v] + 1]++;
  for (std::uint64_t i = 1; i <= n_ + 1; ++i) child_index_[i] += child_index_[i - 1];
  child_store_.resize(n_ - 1);
  std::vector<std::uint32_t> pos(child_index_.begin(), child_index_.end() - 1);
  for (std::uint64_t v = 2; v <= n_; ++v) {
    child_store_[pos[parents_[v]]++] = static_cast<Vertex>(v);
  }
}

void Tree::check_vertex(Vertex v) const {
  if (v < 1 || v > n_) throw std::invalid_argument("vertex out of range");
}

std::string Tree::serialize() const {
  std::string out = "n=" + std::to_string(n_) + "\n";
  char buf[32];
  for (std::uint64_t v = 2; v <= n_; ++v) {
    int len = std::snprintf(buf, sizeof buf, "%llu %u\n",
                            static_cast<unsigned long long>(v), parents_[v]);
    out.append(buf, static_cast<std::size_t>(len));
  }
  return out;
}

Tree Tree::parse(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header.rfind("n=", 0) != 0) {
    throw std::invalid_argument("missing n= header");
  }
  std::uint64_t n = 0;
  try {
    n = std::stoull(header.substr(2));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad n= header");
  }
  if (n < 1) throw std::invalid_argument("bad n= header");
  std::vector<Vertex> parents(n - 1, 0);
  std::vector<std::uint8_t> seen(n + 1, 0);
  std::uint64_t v, p, lines = 0;
  while (in >> v >> p) {
    if (v < 2 || v > n || p < 1 || p > n) throw std::invalid_argument("vertex out of range");
    if (seen[v]) throw std::invalid_argument("duplicate vertex line");
    seen[v] = 1;
    parents[v - 2] = static_cast<Vertex>(p);
    ++lines;
  }
  if (lines != n - 1) throw std::invalid_argument("wrong number of edge lines");
  return Tree(n, std::move(parents));
}

std::vector<std::uint32_t> subtree_sizes(const Tree& tree) {
  std::uint64_t n = tree.size();
  std::vector<std::uint32_t> size(n + 1, 1);
  size[0] = 0;
  // Post-order over an explicit stack; parents may precede or follow children
  // in label order, so label-order accumulation is not enough in general.
  std::vector<std::uint32_t> order;
  order.reserve(n);
  std::vector<Vertex> stack = {1};
  while (!stack.empty()) {
    Vertex v = stack.back();
    stack.pop_back();
    order.push_back(v);
    for (Vertex c : tree.children(v)) stack.push_back(c);
  }
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Vertex v = *it;
    if (v != 1) size[tree.parent(v)] += size[v];
  }
  return size;
}

std::uint64_t subtree_size(const Tree& tree, Vertex v) {
  tree.check_vertex(v);
  std::uint64_t count = 0;
  std::vector<Vertex> stack = {v};
  while (!stack.empty()) {
    Vertex w = stack.back();
    stack.pop_back();
    ++count;
    for (Vertex c : tree.children(w)) stack.push_back(c);
  }
  return count;
}

SpinalDecomposition spinal_decomposition(const Tree& tree, Vertex x) {
  tree.check_vertex(x);
  SpinalDecomposition out;
  Vertex v = x;
  out.spine.push_back(v);
  while (v != 1) {
    v = tree.parent(v);
    out.spine.push_back(v);
  }
  std::reverse(out.spine.begin(), out.spine.end());

  // |T_i| = |subtree(V_i)| - |subtree(V_{i+1})|, except the tip which keeps
  // its whole subtree; T_0 additionally picks up everything outside subtree(V_1).
  auto sizes = subtree_sizes(tree);
  std::uint64_t h = out.spine.size() - 1;
  out.component_sizes.resize(h + 1);
  for (std::uint64_t i = 0; i < h; ++i) {
    out.component_sizes[i] = sizes[out.spine[i]] - sizes[out.spine[i + 1]];
  }
  out.component_sizes[h] = sizes[out.spine[h]];
  return out;
}

std::uint64_t vertex_height(const Tree& tree, Vertex v) {
  tree.check_vertex(v);
  std::uint64_t h = 0;
  while (v != 1) {
    v = tree.parent(v);
    ++h;
  }
  return h;
}

std::uint64_t lca_height(const Tree& tree, Vertex u, Vertex v) {
  tree.check_vertex(u);
  tree.check_vertex(v);
  std::uint64_t hu = vertex_height(tree, u);
  std::uint64_t hv = vertex_height(tree, v);
  while (hu > hv) {
    u = tree.parent(u);
    --hu;
  }
  while (hv > hu) {
    v = tree.parent(v);
    --hv;
  }
  while (u != v) {
    u = tree.parent(u);
    v = tree.parent(v);
    --hu;
  }
  return hu;
}

}  // namespace firetree
