#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rng.hpp"

namespace firetree {

using Vertex = std::uint32_t;  // vertices are labelled 1..n
using EdgeId = std::uint32_t;  // edge {v, parent(v)} has id v-2, ids 0..n-2

// Rooted labelled tree on {1..n} in parent-array form, rooted at 1.
// Immutable after construction; one instance may be shared across concurrent
// trial workers. Children adjacency is built at construction so reads need no
// synchronization.
class Tree {
 public:
  // Uniform random recursive tree: parent(i) uniform on {1..i-1}.
  static Tree generate_recursive(std::uint64_t n, Rng& rng);

  // Ingests a parent array (parents[v-2] = parent of v, for v = 2..n).
  // Connectivity/acyclicity is validated; the recursive property is recorded
  // but not required, so externally supplied labelled trees are accepted.
  Tree(std::uint64_t n, std::vector<Vertex> parents);

  std::uint64_t size() const { return n_; }
  std::uint64_t edge_count() const { return n_ - 1; }
  bool is_recursive() const { return recursive_; }

  Vertex parent(Vertex v) const { return parents_[v]; }  // v in 2..n
  std::span<const Vertex> children(Vertex v) const {
    return {child_store_.data() + child_index_[v],
            child_store_.data() + child_index_[v + 1]};
  }

  static EdgeId edge_id(Vertex child_endpoint) { return child_endpoint - 2; }
  Vertex edge_child(EdgeId e) const { return static_cast<Vertex>(e) + 2; }
  Vertex edge_parent(EdgeId e) const { return parents_[e + 2]; }

  void check_vertex(Vertex v) const;  // throws std::invalid_argument

  // One line per vertex v=2..n, "v parent(v)", with header "n=<n>".
  std::string serialize() const;
  static Tree parse(const std::string& text);

 private:
  Tree() = default;
  void build_children();
  void validate();

  std::uint64_t n_ = 0;
  bool recursive_ = false;
  std::vector<Vertex> parents_;      // index by vertex; [0], [1] unused (0)
  std::vector<std::uint32_t> child_index_;  // CSR offsets, size n+2
  std::vector<Vertex> child_store_;
};

// Spine from the root to a target vertex together with the sizes of the
// components hanging off it once all spine edges are removed.
struct SpinalDecomposition {
  std::vector<Vertex> spine;                 // V_0 = 1, ..., V_h = x
  std::vector<std::uint64_t> component_sizes;  // |T_0|, ..., |T_h|, sums to n
  std::uint64_t height() const { return spine.size() - 1; }
};

SpinalDecomposition spinal_decomposition(const Tree& tree, Vertex x);

// Number of descendants of v, including v itself.
std::uint64_t subtree_size(const Tree& tree, Vertex v);

// Subtree sizes for every vertex in one pass (index by vertex, [0] unused).
std::vector<std::uint32_t> subtree_sizes(const Tree& tree);

// Graph distance to the root (root has height 0).
std::uint64_t vertex_height(const Tree& tree, Vertex v);

// Height of the last common ancestor of u and v.
std::uint64_t lca_height(const Tree& tree, Vertex u, Vertex v);

}  // namespace firetree
