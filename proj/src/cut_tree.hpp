#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fire.hpp"
#include "tree.hpp"

namespace firetree {

// Binary genealogy of the blocks of a tree under edge removal by increasing
// priority. Node 0 is the root block [n]; every internal node splits at the
// minimum-priority edge inside its block. Blocks are not stored as explicit
// vertex sets: leaves are laid out in construction order and each node keeps
// an interval into that layout, so block size is O(1) and enumeration is
// O(block). Immutable after build.
class CutTree {
 public:
  std::uint32_t n = 0;
  std::vector<std::int32_t> parent;       // -1 for the root
  std::vector<std::int32_t> left, right;  // -1 for leaves
  std::vector<std::uint32_t> block_size;
  std::vector<std::int32_t> split_edge;   // edge id, -1 for leaves
  std::vector<Vertex> leaf_vertex;        // the singleton label, 0 for internals
  std::vector<std::uint32_t> leaf_begin, leaf_end;  // interval into leaf_order
  std::vector<Vertex> leaf_order;
  std::vector<std::uint32_t> leaf_node_of;  // vertex -> leaf node id

  std::uint32_t node_count() const { return static_cast<std::uint32_t>(parent.size()); }
  bool is_leaf(std::uint32_t node) const { return block_size[node] == 1; }
  std::uint32_t root() const { return 0; }
};

CutTree build_cut_tree(const Tree& tree, const EdgeRandomness& randomness);

// Cut-tree plus the filtered mark process: a node is marked iff its splitting
// edge carries a Bernoulli mark and no strict ancestor is marked, so marked
// nodes always form an antichain.
struct MarkedCutTree {
  const CutTree* cut = nullptr;
  std::vector<std::uint8_t> marked;  // index by node
};

MarkedCutTree apply_mark_process(const CutTree& cut, const EdgeRandomness& randomness);

// Reconstructs the full fire outcome from the marked cut-tree alone: marked
// blocks are the burnt subtrees, leaves without a marked ancestor are the
// fireproof vertices, and the timeline is recovered by sorting the surviving
// decision events by splitting-edge priority. Equal, field by field, to
// run_fire_dynamics on the same (tree, randomness).
FireOutcome fire_outcome_from_marks(const MarkedCutTree& marked, const Tree& tree,
                                    const EdgeRandomness& randomness);

// Depth of the leaf {1}; the number of cuts needed to isolate the root.
std::uint64_t zeta(const CutTree& cut);

// Block sizes along the path from [n] to {1}: pairs (|C'_i|, |C_i|) where
// C_i is the child containing 1. Empty for n = 1.
std::vector<std::pair<std::uint32_t, std::uint32_t>> root_path_blocks(const CutTree& cut);

// Same sequence computed by following only the block containing 1, without
// materialising the arena. Exactly equal to root_path_blocks(build_cut_tree);
// used where only root-path functionals are needed.
std::vector<std::pair<std::uint32_t, std::uint32_t>> root_path_blocks_direct(
    const Tree& tree, const EdgeRandomness& randomness);

std::uint64_t zeta_direct(const Tree& tree, const EdgeRandomness& randomness);

// Generates a fresh recursive tree of the given size with its own priorities
// and returns the number of cuts to isolate its root.
std::uint64_t zeta_of_random_recursive(std::uint64_t size, Rng& rng);

struct ReducedTreeStats {
  std::uint64_t length = 0;    // L_{n,k}: edge count of the reduced tree
  std::uint64_t internal = 0;  // X_{n,k}: internal (non-singleton) node count
};

// Reduced tree spanned by the root and k leaves chosen uniformly at random,
// with replacement by default (the distinct variant rejects duplicates).
ReducedTreeStats reduced_tree(const CutTree& cut, std::uint64_t k, Rng& rng,
                              bool with_replacement = true);

}  // namespace firetree
