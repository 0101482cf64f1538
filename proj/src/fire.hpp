#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tree.hpp"

namespace firetree {

// Per-edge randomness driving one run of the dynamics. Priorities give the
// uniform random processing order (ties broken by edge id); marks are the
// independent Bernoulli(p) fire decisions. p rides along here, not in the
// outcome: the dynamics itself is parameter-free given the randomness, which
// is what makes the coupling with the cut-tree testable per instance.
struct EdgeRandomness {
  double p = 0.0;
  std::vector<double> priority;       // i.i.d. uniform on (0,1), index = edge id
  std::vector<std::uint8_t> mark;     // Bernoulli(p) fire marks
};

EdgeRandomness draw_edge_randomness(const Tree& tree, double p, Rng& rng);

// Compares (priority, id) lexicographically.
inline bool edge_before(const EdgeRandomness& r, EdgeId a, EdgeId b) {
  return r.priority[a] < r.priority[b] ||
         (r.priority[a] == r.priority[b] && a < b);
}

struct FireEvent {
  EdgeId ignited_edge = 0;
  std::uint64_t theta = 0;      // fireproof edges decided strictly before this fire
  std::vector<Vertex> block;    // burnt vertices, ascending
};

enum class EdgeState : std::uint8_t { Alive = 0, Fireproof = 1, Burnt = 2 };

// Full record of one run. fate[v] == 0 means v is fireproof, otherwise v was
// burnt by fire number fate[v] (1-based, order of occurrence).
struct FireOutcome {
  std::vector<std::uint32_t> fate;               // index by vertex, [0] unused
  std::vector<FireEvent> fires;                  // in order of occurrence
  std::vector<EdgeState> edge_state;             // decision log, index by edge id
  std::uint64_t fireproof_count = 0;             // I_n
  std::uint64_t root_block_size = 0;             // b0, 0 if the root is fireproof
  std::uint32_t root_fire_index = 0;             // 0 if the root is fireproof
  std::vector<std::uint64_t> fireproof_component_sizes;  // descending

  bool operator==(const FireOutcome&) const;
};

// Exact simulation: edges are processed in increasing priority; a fireproof
// decision deletes the edge, a fire burns the edge's whole current flammable
// component and retires its edges unprocessed.
FireOutcome run_fire_dynamics(const Tree& tree, const EdgeRandomness& randomness);

// True iff every vertex on the tree path from u to v is fireproof.
bool same_fireproof_component(const FireOutcome& outcome, const Tree& tree,
                              Vertex u, Vertex v);

// Size of the largest fireproof component, 0 if every vertex burnt.
std::uint64_t largest_fireproof_component(const FireOutcome& outcome);

// Shared finaliser: given per-vertex fates and the fire list, fills counts,
// root block data and the fireproof component sizes. Used by the direct
// dynamics and by the cut-tree-derived reconstruction.
void finalize_outcome(const Tree& tree, FireOutcome& outcome);

// One CSV row of summary fields:
// n,p,seed,I_n,b0,root_fire_index,num_fires,f1_down,theta_1..K,b_1..K
// (missing theta/b entries are left empty; root_fire_index 0 = fireproof root).
std::string fire_summary_csv_header(unsigned K);
std::string fire_summary_csv_row(const FireOutcome& outcome, std::uint64_t n,
                                 double p, std::uint64_t seed, unsigned K);

}  // namespace firetree
