#include "oracle.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace firetree {

namespace {

// A component is a sorted set of live edge ids plus a flag for the root.
// Singleton (edgeless) components are dropped: their vertex is fireproof for
// good and contributes nothing further.
struct Component {
  std::vector<EdgeId> edges;
  bool has_root = false;

  bool operator<(const Component& o) const {
    if (has_root != o.has_root) return has_root < o.has_root;
    return edges < o.edges;
  }
};

using State = std::vector<Component>;

// Distribution over (additional burnt vertices, b0, fires-from-now index of
// the root's fire; 0 if the root never burns in this future).
using Law = std::map<std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>, double>;

struct OracleContext {
  const Tree* tree = nullptr;
  double p = 0.0;
  std::unordered_map<std::string, Law> memo;
};

std::string state_key(const State& s) {
  std::string key;
  for (const Component& c : s) {
    key += c.has_root ? 'R' : 'c';
    for (EdgeId e : c.edges) {
      key += static_cast<char>('0' + e);
    }
    key += '|';
  }
  return key;
}

std::uint32_t component_vertex_count(const Component& c) {
  // A connected edge set on k edges spans k+1 vertices.
  return static_cast<std::uint32_t>(c.edges.size()) + 1;
}

// Splits component c at removed edge e into the connected pieces of the
// remaining edges; drops edgeless pieces.
std::vector<Component> split_component(const Tree& tree, const Component& c, EdgeId e) {
  std::vector<EdgeId> rest;
  rest.reserve(c.edges.size() - 1);
  for (EdgeId x : c.edges) {
    if (x != e) rest.push_back(x);
  }
  // Union-find over vertices touched by the remaining edges.
  std::map<Vertex, Vertex> up;
  auto find = [&](Vertex v) {
    while (up[v] != v) {
      up[v] = up[up[v]];
      v = up[v];
    }
    return v;
  };
  auto ensure = [&](Vertex v) {
    if (!up.count(v)) up[v] = v;
  };
  for (EdgeId x : rest) {
    Vertex a = tree.edge_child(x), b = tree.edge_parent(x);
    ensure(a);
    ensure(b);
    Vertex ra = find(a), rb = find(b);
    if (ra != rb) up[ra] = rb;
  }
  std::map<Vertex, Component> pieces;
  for (EdgeId x : rest) {
    pieces[find(tree.edge_child(x))].edges.push_back(x);
  }
  std::vector<Component> out;
  for (auto& [rep, piece] : pieces) {
    std::sort(piece.edges.begin(), piece.edges.end());
    if (c.has_root) {
      // The root stays interesting only while it is spanned by a live edge;
      // once isolated it is fireproof for good.
      for (EdgeId x : piece.edges) {
        if (tree.edge_child(x) == 1 || tree.edge_parent(x) == 1) {
          piece.has_root = true;
          break;
        }
      }
    }
    out.push_back(std::move(piece));
  }
  return out;
}

const Law& solve(OracleContext& ctx, State state) {
  std::sort(state.begin(), state.end());
  std::string key = state_key(state);
  auto it = ctx.memo.find(key);
  if (it != ctx.memo.end()) return it->second;

  Law law;
  if (state.empty()) {
    law[{0, 0, 0}] = 1.0;
    return ctx.memo.emplace(std::move(key), std::move(law)).first->second;
  }

  std::uint64_t alive = 0;
  for (const Component& c : state) alive += c.edges.size();
  double pick = 1.0 / static_cast<double>(alive);

  for (std::size_t ci = 0; ci < state.size(); ++ci) {
    const Component& comp = state[ci];
    std::uint32_t comp_vertices = component_vertex_count(comp);

    // Fire on any edge of this component burns all of it; which edge was
    // picked does not matter, so weight the branch by its edge count.
    {
      State next;
      next.reserve(state.size() - 1);
      for (std::size_t cj = 0; cj < state.size(); ++cj) {
        if (cj != ci) next.push_back(state[cj]);
      }
      const Law& sub = solve(ctx, std::move(next));
      double w = pick * static_cast<double>(comp.edges.size()) * ctx.p;
      for (const auto& [k, q] : sub) {
        auto [burnt, b0, jroot] = k;
        std::uint32_t nb = burnt + comp_vertices;
        std::uint32_t nb0 = comp.has_root ? comp_vertices : b0;
        std::uint32_t nj = comp.has_root ? 1 : (jroot == 0 ? 0 : jroot + 1);
        law[{nb, nb0, nj}] += w * q;
      }
    }

    // Fireproof decisions are edge-specific.
    for (EdgeId e : comp.edges) {
      State next;
      next.reserve(state.size() + 1);
      for (std::size_t cj = 0; cj < state.size(); ++cj) {
        if (cj != ci) next.push_back(state[cj]);
      }
      for (Component& piece : split_component(*ctx.tree, comp, e)) {
        next.push_back(std::move(piece));
      }
      const Law& sub = solve(ctx, std::move(next));
      double w = pick * (1.0 - ctx.p);
      for (const auto& [k, q] : sub) law[k] += w * q;
    }
  }
  return ctx.memo.emplace(std::move(key), std::move(law)).first->second;
}

}  // namespace

OracleLaw brute_force_I_distribution(const Tree& tree, double p) {
  if (tree.size() > 8) throw std::invalid_argument("oracle limited to n <= 8");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");

  OracleLaw out;
  out.n = tree.size();
  if (tree.size() == 1) {
    out.joint[{1, 0, 0}] = 1.0;
    return out;
  }

  OracleContext ctx;
  ctx.tree = &tree;
  ctx.p = p;
  Component whole;
  whole.has_root = true;
  whole.edges.resize(tree.edge_count());
  for (std::uint64_t e = 0; e < tree.edge_count(); ++e) {
    whole.edges[e] = static_cast<EdgeId>(e);
  }
  const Law& law = solve(ctx, {whole});
  for (const auto& [k, q] : law) {
    auto [burnt, b0, jroot] = k;
    std::uint32_t fireproof = static_cast<std::uint32_t>(tree.size()) - burnt;
    out.joint[{fireproof, b0, jroot}] += q;
  }
  return out;
}

OracleLaw brute_force_avg_over_trees(std::uint32_t n, double p) {
  if (n > 6) throw std::invalid_argument("tree average limited to n <= 6");
  if (n < 1) throw std::invalid_argument("n must be >= 1");

  OracleLaw out;
  out.n = n;
  if (n == 1) {
    out.joint[{1, 0, 0}] = 1.0;
    return out;
  }
  double tree_count = 1.0;
  for (std::uint32_t i = 2; i <= n; ++i) tree_count *= static_cast<double>(i - 1);

  std::vector<Vertex> parents(n - 1, 1);
  while (true) {
    Tree tree(n, parents);
    OracleLaw one = brute_force_I_distribution(tree, p);
    for (const auto& [k, q] : one.joint) out.joint[k] += q / tree_count;

    // Odometer over parent choices: parents[v-2] ranges over 1..v-1.
    std::uint64_t pos = 0;
    while (pos < parents.size()) {
      if (parents[pos] < pos + 1) {
        ++parents[pos];
        break;
      }
      parents[pos] = 1;
      ++pos;
    }
    if (pos == parents.size()) break;
  }
  return out;
}

std::map<std::uint32_t, double> OracleLaw::fireproof_pmf() const {
  std::map<std::uint32_t, double> pmf;
  for (const auto& [k, q] : joint) pmf[std::get<0>(k)] += q;
  return pmf;
}

std::map<std::uint32_t, double> OracleLaw::root_block_pmf() const {
  std::map<std::uint32_t, double> pmf;
  for (const auto& [k, q] : joint) pmf[std::get<1>(k)] += q;
  return pmf;
}

double OracleLaw::root_burn_probability() const {
  double total = 0.0;
  for (const auto& [k, q] : joint) {
    if (std::get<2>(k) != 0) total += q;
  }
  return total;
}

double OracleLaw::total_mass() const {
  double total = 0.0;
  for (const auto& [k, q] : joint) total += q;
  return total;
}

}  // namespace firetree
