#include "firetree/firetree.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>

#include "cut_tree.hpp"
#include "experiments.hpp"
#include "fire.hpp"
#include "tree.hpp"

using namespace firetree;

struct ft_tree {
  Tree tree;
};

struct ft_outcome {
  FireOutcome outcome;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
ft_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return FT_ERROR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FT_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FT_ERROR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* ft_status_message(ft_status status) {
  switch (status) {
    case FT_OK: return "ok";
    case FT_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case FT_ERROR_PARSE: return "parse error";
    case FT_ERROR_IO: return "i/o error";
    case FT_ERROR_STAT_FAIL: return "statistical test failure";
    case FT_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ft_last_error(void) { return g_last_error.c_str(); }

const char* ft_version(void) { return "1.0.0"; }

ft_status ft_tree_generate(uint64_t n, uint64_t seed, ft_tree** out) {
  if (!out) {
    g_last_error = "null output pointer";
    return FT_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    Rng rng(seed);
    *out = new ft_tree{Tree::generate_recursive(n, rng)};
    return FT_OK;
  });
}

ft_status ft_tree_from_parents(uint64_t n, const uint32_t* parents, ft_tree** out) {
  if (!out || (!parents && n > 1)) {
    g_last_error = "null pointer argument";
    return FT_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    std::vector<Vertex> pv(parents, parents + (n > 0 ? n - 1 : 0));
    *out = new ft_tree{Tree(n, std::move(pv))};
    return FT_OK;
  });
}

ft_status ft_tree_parse(const char* text, ft_tree** out) {
  if (!text || !out) {
    g_last_error = "null pointer argument";
    return FT_ERROR_INVALID_ARGUMENT;
  }
  try {
    *out = new ft_tree{Tree::parse(text)};
    return FT_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FT_ERROR_PARSE;
  }
}

ft_status ft_tree_serialize(const ft_tree* tree, char** out_text) {
  if (!tree || !out_text) {
    g_last_error = "null pointer argument";
    return FT_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    *out_text = dup_string(tree->tree.serialize());
    return *out_text ? FT_OK : FT_ERROR_INTERNAL;
  });
}

uint64_t ft_tree_size(const ft_tree* tree) { return tree ? tree->tree.size() : 0; }

uint32_t ft_tree_parent(const ft_tree* tree, uint32_t v) {
  if (!tree || v < 2 || v > tree->tree.size()) return 0;
  return tree->tree.parent(v);
}

void ft_tree_free(ft_tree* tree) { delete tree; }

void ft_string_free(char* text) { std::free(text); }

ft_status ft_fire_run(const ft_tree* tree, double p, uint64_t seed, ft_outcome** out) {
  if (!tree || !out) {
    g_last_error = "null pointer argument";
    return FT_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    Rng rng(seed);
    EdgeRandomness r = draw_edge_randomness(tree->tree, p, rng);
    *out = new ft_outcome{run_fire_dynamics(tree->tree, r)};
    return FT_OK;
  });
}

uint64_t ft_outcome_fireproof_count(const ft_outcome* o) {
  return o ? o->outcome.fireproof_count : 0;
}

uint64_t ft_outcome_fire_count(const ft_outcome* o) {
  return o ? o->outcome.fires.size() : 0;
}

uint64_t ft_outcome_root_block_size(const ft_outcome* o) {
  return o ? o->outcome.root_block_size : 0;
}

uint32_t ft_outcome_root_fire_index(const ft_outcome* o) {
  return o ? o->outcome.root_fire_index : 0;
}

uint64_t ft_outcome_largest_fireproof(const ft_outcome* o) {
  return o ? largest_fireproof_component(o->outcome) : 0;
}

uint32_t ft_outcome_vertex_fate(const ft_outcome* o, uint32_t v) {
  if (!o || v < 1 || v >= o->outcome.fate.size()) return 0;
  return o->outcome.fate[v];
}

uint64_t ft_outcome_theta(const ft_outcome* o, uint32_t fire) {
  if (!o || fire < 1 || fire > o->outcome.fires.size()) return 0;
  return o->outcome.fires[fire - 1].theta;
}

uint64_t ft_outcome_block_size(const ft_outcome* o, uint32_t fire) {
  if (!o || fire < 1 || fire > o->outcome.fires.size()) return 0;
  return o->outcome.fires[fire - 1].block.size();
}

ft_status ft_outcome_summary_csv(const ft_outcome* o, uint64_t n, double p,
                                 uint64_t seed, uint32_t K, char** out_text) {
  if (!o || !out_text) {
    g_last_error = "null pointer argument";
    return FT_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    std::string text = fire_summary_csv_header(K) +
                       fire_summary_csv_row(o->outcome, n, p, seed, K);
    *out_text = dup_string(text);
    return *out_text ? FT_OK : FT_ERROR_INTERNAL;
  });
}

void ft_outcome_free(ft_outcome* o) { delete o; }

void ft_experiment_config_init(ft_experiment_config* config) {
  if (!config) return;
  config->n = 0;
  config->trials = 0;
  config->seed = 1;
  config->workers = 1;
  config->K = 8;
  config->has_c = config->has_p = config->has_a = 0;
  config->c = config->p = config->subcrit_a = 0.0;
}

const char* ft_experiment_list(void) {
  static const std::string joined = [] {
    std::string out;
    for (const std::string& name : experiment_names()) {
      if (!out.empty()) out += ",";
      out += name;
    }
    return out;
  }();
  return joined.c_str();
}

ft_status ft_experiment_run(const char* name, const ft_experiment_config* config,
                            const char* out_dir, char** summary_json) {
  if (!name || !config) {
    g_last_error = "null pointer argument";
    return FT_ERROR_INVALID_ARGUMENT;
  }
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.n = config->n;
  cfg.trials = config->trials;
  cfg.seed = config->seed;
  cfg.workers = config->workers;
  cfg.K = config->K;
  if (config->has_c) cfg.c = config->c;
  if (config->has_p) cfg.p = config->p;
  if (config->has_a) cfg.subcrit_a = config->subcrit_a;
  if (out_dir) cfg.out_dir = out_dir;
  try {
    ExperimentReport report = run_experiment(cfg);
    if (summary_json) {
      *summary_json = dup_string(report.summary_json);
      if (!*summary_json) return FT_ERROR_INTERNAL;
    }
    if (!report.all_passed()) {
      g_last_error = "one or more statistical tests failed";
      return FT_ERROR_STAT_FAIL;
    }
    return FT_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return FT_ERROR_INVALID_ARGUMENT;
  } catch (const std::runtime_error& e) {
    g_last_error = e.what();
    return FT_ERROR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FT_ERROR_INTERNAL;
  }
}

}  // extern "C"
