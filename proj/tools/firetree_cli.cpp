// firetree command line: named experiments plus a one-shot simulator.
// Talks to the core exclusively through the public C API.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "firetree/firetree.h"

namespace {

struct Options {
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  std::uint32_t workers = 1;
  std::uint32_t K = 8;
  double c = 0.0, p = 0.0, a = 0.0;
  bool has_c = false, has_p = false, has_a = false;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--n", opt.n, "tree size (0 = experiment default)");
  cmd->add_option("--trials", opt.trials, "trial count (0 = experiment default)");
  cmd->add_option("--seed", opt.seed, "master seed");
  cmd->add_option("--workers", opt.workers, "worker thread count")
      ->check(CLI::Range(1u, 256u));
  cmd->add_option("--K", opt.K, "max fires recorded per trial");
  cmd->add_option("--out", opt.out_dir, "output directory for CSV/JSON reports");
  auto* c_opt = cmd->add_option("--c", opt.c, "critical regime: p = c ln n / n");
  auto* p_opt = cmd->add_option("--p", opt.p, "explicit fire probability");
  auto* a_opt = cmd->add_option("--subcrit-a", opt.a, "subcritical regime: p = n^-a");
  cmd->callback([&opt, c_opt, p_opt, a_opt] {
    opt.has_c = c_opt->count() > 0;
    opt.has_p = p_opt->count() > 0;
    opt.has_a = a_opt->count() > 0;
  });
}

int run_experiment_cmd(const std::string& name, const Options& opt) {
  ft_experiment_config config;
  ft_experiment_config_init(&config);
  config.n = opt.n;
  config.trials = opt.trials;
  config.seed = opt.seed;
  config.workers = opt.workers;
  config.K = opt.K;
  config.has_c = opt.has_c ? 1 : 0;
  config.has_p = opt.has_p ? 1 : 0;
  config.has_a = opt.has_a ? 1 : 0;
  config.c = opt.c;
  config.p = opt.p;
  config.subcrit_a = opt.a;

  char* summary = nullptr;
  ft_status status = ft_experiment_run(
      name.c_str(), &config, opt.out_dir.empty() ? nullptr : opt.out_dir.c_str(),
      &summary);
  if (summary) {
    std::fputs(summary, stdout);
    ft_string_free(summary);
  }
  if (status == FT_OK) return 0;
  if (status == FT_ERROR_STAT_FAIL) {
    std::fprintf(stderr, "firetree: %s\n", ft_last_error());
    return 2;
  }
  std::fprintf(stderr, "firetree: %s: %s\n", ft_status_message(status),
               ft_last_error());
  return 1;
}

int run_simulate(std::uint64_t n, double p, std::uint64_t seed, std::uint32_t K,
                 const std::string& dump_tree_path) {
  ft_tree* tree = nullptr;
  ft_status status = ft_tree_generate(n, seed, &tree);
  if (status != FT_OK) {
    std::fprintf(stderr, "firetree: %s: %s\n", ft_status_message(status),
                 ft_last_error());
    return 1;
  }
  int rc = 1;
  ft_outcome* outcome = nullptr;
  char* text = nullptr;
  do {
    if (!dump_tree_path.empty()) {
      status = ft_tree_serialize(tree, &text);
      if (status != FT_OK) break;
      std::ofstream out(dump_tree_path, std::ios::binary);
      out << text;
      if (!out) {
        std::fprintf(stderr, "firetree: cannot write %s\n", dump_tree_path.c_str());
        break;
      }
      ft_string_free(text);
      text = nullptr;
    }
    status = ft_fire_run(tree, p, seed, &outcome);
    if (status != FT_OK) break;
    status = ft_outcome_summary_csv(outcome, n, p, seed, K, &text);
    if (status != FT_OK) break;
    std::fputs(text, stdout);
    rc = 0;
  } while (false);
  if (rc != 0 && status != FT_OK) {
    std::fprintf(stderr, "firetree: %s: %s\n", ft_status_message(status),
                 ft_last_error());
  }
  if (text) ft_string_free(text);
  if (outcome) ft_outcome_free(outcome);
  ft_tree_free(tree);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fire dynamics on random recursive trees"};
  app.require_subcommand(1);

  std::vector<std::string> names;
  {
    std::string joined = ft_experiment_list();
    std::size_t pos = 0;
    while (pos < joined.size()) {
      std::size_t comma = joined.find(',', pos);
      if (comma == std::string::npos) comma = joined.size();
      names.push_back(joined.substr(pos, comma - pos));
      pos = comma + 1;
    }
  }

  std::vector<Options> opts(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(names[i], "run the " + names[i] + " experiment");
    add_common(cmd, opts[i]);
  }

  std::uint64_t sim_n = 1000;
  double sim_p = 0.1;
  std::uint64_t sim_seed = 1;
  std::uint32_t sim_K = 8;
  std::string dump_tree_path;
  CLI::App* sim = app.add_subcommand("simulate", "run one fire dynamics instance");
  sim->add_option("--n", sim_n, "tree size")->check(CLI::PositiveNumber);
  sim->add_option("--p", sim_p, "fire probability");
  sim->add_option("--seed", sim_seed, "seed");
  sim->add_option("--K", sim_K, "fires recorded in the summary row");
  sim->add_option("--dump-tree", dump_tree_path, "write the generated tree to a file");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    return run_simulate(sim_n, sim_p, sim_seed, sim_K, dump_tree_path);
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (app.get_subcommand(names[i])->parsed()) {
      return run_experiment_cmd(names[i], opts[i]);
    }
  }
  std::fprintf(stderr, "firetree: no subcommand given\n");
  return 1;
}
