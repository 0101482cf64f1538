#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "cut_tree.hpp"
#include "fire.hpp"
#include "oracle.hpp"
#include "tree.hpp"
#include "walk.hpp"

namespace firetree {

namespace {

using nlohmann::json;

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Runs fn(trial_index, rng) for every trial over a worker pool; rows land in
// trial order so the output is independent of scheduling. Exceptions from
// workers are rethrown on the caller thread.
template <typename Row, typename Fn>
std::vector<Row> map_trials(std::uint64_t trials, unsigned workers,
                            std::uint64_t master_seed, Fn&& fn) {
  std::vector<Row> rows(trials);
  unsigned w = std::max(1u, workers);
  if (w == 1 || trials < 2) {
    for (std::uint64_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(master_seed, t));
      rows[t] = fn(t, rng);
    }
    return rows;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (unsigned i = 0; i < w; ++i) {
    pool.emplace_back([&] {
      for (;;) {
        std::uint64_t t = next.fetch_add(1);
        if (t >= trials) return;
        try {
          Rng rng(derive_seed(master_seed, t));
          rows[t] = fn(t, rng);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

enum class Regime { Supercritical, Critical, Subcritical };

struct Resolved {
  double p = 0.0;
  double c_equiv = 0.0;  // n p / ln n
  Regime regime = Regime::Critical;
  std::string source;
};

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Supercritical: return "supercritical";
    case Regime::Critical: return "critical";
    case Regime::Subcritical: return "subcritical";
  }
  return "?";
}

// Exactly one of c / subcrit_a / p may be given; the defaults kick in
// otherwise. Derived probabilities must land strictly inside (0,1); an
// explicit p is also allowed to sit on the boundary for degenerate runs.
Resolved resolve_regime(const ExperimentConfig& cfg, std::uint64_t n,
                        std::optional<double> def_c, std::optional<double> def_a,
                        std::optional<double> def_p) {
  int given = (cfg.c ? 1 : 0) + (cfg.p ? 1 : 0) + (cfg.subcrit_a ? 1 : 0);
  if (given > 1) {
    throw std::invalid_argument("give at most one of c, p, subcrit-a");
  }
  std::optional<double> c = cfg.c, a = cfg.subcrit_a, p = cfg.p;
  if (given == 0) {
    c = def_c;
    a = def_a;
    p = def_p;
  }
  Resolved out;
  double ln_n = std::log(static_cast<double>(n));
  if (c) {
    if (!(*c >= 0)) throw std::invalid_argument("c must be >= 0");
    out.p = *c * ln_n / static_cast<double>(n);
    out.regime = Regime::Critical;
    out.source = "c";
    if (*c > 0 && !(out.p > 0.0 && out.p < 1.0)) {
      throw std::invalid_argument("derived p = c ln n / n falls outside (0,1)");
    }
  } else if (a) {
    if (!(*a > 0)) throw std::invalid_argument("subcrit-a must be > 0");
    out.p = std::pow(static_cast<double>(n), -*a);
    out.regime = Regime::Subcritical;
    out.source = "subcrit-a";
    if (!(out.p > 0.0 && out.p < 1.0)) {
      throw std::invalid_argument("derived p = n^-a falls outside (0,1)");
    }
  } else if (p) {
    if (!(*p >= 0.0 && *p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
    out.p = *p;
    out.source = "p";
    double ratio = static_cast<double>(n) * out.p / ln_n;
    out.regime = ratio <= 0.5 ? Regime::Supercritical
                              : (ratio >= 2.0 ? Regime::Subcritical : Regime::Critical);
  } else {
    throw std::invalid_argument("no regime parameter given and no default");
  }
  out.c_equiv = static_cast<double>(n) * out.p / ln_n;
  return out;
}

json test_json(const TestReport& t) {
  json j;
  j["name"] = t.name;
  j["statistic"] = t.statistic;
  j["threshold"] = t.threshold;
  if (t.p_value >= 0) {
    j["p_value"] = t.p_value;
  } else {
    j["p_value"] = nullptr;
  }
  j["n_samples"] = t.n_samples;
  j["verdict"] = t.verdict();
  return j;
}

TestReport bound_test(const std::string& name, double statistic, double threshold,
                      bool pass, std::uint64_t n_samples) {
  TestReport t;
  t.name = name;
  t.statistic = statistic;
  t.threshold = threshold;
  t.n_samples = n_samples;
  t.passed = pass;
  return t;
}

TestReport interval_test(const std::string& name, double statistic, double center,
                         double tol, std::uint64_t n_samples) {
  return bound_test(name, statistic, tol, std::abs(statistic - center) <= tol,
                    n_samples);
}

void finish_report(ExperimentReport& rep, const ExperimentConfig& cfg,
                   json estimates) {
  json j;
  j["experiment"] = rep.name;
  j["config"]["n"] = rep.n;
  j["config"]["trials"] = rep.trials;
  j["config"]["seed"] = cfg.seed;
  j["config"]["workers"] = cfg.workers;
  j["config"]["K"] = cfg.K;
  j["resolved_p"] = rep.resolved_p;
  j["dropped_trials"] = rep.dropped_trials;
  j["estimates"] = std::move(estimates);
  json tests = json::array();
  for (const TestReport& t : rep.tests) tests.push_back(test_json(t));
  j["tests"] = tests;
  j["passed"] = rep.all_passed();
  rep.summary_json = j.dump(2) + "\n";

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::filesystem::path base(cfg.out_dir);
    std::ofstream csv(base / (rep.name + ".csv"), std::ios::binary);
    csv << rep.csv;
    if (!csv) throw std::runtime_error("failed to write CSV output");
    std::ofstream js(base / (rep.name + ".json"), std::ios::binary);
    js << rep.summary_json;
    if (!js) throw std::runtime_error("failed to write JSON output");
  }
}

struct FireRow {
  std::uint64_t fireproof = 0;
  std::uint64_t root_block = 0;
  std::uint32_t root_fire = 0;
  std::uint64_t largest_fireproof = 0;
};

FireRow fire_trial(std::uint64_t n, double p, Rng& rng) {
  Tree tree = Tree::generate_recursive(n, rng);
  EdgeRandomness r = draw_edge_randomness(tree, p, rng);
  FireOutcome out = run_fire_dynamics(tree, r);
  return {out.fireproof_count, out.root_block_size, out.root_fire_index,
          largest_fireproof_component(out)};
}

// ---------------------------------------------------------------------------
// phase_transition: law of I_n/n across the three regimes (default critical).

ExperimentReport exp_phase_transition(const ExperimentConfig& cfg) {
  std::uint64_t n = cfg.n ? cfg.n : 100000;
  Resolved reg = resolve_regime(cfg, n, 1.0, std::nullopt, std::nullopt);
  std::uint64_t trials =
      cfg.trials ? cfg.trials : (reg.regime == Regime::Critical ? 2000 : 500);

  auto rows = map_trials<FireRow>(trials, cfg.workers, cfg.seed,
                                  [&](std::uint64_t, Rng& rng) {
                                    return fire_trial(n, reg.p, rng);
                                  });

  ExperimentReport rep;
  rep.name = "phase_transition";
  rep.n = n;
  rep.resolved_p = reg.p;
  rep.trials = trials;
  rep.csv = "trial,seed,n,p,I,I_over_n\n";
  std::vector<double> scaled(trials);
  for (std::uint64_t t = 0; t < trials; ++t) {
    scaled[t] = static_cast<double>(rows[t].fireproof) / static_cast<double>(n);
    rep.csv += std::to_string(t) + "," + std::to_string(derive_seed(cfg.seed, t)) +
               "," + std::to_string(n) + "," + fmt_g(reg.p) + "," +
               std::to_string(rows[t].fireproof) + "," + fmt_g(scaled[t]) + "\n";
  }

  MeanCi mean = mean_ci(scaled);
  json est;
  est["regime"] = regime_name(reg.regime);
  est["c_equiv"] = reg.c_equiv;
  est["mean_I_over_n"] = mean.mean;
  est["se_I_over_n"] = mean.se;
  if (reg.regime == Regime::Supercritical) {
    rep.tests.push_back(bound_test("supercritical mean I/n >= 0.9", mean.mean, 0.9,
                                   mean.mean >= 0.9, trials));
  } else if (reg.regime == Regime::Subcritical) {
    rep.tests.push_back(bound_test("subcritical mean I/n <= 0.1", mean.mean, 0.1,
                                   mean.mean <= 0.1, trials));
  } else {
    double ks = ks_statistic(scaled, ReferenceLaw::truncated_exp_with_atom(reg.c_equiv));
    est["ks_vs_trunc_exp_atom"] = ks;
    rep.tests.push_back(
        bound_test("critical KS(I/n vs min(Exp(c),1)) <= 0.05", ks, 0.05, ks <= 0.05,
                   trials));
  }
  finish_report(rep, cfg, std::move(est));
  return rep;
}

// ---------------------------------------------------------------------------
// subcritical_scaling: p I_n / ln(1/p) against Exp(1) (or min(Exp(1),c) when
// run in the critical regime as a cross-check).

ExperimentReport exp_subcritical_scaling(const ExperimentConfig& cfg) {
  std::uint64_t n = cfg.n ? cfg.n : 1000000;
  Resolved reg = resolve_regime(cfg, n, std::nullopt, 0.5, std::nullopt);
  std::uint64_t trials = cfg.trials ? cfg.trials : 1000;
  double scale = reg.p / std::log(1.0 / reg.p);

  auto rows = map_trials<FireRow>(trials, cfg.workers, cfg.seed,
                                  [&](std::uint64_t, Rng& rng) {
                                    return fire_trial(n, reg.p, rng);
                                  });

  ExperimentReport rep;
  rep.name = "subcritical_scaling";
  rep.n = n;
  rep.resolved_p = reg.p;
  rep.trials = trials;
  rep.csv = "trial,seed,n,p,I,scaled_I\n";
  std::vector<double> scaled(trials);
  for (std::uint64_t t = 0; t < trials; ++t) {
    scaled[t] = scale * static_cast<double>(rows[t].fireproof);
    rep.csv += std::to_string(t) + "," + std::to_string(derive_seed(cfg.seed, t)) +
               "," + std::to_string(n) + "," + fmt_g(reg.p) + "," +
               std::to_string(rows[t].fireproof) + "," + fmt_g(scaled[t]) + "\n";
  }

  MeanCi mean = mean_ci(scaled);
  json est;
  est["regime"] = regime_name(reg.regime);
  est["mean_scaled_I"] = mean.mean;
  est["se_scaled_I"] = mean.se;
  if (reg.source == "c" || (reg.regime == Regime::Critical && reg.source == "p")) {
    // In the critical regime the same scaling converges to min(Exp(1), c);
    // dividing by c maps it onto the stock atom law.
    double c = reg.c_equiv;
    std::vector<double> unit(scaled);
    for (double& x : unit) x /= c;
    double ks = ks_statistic(unit, ReferenceLaw::truncated_exp_with_atom(c));
    est["ks_vs_min_exp1_c"] = ks;
    rep.tests.push_back(bound_test("critical cross-check KS(scaled I vs min(Exp(1),c)) <= 0.1",
                                   ks, 0.1, ks <= 0.1, trials));
  } else {
    double ks = ks_statistic(scaled, ReferenceLaw::exponential(1.0));
    est["ks_vs_exp1"] = ks;
    rep.tests.push_back(bound_test("KS(p I / ln(1/p) vs Exp(1)) <= 0.1", ks, 0.1,
                                   ks <= 0.1, trials));
  }
  finish_report(rep, cfg, std::move(est));
  return rep;
}

// ---------------------------------------------------------------------------
// root_component: joint behaviour of (root burns, I/n, b0/n).

ExperimentReport exp_root_component(const ExperimentConfig& cfg) {
  std::uint64_t n = cfg.n ? cfg.n : 100000;
  Resolved reg = resolve_regime(cfg, n, 1.0, std::nullopt, std::nullopt);
  std::uint64_t trials = cfg.trials ? cfg.trials : 2000;

  auto rows = map_trials<FireRow>(trials, cfg.workers, cfg.seed,
                                  [&](std::uint64_t, Rng& rng) {
                                    return fire_trial(n, reg.p, rng);
                                  });

  ExperimentReport rep;
  rep.name = "root_component";
  rep.n = n;
  rep.resolved_p = reg.p;
  rep.trials = trials;
  rep.csv = "trial,seed,n,p,root_burnt,I_over_n,b0_over_n\n";
  std::uint64_t burnt_count = 0;
  std::vector<double> burnt_sum;  // I/n + b0/n on root-burnt trials
  for (std::uint64_t t = 0; t < trials; ++t) {
    double i_over_n = static_cast<double>(rows[t].fireproof) / static_cast<double>(n);
    double b0_over_n = static_cast<double>(rows[t].root_block) / static_cast<double>(n);
    bool burnt = rows[t].root_fire != 0;
    if (burnt) {
      ++burnt_count;
      burnt_sum.push_back(i_over_n + b0_over_n);
    }
    rep.csv += std::to_string(t) + "," + std::to_string(derive_seed(cfg.seed, t)) +
               "," + std::to_string(n) + "," + fmt_g(reg.p) + "," +
               (burnt ? "1" : "0") + "," + fmt_g(i_over_n) + "," + fmt_g(b0_over_n) +
               "\n";
  }

  double burn_prob = static_cast<double>(burnt_count) / static_cast<double>(trials);
  double limit = -std::expm1(-reg.c_equiv);  // 1 - e^-c
  json est;
  est["root_burn_probability"] = burn_prob;
  est["root_burn_limit"] = limit;
  est["root_burnt_trials"] = burnt_count;
  rep.tests.push_back(interval_test("P(root burns) = 1 - e^-c +- 0.03", burn_prob,
                                    limit, 0.03, trials));
  if (burnt_count >= 30) {
    MeanCi m = mean_ci(burnt_sum);
    est["mean_I_plus_b0_given_burnt"] = m.mean;
    rep.tests.push_back(interval_test(
        "mean(I/n + b0/n | root burnt) = 1 +- 0.05", m.mean, 1.0, 0.05, burnt_count));
  }
  finish_report(rep, cfg, std::move(est));
  return rep;
}

// ---------------------------------------------------------------------------
// connectivity: P(uniform vertex and root share a fireproof subtree), both by
// direct simulation and through the spine-identity estimator
// E[exp(ln(1-p) (h(X) + sum_i zeta_i(|T_i|)))].

ExperimentReport exp_connectivity(const ExperimentConfig& cfg) {
  std::uint64_t n = cfg.n ? cfg.n : 100000;
  Resolved reg = resolve_regime(cfg, n, 1.0, std::nullopt, std::nullopt);
  std::uint64_t trials = cfg.trials ? cfg.trials : 2000;

  struct Row {
    std::uint8_t same = 0;
    std::uint64_t spine_count = 0;
  };
  auto rows = map_trials<Row>(trials, cfg.workers, cfg.seed,
                              [&](std::uint64_t, Rng& rng) {
    Tree tree = Tree::generate_recursive(n, rng);
    EdgeRandomness r = draw_edge_randomness(tree, reg.p, rng);
    FireOutcome out = run_fire_dynamics(tree, r);
    Vertex x = static_cast<Vertex>(rng.range(1, n));
    Row row;
    row.same = same_fireproof_component(out, tree, 1, x) ? 1 : 0;
    // Independent spine sample: fresh tree, fresh target, fresh fragmentations.
    Tree tree2 = Tree::generate_recursive(n, rng);
    Vertex x2 = static_cast<Vertex>(rng.range(1, n));
    SpinalDecomposition sd = spinal_decomposition(tree2, x2);
    std::uint64_t count = sd.height();
    for (std::uint64_t size : sd.component_sizes) {
      count += zeta_of_random_recursive(size, rng);
    }
    row.spine_count = count;
    return row;
  });

  ExperimentReport rep;
  rep.name = "connectivity";
  rep.n = n;
  rep.resolved_p = reg.p;
  rep.trials = trials;
  rep.csv = "trial,seed,n,p,same_component,spine_cut_count,spine_term\n";
  std::vector<double> direct(trials), spine_terms(trials);
  double log1mp = std::log1p(-reg.p);
  for (std::uint64_t t = 0; t < trials; ++t) {
    direct[t] = rows[t].same;
    spine_terms[t] = std::exp(log1mp * static_cast<double>(rows[t].spine_count));
    rep.csv += std::to_string(t) + "," + std::to_string(derive_seed(cfg.seed, t)) +
               "," + std::to_string(n) + "," + fmt_g(reg.p) + "," +
               std::to_string(rows[t].same) + "," +
               std::to_string(rows[t].spine_count) + "," + fmt_g(spine_terms[t]) +
               "\n";
  }

  MeanCi direct_mean = mean_ci(direct);
  MeanCi spine_mean = mean_ci(spine_terms);
  json est;
  est["regime"] = regime_name(reg.regime);
  est["direct_estimate"] = direct_mean.mean;
  est["direct_se"] = direct_mean.se;
  est["spine_estimate"] = spine_mean.mean;
  est["spine_se"] = spine_mean.se;
  est["limit_e_minus_c"] = std::exp(-reg.c_equiv);

  if (reg.regime == Regime::Supercritical) {
    rep.tests.push_back(bound_test("supercritical same-component probability >= 0.9",
                                   direct_mean.mean, 0.9, direct_mean.mean >= 0.9,
                                   trials));
  } else {
    rep.tests.push_back(interval_test("P(same fireproof subtree) = e^-c +- 0.05",
                                      direct_mean.mean, std::exp(-reg.c_equiv), 0.05,
                                      trials));
  }
  double pooled = std::sqrt(direct_mean.se * direct_mean.se +
                            spine_mean.se * spine_mean.se);
  double gap = std::abs(direct_mean.mean - spine_mean.mean);
  rep.tests.push_back(bound_test("direct vs spine estimator within 3 pooled SE", gap,
                                 3.0 * pooled, gap <= 3.0 * pooled, trials));
  finish_report(rep, cfg, std::move(est));
  return rep;
}

// ---------------------------------------------------------------------------
// largest_fireproof: size of the largest fireproof component, scaled per regime.

ExperimentReport exp_largest_fireproof(const ExperimentConfig& cfg) {
  std::uint64_t n = cfg.n ? cfg.n : 100000;
  Resolved reg = resolve_regime(cfg, n, 1.0, std::nullopt, std::nullopt);
  std::uint64_t trials = cfg.trials ? cfg.trials : (reg.regime == Regime::Critical ? 2000 : 500);

  auto rows = map_trials<FireRow>(trials, cfg.workers, cfg.seed,
                                  [&](std::uint64_t, Rng& rng) {
                                    return fire_trial(n, reg.p, rng);
                                  });

  ExperimentReport rep;
  rep.name = "largest_fireproof";
  rep.n = n;
  rep.resolved_p = reg.p;
  rep.trials = trials;
  rep.csv = "trial,seed,n,p,root_burnt,f1,f1_over_n,f1_times_p,f1_lnn_over_n\n";
  std::vector<double> over_n(trials), times_p(trials), lnn_over_n(trials);
  std::vector<double> fireproof_root_over_n;
  double ln_n = std::log(static_cast<double>(n));
  for (std::uint64_t t = 0; t < trials; ++t) {
    double f1 = static_cast<double>(rows[t].largest_fireproof);
    over_n[t] = f1 / static_cast<double>(n);
    times_p[t] = f1 * reg.p;
    lnn_over_n[t] = f1 * ln_n / static_cast<double>(n);
    if (rows[t].root_fire == 0) fireproof_root_over_n.push_back(over_n[t]);
    rep.csv += std::to_string(t) + "," + std::to_string(derive_seed(cfg.seed, t)) +
               "," + std::to_string(n) + "," + fmt_g(reg.p) + "," +
               (rows[t].root_fire != 0 ? "1" : "0") + "," +
               std::to_string(rows[t].largest_fireproof) + "," + fmt_g(over_n[t]) +
               "," + fmt_g(times_p[t]) + "," + fmt_g(lnn_over_n[t]) + "\n";
  }

  auto quantile = [](std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    std::size_t idx = static_cast<std::size_t>(q * (v.size() - 1));
    return v[idx];
  };

  json est;
  est["regime"] = regime_name(reg.regime);
  est["median_f1_over_n"] = quantile(over_n, 0.5);
  est["q90_f1_over_n"] = quantile(over_n, 0.9);
  est["median_f1_times_p"] = quantile(times_p, 0.5);
  est["q99_f1_times_p"] = quantile(times_p, 0.99);
  est["median_f1_lnn_over_n"] = quantile(lnn_over_n, 0.5);
  if (reg.regime == Regime::Supercritical) {
    MeanCi m = mean_ci(over_n);
    est["mean_f1_over_n"] = m.mean;
    rep.tests.push_back(bound_test("supercritical mean f1/n >= 0.9", m.mean, 0.9,
                                   m.mean >= 0.9, trials));
  } else if (reg.regime == Regime::Subcritical) {
    double q99 = quantile(times_p, 0.99);
    rep.tests.push_back(bound_test("subcritical 99% of p*f1 <= 50", q99, 50.0,
                                   q99 <= 50.0, trials));
  } else {
    if (fireproof_root_over_n.size() >= 30) {
      MeanCi m = mean_ci(fireproof_root_over_n);
      est["mean_f1_over_n_root_fireproof"] = m.mean;
      est["root_fireproof_trials"] = fireproof_root_over_n.size();
      rep.tests.push_back(bound_test(
          "critical mean(f1/n | root fireproof) >= 0.85", m.mean, 0.85,
          m.mean >= 0.85, fireproof_root_over_n.size()));
    }
  }
  finish_report(rep, cfg, std::move(est));
  return rep;
}

// ---------------------------------------------------------------------------
// burnt_sequence: fire times and burnt block sizes in the critical regime.

ExperimentReport exp_burnt_sequence(const ExperimentConfig& cfg) {
  std::uint64_t n = cfg.n ? cfg.n : 100000;
  Resolved reg = resolve_regime(cfg, n, 1.0, std::nullopt, std::nullopt);
  std::uint64_t trials = cfg.trials ? cfg.trials : 5000;
  unsigned K = cfg.K;
  double c = reg.c_equiv;

  struct Row {
    std::uint32_t root_fire = 0;
    std::uint32_t num_fires = 0;
    std::vector<std::uint64_t> thetas;
    std::vector<std::uint64_t> blocks;
  };
  auto rows = map_trials<Row>(trials, cfg.workers, cfg.seed,
                              [&](std::uint64_t, Rng& rng) {
    Tree tree = Tree::generate_recursive(n, rng);
    EdgeRandomness r = draw_edge_randomness(tree, reg.p, rng);
    FireOutcome out = run_fire_dynamics(tree, r);
    Row row;
    row.root_fire = out.root_fire_index;
    row.num_fires = static_cast<std::uint32_t>(out.fires.size());
    unsigned keep = std::min<std::size_t>(K, out.fires.size());
    for (unsigned i = 0; i < keep; ++i) {
      row.thetas.push_back(out.fires[i].theta);
      row.blocks.push_back(out.fires[i].block.size());
    }
    return row;
  });

  ExperimentReport rep;
  rep.name = "burnt_sequence";
  rep.n = n;
  rep.resolved_p = reg.p;
  rep.trials = trials;
  rep.csv = "trial,seed,n,p,num_fires,root_fire_index";
  for (unsigned i = 1; i <= K; ++i) rep.csv += ",theta_" + std::to_string(i);
  for (unsigned i = 1; i <= K; ++i) rep.csv += ",b_" + std::to_string(i);
  rep.csv += "\n";

  double scale = std::log(static_cast<double>(n)) / static_cast<double>(n);
  std::vector<double> theta1_scaled;
  std::vector<std::uint64_t> root_hist(7, 0);  // bins 1..5, [0] unused, [6] other
  for (std::uint64_t t = 0; t < trials; ++t) {
    const Row& row = rows[t];
    rep.csv += std::to_string(t) + "," + std::to_string(derive_seed(cfg.seed, t)) +
               "," + std::to_string(n) + "," + fmt_g(reg.p) + "," +
               std::to_string(row.num_fires) + "," + std::to_string(row.root_fire);
    for (unsigned i = 0; i < K; ++i) {
      rep.csv += ",";
      if (i < row.thetas.size()) rep.csv += std::to_string(row.thetas[i]);
    }
    for (unsigned i = 0; i < K; ++i) {
      rep.csv += ",";
      if (i < row.blocks.size()) rep.csv += std::to_string(row.blocks[i]);
    }
    rep.csv += "\n";
    if (!row.thetas.empty()) {
      theta1_scaled.push_back(scale * static_cast<double>(row.thetas[0]));
    } else {
      ++rep.dropped_trials;  // no fire at all; theta_1 undefined
    }
    if (row.root_fire >= 1 && row.root_fire <= 5) {
      ++root_hist[row.root_fire];
    } else {
      ++root_hist[6];
    }
  }

  json est;
  est["c_equiv"] = c;

  if (c > 0 && !theta1_scaled.empty()) {
    double ks_theta1 = ks_statistic(theta1_scaled, ReferenceLaw::exponential(c));
    est["ks_theta1_vs_exp_c"] = ks_theta1;
    rep.tests.push_back(bound_test("KS(theta_1 ln n / n vs Exp(c)) <= 0.05",
                                   ks_theta1, 0.05, ks_theta1 <= 0.05,
                                   theta1_scaled.size()));
  }

  // Root fire index against the q_j differences.
  std::vector<double> probs;
  std::vector<std::uint64_t> observed;
  double q_prev = q_j(c, 0);
  json qjson;
  for (unsigned j = 1; j <= 5; ++j) {
    double q_cur = q_j(c, j);
    probs.push_back(q_prev - q_cur);
    observed.push_back(root_hist[j]);
    qjson["q_" + std::to_string(j)] = q_cur;
    q_prev = q_cur;
  }
  probs.push_back(q_prev);  // root survives the first five fires
  observed.push_back(root_hist[6]);
  est["q_values"] = qjson;
  rep.tests.push_back(chi_square_test("root fire index vs q_{j-1} - q_j (j <= 5)",
                                      observed, probs, 0.001));

  double first_fire_prob =
      static_cast<double>(root_hist[1]) / static_cast<double>(trials);
  est["P_root_burns_fire_1"] = first_fire_prob;
  rep.tests.push_back(interval_test("P(root burns with fire 1) = c/(c+1) +- 0.03",
                                    first_fire_prob, c / (c + 1.0), 0.03, trials));

  // Conditional block-size laws given the root burns with fire j (j <= 3 by
  // default: acceptance probability decays with j). References are sampled
  // from the limit chain by rejection with weight e^-gamma_j prod(1-e^-gamma_i).
  unsigned j_cap = 3;
  std::uint64_t ref_size = 20000;
  for (unsigned j = 1; j <= j_cap; ++j) {
    std::vector<double> bj_over_n;
    std::vector<std::vector<double>> lnbi(j >= 1 ? j - 1 : 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
      const Row& row = rows[t];
      if (row.root_fire != j || row.blocks.size() < j) continue;
      bj_over_n.push_back(static_cast<double>(row.blocks[j - 1]) /
                          static_cast<double>(n));
      for (unsigned i = 1; i < j; ++i) {
        lnbi[i - 1].push_back(std::log(static_cast<double>(row.blocks[i - 1])) /
                              std::log(static_cast<double>(n)));
      }
    }
    if (bj_over_n.size() < 100) continue;

    Rng ref_rng(derive_seed(cfg.seed ^ 0x5ca1ab1e5ca1ab1eULL, j));
    std::vector<double> ref_bj;
    std::vector<std::vector<double>> ref_zi(j >= 1 ? j - 1 : 0);
    while (ref_bj.size() < ref_size) {
      std::vector<double> gammas(j);
      double g = 0.0;
      for (unsigned i = 0; i < j; ++i) {
        g += ref_rng.exponential(c);
        gammas[i] = g;
      }
      double accept = std::exp(-gammas[j - 1]);
      for (unsigned i = 0; i + 1 < j; ++i) accept *= -std::expm1(-gammas[i]);
      if (ref_rng.uniform() >= accept) continue;
      ref_bj.push_back(std::exp(-gammas[j - 1]));
      for (unsigned i = 0; i + 1 < j; ++i) {
        ref_zi[i].push_back(
            ReferenceLaw::conditioned_exp(gammas[i]).sample(ref_rng));
      }
    }

    std::string base = "root burns with fire " + std::to_string(j);
    double ks_b = ks_two_sample(bj_over_n, ref_bj);
    est["conditional_fire_" + std::to_string(j)]["trials"] = bj_over_n.size();
    est["conditional_fire_" + std::to_string(j)]["ks_bj_over_n"] = ks_b;
    rep.tests.push_back(bound_test(base + ": KS(b_j/n vs e^-gamma_j) <= 0.1", ks_b,
                                   0.1, ks_b <= 0.1, bj_over_n.size()));
    for (unsigned i = 1; i < j; ++i) {
      double ks_z = ks_two_sample(lnbi[i - 1], ref_zi[i - 1]);
      est["conditional_fire_" + std::to_string(j)]
         ["ks_ln_b" + std::to_string(i)] = ks_z;
      rep.tests.push_back(bound_test(
          base + ": KS(ln b_" + std::to_string(i) + "/ln n vs Z_" +
              std::to_string(i) + ") <= 0.1",
          ks_z, 0.1, ks_z <= 0.1, lnbi[i - 1].size()));
    }
  }

  finish_report(rep, cfg, std::move(est));
  return rep;
}

// ---------------------------------------------------------------------------
// cut_tree_laws: zeta moments, reduced-tree lengths against Beta(k,1), and the
// first root-path block against the xi law.

ExperimentReport exp_cut_tree_laws(const ExperimentConfig& cfg) {
  std::uint64_t n = cfg.n ? cfg.n : 10000;
  if (n < 2) throw std::invalid_argument("cut_tree_laws needs n >= 2");
  std::uint64_t trials = cfg.trials ? cfg.trials : 2000;
  std::uint64_t xi_samples = 100000;

  struct Row {
    std::uint64_t zeta = 0;
    std::uint64_t L1 = 0, L2 = 0, L3 = 0;
    std::uint32_t first_block = 0;
  };
  auto rows = map_trials<Row>(trials, cfg.workers, cfg.seed,
                              [&](std::uint64_t, Rng& rng) {
    Tree tree = Tree::generate_recursive(n, rng);
    EdgeRandomness r = draw_edge_randomness(tree, 0.0, rng);
    CutTree cut = build_cut_tree(tree, r);
    Row row;
    row.zeta = zeta(cut);
    row.L1 = reduced_tree(cut, 1, rng).length;
    row.L2 = reduced_tree(cut, 2, rng).length;
    row.L3 = reduced_tree(cut, 3, rng).length;
    row.first_block = root_path_blocks(cut).front().first;
    return row;
  });

  // First block of the root path only: the first removed edge is the global
  // minimum priority, i.e. a uniform edge, and the block split off is the
  // subtree below that edge's child endpoint. Same law as
  // root_path_blocks(...)[0].first at a fraction of the cost.
  auto xi_rows = map_trials<std::uint32_t>(
      xi_samples, cfg.workers, cfg.seed ^ 0x7e57ab1e7e57ab1eULL,
      [&](std::uint64_t, Rng& rng) {
        Tree tree = Tree::generate_recursive(n, rng);
        Vertex v = static_cast<Vertex>(rng.range(2, n));
        return static_cast<std::uint32_t>(subtree_size(tree, v));
      });

  ExperimentReport rep;
  rep.name = "cut_tree_laws";
  rep.n = n;
  rep.resolved_p = 0.0;
  rep.trials = trials;
  rep.csv = "trial,seed,n,zeta,zeta_scaled,L1,L2,L3,first_block\n";
  double scale = std::log(static_cast<double>(n)) / static_cast<double>(n);
  std::vector<double> zeta_scaled(trials), zeta_sq(trials);
  std::vector<double> l1(trials), l2(trials), l3(trials);
  for (std::uint64_t t = 0; t < trials; ++t) {
    zeta_scaled[t] = scale * static_cast<double>(rows[t].zeta);
    zeta_sq[t] = zeta_scaled[t] * zeta_scaled[t];
    l1[t] = scale * static_cast<double>(rows[t].L1);
    l2[t] = scale * static_cast<double>(rows[t].L2);
    l3[t] = scale * static_cast<double>(rows[t].L3);
    rep.csv += std::to_string(t) + "," + std::to_string(derive_seed(cfg.seed, t)) +
               "," + std::to_string(n) + "," + std::to_string(rows[t].zeta) + "," +
               fmt_g(zeta_scaled[t]) + "," + std::to_string(rows[t].L1) + "," +
               std::to_string(rows[t].L2) + "," + std::to_string(rows[t].L3) + "," +
               std::to_string(rows[t].first_block) + "\n";
  }

  json est;
  MeanCi zmean = mean_ci(zeta_scaled);
  MeanCi zsq = mean_ci(zeta_sq);
  est["mean_zeta_scaled"] = zmean.mean;
  est["second_moment_zeta_scaled"] = zsq.mean;
  rep.tests.push_back(interval_test("mean(zeta ln n / n) = 1 +- 0.1", zmean.mean,
                                    1.0, 0.1, trials));
  rep.tests.push_back(interval_test("second moment of scaled zeta = 1 +- 0.2",
                                    zsq.mean, 1.0, 0.2, trials));

  const std::vector<double>* ls[3] = {&l1, &l2, &l3};
  for (unsigned k = 1; k <= 3; ++k) {
    double ks = ks_statistic(*ls[k - 1], ReferenceLaw::beta(k));
    est["ks_L" + std::to_string(k) + "_vs_beta"] = ks;
    rep.tests.push_back(bound_test(
        "KS(L_" + std::to_string(k) + " ln n / n vs Beta(" + std::to_string(k) +
            ",1)) <= 0.1",
        ks, 0.1, ks <= 0.1, trials));
  }

  // chi-square of the first block against P(xi = k) = 1/(k(k+1)), k <= 20,
  // remaining mass pooled.
  std::vector<std::uint64_t> observed(21, 0);
  for (std::uint32_t fb : xi_rows) {
    if (fb <= 20) {
      ++observed[fb - 1];
    } else {
      ++observed[20];
    }
  }
  std::vector<double> probs(21, 0.0);
  double tail = 1.0;
  for (unsigned k = 1; k <= 20; ++k) {
    probs[k - 1] = 1.0 / (static_cast<double>(k) * (k + 1.0));
    tail -= probs[k - 1];
  }
  probs[20] = tail;
  rep.tests.push_back(
      chi_square_test("first root-path block vs xi pmf (k <= 20)", observed, probs,
                      0.001));
  est["xi_samples"] = xi_samples;

  finish_report(rep, cfg, std::move(est));
  return rep;
}

// ---------------------------------------------------------------------------
// coupling_check: exact field-by-field equality between the direct dynamics
// and the cut-tree reconstruction on random instances.

ExperimentReport exp_coupling_check(const ExperimentConfig& cfg) {
  std::uint64_t cap = std::min<std::uint64_t>(cfg.n ? cfg.n : 500, 500);
  if (cap < 2) cap = 2;
  std::uint64_t trials = cfg.trials ? cfg.trials : 1000;

  struct Row {
    std::uint32_t n = 0;
    double p = 0.0;
    std::uint8_t match = 0;
  };
  auto rows = map_trials<Row>(trials, cfg.workers, cfg.seed,
                              [&](std::uint64_t, Rng& rng) {
    Row row;
    row.n = static_cast<std::uint32_t>(rng.range(2, cap));
    row.p = cfg.p ? *cfg.p : rng.uniform();
    Tree tree = Tree::generate_recursive(row.n, rng);
    EdgeRandomness r = draw_edge_randomness(tree, row.p, rng);
    FireOutcome direct = run_fire_dynamics(tree, r);
    CutTree cut = build_cut_tree(tree, r);
    MarkedCutTree marked = apply_mark_process(cut, r);
    FireOutcome derived = fire_outcome_from_marks(marked, tree, r);
    row.match = (direct == derived) ? 1 : 0;
    return row;
  });

  ExperimentReport rep;
  rep.name = "coupling_check";
  rep.n = cap;
  rep.resolved_p = cfg.p ? *cfg.p : -1.0;
  rep.trials = trials;
  rep.csv = "trial,seed,n,p,match\n";
  std::uint64_t mismatches = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    if (!rows[t].match) ++mismatches;
    rep.csv += std::to_string(t) + "," + std::to_string(derive_seed(cfg.seed, t)) +
               "," + std::to_string(rows[t].n) + "," + fmt_g(rows[t].p) + "," +
               std::to_string(rows[t].match) + "\n";
  }
  json est;
  est["mismatches"] = mismatches;
  rep.tests.push_back(bound_test("cut-tree coupling mismatches == 0",
                                 static_cast<double>(mismatches), 0.0,
                                 mismatches == 0, trials));
  finish_report(rep, cfg, std::move(est));
  return rep;
}

// ---------------------------------------------------------------------------
// oracle_check: Monte Carlo against the exact brute-force law on small n.

ExperimentReport exp_oracle_check(const ExperimentConfig& cfg) {
  std::uint64_t trials = cfg.trials ? cfg.trials : 1000000;
  std::vector<double> ps =
      cfg.p ? std::vector<double>{*cfg.p} : std::vector<double>{0.1, 0.4, 0.8};
  std::uint32_t n_max = cfg.n ? static_cast<std::uint32_t>(std::min<std::uint64_t>(cfg.n, 6)) : 6;

  ExperimentReport rep;
  rep.name = "oracle_check";
  rep.n = n_max;
  rep.resolved_p = ps.front();
  rep.csv = "n,p,trials,root_burn_obs,root_burn_exact,pvalue_I,pvalue_b0,pvalue_root\n";

  struct Hist {
    std::vector<std::uint64_t> i_counts;
    std::vector<std::uint64_t> b0_counts;
    std::uint64_t burn = 0;
  };

  std::uint64_t combo_index = 0;
  std::uint64_t total_trials = 0;
  json est;
  for (std::uint32_t nn = 2; nn <= n_max; ++nn) {
    for (double p : ps) {
      OracleLaw law = brute_force_avg_over_trees(nn, p);
      std::uint64_t combo_seed = derive_seed(cfg.seed, 0xC0FFEE00ULL + combo_index);
      // Chunk boundaries and per-trial seeds depend only on indices, so the
      // merged histograms are identical for any worker count.
      const std::uint64_t chunks = 64;
      auto hists = map_trials<Hist>(
          chunks, cfg.workers, combo_seed, [&](std::uint64_t chunk, Rng&) {
            Hist h;
            h.i_counts.assign(nn + 1, 0);
            h.b0_counts.assign(nn + 1, 0);
            std::uint64_t lo = trials * chunk / chunks;
            std::uint64_t hi = trials * (chunk + 1) / chunks;
            for (std::uint64_t t = lo; t < hi; ++t) {
              Rng rng(derive_seed(combo_seed, t));
              FireRow row = fire_trial(nn, p, rng);
              ++h.i_counts[row.fireproof];
              ++h.b0_counts[row.root_block];
              if (row.root_fire != 0) ++h.burn;
            }
            return h;
          });
      Hist total;
      total.i_counts.assign(nn + 1, 0);
      total.b0_counts.assign(nn + 1, 0);
      for (const Hist& h : hists) {
        for (std::uint32_t i = 0; i <= nn; ++i) {
          total.i_counts[i] += h.i_counts[i];
          total.b0_counts[i] += h.b0_counts[i];
        }
        total.burn += h.burn;
      }

      auto pmf_to_probs = [&](const std::map<std::uint32_t, double>& pmf) {
        std::vector<double> probs(nn + 1, 0.0);
        for (const auto& [k, q] : pmf) probs[k] = q;
        return probs;
      };
      std::string tag = "n=" + std::to_string(nn) + ",p=" + fmt_g(p);
      TestReport t_i = chi_square_test("oracle I pmf (" + tag + ")", total.i_counts,
                                       pmf_to_probs(law.fireproof_pmf()), 0.001);
      TestReport t_b0 = chi_square_test("oracle b0 pmf (" + tag + ")",
                                        total.b0_counts,
                                        pmf_to_probs(law.root_block_pmf()), 0.001);
      double burn_exact = law.root_burn_probability();
      std::vector<std::uint64_t> burn_obs = {total.burn, trials - total.burn};
      std::vector<double> burn_probs = {burn_exact, 1.0 - burn_exact};
      TestReport t_burn = chi_square_test("oracle root-burn (" + tag + ")", burn_obs,
                                          burn_probs, 0.001);
      rep.tests.push_back(t_i);
      rep.tests.push_back(t_b0);
      rep.tests.push_back(t_burn);

      double burn_mc = static_cast<double>(total.burn) / static_cast<double>(trials);
      rep.csv += std::to_string(nn) + "," + fmt_g(p) + "," + std::to_string(trials) +
                 "," + fmt_g(burn_mc) + "," + fmt_g(burn_exact) + "," +
                 fmt_g(t_i.p_value) + "," + fmt_g(t_b0.p_value) + "," +
                 fmt_g(t_burn.p_value) + "\n";
      ++combo_index;
      total_trials += trials;
    }
  }
  rep.trials = total_trials;
  est["combos"] = combo_index;
  finish_report(rep, cfg, std::move(est));
  return rep;
}

using ExperimentFn = ExperimentReport (*)(const ExperimentConfig&);

const std::map<std::string, ExperimentFn>& registry() {
  static const std::map<std::string, ExperimentFn> table = {
      {"phase_transition", exp_phase_transition},
      {"subcritical_scaling", exp_subcritical_scaling},
      {"root_component", exp_root_component},
      {"connectivity", exp_connectivity},
      {"largest_fireproof", exp_largest_fireproof},
      {"burnt_sequence", exp_burnt_sequence},
      {"cut_tree_laws", exp_cut_tree_laws},
      {"coupling_check", exp_coupling_check},
      {"oracle_check", exp_oracle_check},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  auto it = registry().find(cfg.name);
  if (it == registry().end()) {
    throw std::invalid_argument("unknown experiment: " + cfg.name);
  }
  if (cfg.trials != 0 && cfg.trials < 1) {
    throw std::invalid_argument("trials must be >= 1");
  }
  return it->second(cfg);
}

}  // namespace firetree
