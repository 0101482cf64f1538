#include "walk.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "cut_tree.hpp"

namespace firetree {

std::uint64_t sample_xi(Rng& rng) {
  double u = rng.uniform_open();
  return static_cast<std::uint64_t>(1.0 / u);
}

WalkPath run_walk_to(std::uint64_t n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("walk level must be >= 2");
  WalkPath path;
  std::uint64_t sum = 0;
  while (true) {
    std::uint64_t xi = sample_xi(rng);
    if (xi >= n - sum) break;
    sum += xi;
    path.steps.push_back(xi);
    path.partial_sums.push_back(sum);
  }
  path.lambda = path.steps.size();
  path.undershoot = n - sum;
  path.degenerate = (path.lambda == 0);
  return path;
}

std::vector<double> max_step_measure(const WalkPath& path, std::uint64_t n,
                                     double cutoff) {
  double scale = std::log(static_cast<double>(n)) / static_cast<double>(n);
  std::vector<double> out;
  for (std::uint64_t xi : path.steps) {
    double x = scale * static_cast<double>(xi);
    if (x > cutoff) out.push_back(x);
  }
  return out;
}

StickBreaking stick_breaking(std::uint64_t n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("stick length must be >= 1");
  StickBreaking sb;
  sb.total = n;
  std::uint64_t remaining = n;
  while (remaining > 0) {
    std::uint64_t part = rng.range(1, remaining);
    sb.parts.push_back(part);
    remaining -= part;
  }
  return sb;
}

std::uint64_t size_biased_pick(const StickBreaking& sb, Rng& rng) {
  if (sb.parts.empty()) throw std::invalid_argument("empty stick-breaking");
  std::uint64_t t = rng.range(1, sb.total);
  std::uint64_t acc = 0;
  for (std::uint64_t part : sb.parts) {
    acc += part;
    if (t <= acc) return part;
  }
  return sb.parts.back();
}

namespace {

// Kahan-compensated prefix sums of ln(i) in long double; the difference of
// two entries then carries only the rounding of the terms between them,
// which keeps the pmf accurate to ~1e-12 relative up to n = 1e6.
class LogFactorialTable {
 public:
  long double value(std::uint64_t k) {
    if (k >= table_.size()) grow(k);
    return table_[k];
  }

 private:
  void grow(std::uint64_t k) {
    std::size_t old = table_.size();
    if (old == 0) {
      table_ = {0.0L, 0.0L};
      comp_ = 0.0L;
      old = 2;
    }
    std::size_t target = std::max<std::size_t>(k + 1, old * 2);
    table_.reserve(target);
    for (std::size_t i = old; i < target; ++i) {
      long double term = std::log(static_cast<long double>(i)) - comp_;
      long double next = table_.back() + term;
      comp_ = (next - table_.back()) - term;
      table_.push_back(next);
    }
  }

  std::vector<long double> table_;
  long double comp_ = 0.0L;
};

LogFactorialTable g_log_factorials;
std::mutex g_log_factorials_mutex;

long double log_factorial(std::uint64_t k) {
  std::lock_guard<std::mutex> lock(g_log_factorials_mutex);
  return g_log_factorials.value(k);
}

}  // namespace

double beta_binomial_pmf(std::uint64_t n, std::uint64_t v, std::uint64_t ell) {
  if (v < 2 || v > n) throw std::invalid_argument("v must lie in 2..n");
  if (ell > n - v) throw std::invalid_argument("ell must lie in 0..n-v");
  // (v-1) * (n-v)! / (n-v-ell)! * (n-ell-2)! / (n-1)!
  long double lp = std::log(static_cast<long double>(v - 1));
  lp += log_factorial(n - v) - log_factorial(n - v - ell);
  lp += log_factorial(n - ell - 2) - log_factorial(n - 1);
  return static_cast<double>(std::exp(lp));
}

std::vector<double> spine_cut_count_estimate(std::uint64_t n, std::uint64_t trials,
                                             Rng& rng) {
  std::vector<double> out;
  out.reserve(trials);
  double scale = std::log(static_cast<double>(n)) / static_cast<double>(n);
  for (std::uint64_t t = 0; t < trials; ++t) {
    Tree tree = Tree::generate_recursive(n, rng);
    Vertex x = static_cast<Vertex>(rng.range(1, n));
    SpinalDecomposition sd = spinal_decomposition(tree, x);
    std::uint64_t count = sd.height();
    for (std::uint64_t size : sd.component_sizes) {
      count += zeta_of_random_recursive(size, rng);
    }
    out.push_back(scale * static_cast<double>(count));
  }
  return out;
}

}  // namespace firetree
