#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include <json.hpp>

namespace firetree {

ReferenceLaw ReferenceLaw::exponential(double rate) {
  if (!(rate > 0)) throw std::invalid_argument("rate must be positive");
  return {Kind::Exponential, rate, 0.0};
}

ReferenceLaw ReferenceLaw::truncated_exp_with_atom(double c) {
  if (!(c > 0)) throw std::invalid_argument("c must be positive");
  return {Kind::TruncatedExpWithAtom, c, 0.0};
}

ReferenceLaw ReferenceLaw::beta(double k) {
  if (!(k > 0)) throw std::invalid_argument("k must be positive");
  return {Kind::Beta, k, 0.0};
}

ReferenceLaw ReferenceLaw::gamma(double shape, double rate) {
  if (!(shape > 0) || !(rate > 0)) throw std::invalid_argument("gamma parameters must be positive");
  return {Kind::Gamma, shape, rate};
}

ReferenceLaw ReferenceLaw::conditioned_exp(double gamma) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  return {Kind::ConditionedExp, gamma, 0.0};
}

double ReferenceLaw::cdf(double x) const {
  switch (kind) {
    case Kind::Exponential:
      return x <= 0 ? 0.0 : -std::expm1(-a * x);
    case Kind::TruncatedExpWithAtom:
      if (x < 0) return 0.0;
      if (x >= 1) return 1.0;
      return -std::expm1(-a * x);
    case Kind::Beta:
      if (x <= 0) return 0.0;
      if (x >= 1) return 1.0;
      return std::pow(x, a);
    case Kind::Gamma:
      return x <= 0 ? 0.0 : gamma_p(a, b * x);
    case Kind::ConditionedExp:
      if (x <= 0) return 0.0;
      if (x >= 1) return 1.0;
      return std::expm1(-a * x) / std::expm1(-a);
  }
  return 0.0;
}

double ReferenceLaw::cdf_left(double x) const {
  if (kind == Kind::TruncatedExpWithAtom && x == 1.0) return -std::expm1(-a);
  return cdf(x);
}

double ReferenceLaw::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Exponential:
      return rng.exponential(a);
    case Kind::TruncatedExpWithAtom:
      return std::min(rng.exponential(a), 1.0);
    case Kind::Beta:
      return std::pow(rng.uniform_open(), 1.0 / a);
    case Kind::Gamma: {
      // Integer shapes only arise here (Erlang chains); keep the sampler
      // exact and portable as a sum of exponentials.
      unsigned whole = static_cast<unsigned>(a);
      if (a != static_cast<double>(whole)) {
        throw std::invalid_argument("non-integer gamma shape not supported");
      }
      double s = 0.0;
      for (unsigned i = 0; i < whole; ++i) s += rng.exponential(b);
      return s;
    }
    case Kind::ConditionedExp: {
      double u = rng.uniform();
      return -std::log1p(u * std::expm1(-a)) / a;
    }
  }
  return 0.0;
}

std::string ReferenceLaw::describe() const {
  char buf[64];
  switch (kind) {
    case Kind::Exponential:
      std::snprintf(buf, sizeof buf, "Exponential(%g)", a);
      break;
    case Kind::TruncatedExpWithAtom:
      std::snprintf(buf, sizeof buf, "min(Exp(%g),1)", a);
      break;
    case Kind::Beta:
      std::snprintf(buf, sizeof buf, "Beta(%g,1)", a);
      break;
    case Kind::Gamma:
      std::snprintf(buf, sizeof buf, "Gamma(%g,%g)", a, b);
      break;
    case Kind::ConditionedExp:
      std::snprintf(buf, sizeof buf, "Exp(%g)|<1", a);
      break;
  }
  return buf;
}

double sample_reference(const ReferenceLaw& law, Rng& rng) { return law.sample(rng); }

double ks_statistic(std::vector<double> sample, const ReferenceLaw& law) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  std::sort(sample.begin(), sample.end());
  std::size_t n = sample.size();
  double d = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && sample[j] == sample[i]) ++j;
    double below = static_cast<double>(i) / static_cast<double>(n);
    double above = static_cast<double>(j) / static_cast<double>(n);
    d = std::max(d, std::abs(above - law.cdf(sample[i])));
    d = std::max(d, std::abs(below - law.cdf_left(sample[i])));
    i = j;
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    double fa = static_cast<double>(i) / static_cast<double>(a.size());
    double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

std::string TestReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["statistic"] = statistic;
  j["threshold"] = threshold;
  if (p_value >= 0) {
    j["p_value"] = p_value;
  } else {
    j["p_value"] = nullptr;
  }
  j["n_samples"] = n_samples;
  j["verdict"] = verdict();
  return j.dump();
}

namespace {

double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_cf(double a, double x) {
  // Lentz continued fraction for the upper regularized incomplete gamma.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0 || a <= 0) throw std::invalid_argument("bad incomplete gamma arguments");
  if (x == 0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (x < 0 || a <= 0) throw std::invalid_argument("bad incomplete gamma arguments");
  if (x == 0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_sf(double x, double dof) { return gamma_q(dof / 2.0, x / 2.0); }

TestReport chi_square_test(const std::string& name,
                           const std::vector<std::uint64_t>& observed,
                           const std::vector<double>& expected_probs,
                           double p_floor) {
  if (observed.size() != expected_probs.size() || observed.empty()) {
    throw std::invalid_argument("observed/expected size mismatch");
  }
  double total_prob = 0.0;
  std::uint64_t total = 0;
  for (double p : expected_probs) total_prob += p;
  for (std::uint64_t o : observed) total += o;
  if (std::abs(total_prob - 1.0) > 1e-6) {
    throw std::invalid_argument("expected probabilities must sum to 1");
  }
  if (total == 0) throw std::invalid_argument("no observations");

  // Merge adjacent bins until each expected count reaches 5; fold any
  // under-filled remainder into the last merged bin.
  std::vector<double> exp_counts;
  std::vector<double> obs_counts;
  double ce = 0.0, co = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ce += expected_probs[i] * static_cast<double>(total);
    co += static_cast<double>(observed[i]);
    if (ce >= 5.0) {
      exp_counts.push_back(ce);
      obs_counts.push_back(co);
      ce = co = 0.0;
    }
  }
  if (ce > 0 || co > 0) {
    if (exp_counts.empty()) throw std::invalid_argument("degenerate bins");
    exp_counts.back() += ce;
    obs_counts.back() += co;
  }
  if (exp_counts.size() < 2) throw std::invalid_argument("degenerate bins");

  double stat = 0.0;
  for (std::size_t i = 0; i < exp_counts.size(); ++i) {
    double diff = obs_counts[i] - exp_counts[i];
    stat += diff * diff / exp_counts[i];
  }
  double dof = static_cast<double>(exp_counts.size() - 1);

  TestReport report;
  report.name = name;
  report.statistic = stat;
  report.threshold = p_floor;
  report.p_value = chi_square_sf(stat, dof);
  report.n_samples = total;
  report.passed = report.p_value > p_floor;
  return report;
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi,
                        double flo, double fmid, double fhi, double whole, double tol,
                        int depth) {
  double mid = 0.5 * (lo + hi);
  double lmid = 0.5 * (lo + mid);
  double rmid = 0.5 * (mid + hi);
  double flm = f(lmid);
  double frm = f(rmid);
  double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
  double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return adaptive_simpson(f, lo, mid, flo, flm, fmid, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, mid, hi, fmid, frm, fhi, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  double flo = f(lo), fhi = f(hi), fmid = f(0.5 * (lo + hi));
  double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  return adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

}  // namespace

double moment_eps_min_one(double c, unsigned k) {
  if (!(c > 0) || k < 1) throw std::invalid_argument("need c > 0 and k >= 1");
  auto integrand = [c, k](double x) {
    return c * std::exp(-c * x) * std::pow(x, static_cast<double>(k));
  };
  return std::exp(-c) + integrate(integrand, 0.0, 1.0, 1e-12);
}

double q_j(double c, unsigned j) {
  if (!(c > 0)) throw std::invalid_argument("c must be positive");
  // V[w] accumulates, over subsets A of {s..j} with |A| = w, the product
  // prod_t c/(c + w_t) where w_t counts elements of A at or above t. Scanning
  // s downward, position s contributes the factor c/(c+w) whether or not it
  // is picked; picking raises w by one first.
  std::vector<long double> v(j + 1, 0.0L);
  v[0] = 1.0L;
  for (unsigned s = j; s >= 1; --s) {
    for (unsigned w = j; w >= 1; --w) {
      v[w] = (v[w] + v[w - 1]) * (c / (c + w));
    }
    // w = 0: factor c/(c+0) = 1
    if (s == 1) break;
  }
  long double q = 0.0L;
  double sign = 1.0;
  for (unsigned w = 0; w <= j; ++w) {
    q += static_cast<long double>(sign) * v[w];
    sign = -sign;
  }
  return static_cast<double>(q);
}

MeanCi mean_ci(std::span<const double> sample) {
  MeanCi out;
  out.n = sample.size();
  if (out.n == 0) return out;
  double sum = 0.0;
  for (double x : sample) sum += x;
  out.mean = sum / static_cast<double>(out.n);
  double ss = 0.0;
  for (double x : sample) {
    double d = x - out.mean;
    ss += d * d;
  }
  if (out.n > 1) {
    out.se = std::sqrt(ss / static_cast<double>(out.n - 1) /
                       static_cast<double>(out.n));
  }
  return out;
}

}  // namespace firetree
