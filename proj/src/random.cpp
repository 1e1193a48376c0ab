// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltdm/core.hpp"

namespace ltdm {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix(splitmix(root ^ h) + splitmix(index + 0x632be59bd9b4e019ULL));
}

Engine make_engine(std::uint64_t root, std::string_view stream, std::uint64_t index) {
  return Engine(derive_seed(root, stream, index));
}

double sample_uniform(Engine& rng) {
  // 53 random bits mapped to the open interval (0,1).
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_uniform(Engine& rng, double lo, double hi) {
  return lo + (hi - lo) * sample_uniform(rng);
}

double sample_gamma(Engine& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma needs positive shape and rate");
  std::gamma_distribution<double> g(shape, 1.0 / rate);
  return g(rng);
}

double sample_beta(Engine& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta needs positive parameters");
  if (a == 1.0 && b == 1.0) return sample_uniform(rng);
  double x = sample_gamma(rng, a, 1.0);
  double y = sample_gamma(rng, b, 1.0);
  double s = x + y;
  if (s <= 0.0) {
    // Both gammas underflowed; fall back on the mean to stay in (0,1).
    return a / (a + b);
  }
  return x / s;
}

double sample_exponential(Engine& rng, double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential needs a positive rate");
  return -std::log(sample_uniform(rng)) / rate;
}

std::uint64_t sample_poisson(Engine& rng, double mean) {
  if (!(mean >= 0.0)) throw DomainError("poisson needs a non-negative mean");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> p(mean);
  return p(rng);
}

bool sample_bernoulli(Engine& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return sample_uniform(rng) < p;
}

double sample_truncated_beta1(Engine& rng, double alpha, double lo, double hi) {
  if (!(alpha > 0.0)) throw DomainError("stick precision must be positive");
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 1.0);
  if (!(lo <= hi)) throw DomainError("empty truncation interval");
  // Survival function of Beta(1,alpha) is (1-x)^alpha.
  double s_hi = std::pow(1.0 - lo, alpha);
  double s_lo = std::pow(1.0 - hi, alpha);
  double s = s_lo + (s_hi - s_lo) * sample_uniform(rng);
  double x = 1.0 - std::pow(s, 1.0 / alpha);
  return std::clamp(x, lo, hi);
}

double log_sum_exp(std::span<const double> x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double v : x) s += std::exp(v - mx);
  return mx + std::log(s);
}

std::size_t sample_log_categorical(Engine& rng, std::span<const double> logw) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : logw) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return logw.size();
  double total = 0.0;
  for (double v : logw) total += std::exp(v - mx);
  double r = sample_uniform(rng) * total;
  std::size_t last = logw.size();
  for (std::size_t i = 0; i < logw.size(); ++i) {
    double w = std::exp(logw[i] - mx);
    if (w <= 0.0) continue;
    last = i;
    r -= w;
    if (r < 0.0) return i;
  }
  return last;
}

std::size_t sample_categorical(Engine& rng, std::span<const double> w) {
  double total = 0.0;
  for (double v : w) total += std::max(v, 0.0);
  if (!(total > 0.0)) return w.size();
  double r = sample_uniform(rng) * total;
  std::size_t last = w.size();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    last = i;
    r -= w[i];
    if (r < 0.0) return i;
  }
  return last;
}

}  // namespace ltdm
