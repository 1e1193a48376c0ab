// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace ltdm {

using Engine = std::mt19937_64;

// Seed for a named sub-stream; stable across platforms and thread counts.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);
Engine make_engine(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

double sample_uniform(Engine& rng);  // (0,1), never returns an endpoint
double sample_uniform(Engine& rng, double lo, double hi);
double sample_gamma(Engine& rng, double shape, double rate);
double sample_beta(Engine& rng, double a, double b);
double sample_exponential(Engine& rng, double rate);
std::uint64_t sample_poisson(Engine& rng, double mean);
bool sample_bernoulli(Engine& rng, double p);

// Beta(1, alpha) restricted to [lo, hi] by inverting the survival function.
double sample_truncated_beta1(Engine& rng, double alpha, double lo, double hi);

// Index drawn with probability proportional to exp(logw[i]); -inf entries
// are never chosen. Returns logw.size() when every weight is -inf.
std::size_t sample_log_categorical(Engine& rng, std::span<const double> logw);
std::size_t sample_categorical(Engine& rng, std::span<const double> w);

double log_sum_exp(std::span<const double> x);

}  // namespace ltdm
