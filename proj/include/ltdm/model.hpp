// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "ltdm/core.hpp"
#include "ltdm/segmenter.hpp"

namespace ltdm {

// Precomputed per-class terms for the separation probability. Patterns with
// theta = 1 must appear in every separation, patterns with theta = 0 never.
class ThetaLogTerms {
 public:
  ThetaLogTerms() = default;
  // mask (optional) restricts the pattern universe to entries set to true.
  explicit ThetaLogTerms(std::span<const double> theta, std::span<const bool> mask = {});

  // log P(S | theta) for a separation given by pattern indices.
  double separation(std::span<const std::uint32_t> parts) const;
  // log P(empty sentence | theta).
  double empty() const { return forced_ ? kNegInf : base_; }

  static constexpr double kNegInf = -std::numeric_limits<double>::infinity();

 private:
  std::vector<double> logit_;  // log theta - log(1 - theta); +inf for theta = 1
  std::vector<char> one_;
  double base_ = 0.0;          // sum of log(1 - theta) over theta < 1
  std::size_t forced_ = 0;     // count of theta = 1 patterns
};

double separation_log_prob(const Separation& s, std::size_t z, const ModelParams& params,
                           const Dictionary& d);

double gap_log_density(double gap, std::size_t z, const ModelParams& params);

double sentence_log_likelihood(std::span<const EventId> E, std::span<const double> gaps,
                               std::size_t z, const ModelParams& params, const Dictionary& d,
                               std::size_t cap = kDefaultSeparationCap);

// log P(E_k | z) and log P(gaps_k | z) for every record, sentence and class.
class SentenceLikelihoodTable {
 public:
  SentenceLikelihoodTable(const Dataset& data, const ModelParams& params, const Dictionary& d,
                          std::size_t cap = kDefaultSeparationCap);

  double events(std::size_t i, std::size_t k, std::size_t z) const {
    return ev_[i][k * J_ + z];
  }
  double gaps(std::size_t i, std::size_t k, std::size_t z) const { return gp_[i][k * J_ + z]; }
  std::size_t classes() const { return J_; }

  // log sum_z pi_z prod_k P(E_k, gaps_k | z), without the Poisson factor.
  double record(std::size_t i, const ModelParams& params) const;

 private:
  std::size_t J_ = 0;
  std::vector<std::vector<double>> ev_;
  std::vector<std::vector<double>> gp_;
};

double log_poisson(std::size_t k, double mean);

double marginal_log_likelihood(const Dataset& data, const ModelParams& params,
                               const Dictionary& d, bool condition_on_K,
                               std::size_t cap = kDefaultSeparationCap);

std::vector<double> record_log_likelihoods(const Dataset& data, const ModelParams& params,
                                           const Dictionary& d, bool condition_on_K,
                                           std::size_t cap = kDefaultSeparationCap);

struct GroundTruth {
  std::vector<std::size_t> z;
  std::vector<std::vector<Separation>> separations;  // [record][sentence]
};

struct GeneratedData {
  Dataset data;
  GroundTruth truth;
};

GeneratedData generate_dataset(const ModelParams& params, const Dictionary& d,
                               std::vector<std::string> alphabet, std::size_t m,
                               std::uint64_t seed);

nlohmann::json truth_to_json(const GroundTruth& truth, const ModelParams& params,
                             const Dictionary& d, const std::vector<std::string>& alphabet);

// Record-wise log-likelihood differences between two parameter sets that share
// pi, lambda and kappa stay fixed when every gap is scaled by `scale`.
bool factorization_check(const ModelParams& a, const ModelParams& b, const Dataset& data,
                         const Dictionary& d, std::span<const double> scales,
                         double tol = 1e-8);

Dataset scale_times(const Dataset& data, double scale);

}  // namespace ltdm
