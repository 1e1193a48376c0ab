// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/model.hpp"

#include <algorithm>
#include <cmath>

#include "ltdm/dataset_io.hpp"
#include "ltdm/random.hpp"

namespace ltdm {

ThetaLogTerms::ThetaLogTerms(std::span<const double> theta, std::span<const bool> mask)
    : logit_(theta.size(), 0.0), one_(theta.size(), 0) {
  for (std::size_t w = 0; w < theta.size(); ++w) {
    if (!mask.empty() && !mask[w]) continue;
    double t = theta[w];
    if (t >= 1.0) {
      one_[w] = 1;
      ++forced_;
      logit_[w] = std::numeric_limits<double>::infinity();
    } else if (t <= 0.0) {
      logit_[w] = kNegInf;
    } else {
      double l1m = std::log1p(-t);
      base_ += l1m;
      logit_[w] = std::log(t) - l1m;
    }
  }
}

double ThetaLogTerms::separation(std::span<const std::uint32_t> parts) const {
  double v = base_ - std::lgamma(static_cast<double>(parts.size()) + 1.0);
  std::size_t forced_in = 0;
  for (std::uint32_t w : parts) {
    if (one_[w]) {
      ++forced_in;
      continue;
    }
    if (logit_[w] == kNegInf) return kNegInf;
    v += logit_[w];
  }
  if (forced_in != forced_) return kNegInf;
  return v;
}

namespace {

void check_parts(const Separation& s, const Dictionary& d) {
  for (auto w : s.parts)
    if (w >= d.size()) throw ContractViolation("separation references a pattern outside the dictionary");
}

}  // namespace

double separation_log_prob(const Separation& s, std::size_t z, const ModelParams& params,
                           const Dictionary& d) {
  if (z >= params.theta.size()) throw ContractViolation("class index out of range");
  if (params.theta[z].size() != d.size()) throw ContractViolation("theta row does not match dictionary");
  check_parts(s, d);
  return ThetaLogTerms(params.theta[z]).separation(s.parts);
}

double gap_log_density(double gap, std::size_t z, const ModelParams& params) {
  if (!(gap > 0.0)) throw DomainError("gap time must be positive");
  if (z >= params.lambda.size()) throw ContractViolation("class index out of range");
  double l = params.lambda[z];
  if (!(l > 0.0)) throw DomainError("lambda must be positive");
  return std::log(l) - l * gap;
}

namespace {

double events_log_prob(std::span<const EventId> E, const ThetaLogTerms& terms,
                       const PatternTrie& trie, std::size_t cap) {
  if (E.empty()) return terms.empty();
  auto seps = enumerate_separations(E, trie, cap);
  if (seps.empty()) throw UnsegmentableSentence("sentence has no separation under the dictionary");
  std::vector<double> lp;
  lp.reserve(seps.size());
  for (const auto& s : seps) lp.push_back(terms.separation(s.parts));
  return log_sum_exp(lp);
}

double gaps_log_density(std::span<const double> gaps, double lambda) {
  double v = 0.0;
  for (double g : gaps) {
    if (!(g > 0.0)) throw DomainError("gap time must be positive");
    v += std::log(lambda) - lambda * g;
  }
  return v;
}

}  // namespace

double sentence_log_likelihood(std::span<const EventId> E, std::span<const double> gaps,
                               std::size_t z, const ModelParams& params, const Dictionary& d,
                               std::size_t cap) {
  if (E.size() != gaps.size()) throw ContractViolation("event and gap sentences differ in length");
  if (z >= params.theta.size()) throw ContractViolation("class index out of range");
  ThetaLogTerms terms(params.theta[z]);
  PatternTrie trie(d);
  return events_log_prob(E, terms, trie, cap) + gaps_log_density(gaps, params.lambda[z]);
}

SentenceLikelihoodTable::SentenceLikelihoodTable(const Dataset& data, const ModelParams& params,
                                                 const Dictionary& d, std::size_t cap)
    : J_(params.classes()) {
  params.validate(d.size());
  PatternTrie trie(d);
  std::vector<ThetaLogTerms> terms;
  for (const auto& row : params.theta) terms.emplace_back(row);
  ev_.resize(data.records.size());
  gp_.resize(data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& rec = data.records[i];
    auto gaps = gaps_from_stamps(rec);
    ev_[i].assign(rec.sentences.size() * J_, 0.0);
    gp_[i].assign(rec.sentences.size() * J_, 0.0);
    for (std::size_t k = 0; k < rec.sentences.size(); ++k) {
      const auto& E = rec.sentences[k].events;
      std::vector<double> lp;
      SeparationSet seps;
      if (!E.empty()) {
        seps = enumerate_separations(E, trie, cap);
        if (seps.empty())
          throw UnsegmentableSentence("record " + std::to_string(i) + " sentence " +
                                      std::to_string(k) + " has no separation");
      }
      for (std::size_t z = 0; z < J_; ++z) {
        double ev;
        if (E.empty()) {
          ev = terms[z].empty();
        } else {
          lp.clear();
          for (const auto& s : seps) lp.push_back(terms[z].separation(s.parts));
          ev = log_sum_exp(lp);
        }
        ev_[i][k * J_ + z] = ev;
        gp_[i][k * J_ + z] = gaps_log_density(gaps[k], params.lambda[z]);
      }
    }
  }
}

double SentenceLikelihoodTable::record(std::size_t i, const ModelParams& params) const {
  std::vector<double> lz(J_);
  std::size_t K = ev_[i].size() / std::max<std::size_t>(J_, 1);
  for (std::size_t z = 0; z < J_; ++z) {
    double v = params.pi[z] > 0.0 ? std::log(params.pi[z]) : ThetaLogTerms::kNegInf;
    for (std::size_t k = 0; k < K && v != ThetaLogTerms::kNegInf; ++k)
      v += events(i, k, z) + gaps(i, k, z);
    lz[z] = v;
  }
  return log_sum_exp(lz);
}

double log_poisson(std::size_t k, double mean) {
  if (mean == 0.0) return k == 0 ? 0.0 : ThetaLogTerms::kNegInf;
  double kd = static_cast<double>(k);
  return kd * std::log(mean) - mean - std::lgamma(kd + 1.0);
}

std::vector<double> record_log_likelihoods(const Dataset& data, const ModelParams& params,
                                           const Dictionary& d, bool condition_on_K,
                                           std::size_t cap) {
  SentenceLikelihoodTable table(data, params, d, cap);
  std::vector<double> out(data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    out[i] = table.record(i, params);
    if (!condition_on_K) out[i] += log_poisson(data.records[i].sentence_count(), params.kappa);
  }
  return out;
}

double marginal_log_likelihood(const Dataset& data, const ModelParams& params,
                               const Dictionary& d, bool condition_on_K, std::size_t cap) {
  double total = 0.0;
  for (double v : record_log_likelihoods(data, params, d, condition_on_K, cap)) total += v;
  return total;
}

GeneratedData generate_dataset(const ModelParams& params, const Dictionary& d,
                               std::vector<std::string> alphabet, std::size_t m,
                               std::uint64_t seed) {
  params.validate(d.size());
  if (!validate_A2(d).empty()) throw ContractViolation("dictionary violates the distinct-event assumption");
  for (const auto& p : d)
    for (EventId e : p.events)
      if (e >= alphabet.size()) throw ContractViolation("dictionary uses an event outside the alphabet");

  GeneratedData out;
  out.data.alphabet = std::move(alphabet);
  out.data.records.resize(m);
  out.truth.z.resize(m);
  out.truth.separations.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    Engine rng = make_engine(seed, "generation", i);
    std::size_t z = sample_categorical(rng, params.pi);
    std::size_t K = sample_poisson(rng, params.kappa);
    const auto& th = params.theta[z];
    double t = 0.0;
    auto& rec = out.data.records[i];
    auto& seps = out.truth.separations[i];
    out.truth.z[i] = z;
    for (std::size_t k = 0; k < K; ++k) {
      std::vector<std::uint32_t> parts;
      for (std::size_t w = 0; w < d.size(); ++w)
        if (sample_bernoulli(rng, th[w])) parts.push_back(static_cast<std::uint32_t>(w));
      std::shuffle(parts.begin(), parts.end(), rng);
      Sentence s;
      for (auto w : parts) {
        for (EventId e : d[w].events) {
          t += sample_exponential(rng, params.lambda[z]);
          s.events.push_back(e);
          s.stamps.push_back(t);
        }
      }
      rec.sentences.push_back(std::move(s));
      seps.push_back(Separation{std::move(parts)});
    }
  }
  return out;
}

nlohmann::json truth_to_json(const GroundTruth& truth, const ModelParams& params,
                             const Dictionary& d, const std::vector<std::string>& alphabet) {
  nlohmann::json seps = nlohmann::json::array();
  for (const auto& rec : truth.separations) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& s : rec) r.push_back(s.parts);
    seps.push_back(std::move(r));
  }
  return {{"alphabet", alphabet},
          {"dictionary", dictionary_to_json(d, alphabet)},
          {"params", params_to_json(params)},
          {"z", truth.z},
          {"separations", std::move(seps)}};
}

Dataset scale_times(const Dataset& data, double scale) {
  if (!(scale > 0.0)) throw ContractViolation("time scale must be positive");
  Dataset out = data;
  for (auto& r : out.records)
    for (auto& s : r.sentences)
      for (auto& t : s.stamps) t *= scale;
  return out;
}

bool factorization_check(const ModelParams& a, const ModelParams& b, const Dataset& data,
                         const Dictionary& d, std::span<const double> scales, double tol) {
  a.validate(d.size());
  b.validate(d.size());
  if (a.lambda != b.lambda || a.pi != b.pi || a.kappa != b.kappa)
    throw ContractViolation("factorization check needs shared pi, lambda and kappa");
  auto base_a = record_log_likelihoods(data, a, d, false);
  auto base_b = record_log_likelihoods(data, b, d, false);
  for (double c : scales) {
    Dataset scaled = scale_times(data, c);
    auto sa = record_log_likelihoods(scaled, a, d, false);
    auto sb = record_log_likelihoods(scaled, b, d, false);
    for (std::size_t i = 0; i < data.records.size(); ++i) {
      double d0 = base_a[i] - base_b[i];
      double d1 = sa[i] - sb[i];
      if (std::isinf(d0) || std::isinf(d1)) {
        if (d0 != d1) return false;
        continue;
      }
      if (std::abs(d0 - d1) > tol) return false;
    }
  }
  return true;
}

}  // namespace ltdm
