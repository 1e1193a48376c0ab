// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <cmath>
#include <random>

#include "ltdm/fixtures.hpp"
#include "ltdm/model.hpp"
#include "oracles.hpp"

using namespace ltdm;

namespace {

ModelParams one_class(std::vector<double> theta, double lambda = 1.0, double kappa = 1.0) {
  ModelParams p;
  p.pi = {1.0};
  p.theta = {std::move(theta)};
  p.lambda = {lambda};
  p.kappa = kappa;
  return p;
}

Dictionary ab() {
  Dictionary d;
  d.add(Pattern{0});
  d.add(Pattern{1});
  return d;
}

// Random tiny instance: J = 2, up to 5 patterns, one record with K <= 3.
struct Tiny {
  Dictionary d;
  ModelParams p;
  ProcessRecord r;
};

Tiny random_tiny(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.02, 0.98);
  Tiny t;
  std::size_t alphabet = 2 + rng() % 3;
  t.d = oracle::random_dictionary(rng, alphabet, rng() % 3, 3);
  while (t.d.size() > 5) {
    Dictionary cut;
    for (std::size_t w = 0; w + 1 < t.d.size(); ++w) cut.add(t.d[w]);
    t.d = cut;
  }
  double a = U(rng);
  t.p.pi = {a, 1.0 - a};
  t.p.theta.assign(2, std::vector<double>(t.d.size()));
  for (auto& row : t.p.theta)
    for (auto& x : row) x = U(rng);
  t.p.lambda = {0.2 + 3 * U(rng), 0.2 + 3 * U(rng)};
  t.p.kappa = 0.5 + 3 * U(rng);
  std::size_t K = rng() % 4;
  double time = 0.0;
  std::exponential_distribution<double> ex(1.0);
  for (std::size_t k = 0; k < K; ++k) {
    Sentence s;
    if (rng() % 4 != 0) {
      do {
        s.events = oracle::random_sentence(rng, t.d, 5);
      } while (oracle::segmentations(s.events, t.d).empty());
    }
    for (std::size_t u = 0; u < s.events.size(); ++u) s.stamps.push_back(time += ex(rng));
    t.r.sentences.push_back(s);
  }
  return t;
}

}  // namespace

TEST_CASE("separation probability closed forms") {
  auto d = ab();
  auto p = one_class({0.5, 0.5});
  CHECK(separation_log_prob(Separation{{0}}, 0, p, d) == doctest::Approx(std::log(0.25)));
  CHECK(separation_log_prob(Separation{{0, 1}}, 0, p, d) == doctest::Approx(std::log(0.125)));
  CHECK(separation_log_prob(Separation{{1, 0}}, 0, p, d) == doctest::Approx(std::log(0.125)));
  CHECK_THROWS_AS(separation_log_prob(Separation{{2}}, 0, p, d), ContractViolation);
}

TEST_CASE("theta at the boundary") {
  ThetaLogTerms t(std::vector<double>{1.0, 0.0, 0.5});
  CHECK(t.empty() == ThetaLogTerms::kNegInf);
  CHECK(t.separation(std::vector<std::uint32_t>{1, 0}) == ThetaLogTerms::kNegInf);
  CHECK(t.separation(std::vector<std::uint32_t>{0}) == doctest::Approx(std::log(0.5)));
  CHECK(t.separation(std::vector<std::uint32_t>{0, 2}) == doctest::Approx(std::log(0.25)));
}

TEST_CASE("gap density") {
  auto p = one_class({0.5}, 2.0);
  CHECK(gap_log_density(0.5, 0, p) == doctest::Approx(-0.30685).epsilon(1e-5));
  auto q = one_class({0.5}, 1.0);
  CHECK(std::abs(gap_log_density(1e-12, 0, q)) < 1e-9);
  CHECK_THROWS_AS(gap_log_density(0.0, 0, q), DomainError);
  CHECK_THROWS_AS(gap_log_density(-1.0, 0, q), DomainError);
}

TEST_CASE("sentence likelihood") {
  Dictionary d;
  d.add(Pattern{0});
  auto p = one_class({0.3});
  CHECK(sentence_log_likelihood({}, {}, 0, p, d) == doctest::Approx(std::log(0.7)));
  std::vector<EventId> rep = {0, 0};
  std::vector<double> g = {1.0, 1.0};
  CHECK_THROWS_AS(sentence_log_likelihood(rep, g, 0, p, d), UnsegmentableSentence);

  auto ex = example1_dictionary();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  ModelParams q;
  q.pi = {1.0};
  q.lambda = {0.7};
  q.theta = {std::vector<double>(ex.size())};
  for (auto& x : q.theta[0]) x = U(rng);
  std::vector<EventId> E = {8, 7, 9};
  std::vector<double> gaps = {0.4, 1.1, 2.0};
  double expect = 0.0;
  for (const auto& parts : oracle::segmentations(E, ex)) expect += oracle::separation_prob(parts, q.theta[0]);
  for (double x : gaps) expect *= 0.7 * std::exp(-0.7 * x);
  CHECK(sentence_log_likelihood(E, gaps, 0, q, ex) == doctest::Approx(std::log(expect)).epsilon(1e-12));
}

TEST_CASE("record with no sentences has Poisson mass at zero") {
  Dataset data;
  data.alphabet = {"a", "b"};
  data.records.emplace_back();
  auto p = one_class({0.4, 0.6}, 1.0, 2.5);
  CHECK(marginal_log_likelihood(data, p, ab(), false) == doctest::Approx(-2.5));
  CHECK(marginal_log_likelihood(data, p, ab(), true) == doctest::Approx(0.0));
}

TEST_CASE("marginal likelihood matches exhaustive sums") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 60; ++rep) {
    auto t = random_tiny(rng);
    Dataset data;
    data.alphabet = numeric_alphabet(8);
    data.records.push_back(t.r);
    for (bool cond : {false, true}) {
      double expect = std::log(oracle::record_likelihood(t.r, t.p, t.d, cond));
      REQUIRE(std::abs(marginal_log_likelihood(data, t.p, t.d, cond) - expect) < 1e-9);
    }
  }
}

TEST_CASE("separation probabilities sum to one") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.01, 0.99);
  for (int rep = 0; rep < 20; ++rep) {
    std::size_t n = 1 + rng() % 5;
    Dictionary d = Dictionary::unigrams(n);
    auto p = one_class(std::vector<double>(n));
    for (auto& x : p.theta[0]) x = U(rng);
    double total = 0.0;
    oracle::for_each_sequence(n, [&](const std::vector<std::uint32_t>& s) {
      total += std::exp(separation_log_prob(Separation{s}, 0, p, d));
    });
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("generator with theta zero draws only empty sentences") {
  auto f = fixture_setting1();
  auto p = f.params;
  for (auto& row : p.theta) std::fill(row.begin(), row.end(), 0.0);
  auto g = generate_dataset(p, f.dictionary, f.alphabet, 50, 3);
  std::size_t sentences = 0;
  for (const auto& r : g.data.records) {
    sentences += r.sentence_count();
    CHECK(r.event_count() == 0);
  }
  CHECK(sentences > 0);
}

TEST_CASE("generator pattern frequencies match theta") {
  Dictionary d;
  d.add(Pattern{0});
  d.add(Pattern{1});
  d.add(Pattern{1, 2});
  ModelParams p;
  p.pi = {0.5, 0.5};
  p.theta = {{0.2, 0.7, 0.5}, {0.9, 0.1, 0.3}};
  p.lambda = {1.0, 2.0};
  p.kappa = 4.0;
  auto g = generate_dataset(p, d, numeric_alphabet(3), 3000, 11);
  std::vector<std::vector<double>> hits(2, std::vector<double>(3, 0.0));
  std::vector<double> n(2, 0.0);
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    auto z = g.truth.z[i];
    for (const auto& sep : g.truth.separations[i]) {
      n[z] += 1;
      for (auto w : sep.parts) hits[z][w] += 1;
    }
  }
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t w = 0; w < 3; ++w) {
      double th = p.theta[z][w];
      double se = std::sqrt(th * (1 - th) / n[z]);
      CHECK(std::abs(hits[z][w] / n[z] - th) < 3 * se);
    }
  auto again = generate_dataset(p, d, numeric_alphabet(3), 3000, 11);
  CHECK(again.truth.z == g.truth.z);
}

TEST_CASE("factorization holds with equal rates and fails otherwise") {
  auto d = ab();
  ModelParams a;
  a.pi = {0.4, 0.6};
  a.theta = {{0.3, 0.6}, {0.7, 0.2}};
  a.lambda = {1.0, 1.0};
  a.kappa = 2.0;
  auto b = a;
  b.theta = {{0.5, 0.5}, {0.1, 0.9}};
  auto data = generate_dataset(a, d, {"a", "b"}, 40, 1).data;
  std::vector<double> scales = {3.7, 0.25};
  CHECK(factorization_check(a, b, data, d, scales));
  CHECK(factorization_check(a, a, data, d, scales));

  a.lambda = {0.5, 3.0};
  b.lambda = a.lambda;
  CHECK_FALSE(factorization_check(a, b, data, d, scales));

  b.kappa = 5.0;
  CHECK_THROWS_AS(factorization_check(a, b, data, d, scales), ContractViolation);
}

TEST_CASE("truth sidecar lists classes and separations") {
  auto f = fixture_setting1();
  auto g = generate_dataset(f.params, f.dictionary, f.alphabet, 20, 4);
  auto j = truth_to_json(g.truth, f.params, f.dictionary, f.alphabet);
  CHECK(j.at("z").size() == 20);
  CHECK(j.at("separations").size() == 20);
  CHECK(j.at("separations")[0].size() == g.data.records[0].sentence_count());
  CHECK(j.at("dictionary").size() == f.dictionary.size());
}
