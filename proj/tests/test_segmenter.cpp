// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ltdm/fixtures.hpp"
#include "ltdm/segmenter.hpp"
#include "oracles.hpp"

using namespace ltdm;

namespace {

const auto kAlpha = numeric_alphabet(23);

std::vector<EventId> labels(std::initializer_list<int> l) {
  std::vector<EventId> out;
  for (int x : l) out.push_back(static_cast<EventId>(x - 1));
  return out;
}

std::set<std::vector<std::string>> rendered(const SeparationSet& s, const Dictionary& d) {
  std::set<std::vector<std::string>> out;
  for (const auto& sep : s) {
    std::vector<std::string> parts;
    for (auto w : sep.parts) parts.push_back(render_pattern(d[w], kAlpha));
    out.insert(parts);
  }
  return out;
}

}  // namespace

TEST_CASE("traffic example separations") {
  auto d = example1_dictionary();
  auto s2 = enumerate_separations(labels({9, 8, 10}), d);
  CHECK(rendered(s2, d) == std::set<std::vector<std::string>>{{"[9 8]", "[10]"}, {"[9 8 10]"}});
  CHECK(count_separations(labels({9, 8, 10}), d) == 2);

  auto s1 = enumerate_separations(labels({10, 8, 9, 20, 3, 22, 4}), d);
  CHECK(rendered(s1, d) == std::set<std::vector<std::string>>{
                               {"[10]", "[8 9]", "[20]", "[3 22 4]"},
                               {"[10 8]", "[9 20]", "[3 22 4]"}});
  for (const auto& s : s1) CHECK(is_valid_separation(s, labels({10, 8, 9, 20, 3, 22, 4}), d));
}

TEST_CASE("separation ordering follows split positions") {
  auto d = example1_dictionary();
  auto s = enumerate_separations(labels({9, 8, 10}), d);
  REQUIRE(s.size() == 2);
  // ([9 8],[10]) cuts after position 2, ([9 8 10]) has no cut.
  CHECK(s[0].size() == 2);
  CHECK(s[1].size() == 1);
}

TEST_CASE("trivial separations") {
  Dictionary d;
  d.add(Pattern{7});
  auto one = enumerate_separations(std::vector<EventId>{7}, d);
  REQUIRE(one.size() == 1);
  CHECK(one[0].parts == std::vector<std::uint32_t>{0});

  Dictionary none;
  none.add(Pattern{3});
  CHECK(enumerate_separations(std::vector<EventId>{7}, none).empty());

  auto empty = enumerate_separations(std::vector<EventId>{}, d);
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].parts.empty());
  CHECK(count_separations(std::vector<EventId>{}, d) == 1);
}

TEST_CASE("distinctness excludes repeated patterns") {
  Dictionary d;
  d.add(Pattern{1});
  d.add(Pattern{2});
  // (1,1) can only be cut as ([1],[1]), which repeats a pattern.
  CHECK(count_separations(std::vector<EventId>{1, 1}, d) == 0);
  CHECK(count_separations(std::vector<EventId>{1, 2}, d) == 1);
  Separation bad{{0, 0}};
  CHECK_FALSE(is_valid_separation(bad, std::vector<EventId>{1, 1}, d));
}

TEST_CASE("separation count saturates at the cap") {
  Dictionary d = Dictionary::unigrams(12);
  for (EventId a = 0; a < 11; ++a) d.add(Pattern{a, a + 1});
  std::vector<EventId> E;
  for (EventId e = 0; e < 12; ++e) E.push_back(e);
  auto full = count_separations(E, d);
  CHECK(full == 233);  // Fibonacci: cuts into 1- and 2-grams
  CHECK(count_separations(E, d, 50) == 50);
}

TEST_CASE("enumeration matches exhaustive segmentation on random instances") {
  std::mt19937_64 rng(2024);
  for (int rep = 0; rep < 300; ++rep) {
    std::size_t alphabet = 2 + rng() % 7;
    auto d = oracle::random_dictionary(rng, alphabet, 1 + rng() % 6, 4, 0.8);
    if (d.empty()) continue;
    auto E = oracle::random_sentence(rng, d, 1 + rng() % 12);
    auto expect = oracle::segmentations(E, d);
    std::set<std::vector<std::uint32_t>> got;
    for (const auto& s : enumerate_separations(E, d)) got.insert(s.parts);
    REQUIRE(got == expect);
    CHECK(count_separations(E, d) == expect.size());
  }
}

TEST_CASE("trie prefix lookup") {
  PatternTrie t;
  t.insert(std::vector<EventId>{1}, 0);
  t.insert(std::vector<EventId>{1, 2, 3}, 1);
  CHECK(t.find(std::vector<EventId>{1, 2, 3}) == 1);
  CHECK(t.find(std::vector<EventId>{1, 2}) == PatternTrie::kNone);
  std::vector<std::pair<std::size_t, std::uint32_t>> hits;
  t.for_each_prefix(std::vector<EventId>{1, 2, 3, 4}, [&](std::size_t l, std::uint32_t id) {
    hits.emplace_back(l, id);
  });
  CHECK(hits == std::vector<std::pair<std::size_t, std::uint32_t>>{{1, 0}, {3, 1}});
  CHECK(t.max_length() == 3);
}

TEST_CASE("frequent l-grams") {
  std::vector<EventSentence> s = {{1, 2, 3}, {1, 2, 4}};
  auto top = frequent_lgrams(s, 2, Dictionary{}, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0] == PatternCount{Pattern{1, 2}, 2});

  Dictionary ex;
  ex.add(Pattern{1, 2});
  auto next = frequent_lgrams(s, 2, ex, 1);
  REQUIRE(next.size() == 1);
  CHECK(next[0] == PatternCount{Pattern{2, 3}, 1});

  // Windows with a repeated event never qualify.
  std::vector<EventSentence> rep = {{5, 5, 5}};
  CHECK(frequent_lgrams(rep, 2, Dictionary{}, 3).empty());
}
