// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/fixtures.hpp"

#include <initializer_list>

namespace ltdm {

namespace {

using Labels = std::initializer_list<std::initializer_list<int>>;

void add_labels(Dictionary& d, Labels patterns) {
  for (const auto& p : patterns) {
    std::vector<EventId> ev;
    for (int label : p) ev.push_back(static_cast<EventId>(label - 1));
    if (!d.add(Pattern(std::move(ev)))) throw InvariantViolation("duplicate fixture pattern");
  }
}

void add_unigrams(Dictionary& d, int n) {
  for (int e = 1; e <= n; ++e) add_labels(d, {{e}});
}

// Row built from (count, value) runs over consecutive dictionary positions.
std::vector<double> runs(std::initializer_list<std::pair<int, double>> blocks) {
  std::vector<double> row;
  for (auto [count, value] : blocks) row.insert(row.end(), static_cast<std::size_t>(count), value);
  return row;
}

const Labels kTwoGramsLow = {{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 1},
                             {6, 7}, {7, 8}, {8, 9}, {9, 10}, {10, 6}};
const Labels kTwoGramsHigh = {{11, 12}, {12, 13}, {13, 14}, {14, 15}, {15, 11},
                              {16, 17}, {17, 18}, {18, 19}, {19, 20}, {20, 11}};
const Labels kThreeGramsHigh = {{11, 12, 14}, {12, 13, 15}, {13, 14, 12}, {14, 15, 11}, {15, 11, 13}};
const Labels kThreeGramsLow = {{1, 2, 4}, {2, 3, 5}, {3, 4, 7}, {3, 9, 6}, {2, 5, 6}};

std::vector<double> six_blocks(double a, double b, double c, double d, double e, double f) {
  return runs({{10, a}, {10, b}, {10, c}, {10, d}, {5, e}, {5, f}});
}

}  // namespace

Fixture fixture_setting1() {
  Fixture f;
  f.name = "setting1";
  f.alphabet = numeric_alphabet(20);
  add_unigrams(f.dictionary, 20);
  add_labels(f.dictionary, kTwoGramsLow);
  add_labels(f.dictionary, kTwoGramsHigh);
  add_labels(f.dictionary, kThreeGramsHigh);
  add_labels(f.dictionary, kThreeGramsLow);
  f.params.pi = {0.4, 0.3, 0.2, 0.05, 0.05};
  f.params.theta = {six_blocks(0.3, 0, 0.2, 0, 0, 0), six_blocks(0, 0.3, 0, 0.2, 0, 0),
                    six_blocks(0.2, 0.2, 0.05, 0.05, 0.001, 0.001),
                    six_blocks(0.05, 0.05, 0, 0, 0.3, 0), six_blocks(0, 0, 0.03, 0.03, 0, 0.3)};
  f.params.lambda = {10, 2.5, 1, 0.5, 0.2};
  f.params.kappa = 10;
  f.default_m = 1000;
  return f;
}

Fixture fixture_setting2() {
  Fixture f;
  f.name = "setting2";
  f.alphabet = numeric_alphabet(20);
  add_unigrams(f.dictionary, 20);
  add_labels(f.dictionary, kTwoGramsLow);
  add_labels(f.dictionary, kTwoGramsHigh);
  add_labels(f.dictionary, kThreeGramsLow);
  add_labels(f.dictionary, kThreeGramsHigh);
  f.params.pi = {0.2, 0.2, 0.2, 0.2, 0.1, 0.1};
  auto low = six_blocks(0.3, 0, 0.2, 0, 0, 0);
  auto high = six_blocks(0, 0.3, 0, 0.2, 0, 0);
  f.params.theta = {low, low, high, high, six_blocks(0.05, 0.05, 0, 0, 0.3, 0),
                    six_blocks(0, 0, 0.03, 0.03, 0, 0.3)};
  f.params.lambda = {0.2, 4, 0.2, 4, 1, 1};
  f.params.kappa = 10;
  f.default_m = 1000;
  std::vector<EventId> a, b, c;
  for (EventId e = 0; e < 5; ++e) a.push_back(e);
  for (EventId e = 5; e < 10; ++e) b.push_back(e);
  for (EventId e = 10; e < 20; ++e) c.push_back(e);
  f.c1_partition = {a, b, c};
  return f;
}

Fixture fixture_setting3() {
  Fixture f;
  f.name = "setting3";
  f.alphabet = numeric_alphabet(30);
  add_unigrams(f.dictionary, 30);
  add_labels(f.dictionary, {{1, 2}, {2, 1}, {2, 3}, {3, 2}, {3, 4}, {4, 3}, {4, 5}, {5, 4},
                            {5, 1}, {1, 5}, {6, 7}, {7, 8}, {8, 9}, {9, 10}, {10, 6}});
  add_labels(f.dictionary, {{11, 12}, {12, 13}, {13, 14}, {14, 15}, {15, 11}, {16, 17}, {17, 18},
                            {18, 19}, {19, 20}, {20, 11}, {1, 11}, {2, 12}, {3, 13}, {4, 14},
                            {5, 15}});
  add_labels(f.dictionary, {{1, 2, 4}, {2, 3, 5}, {3, 4, 7}, {3, 9, 6}, {2, 5, 6}, {2, 1, 4},
                            {3, 2, 5}, {4, 2, 7}});
  add_labels(f.dictionary, {{11, 12, 14}, {12, 13, 15}, {13, 14, 12}, {14, 15, 11}, {15, 11, 13},
                            {12, 11, 14}, {13, 12, 15}});
  add_labels(f.dictionary, {{1, 2, 3, 4}, {2, 3, 5, 1}, {3, 4, 7, 1}, {3, 9, 6, 2}, {2, 5, 6, 4},
                            {3, 4, 1, 2}, {5, 1, 7, 8}, {6, 9, 3, 4}});
  add_labels(f.dictionary, {{11, 12, 13, 14}, {12, 13, 15, 11}, {13, 14, 17, 11},
                            {24, 25, 26, 27}, {24, 26, 28, 30}, {11, 16, 21, 26},
                            {16, 11, 26, 21}});
  auto row = [](double a, double b, double c, double d, double e, double g, double h, double i,
                double j) {
    return runs({{15, a}, {15, b}, {5, c}, {15, d}, {10, e}, {10, g}, {5, h}, {10, i}, {5, j}});
  };
  f.params.pi = {0.3, 0.3, 0.2, 0.1, 0.1};
  f.params.theta = {row(0.15, 0, 0, 0, 0, 0.06, 0.06, 0, 0),
                    row(0, 0.15, 0.06, 0.06, 0.06, 0, 0, 0, 0),
                    row(0.05, 0.05, 0.05, 0.001, 0.001, 0.05, 0.001, 0.001, 0.001),
                    row(0, 0, 0.03, 0.03, 0, 0, 0, 0.05, 0),
                    row(0.04, 0.04, 0, 0, 0, 0, 0, 0, 0.1)};
  f.params.lambda = {10, 2.5, 1, 0.5, 0.2};
  f.params.kappa = 10;
  f.default_m = 2000;
  return f;
}

Fixture fixture_setting4() {
  Fixture f = fixture_setting1();
  f.name = "setting4";
  auto c1 = six_blocks(0.15, 0.15, 0.1, 0, 0, 0);
  auto c2 = c1;
  c1[20] = 0.0;  // pattern 21, [1 2]
  c2[21] = 0.0;  // pattern 22, [2 3]
  f.params.theta = {c1, c2, six_blocks(0.1, 0.1, 0, 0.15, 0, 0),
                    six_blocks(0.05, 0.05, 0, 0, 0.3, 0), six_blocks(0, 0, 0.03, 0.03, 0, 0.3)};
  f.params.lambda = {1, 1, 1, 1, 1};
  std::vector<EventId> a, b, c;
  for (EventId e = 0; e < 5; ++e) a.push_back(e);
  for (EventId e = 5; e < 10; ++e) b.push_back(e);
  for (EventId e = 10; e < 20; ++e) c.push_back(e);
  f.c1_partition = {a, b, c};
  return f;
}

Fixture fixture_by_name(const std::string& name) {
  if (name == "setting1") return fixture_setting1();
  if (name == "setting2") return fixture_setting2();
  if (name == "setting3") return fixture_setting3();
  if (name == "setting4") return fixture_setting4();
  throw ContractViolation("unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() {
  return {"setting1", "setting2", "setting3", "setting4"};
}

Dictionary example1_dictionary() {
  Dictionary d;
  add_labels(d, {{10}, {20}, {8, 9}, {9, 8}, {10, 8}, {9, 20}, {3, 22, 4}, {9, 8, 10}, {16, 19, 6}});
  return d;
}

}  // namespace ltdm
