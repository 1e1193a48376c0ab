// Apache License, Version 2.0, refer to LICENSE.txt

// Brute-force reference implementations shared by the unit and acceptance
// tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "ltdm/core.hpp"

namespace oracle {

using ltdm::Dictionary;
using ltdm::EventId;
using ltdm::Pattern;

// Every way to cut E into contiguous pieces (2^{n-1} of them), keeping the
// cuts whose pieces are distinct dictionary patterns.
inline std::set<std::vector<std::uint32_t>> segmentations(const std::vector<EventId>& E,
                                                          const Dictionary& d) {
  std::set<std::vector<std::uint32_t>> out;
  if (E.empty()) return out;
  const std::size_t n = E.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    std::vector<std::uint32_t> parts;
    std::size_t start = 0;
    bool ok = true;
    for (std::size_t u = 0; u < n && ok; ++u) {
      bool cut = u == n - 1 || (mask >> u) & 1;
      if (!cut) continue;
      Pattern piece(std::vector<EventId>(E.begin() + static_cast<long>(start),
                                         E.begin() + static_cast<long>(u) + 1));
      bool found = false;
      for (std::size_t w = 0; w < d.size(); ++w) {
        if (d[w] == piece) {
          parts.push_back(static_cast<std::uint32_t>(w));
          found = true;
          break;
        }
      }
      ok = found;
      start = u + 1;
    }
    if (!ok) continue;
    auto sorted = parts;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
    out.insert(parts);
  }
  return out;
}

// P(S | theta) = (1/n_S!) prod_w theta^{w in S} (1 - theta)^{w not in S}.
inline double separation_prob(const std::vector<std::uint32_t>& parts,
                              const std::vector<double>& theta) {
  double p = 1.0;
  for (std::size_t w = 0; w < theta.size(); ++w) {
    bool in = std::find(parts.begin(), parts.end(), w) != parts.end();
    p *= in ? theta[w] : 1.0 - theta[w];
  }
  for (std::size_t k = 2; k <= parts.size(); ++k) p /= static_cast<double>(k);
  return p;
}

// Calls f on every ordered sequence of distinct pattern indices in [0, n).
template <class F>
void for_each_sequence(std::size_t n, F&& f) {
  std::vector<std::uint32_t> cur;
  std::vector<char> used(n, 0);
  auto rec = [&](auto&& self) -> void {
    f(cur);
    for (std::uint32_t w = 0; w < n; ++w) {
      if (used[w]) continue;
      used[w] = 1;
      cur.push_back(w);
      self(self);
      cur.pop_back();
      used[w] = 0;
    }
  };
  rec(rec);
}

// Record likelihood by explicit sums over classes and separations. Gap times
// come from the stamps: the first gap of the record is its first stamp.
inline double record_likelihood(const ltdm::ProcessRecord& r, const ltdm::ModelParams& p,
                                const Dictionary& d, bool condition_on_K) {
  double total = 0.0;
  for (std::size_t z = 0; z < p.pi.size(); ++z) {
    double lz = p.pi[z];
    double prev = 0.0;
    for (const auto& s : r.sentences) {
      double ev = 0.0;
      if (s.events.empty()) {
        ev = separation_prob({}, p.theta[z]);
      } else {
        for (const auto& parts : segmentations(s.events, d)) ev += separation_prob(parts, p.theta[z]);
      }
      lz *= ev;
      for (double t : s.stamps) {
        double g = t - prev;
        lz *= p.lambda[z] * std::exp(-p.lambda[z] * g);
        prev = t;
      }
    }
    total += lz;
  }
  if (!condition_on_K) {
    double K = static_cast<double>(r.sentences.size());
    total *= std::exp(K * std::log(p.kappa) - p.kappa - std::lgamma(K + 1.0));
  }
  return total;
}

// Random dictionary over `alphabet` events: all 1-grams with probability
// `unigram_p` each, plus up to `extra` distinct-event longer patterns.
inline Dictionary random_dictionary(std::mt19937_64& rng, std::size_t alphabet, std::size_t extra,
                                    std::size_t max_len, double unigram_p = 1.0) {
  Dictionary d;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (EventId e = 0; e < alphabet; ++e)
    if (U(rng) < unigram_p) d.add(Pattern{e});
  std::uniform_int_distribution<std::size_t> len(2, std::max<std::size_t>(2, max_len));
  for (std::size_t k = 0; k < extra * 4 && d.size() < alphabet + extra; ++k) {
    std::vector<EventId> pool(alphabet);
    for (EventId e = 0; e < alphabet; ++e) pool[e] = e;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t l = std::min(len(rng), static_cast<std::size_t>(alphabet));
    d.add(Pattern(std::vector<EventId>(pool.begin(), pool.begin() + static_cast<long>(l))));
  }
  return d;
}

// Sentence that is a concatenation of random dictionary patterns, so it is
// usually segmentable; events may repeat.
inline std::vector<EventId> random_sentence(std::mt19937_64& rng, const Dictionary& d,
                                            std::size_t max_len) {
  std::vector<EventId> s;
  std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
  while (s.size() < max_len) {
    const auto& p = d[pick(rng)];
    if (s.size() + p.length() > max_len) break;
    s.insert(s.end(), p.events.begin(), p.events.end());
    if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.2) break;
  }
  if (s.empty()) s.push_back(d[0].events[0]);
  return s;
}

}  // namespace oracle
