// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/segmenter.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace ltdm {

PatternTrie::PatternTrie() : nodes_(1) {}

PatternTrie::PatternTrie(const Dictionary& d) : PatternTrie() {
  for (std::size_t i = 0; i < d.size(); ++i) insert(d[i].view(), static_cast<std::uint32_t>(i));
}

std::uint32_t PatternTrie::child(std::uint32_t node, EventId e) const {
  for (const auto& [ev, c] : nodes_[node].next)
    if (ev == e) return c;
  return kNone;
}

void PatternTrie::insert(std::span<const EventId> events, std::uint32_t id) {
  if (events.empty()) throw ContractViolation("empty pattern");
  std::uint32_t node = 0;
  for (EventId e : events) {
    std::uint32_t c = child(node, e);
    if (c == kNone) {
      c = static_cast<std::uint32_t>(nodes_.size());
      nodes_[node].next.emplace_back(e, c);
      nodes_.emplace_back();
    }
    node = c;
  }
  nodes_[node].id = id;
  max_length_ = std::max(max_length_, events.size());
}

std::uint32_t PatternTrie::find(std::span<const EventId> events) const {
  std::uint32_t node = 0;
  for (EventId e : events) {
    node = child(node, e);
    if (node == kNone) return kNone;
  }
  return nodes_[node].id;
}

namespace {

struct Enumerator {
  std::span<const EventId> E;
  const PatternTrie& trie;
  std::size_t cap;
  SeparationSet* out = nullptr;  // null when only counting
  std::size_t count = 0;
  std::vector<std::uint32_t> stack;
  bool saturated = false;

  void run(std::size_t pos) {
    if (saturated) return;
    if (pos == E.size()) {
      if (count >= cap) {
        saturated = true;
        return;
      }
      ++count;
      if (out) out->push_back(Separation{stack});
      return;
    }
    trie.for_each_prefix(E.subspan(pos), [&](std::size_t len, std::uint32_t id) {
      if (saturated) return;
      if (std::find(stack.begin(), stack.end(), id) != stack.end()) return;
      stack.push_back(id);
      run(pos + len);
      stack.pop_back();
    });
  }
};

}  // namespace

SeparationSet enumerate_separations(std::span<const EventId> E, const PatternTrie& trie,
                                    std::size_t cap) {
  SeparationSet out;
  Enumerator en{E, trie, cap, &out, 0, {}, false};
  en.run(0);
  if (en.saturated)
    throw SeparationCapExceeded("sentence of length " + std::to_string(E.size()) +
                                " has more than " + std::to_string(cap) + " separations");
  return out;
}

SeparationSet enumerate_separations(std::span<const EventId> E, const Dictionary& d,
                                    std::size_t cap) {
  return enumerate_separations(E, PatternTrie(d), cap);
}

std::size_t count_separations(std::span<const EventId> E, const PatternTrie& trie,
                              std::size_t cap) {
  if (has_distinct_events(E)) {
    // Parts sit at disjoint positions of a repeat-free sentence, so they are
    // automatically distinct and a path count is exact.
    std::vector<std::size_t> ways(E.size() + 1, 0);
    ways[0] = 1;
    for (std::size_t p = 0; p < E.size(); ++p) {
      if (!ways[p]) continue;
      trie.for_each_prefix(E.subspan(p), [&](std::size_t len, std::uint32_t) {
        ways[p + len] = std::min(cap, ways[p + len] + ways[p]);
      });
    }
    return std::min(cap, ways[E.size()]);
  }
  Enumerator en{E, trie, cap, nullptr, 0, {}, false};
  en.run(0);
  return en.count;
}

std::size_t count_separations(std::span<const EventId> E, const Dictionary& d, std::size_t cap) {
  return count_separations(E, PatternTrie(d), cap);
}

bool is_valid_separation(const Separation& s, std::span<const EventId> E, const Dictionary& d) {
  std::vector<EventId> cat;
  for (std::size_t a = 0; a < s.parts.size(); ++a) {
    if (s.parts[a] >= d.size()) return false;
    for (std::size_t b = a + 1; b < s.parts.size(); ++b)
      if (s.parts[a] == s.parts[b]) return false;
    const auto& ev = d[s.parts[a]].events;
    cat.insert(cat.end(), ev.begin(), ev.end());
  }
  return std::equal(cat.begin(), cat.end(), E.begin(), E.end());
}

namespace {

std::vector<PatternCount> top_counts(std::map<std::vector<EventId>, std::size_t>& counts,
                                     std::size_t top) {
  std::vector<PatternCount> all;
  all.reserve(counts.size());
  for (auto& [k, c] : counts) all.push_back(PatternCount{Pattern(k), c});
  // counts is ordered lexicographically, so a stable sort keeps that order on ties.
  std::stable_sort(all.begin(), all.end(),
                   [](const PatternCount& a, const PatternCount& b) { return a.count > b.count; });
  if (all.size() > top) all.resize(top);
  return all;
}

}  // namespace

std::vector<PatternCount> frequent_lgrams(std::span<const EventSentence* const> sentences,
                                          std::size_t l,
                                          const std::function<bool(const Pattern&)>& excluded,
                                          std::size_t top) {
  if (l < 2) throw ContractViolation("frequent_lgrams needs l >= 2");
  std::unordered_map<Pattern, std::size_t, PatternHash> raw;
  for (const EventSentence* s : sentences) {
    if (s->size() < l) continue;
    for (std::size_t p = 0; p + l <= s->size(); ++p) {
      std::span<const EventId> w(s->data() + p, l);
      if (!has_distinct_events(w)) continue;
      ++raw[Pattern(std::vector<EventId>(w.begin(), w.end()))];
    }
  }
  std::map<std::vector<EventId>, std::size_t> counts;
  for (auto& [p, c] : raw)
    if (!excluded(p)) counts.emplace(p.events, c);
  return top_counts(counts, top);
}

std::vector<PatternCount> frequent_lgrams(std::span<const EventSentence> sentences, std::size_t l,
                                          const Dictionary& exclude, std::size_t top) {
  std::vector<const EventSentence*> ptrs;
  ptrs.reserve(sentences.size());
  for (const auto& s : sentences) ptrs.push_back(&s);
  return frequent_lgrams(std::span<const EventSentence* const>(ptrs), l,
                         [&](const Pattern& p) { return exclude.contains(p); }, top);
}

}  // namespace ltdm
