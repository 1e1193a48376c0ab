// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ltdm/core.hpp"

namespace ltdm {

inline constexpr std::size_t kDefaultSeparationCap = 10000;

// Prefix index over patterns. Each stored pattern carries a caller-chosen id.
class PatternTrie {
 public:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  PatternTrie();
  explicit PatternTrie(const Dictionary& d);

  void insert(std::span<const EventId> events, std::uint32_t id);
  std::uint32_t find(std::span<const EventId> events) const;

  // Calls f(length, id) for every stored pattern that is a prefix of events,
  // in increasing length.
  template <class F>
  void for_each_prefix(std::span<const EventId> events, F&& f) const {
    std::uint32_t node = 0;
    for (std::size_t u = 0; u < events.size(); ++u) {
      node = child(node, events[u]);
      if (node == kNone) return;
      if (nodes_[node].id != kNone) f(u + 1, nodes_[node].id);
    }
  }

  std::size_t max_length() const { return max_length_; }

 private:
  struct Node {
    std::vector<std::pair<EventId, std::uint32_t>> next;
    std::uint32_t id = kNone;
  };

  std::uint32_t child(std::uint32_t node, EventId e) const;

  std::vector<Node> nodes_;
  std::size_t max_length_ = 0;
};

using SeparationSet = std::vector<Separation>;

// All ordered sequences of distinct patterns whose concatenation is E, in
// lexicographic order of split positions. Ids are those stored in the trie.
SeparationSet enumerate_separations(std::span<const EventId> E, const PatternTrie& trie,
                                    std::size_t cap = kDefaultSeparationCap);
SeparationSet enumerate_separations(std::span<const EventId> E, const Dictionary& d,
                                    std::size_t cap = kDefaultSeparationCap);

// Number of separations, saturating at cap.
std::size_t count_separations(std::span<const EventId> E, const PatternTrie& trie,
                              std::size_t cap = kDefaultSeparationCap);
std::size_t count_separations(std::span<const EventId> E, const Dictionary& d,
                              std::size_t cap = kDefaultSeparationCap);

// Checks concatenation and distinctness of a separation against E.
bool is_valid_separation(const Separation& s, std::span<const EventId> E, const Dictionary& d);

struct PatternCount {
  Pattern pattern;
  std::size_t count = 0;
  friend bool operator==(const PatternCount&, const PatternCount&) = default;
};

// The `top` most frequent A2-valid length-l windows that are not in exclude.
std::vector<PatternCount> frequent_lgrams(std::span<const EventSentence> sentences, std::size_t l,
                                          const Dictionary& exclude, std::size_t top);

// Same, over sentences given by pointer (used when selecting by class).
std::vector<PatternCount> frequent_lgrams(std::span<const EventSentence* const> sentences,
                                          std::size_t l,
                                          const std::function<bool(const Pattern&)>& excluded,
                                          std::size_t top);

}  // namespace ltdm
