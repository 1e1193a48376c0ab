// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ltdm {

// Dense index into a dataset's alphabet. Raw labels only live in the
// alphabet side table.
using EventId = std::uint32_t;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data that violates a record invariant (ordering, lengths, ids).
class MalformedRecord : public Error {
 public:
  using Error::Error;
};

// Raw log rows that cannot be turned into events.
class MalformedLog : public Error {
 public:
  using Error::Error;
};

class UnsegmentableSentence : public Error {
 public:
  using Error::Error;
};

class SeparationCapExceeded : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Internal state that should be unreachable.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

struct Pattern {
  std::vector<EventId> events;

  Pattern() = default;
  explicit Pattern(std::vector<EventId> e) : events(std::move(e)) {}
  Pattern(std::initializer_list<EventId> e) : events(e) {}

  std::size_t length() const { return events.size(); }
  std::span<const EventId> view() const { return events; }

  friend bool operator==(const Pattern&, const Pattern&) = default;
  friend auto operator<=>(const Pattern& a, const Pattern& b) {
    return a.events <=> b.events;
  }
};

struct PatternHash {
  std::size_t operator()(const Pattern& p) const noexcept;
  std::size_t operator()(std::span<const EventId> events) const noexcept;
};

// True when a pattern of length >= 2 has pairwise-distinct events.
bool has_distinct_events(std::span<const EventId> events);

// Ordered set of distinct patterns. Index order is insertion order.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(std::vector<Pattern> patterns);

  static Dictionary unigrams(std::size_t alphabet_size);

  // Returns false (and leaves the dictionary unchanged) for a duplicate.
  bool add(Pattern p);

  std::size_t size() const { return patterns_.size(); }
  bool empty() const { return patterns_.empty(); }
  const Pattern& operator[](std::size_t i) const { return patterns_[i]; }
  const std::vector<Pattern>& patterns() const { return patterns_; }
  auto begin() const { return patterns_.begin(); }
  auto end() const { return patterns_.end(); }

  std::optional<std::size_t> index_of(const Pattern& p) const;
  bool contains(const Pattern& p) const { return index_.contains(p); }

  std::size_t count_of_length(std::size_t l) const;
  std::size_t max_length() const;

 private:
  std::vector<Pattern> patterns_;
  std::unordered_map<Pattern, std::size_t, PatternHash> index_;
};

using EventSentence = std::vector<EventId>;
using TimeSentence = std::vector<double>;
using GapSentence = std::vector<double>;

struct Sentence {
  EventSentence events;
  TimeSentence stamps;
};

struct ProcessRecord {
  std::vector<Sentence> sentences;

  std::size_t sentence_count() const { return sentences.size(); }
  std::size_t event_count() const;
};

struct Dataset {
  std::vector<std::string> alphabet;
  std::vector<ProcessRecord> records;

  std::size_t size() const { return records.size(); }
};

// Ordered pattern sequence; parts are indices into the owning dictionary.
struct Separation {
  std::vector<std::uint32_t> parts;

  std::size_t size() const { return parts.size(); }
  friend bool operator==(const Separation&, const Separation&) = default;
  friend auto operator<=>(const Separation& a, const Separation& b) {
    return a.parts <=> b.parts;
  }
};

// Finite-mixture parameters. theta is J rows of v_D pattern probabilities.
struct ModelParams {
  std::vector<double> pi;
  std::vector<std::vector<double>> theta;
  std::vector<double> lambda;
  double kappa = 1.0;

  std::size_t classes() const { return pi.size(); }

  // Throws ContractViolation when any documented invariant fails.
  void validate(std::size_t dictionary_size) const;
};

// Patterns of length >= 2 that repeat an event. Empty result means the
// dictionary satisfies the distinct-event assumption.
std::vector<Pattern> validate_A2(const Dictionary& d);

// Gap transform: first gap is the first stamp, a sentence's first gap is
// measured from the previous event in the record.
std::vector<GapSentence> gaps_from_stamps(const ProcessRecord& record);
std::vector<TimeSentence> stamps_from_gaps(const std::vector<GapSentence>& gaps);

// Checks ids against the alphabet and stamp ordering across the record.
void validate_record(const ProcessRecord& record, std::size_t alphabet_size);
void validate_dataset(const Dataset& data);

// "[10 8 9]" using alphabet labels (or raw ids when the alphabet is empty).
std::string render_pattern(const Pattern& p, const std::vector<std::string>& alphabet);
Pattern parse_pattern(const std::string& text, const std::vector<std::string>& alphabet);

// Alphabet "1".."n", the labelling used by the simulation fixtures.
std::vector<std::string> numeric_alphabet(std::size_t n);

}  // namespace ltdm
