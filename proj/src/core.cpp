// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace ltdm {

std::size_t PatternHash::operator()(std::span<const EventId> events) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (EventId e : events) {
    h ^= static_cast<std::size_t>(e) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

std::size_t PatternHash::operator()(const Pattern& p) const noexcept {
  return (*this)(p.view());
}

bool has_distinct_events(std::span<const EventId> events) {
  for (std::size_t a = 0; a < events.size(); ++a)
    for (std::size_t b = a + 1; b < events.size(); ++b)
      if (events[a] == events[b]) return false;
  return true;
}

Dictionary::Dictionary(std::vector<Pattern> patterns) {
  for (auto& p : patterns) {
    if (!add(std::move(p))) throw ContractViolation("duplicate pattern in dictionary");
  }
}

Dictionary Dictionary::unigrams(std::size_t alphabet_size) {
  Dictionary d;
  for (std::size_t e = 0; e < alphabet_size; ++e) d.add(Pattern{static_cast<EventId>(e)});
  return d;
}

bool Dictionary::add(Pattern p) {
  if (p.events.empty()) throw ContractViolation("empty pattern");
  if (index_.contains(p)) return false;
  index_.emplace(p, patterns_.size());
  patterns_.push_back(std::move(p));
  return true;
}

std::optional<std::size_t> Dictionary::index_of(const Pattern& p) const {
  auto it = index_.find(p);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dictionary::count_of_length(std::size_t l) const {
  return static_cast<std::size_t>(std::count_if(
      patterns_.begin(), patterns_.end(), [l](const Pattern& p) { return p.length() == l; }));
}

std::size_t Dictionary::max_length() const {
  std::size_t L = 0;
  for (const auto& p : patterns_) L = std::max(L, p.length());
  return L;
}

std::size_t ProcessRecord::event_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.events.size();
  return n;
}

void ModelParams::validate(std::size_t dictionary_size) const {
  const std::size_t J = pi.size();
  if (J == 0) throw ContractViolation("model has no classes");
  if (theta.size() != J || lambda.size() != J)
    throw ContractViolation("pi, theta and lambda disagree on the class count");
  double total = 0.0;
  for (double p : pi) {
    if (!(p >= 0.0)) throw ContractViolation("negative mixture weight");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ContractViolation("mixture weights do not sum to one");
  for (double l : lambda)
    if (!(l > 0.0) || !std::isfinite(l)) throw ContractViolation("lambda must be positive");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ContractViolation("kappa must be positive");
  for (const auto& row : theta) {
    if (row.size() != dictionary_size)
      throw ContractViolation("theta row length differs from dictionary size");
    for (double t : row)
      if (!(t >= 0.0 && t <= 1.0)) throw ContractViolation("theta entry outside [0,1]");
  }
}

std::vector<Pattern> validate_A2(const Dictionary& d) {
  std::vector<Pattern> bad;
  for (const auto& p : d)
    if (p.length() >= 2 && !has_distinct_events(p.view())) bad.push_back(p);
  return bad;
}

std::vector<GapSentence> gaps_from_stamps(const ProcessRecord& record) {
  std::vector<GapSentence> out;
  out.reserve(record.sentences.size());
  bool seen = false;
  double prev = 0.0;
  for (std::size_t k = 0; k < record.sentences.size(); ++k) {
    const auto& s = record.sentences[k];
    if (s.stamps.size() != s.events.size())
      throw MalformedRecord("sentence " + std::to_string(k) + " has mismatched event and stamp counts");
    GapSentence g;
    g.reserve(s.stamps.size());
    for (double t : s.stamps) {
      if (!std::isfinite(t)) throw MalformedRecord("non-finite time stamp");
      double gap = seen ? t - prev : t;
      if (!(gap > 0.0))
        throw MalformedRecord("time stamps must be positive and strictly increasing (sentence " +
                              std::to_string(k) + ")");
      g.push_back(gap);
      prev = t;
      seen = true;
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<TimeSentence> stamps_from_gaps(const std::vector<GapSentence>& gaps) {
  std::vector<TimeSentence> out;
  out.reserve(gaps.size());
  double t = 0.0;
  for (const auto& g : gaps) {
    TimeSentence s;
    s.reserve(g.size());
    for (double x : g) {
      if (!(x > 0.0)) throw MalformedRecord("gap times must be positive");
      t += x;
      s.push_back(t);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void validate_record(const ProcessRecord& record, std::size_t alphabet_size) {
  for (const auto& s : record.sentences)
    for (EventId e : s.events)
      if (e >= alphabet_size)
        throw MalformedRecord("event id " + std::to_string(e) + " outside alphabet of size " +
                              std::to_string(alphabet_size));
  (void)gaps_from_stamps(record);
}

void validate_dataset(const Dataset& data) {
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    try {
      validate_record(data.records[i], data.alphabet.size());
    } catch (const MalformedRecord& e) {
      throw MalformedRecord("record " + std::to_string(i) + ": " + e.what());
    }
  }
}

std::string render_pattern(const Pattern& p, const std::vector<std::string>& alphabet) {
  std::string out = "[";
  for (std::size_t u = 0; u < p.events.size(); ++u) {
    if (u) out += ' ';
    EventId e = p.events[u];
    out += e < alphabet.size() ? alphabet[e] : std::to_string(e);
  }
  out += ']';
  return out;
}

Pattern parse_pattern(const std::string& text, const std::vector<std::string>& alphabet) {
  std::string body = text;
  if (!body.empty() && body.front() == '[') body.erase(body.begin());
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::istringstream in(body);
  std::vector<EventId> events;
  std::string tok;
  while (in >> tok) {
    if (alphabet.empty()) {
      events.push_back(static_cast<EventId>(std::stoul(tok)));
      continue;
    }
    auto it = std::find(alphabet.begin(), alphabet.end(), tok);
    if (it == alphabet.end()) throw MalformedRecord("unknown event label '" + tok + "'");
    events.push_back(static_cast<EventId>(it - alphabet.begin()));
  }
  if (events.empty()) throw MalformedRecord("empty pattern '" + text + "'");
  return Pattern(std::move(events));
}

std::vector<std::string> numeric_alphabet(std::size_t n) {
  std::vector<std::string> a;
  a.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) a.push_back(std::to_string(i));
  return a;
}

}  // namespace ltdm
