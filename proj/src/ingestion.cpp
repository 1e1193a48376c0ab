// Apache License, Version 2.0, refer to LICENSE.txt

#include "ltdm/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <map>
#include <sstream>

namespace ltdm {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  for (auto& s : out) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

bool contains(const std::vector<std::string>& list, const std::string& s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

std::string where(long event_number) { return "event_number " + std::to_string(event_number); }

}  // namespace

void SplitPolicy::validate() const {
  for (const auto& t : reset_tokens)
    if (contains(drop_tokens, t) || t == state_tag)
      throw ContractViolation("token '" + t + "' is both a reset token and dropped or a state tag");
  if (contains(drop_tokens, state_tag))
    throw ContractViolation("state tag '" + state_tag + "' is drop-listed");
  if (repair_ties && !(tie_jitter > 0.0)) throw ContractViolation("tie jitter must be positive");
}

std::vector<RawLogRow> read_log(std::istream& in, const ColumnMap& columns) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_line(line, columns.delimiter);
  }
  if (header.empty()) return {};
  auto column = [&](const std::string& name, bool required) -> long {
    if (name.empty()) return -1;
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      if (required) throw MalformedLog("log header lacks column '" + name + "'");
      return -1;
    }
    return it - header.begin();
  };
  long c_num = column(columns.event_number, true), c_ev = column(columns.event, true),
       c_time = column(columns.time, true), c_val = column(columns.event_value, true),
       c_id = column(columns.examinee, true);

  std::vector<RawLogRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto f = split_line(line, columns.delimiter);
    if (f.size() != header.size())
      throw MalformedLog("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(header.size()) + " fields, found " +
                         std::to_string(f.size()));
    RawLogRow r;
    const std::string& num = f[static_cast<std::size_t>(c_num)];
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), r.event_number);
    if (ec != std::errc() || p != num.data() + num.size())
      throw MalformedLog("line " + std::to_string(line_no) + ": bad event_number '" + num + "'");
    r.event = f[static_cast<std::size_t>(c_ev)];
    r.event_value = f[static_cast<std::size_t>(c_val)];
    if (c_id >= 0) r.examinee = f[static_cast<std::size_t>(c_id)];
    const std::string& t = f[static_cast<std::size_t>(c_time)];
    try {
      std::size_t used = 0;
      r.time = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::logic_error&) {
      throw MalformedLog(where(r.event_number) + ": bad time '" + t + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<StateRow> drop_noise_rows(const std::vector<RawLogRow>& rows, const SplitPolicy& policy,
                                      DropSummary* summary) {
  DropSummary s;
  std::vector<StateRow> out;
  for (const auto& r : rows) {
    if (contains(policy.reset_tokens, r.event) || contains(policy.reset_tokens, r.event_value)) {
      out.push_back({r.event_number, r.time, std::string(), true});
      ++s.kept;
    } else if (r.event == policy.state_tag) {
      out.push_back({r.event_number, r.time, r.event_value, false});
      ++s.kept;
    } else if (contains(policy.drop_tokens, r.event)) {
      ++s.dropped;
    } else {
      ++s.unrecognized;
    }
  }
  if (summary) *summary = s;
  return out;
}

std::vector<DirectedEvent> diff_events(const std::vector<StateRow>& rows) {
  std::vector<DirectedEvent> out;
  std::string prev;
  std::size_t width = 0;
  bool reset_pending = false;
  for (const auto& r : rows) {
    if (r.reset) {
      std::fill(prev.begin(), prev.end(), '0');
      reset_pending = true;
      continue;
    }
    if (r.payload.empty()) throw MalformedLog(where(r.event_number) + ": empty state payload");
    for (char c : r.payload)
      if (c != '0' && c != '1')
        throw MalformedLog(where(r.event_number) + ": payload is not a 0/1 string");
    if (width == 0) {
      width = r.payload.size();
      prev.assign(width, '0');
    } else if (r.payload.size() != width) {
      throw MalformedLog(where(r.event_number) + ": payload width " +
                         std::to_string(r.payload.size()) + " differs from " +
                         std::to_string(width));
    }
    std::size_t changed = 0, pos = 0;
    for (std::size_t b = 0; b < width; ++b) {
      if (prev[b] != r.payload[b]) {
        ++changed;
        pos = b;
      }
    }
    if (changed != 1)
      throw MalformedLog(where(r.event_number) + ": payload differs from the previous state in " +
                         std::to_string(changed) + " positions");
    DirectedEvent e;
    e.event = static_cast<EventId>(pos);
    e.direction = r.payload[pos] == '1' ? 1 : -1;
    e.time = r.time;
    e.after_reset = reset_pending;
    e.event_number = r.event_number;
    out.push_back(e);
    prev = r.payload;
    reset_pending = false;
  }
  return out;
}

std::vector<std::string> reconstruct_bitstrings(const std::vector<DirectedEvent>& events,
                                                std::size_t width) {
  std::vector<std::string> out;
  std::string state(width, '0');
  for (const auto& e : events) {
    if (e.event >= width) throw ContractViolation("event position beyond payload width");
    if (e.after_reset) std::fill(state.begin(), state.end(), '0');
    state[e.event] = e.direction > 0 ? '1' : '0';
    out.push_back(state);
  }
  return out;
}

ProcessRecord split_sentences(const std::vector<DirectedEvent>& events, const SplitPolicy& policy,
                              std::size_t* repaired_ties) {
  ProcessRecord rec;
  std::size_t repaired = 0;
  double last = 0.0;
  int dir = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    double t = e.time;
    if (i > 0 && !(t > last)) {
      if (!policy.repair_ties || t < last)
        throw MalformedLog(where(e.event_number) + ": time " + std::to_string(t) +
                           " does not exceed the previous event time");
      t = last + policy.tie_jitter;
      ++repaired;
    }
    bool fresh = rec.sentences.empty() || e.after_reset ||
                 (policy.direction_change && e.direction != dir);
    if (fresh) rec.sentences.emplace_back();
    rec.sentences.back().events.push_back(e.event);
    rec.sentences.back().stamps.push_back(t);
    last = t;
    dir = e.direction;
  }
  if (repaired_ties) *repaired_ties = repaired;
  return rec;
}

std::string PreprocessSummary::line() const {
  std::ostringstream o;
  o << std::fixed << std::setprecision(2) << "records=" << records << " sentences=" << sentences
    << " events=" << events << " mean_sentences_per_record=" << mean_sentences()
    << " mean_events_per_record=" << mean_events() << " dropped_rows=" << rows.dropped
    << " unrecognized_rows=" << rows.unrecognized << " repaired_ties=" << repaired_ties;
  if (excluded_examinees) o << " excluded_examinees=" << excluded_examinees;
  return o.str();
}

Dataset preprocess(const std::vector<RawLogRow>& rows, const PreprocessOptions& options,
                   PreprocessSummary* summary) {
  options.policy.validate();
  PreprocessSummary s;
  std::vector<std::string> order;
  std::map<std::string, std::vector<RawLogRow>> groups;
  for (const auto& r : rows) {
    auto [it, inserted] = groups.try_emplace(r.examinee);
    if (inserted) order.push_back(r.examinee);
    it->second.push_back(r);
  }
  std::size_t width = 0;
  Dataset data;
  for (const auto& id : order) {
    if (options.keep && !options.keep(id)) {
      ++s.excluded_examinees;
      continue;
    }
    DropSummary ds;
    auto states = drop_noise_rows(groups[id], options.policy, &ds);
    s.rows.kept += ds.kept;
    s.rows.dropped += ds.dropped;
    s.rows.unrecognized += ds.unrecognized;
    for (const auto& st : states) {
      if (st.reset) continue;
      if (width == 0) width = st.payload.size();
      if (st.payload.size() != width)
        throw MalformedLog(where(st.event_number) + ": payload width differs across examinees");
    }
    auto events = diff_events(states);
    std::size_t ties = 0;
    ProcessRecord rec = split_sentences(events, options.policy, &ties);
    s.repaired_ties += ties;
    s.sentences += rec.sentence_count();
    s.events += rec.event_count();
    data.records.push_back(std::move(rec));
  }
  data.alphabet = numeric_alphabet(width);
  s.records = data.records.size();
  validate_dataset(data);
  if (summary) *summary = s;
  return data;
}

}  // namespace ltdm
