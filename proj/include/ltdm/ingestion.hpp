// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <functional>
#include <istream>
#include <string>
#include <vector>

#include "ltdm/core.hpp"

namespace ltdm {

struct RawLogRow {
  long event_number = 0;
  std::string examinee;  // empty when the log holds one examinee
  std::string event;
  double time = 0.0;
  std::string event_value;
};

// Column names in the header row of a delimited log.
struct ColumnMap {
  std::string examinee;  // optional
  std::string event_number = "event_number";
  std::string event = "event";
  std::string time = "time";
  std::string event_value = "event_value";
  char delimiter = ',';
};

struct SplitPolicy {
  bool direction_change = true;
  // Matched against the event tag or the value; the state is cleared.
  std::vector<std::string> reset_tokens{"RESET"};
  std::vector<std::string> drop_tokens{"START_ITEM", "END_ITEM", "click", "Q3_SELECT"};
  std::string state_tag = "ACER_EVENT";
  // Ties between consecutive events are rejected unless repaired by jitter.
  bool repair_ties = false;
  double tie_jitter = 1e-6;

  // Throws ContractViolation when token lists overlap.
  void validate() const;
};

std::vector<RawLogRow> read_log(std::istream& in, const ColumnMap& columns);

// State rows plus reset markers (empty payload), in input order.
struct StateRow {
  long event_number = 0;
  double time = 0.0;
  std::string payload;
  bool reset = false;
};

struct DropSummary {
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t unrecognized = 0;  // neither state, reset nor drop-listed; also dropped
};

std::vector<StateRow> drop_noise_rows(const std::vector<RawLogRow>& rows, const SplitPolicy& policy,
                                      DropSummary* summary = nullptr);

struct DirectedEvent {
  EventId event = 0;    // bit position - 1
  int direction = 1;    // +1 highlight, -1 unhighlight
  double time = 0.0;
  bool after_reset = false;
  long event_number = 0;
};

// Diffs consecutive payloads; the first row and the row after a reset are
// diffed against all zeros. Throws MalformedLog naming the event_number.
std::vector<DirectedEvent> diff_events(const std::vector<StateRow>& rows);

// Inverse of diff_events; resets contribute an all-zero state.
std::vector<std::string> reconstruct_bitstrings(const std::vector<DirectedEvent>& events,
                                                std::size_t width);

// Starts a sentence at each direction flip (when enabled) and after a reset.
// Tied or decreasing times throw MalformedLog unless policy.repair_ties.
ProcessRecord split_sentences(const std::vector<DirectedEvent>& events, const SplitPolicy& policy,
                              std::size_t* repaired_ties = nullptr);

struct PreprocessSummary {
  std::size_t records = 0;
  std::size_t sentences = 0;
  std::size_t events = 0;
  std::size_t repaired_ties = 0;
  std::size_t excluded_examinees = 0;
  DropSummary rows;
  double mean_sentences() const { return records ? double(sentences) / double(records) : 0.0; }
  double mean_events() const { return records ? double(events) / double(records) : 0.0; }
  std::string line() const;
};

struct PreprocessOptions {
  SplitPolicy policy;
  // Optional examinee filter; return false to exclude.
  std::function<bool(const std::string&)> keep;
};

// Groups rows by examinee (first appearance order) and builds the dataset.
// The alphabet is "1".."width", the payload width.
Dataset preprocess(const std::vector<RawLogRow>& rows, const PreprocessOptions& options,
                   PreprocessSummary* summary = nullptr);

}  // namespace ltdm
