// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <string>
#include <vector>

#include "ltdm/core.hpp"

namespace ltdm {

// One of the four benchmark simulation settings. Event labels are "1".."n"
// and event id = label - 1.
struct Fixture {
  std::string name;
  std::vector<std::string> alphabet;
  Dictionary dictionary;
  ModelParams params;
  std::size_t default_m = 1000;
  // Partition of 1-grams (as event ids) that serves as the C1 witness for
  // every multi-class equivalence group; empty when none is needed.
  std::vector<std::vector<EventId>> c1_partition;
};

Fixture fixture_setting1();
Fixture fixture_setting2();
Fixture fixture_setting3();
Fixture fixture_setting4();

// "setting1".."setting4"; throws ContractViolation otherwise.
Fixture fixture_by_name(const std::string& name);
std::vector<std::string> fixture_names();

// Traffic-route example dictionary over 23 road labels:
// [10] [20] [8 9] [9 8] [10 8] [9 20] [3 22 4] [9 8 10] [16 19 6].
Dictionary example1_dictionary();

}  // namespace ltdm
