// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ltdm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kInternal = 3,
  kConditionFailed = 4,  // check-id: a condition fails
  kCannotVerify = 5,     // check-id: witnesses missing
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ltdm::cli
