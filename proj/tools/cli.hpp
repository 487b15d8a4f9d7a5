#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vslctm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kValidation = 2,
  kRuntime = 3,
};

/// Runs one command line. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// VSLCTM_OUTPUT_DIR when set, else the working directory.
std::string default_output_dir();

}  // namespace vslctm::cli
