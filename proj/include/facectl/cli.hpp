#pragma once

#include <string>
#include <vector>

namespace facectl {

inline constexpr const char* kDatasetRootEnv = "FACECTL_DATASET_ROOT";

// Entry point of the facectl tool. Returns the process exit code; failures
// print one line "error: kind=<kind> message=<text>" on stderr.
int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace facectl
