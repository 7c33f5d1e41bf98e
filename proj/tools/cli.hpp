#pragma once

#include <string>
#include <vector>

namespace egnn::cli {

/// Entry point of the `egnn` command. Returns the process exit code: 0 when
/// the run manifest was written, 1 on a runtime or input error, 2 on a usage
/// error.
int run(int argc, const char* const* argv);

/// Convenience for tests: run({"egnn", "denoise", ...}).
int run(const std::vector<std::string>& args);

}  // namespace egnn::cli
