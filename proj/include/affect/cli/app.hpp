#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "affect/cli/run_config.hpp"

namespace affect::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Entry point of the affect tool. argv[0] is the program name. Returns 0 on
// success, 1 on a usage or configuration error and 2 on a data error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// Same, with `args` excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Reads `config` (if any) and applies the key=value overrides on top.
RunConfig load_run_config(const std::optional<std::filesystem::path>& config, const std::vector<std::string>& sets);

}  // namespace affect::cli
