#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cppe/config.hpp"

namespace cppe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Every section and key the tool accepts.
const Config::Schema& config_schema();

struct RunContext {
    Config config;
    std::optional<std::uint64_t> seed;
    std::filesystem::path out_dir = ".";
    unsigned threads = 1;
    std::ostream* log = nullptr;
};

/// Runs one subcommand, writes its outputs plus manifest.json (reproducible content) and
/// run_info.json (timestamps, duration, thread count). Returns the process exit code;
/// errors are reported on ctx.log.
int run_command(const std::string& name, RunContext& ctx);

}  // namespace cppe::cli
