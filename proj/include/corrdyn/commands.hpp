#pragma once

#include "corrdyn/config.hpp"

#include <string>
#include <vector>

namespace corrdyn {

inline constexpr const char* tool_version = "0.1.0";

/// The experiment commands, in CLI order.
const std::vector<std::string>& command_names();

struct RunResult {
    std::string directory;              // <out>/<command>-<hash>
    bool hypothesis_unverified = false; // a periodic critical value was found or could not be ruled out
    std::string summary;                // human-readable lines printed by the CLI
};

/// Runs one command and writes its outputs plus manifest.json into a fresh run directory.
RunResult run_command(const std::string& command, const Config& config, const std::string& out_root,
                      bool serial);

/// Directory name of a run: command and the FNV-1a hash of the canonical config.
std::string run_key(const std::string& command, const Config& config);

} // namespace corrdyn
