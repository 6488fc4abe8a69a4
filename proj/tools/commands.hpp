#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace entrobound::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kParseError = 2,
    kBlowUp = 3,
    kNotConverged = 4,
    kDimensionTooLarge = 5,
    kViolation = 6,
};

struct RunOptions {
    std::string command;  // bounds | empirical | verify | simulate
    std::filesystem::path spec;
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<double> t_max;
    std::optional<double> dt;
    std::optional<std::string> results;
    std::optional<std::string> eps;
    std::optional<std::string> horizons;
};

/// Runs one subcommand; diagnostics go to `err`, progress to `log`.
int run(const RunOptions& opts, std::ostream& log, std::ostream& err);

/// Parses argv and runs.
int main_entry(int argc, char** argv);

}  // namespace entrobound::cli
