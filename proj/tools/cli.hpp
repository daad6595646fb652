#pragma once

// Command-line front end: argument parsing, config files, output headers.

#include "arw/experiments.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arw::cli
{
    class UsageError : public std::runtime_error
    {
    public:
        explicit UsageError(const std::string &what) : std::runtime_error("UsageError: " + what) {}
    };

    enum ExitCode : int
    {
        kOk = 0,
        kUsage = 1,
        kViolation = 2,
        kIo = 3,
    };

    struct CliConfig
    {
        std::string subcommand;
        /// Every recorded option of the subcommand with its resolved value, in declaration order.
        std::vector<std::pair<std::string, std::string>> resolved;
        /// Filled for scan, ring, dd and condition.
        ExperimentSpec spec;
        std::string out_path; // empty: standard output
        std::string format = "csv";
        std::string trace_path;

        // validate
        std::uint64_t seed_count = 1000;
        bool inject_skip_odometer = false;
        // block
        int K = 4;
        int m_max = 200;
        // trap
        int trap_n = 3;
        int trap_radius = 60;
        // oracle
        std::string which;
        std::uint64_t horizon = 0;
        std::int64_t urn_r = 10;
        double zeta_pp = 0.5;
        int sweep_L = 100;
    };

    /// Parses argv (argv[0] is the program name). Throws UsageError; returns an empty
    /// subcommand when help was requested (the text is in `help`).
    CliConfig parse_args(int argc, const char *const *argv, std::string *help = nullptr);

    /// "key = value" lines, optionally behind "#! " as written in output headers,
    /// or the "spec" object of a JSON output. Throws std::ios_base::failure.
    std::vector<std::pair<std::string, std::string>> read_config(const std::string &path);

    /// Runs the CLI and returns the process exit code.
    int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
}
