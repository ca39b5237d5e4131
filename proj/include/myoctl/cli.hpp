#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace myoctl::cli {

enum class Subcommand { simulate, invert, roundtrip, batch, gen_fixture, resample };

struct Command {
    Subcommand sub = Subcommand::roundtrip;
    std::string plant;       // plant file
    std::string kind;        // fixture kind (gen-fixture, roundtrip without --plant)
    std::string in;
    std::string out;
    std::string joint_map;
    std::string ctrl_out;    // simulate: also write the driving controls
    std::uint64_t seed = 1;
    long long njoints = 3;
    long long nactuators = 8;
    double dt = 0.002;
    double duration = 2.0;
    double rate_out = 0.0;   // simulate: resample the written poses (0 = simulation rate)
    double to_hz = 0.0;
    double process_hz = 500.0;
    std::optional<int> workers;
    double rmse_tol = 1e-2;
    double residual_tol = 1e-6;
    double min_fraction = 0.99;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct ParseOutcome {
    std::optional<Command> command;  // empty when the process should exit
    int exit_code = kExitOk;
};

/// Parse argv. Usage errors print to `err` and yield exit code 2; --help
/// prints to `out` and yields 0.
ParseOutcome parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int run(const Command& cmd, std::ostream& out, std::ostream& err);

}  // namespace myoctl::cli
