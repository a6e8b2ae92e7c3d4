#pragma once

#include "consensus/growth.hpp"
#include "consensus/schedule.hpp"
#include "consensus/stochastic.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace consensus::cli {

struct RunConfig {
    std::string command;  // gantmacher, schedule, check, jsr, growth, gen, simulate

    // Input: a matrix / sequence / generator file, or (gen, growth) the
    // generator flags below.
    std::optional<std::filesystem::path> input;
    bool renormalize = false;

    std::optional<std::filesystem::path> out_dir;
    std::optional<std::filesystem::path> out;   // CSV (growth, simulate) or sequence file (gen)
    std::optional<std::filesystem::path> csv;   // check trajectories
    std::optional<std::filesystem::path> x0;

    Tolerances tolerances;
    std::optional<std::uint64_t> seed;

    // schedule / check
    std::size_t horizon = 10000;
    std::optional<std::size_t> window;
    Direction direction = Direction::Backward;
    std::optional<double> delta_override;
    std::optional<std::size_t> max_windows;

    // jsr
    std::size_t max_len = 4;
    std::size_t budget = 1'000'000;
    bool transform = false;

    // growth / gen
    GapMode mode = GapMode::Bounded;
    double delta = 0.1;
    double a = 1.0;
    double gap_bound = 2.0;
    std::size_t n = 3;
    std::optional<std::size_t> steps;
    std::size_t terms = 1'000'000;
    Activation activation = Activation::Full;
    double activation_probability = 0.5;
};

/// Parses argv into a config. Returns nullopt after printing help or a
/// usage error; `status` then holds the exit code.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
                                    int& status);

/// Runs one command. JSON reports go to `out` (or <out-dir>/<command>.json).
/// Exit codes: 0 ok (warnings are in the report), 1 bad input, 2 invariant
/// violation, 3 budget exhausted.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace consensus::cli
