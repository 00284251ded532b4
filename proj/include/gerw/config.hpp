#pragma once

#include "gerw/families.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gerw {

// Parse/validation failure with enough context for a terminal diagnostic:
// the 1-based config line (0 when structural) and the offending field name
// ("" when the problem is not tied to one key).
struct ConfigError : std::runtime_error {
    int line = 0;
    std::string field;
    ConfigError(int line_, std::string field_, const std::string& message);
};

// Per-test tolerance overrides; defaults mirror the verification functions.
struct ToleranceOverrides {
    double lln = 0.01;
    double l2 = 1e-3;
    double l2_ratio = 0.02;
    double clt_delta = 0.01;
    double rate = 0.05;
    double lil_slack_lo = 0.4;
    double lil_slack_hi = 0.15;
    double drift_horizon_ratio = 100.0;
};

// Phase-diagram grid: inclusive [min, max] swept in steps of step > 0.
struct PhaseGrid {
    bool present = false;
    double theta = 1.0;
    double alpha = 0.5;
    double kappa_min = 0.0, kappa_max = 0.0, kappa_step = 1.0;
    double eta_min = 0.0, eta_max = 0.0, eta_step = 1.0;

    std::vector<double> kappa_values() const;
    std::vector<double> eta_values() const;
};

// One experiment: parameter families, run geometry, and which artifacts to
// produce.  The CLI subcommand always runs its own action; `actions` lists
// extras to produce in the same run, so one config can describe a complete
// experiment.
struct ExperimentConfig {
    AlphaFamily alpha;
    EpsFamily eps;
    double q = 0.5;
    std::uint64_t horizon = 0;
    std::vector<std::uint64_t> checkpoints; // strictly increasing, within [1, horizon]
    std::uint64_t ensemble = 1;
    std::uint64_t seed = 0;
    std::vector<std::string> actions;
    std::string out = "out";
    unsigned threads = 0; // 0 = runtime default
    ToleranceOverrides tol;
    PhaseGrid phase;

    // Fixed-order serialization with shortest round-trip number formatting;
    // parse_config(canonical()) reproduces the config exactly, and the
    // manifest hash is computed over this text.
    std::string canonical() const;
    std::uint64_t hash() const; // FNV-1a (64-bit) over canonical()
};

inline constexpr const char* kActionNames[] = {"sequences", "moments",  "classify",
                                               "simulate",  "verify",   "phase-diagram"};

// Strict structured-text parser ([section] headers, key = value lines, "#"
// comments).  Values are numbers, "strings", or single-line homogeneous
// arrays.  Unknown sections or keys, keys that the chosen family kind does
// not use, duplicates, and range violations all raise ConfigError.
ExperimentConfig parse_config(const std::string& text);

// Reads the file and parses it; unreadable path raises ConfigError(line 0).
ExperimentConfig load_config(const std::string& path);

} // namespace gerw
