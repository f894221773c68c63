#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ldplab/config.hpp"

namespace ldplab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInconclusive = 2;

struct RunOptions {
    std::optional<std::string> kind;  // overrides experiment.kind
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::size_t threads = 1;
};

struct RunResult {
    int exit_code = kExitOk;
    std::string run_dir;
    std::vector<std::string> files;  // relative to run_dir
    nlohmann::json summary;
};

/// Executes the configured experiment inside a fresh directory <out>/<timestamp>-<config hash>
/// holding summary.json, CSV tables, config.toml and manifest.json. Module errors are rethrown
/// with the experiment name prepended.
RunResult run(ExperimentConfig cfg, const RunOptions& opts = {});

}  // namespace ldplab
