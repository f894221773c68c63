#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ldplab/coefficients.hpp"
#include "ldplab/control.hpp"
#include "ldplab/harness.hpp"
#include "ldplab/rate.hpp"

namespace ldplab {

/// Every problem found in a config file, each prefixed with its dotted key path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

/// Constant or per-interval control; f rows have K entries and g rows m entries.
struct ControlSpec {
    std::size_t intervals = 1;
    std::vector<std::vector<double>> f;  // one row, or one per interval
    std::vector<std::vector<double>> g;

    ControlPair build(const Model& model) const;
};

struct ExperimentParams {
    std::string kind;

    // skeleton
    double tol = 0.0;
    std::size_t max_iter = 100;

    // simulation based experiments
    double epsilon = 0.01;
    std::vector<double> eps_list;
    std::size_t paths = 1000;
    std::size_t sim_steps = 0;  // 0: use grid.steps
    bool dump_noise = false;
    std::optional<ControlSpec> control;
    std::vector<ControlSpec> controls;

    // rate
    std::optional<TerminalTarget> target;
    std::size_t intervals = 10;
    std::size_t rate_steps = 200;
    std::vector<double> penalties{1e1, 1e2, 1e3, 1e4};
    std::size_t rate_max_iter = 300;

    // validate-ldp
    std::optional<EventSpec> event;
    std::size_t target_hits = 20;
    std::size_t max_paths = 1000000;
    bool compare_rate = true;
    bool importance = false;

    // converge
    std::string variant = "both";  // a | b | both
    std::vector<std::size_t> n_list;

    // tightness
    double t0 = 0.2;
    std::vector<std::size_t> k_list;

    // check-conditions
    std::size_t samples = 2000;
    double delta = 1.0;
    double budget = 1.0;
    double sigma = 1.0;
};

/// Demo model: four Dirichlet modes on (0, pi), two marks.
Model demo_model();

struct ExperimentConfig {
    nlohmann::json tree;  // normalised document (duplicates resolved)
    Model model = demo_model();
    std::size_t steps = 1000;
    ExperimentParams experiment;
    std::uint64_t seed = 0;
    std::string output_dir = "runs";
    std::vector<std::string> warnings;

    /// FNV-1a 64 over the canonical (key-sorted) JSON form of the tree.
    std::string hash() const;
};

/// Parses and validates a TOML config. Duplicate keys keep the last value and leave a warning.
/// Throws ConfigError listing all violations.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& source = "<string>");

/// TOML text whose parse yields the same tree.
std::string serialize_config(const ExperimentConfig& cfg);

/// Removes all but the last occurrence of repeated keys; returns the cleaned text.
std::string resolve_duplicate_keys(const std::string& text, std::vector<std::string>& warnings);

}  // namespace ldplab
