#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ldplab {

/// Picard or descent iteration that ran out of budget; carries the residual history.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}

    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// Simulated state left the blow-up guard.
class BlowUp : public std::runtime_error {
public:
    BlowUp(const std::string& what, double time, double norm)
        : std::runtime_error(what), time_(time), norm_(norm) {}

    double time() const noexcept { return time_; }
    double norm() const noexcept { return norm_; }

private:
    double time_;
    double norm_;
};

/// Too many infinite importance weights in an ensemble.
class FlaggedSamples : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ldplab
