#pragma once

#include "config.hpp"
#include "output.hpp"

#include <string>

namespace wavop::cli {

struct CommandOutput {
    bool csv = false;
    std::string text;
    bool converged = true;
};

// Runs the experiment described by cfg. Module exceptions propagate to the caller.
CommandOutput run_command(const ExperimentConfig& cfg, const Provenance& prov);

// CSV for scans, JSON for verdicts.
bool writes_csv(const std::string& subcommand);

} // namespace wavop::cli
