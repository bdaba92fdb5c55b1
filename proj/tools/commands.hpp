#pragma once

#include "config.hpp"

#include <string>
#include <vector>

namespace scg::cli {

enum class Subcommand { rays, flowout, arrivals, field, validate };

Subcommand parse_subcommand(std::string_view name);

// Experiments run by `validate`: "acceptance" (A1..A8) and "transient-shrink".
struct ValidateOptions {
    std::vector<std::string> experiments{"acceptance"};
};

// Runs one subcommand and writes its artifacts and manifest.txt into cfg.out_dir. Library exceptions propagate.
int execute(const RunConfig& cfg, Subcommand sub, const ValidateOptions& validate = {});

}  // namespace scg::cli
