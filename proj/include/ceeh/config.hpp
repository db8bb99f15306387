#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ceeh/types.hpp"

namespace ceeh {

// Carries every issue found so the user fixes a bad file in one pass.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> issues_);
    std::vector<std::string> issues;
};

// Flat `key = value` lines; '#' starts a comment; unknown keys are errors.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config_file(const std::filesystem::path& path);

void validate_config(const RunConfig& cfg);

// Sorted key = value lines with round-trip number formatting.
std::string canonical_config_text(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

std::string config_schema();

}  // namespace ceeh
