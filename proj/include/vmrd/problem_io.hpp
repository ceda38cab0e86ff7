#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "vmrd/problem.hpp"

namespace vmrd {

/// Parses a problem document. Only structural errors (missing fields, wrong
/// JSON types) are thrown here as ValidationError; table invariants are left
/// to validate(). In functional mode "source.px" may be omitted and is then
/// derived from (pz, f).
ProblemSpec parse_problem(std::string_view json_text);

/// Reads, parses and validates; throws ValidationError with every violation.
ProblemSpec load_problem(const std::filesystem::path& path);

std::string problem_to_json(const ProblemSpec& spec);

void save_problem(const ProblemSpec& spec, const std::filesystem::path& path);

}  // namespace vmrd
