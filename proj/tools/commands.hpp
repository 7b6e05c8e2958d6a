#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pulsestab/io.hpp"

namespace pulsestab::cli {

struct CommandResult {
  json summary;
  std::vector<std::string> outputs;  // file names relative to the output directory
};

const std::vector<std::string>& command_names();

/// Runs one subcommand; library errors propagate.
CommandResult run_command(const std::string& name, const json& config, const std::filesystem::path& out_dir);

/// 0 ok, 2 validation, 3 numerical, 4 unreliable, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace pulsestab::cli
