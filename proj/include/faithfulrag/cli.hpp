#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "faithfulrag/pipeline.hpp"

namespace faithfulrag {

/// Entry point behind the faithfulrag binary. Exit codes: 0 success,
/// 1 runtime or item failures, 2 usage errors.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

/// Flat key = value configuration file ("#" comments, optional quotes).
std::map<std::string, std::string> parse_config_file(const std::filesystem::path& path);

/// Apply a parsed configuration document onto a PipelineConfig.
void apply_config_entries(PipelineConfig& config,
                          const std::map<std::string, std::string>& entries);

} // namespace faithfulrag
