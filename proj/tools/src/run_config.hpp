#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "modechoice/estimate.hpp"

namespace modechoice::cli {

/// Everything a subcommand needs; filled from an optional JSON config file
/// and then overridden by command-line flags.
struct RunConfig {
  std::optional<std::filesystem::path> trips;
  std::optional<std::filesystem::path> weather;
  std::optional<std::filesystem::path> observations;
  std::optional<std::filesystem::path> spec;
  std::optional<std::filesystem::path> result;
  std::optional<std::filesystem::path> out;
  EstimationOptions options;
  double max_gap_minutes = 180.0;
  bool stepwise = false;
};

/// Reads a run config. Relative paths resolve against the config file's
/// directory. Throws InputError for a malformed document or unknown keys.
RunConfig load_run_config(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

/// Throws InputError naming `what` when the file does not exist.
void require_file(const std::optional<std::filesystem::path>& path, std::string_view what);

/// Collects output files in memory and writes them together. Each file is
/// written beside its target and renamed into place, so a failure leaves no
/// partially written artifact.
class OutputSet {
 public:
  void add(std::string name, std::string content);
  void commit(const std::filesystem::path& dir) const;
  const std::map<std::string, std::string>& files() const noexcept { return files_; }

 private:
  std::map<std::string, std::string> files_;
};

/// The output directory must exist as a directory or be creatable.
void check_output_dir(const std::filesystem::path& dir);

}  // namespace modechoice::cli
