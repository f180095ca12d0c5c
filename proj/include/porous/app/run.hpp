#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "porous/app/config.hpp"

namespace porous::app {

namespace fs = std::filesystem;

struct RunOptions {
  /// Cap on worker threads for independent realizations; results do not depend on it.
  int threads = 1;
};

struct Artifact {
  std::string path;  // relative to the output directory, '/'-separated
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunResult {
  fs::path output_dir;
  std::vector<Artifact> artifacts;
  /// Kind-specific key results (also written to an artifact).
  nlohmann::json summary;
  /// SHA-256 of manifest.json.
  std::string manifest_sha256;
};

/// Hex digest of a byte string or of a file's content.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const fs::path& path);

/// Sub-seed for stream `stream` and item `index`, derived from the experiment seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t stream, std::uint32_t index = 0);

/// POROUS_OUTPUT_ROOT if set, otherwise "porous-output".
fs::path default_output_root();

/// Runs one experiment. Artifacts are written to a staging directory and moved
/// into place only on success, together with manifest.json listing every file
/// with its SHA-256. The manifest holds the normalized parameters and seed but
/// no paths, timings or thread counts, so identical configs give identical
/// manifests. Throws ConfigError/InvalidArgument for bad input and
/// NumericalError for solver failures; nothing is left behind on failure.
RunResult run(const ExperimentConfig& config, const RunOptions& options = {});

/// Raised for an unknown figure id; the message lists the available ones.
class UnknownFigure : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

std::vector<std::string> figure_ids();

/// Canonical configs behind a figure: (subdirectory, config) pairs; the
/// subdirectory is empty when the figure needs a single run.
std::vector<std::pair<std::string, ExperimentConfig>> figure_configs(std::string_view id);

/// Runs the canonical configs of a figure into output_dir (default: output
/// root / id) and writes its data tables and one manifest.
RunResult reproduce(std::string_view id, const fs::path& output_dir = {}, const RunOptions& options = {});

}  // namespace porous::app
