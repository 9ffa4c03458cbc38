#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "lggnet/data.hpp"
#include "lggnet/model.hpp"
#include "lggnet/train.hpp"

namespace lggnet::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kDiverged = 3 };

/// Everything a run needs, validated up front.
struct RunConfig {
  std::filesystem::path data_root;
  ClassMap classes;
  double test_fraction = 0.2;
  double validation_fraction = 0.2;

  std::string preset = "paper";  // "paper" or "reduced"
  std::size_t channels = 1;
  double leaky_alpha = 0.01;
  double block_dropout = 0.25;
  double dense_dropout = 0.5;
  double noise_stddev = 0.1;

  TrainConfig train;
  std::filesystem::path output = "runs";
  std::uint64_t seed = 42;

  ArchitectureConfig architecture() const;
};

/// Parses a config document over the defaults. Unknown keys, wrong types and
/// out-of-range values throw ConfigError naming the offending key.
RunConfig parse_run_config(const nlohmann::json& document, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);
void validate(const RunConfig& config);

/// Hex digest (16 chars) of the effective configuration, excluding the output
/// location.
std::string config_hash(const RunConfig& config);
/// "run-<seed>-<first 8 hash chars>".
std::string run_id(const RunConfig& config);

/// Entry point shared by the executable and the tests. args excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lggnet::cli
