#pragma once

#include <filesystem>

#include <json.hpp>

#include "lggnet/model.hpp"

namespace lggnet {

// A checkpoint is a directory:
//   manifest.json          format_version, name, dtype, input_shape, rng_seed,
//                          created_at, layers[] (kind, hyperparameters and the
//                          parameter files they own), plus free-form "extra"
//   weights/<name>.ptf     one portable tensor file per learnable tensor

nlohmann::json layer_spec_to_json(const LayerSpec& spec);
LayerSpec layer_spec_from_json(const nlohmann::json& j);

/// Writes the checkpoint, creating `dir` if needed. `extra` is stored
/// verbatim under the manifest's "extra" key (hyperparameters, metrics, ...).
template <typename T>
void save_checkpoint(const Model<T>& model, const std::filesystem::path& dir,
                     const nlohmann::json& extra = nlohmann::json::object());

/// Reads a checkpoint. Errors are CheckpointError with kind NotFound,
/// VersionMismatch, Corrupt or ShapeMismatch. The parsed manifest is copied to
/// `manifest` when given.
template <typename T>
Model<T> load_checkpoint(const std::filesystem::path& dir, nlohmann::json* manifest = nullptr);

}  // namespace lggnet
