#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "lggnet/tensor.hpp"

namespace lggnet {

// Portable tensor file: one ASCII header line
//   PTF1 <f32|f64> <rank> <d1> ... <dk>\n
// followed by the row-major payload as little-endian IEEE-754 values.
//
// Reading converts the stored dtype to T. Any malformed header or short
// payload throws CheckpointError(Kind::Corrupt); a missing file throws
// CheckpointError(Kind::NotFound).

template <typename T>
void write_ptf(std::ostream& out, const Tensor<T>& tensor);

template <typename T>
Tensor<T> read_ptf(std::istream& in, std::string_view source = "<stream>");

template <typename T>
void save_ptf(const std::filesystem::path& path, const Tensor<T>& tensor);

template <typename T>
Tensor<T> load_ptf(const std::filesystem::path& path);

}  // namespace lggnet
