#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "kianc/types.hpp"

namespace kianc {

using MatrixBundle = std::map<std::string, CMat>;

// Sidecar layout (little endian):
//   "KIANCMAT" | u32 version | u32 count |
//   count x { u32 name_len | name | u64 rows | u64 cols | rows*cols x (f64 re, f64 im), column major }
inline constexpr std::uint32_t kMatrixBundleVersion = 1;

void save_matrix_bundle(const std::filesystem::path& path,
                        const MatrixBundle& bundle);

/// std::nullopt if the file does not exist; throws std::runtime_error if it
/// exists but is malformed.
std::optional<MatrixBundle> load_matrix_bundle(
    const std::filesystem::path& path);

}  // namespace kianc
