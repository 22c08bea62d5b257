#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ppc/core.hpp"

namespace ppc {
namespace io {

enum class CloudFormat {
  XYZ_ASCII,      // one "x y z" triple per line, # comments allowed
  CSV,            // comma-separated x,y,z; an optional first header line
  PLY_ASCII,      // vertex-only PLY, format ascii 1.0
  PLY_BINARY_LE,  // vertex-only PLY, format binary_little_endian 1.0
};

const char* to_string(CloudFormat format);

using Rgb = std::array<std::uint8_t, 3>;

struct CloudData {
  PointCloud cloud;
  // Present when the source had uchar red/green/blue properties (PLY only).
  std::optional<std::vector<Rgb>> colors;
  // Recoverable oddities: skipped properties, ignored trailing content.
  std::vector<std::string> warnings;
};

/// Reads a point cloud. Without an explicit format the extension decides
/// (.xyz, .csv, .ply; the PLY variant always comes from the file header, and
/// an explicit PLY variant that contradicts the header is a ParseError).
///
/// Strictness: coordinates must parse completely and be finite, PLY bodies
/// must hold exactly the declared vertex count (truncation is a ParseError
/// carrying the 1-based line and the absolute byte offset; for binary bodies
/// the line is the one where the body starts), and PLY files with non-vertex
/// elements, list properties, or big-endian bodies are UnsupportedFormat.
/// Unknown scalar vertex properties are skipped with a warning. Zero rows is
/// EmptyCloud.
CloudData read_cloud(const std::filesystem::path& path,
                     std::optional<CloudFormat> format = std::nullopt);

/// Writes a point cloud. Without an explicit format the extension decides;
/// .ply writes the binary little-endian variant. Coordinates are written as
/// %.17g in text formats and as little-endian float64 in binary, so a
/// read-back reproduces the doubles exactly. Colors can ride along only in
/// PLY (InvalidParam otherwise, RowCountMismatch if their count differs from
/// the cloud's). Writing an empty cloud is EmptyCloud.
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                 const std::optional<std::vector<Rgb>>& colors = std::nullopt,
                 std::optional<CloudFormat> format = std::nullopt);

}  // namespace io
}  // namespace ppc
