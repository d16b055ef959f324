#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "lakenet/point_cloud.hpp"

namespace lakenet {

/// ASCII XYZ: one "x y z" triple per line. Blank lines are skipped; any other
/// line that is not exactly three finite numbers raises FormatError naming the
/// line number.
PointCloud read_xyz(std::istream& in);
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(std::ostream& out, const PointCloud& cloud);
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);

/// ASCII PLY with a single `vertex` element carrying float x, y, z and
/// optionally uchar red, green, blue. Other elements or properties are
/// rejected with a FormatError that names the offending header line.
PointCloud read_ply(std::istream& in);
PointCloud read_ply(const std::filesystem::path& path);
void write_ply(std::ostream& out, const PointCloud& cloud);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// Dispatches on the extension (.xyz or .ply).
PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace lakenet
