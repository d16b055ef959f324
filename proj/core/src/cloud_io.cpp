#include "lakenet/cloud_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "lakenet/errors.hpp"

namespace lakenet {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

bool parse_double(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

[[noreturn]] void fail(const std::string& what, std::size_t line_no, const std::string& why) {
  throw FormatError(what + ": line " + std::to_string(line_no) + ": " + why);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw FormatError("cannot format double");
  return std::string(buf.data(), ptr);
}

PointCloud read_xyz(std::istream& in) {
  std::vector<Vec3> pts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 3) fail("xyz", line_no, "expected 3 values, got " + std::to_string(tokens.size()));
    Vec3 p{};
    for (int a = 0; a < 3; ++a) {
      if (!parse_double(tokens[a], p[a])) fail("xyz", line_no, "invalid number '" + tokens[a] + "'");
    }
    pts.push_back(p);
  }
  return PointCloud(std::move(pts));
}

PointCloud read_xyz(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_xyz(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_xyz(std::ostream& out, const PointCloud& cloud) {
  for (const auto& p : cloud.points()) {
    out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2]) << '\n';
  }
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_out(path);
  write_xyz(out, cloud);
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line != "ply") fail("ply", line_no, "missing 'ply' magic");
  if (!next() || split_ws(line) != std::vector<std::string>{"format", "ascii", "1.0"}) {
    fail("ply", line_no, "only 'format ascii 1.0' is supported");
  }

  std::size_t vertex_count = 0;
  bool have_vertex = false;
  std::vector<std::string> props;
  while (true) {
    if (!next()) fail("ply", line_no, "unexpected end of header");
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "end_header") break;
    if (tokens[0] == "comment" || tokens[0] == "obj_info") continue;
    if (tokens[0] == "element") {
      if (tokens.size() != 3 || tokens[1] != "vertex") {
        fail("ply", line_no, "unknown element '" + (tokens.size() > 1 ? tokens[1] : std::string()) + "'");
      }
      if (have_vertex) fail("ply", line_no, "duplicate vertex element");
      have_vertex = true;
      try {
        vertex_count = std::stoul(tokens[2]);
      } catch (...) {
        fail("ply", line_no, "invalid vertex count '" + tokens[2] + "'");
      }
      continue;
    }
    if (tokens[0] == "property") {
      if (!have_vertex) fail("ply", line_no, "property before element");
      if (tokens.size() != 3) fail("ply", line_no, "malformed property");
      const std::string& type = tokens[1];
      const std::string& name = tokens[2];
      const bool coord = name == "x" || name == "y" || name == "z";
      const bool color = name == "red" || name == "green" || name == "blue";
      if (coord && (type == "float" || type == "double" || type == "float32" || type == "float64")) {
        props.push_back(name);
      } else if (color && (type == "uchar" || type == "uint8")) {
        props.push_back(name);
      } else {
        fail("ply", line_no, "unsupported property '" + type + " " + name + "'");
      }
      continue;
    }
    fail("ply", line_no, "unknown header keyword '" + tokens[0] + "'");
  }
  if (!have_vertex) fail("ply", line_no, "no vertex element");
  const std::vector<std::string> xyz{"x", "y", "z"};
  const std::vector<std::string> xyzrgb{"x", "y", "z", "red", "green", "blue"};
  if (props != xyz && props != xyzrgb) {
    fail("ply", line_no, "vertex properties must be x y z [red green blue]");
  }
  const bool colored = props.size() == 6;

  std::vector<Vec3> pts;
  std::vector<Rgb> colors;
  pts.reserve(vertex_count);
  while (pts.size() < vertex_count) {
    if (!next()) fail("ply", line_no, "expected " + std::to_string(vertex_count) + " vertices");
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != props.size()) {
      fail("ply", line_no, "expected " + std::to_string(props.size()) + " values");
    }
    Vec3 p{};
    for (int a = 0; a < 3; ++a) {
      if (!parse_double(tokens[a], p[a])) fail("ply", line_no, "invalid number '" + tokens[a] + "'");
    }
    pts.push_back(p);
    if (colored) {
      std::array<std::uint8_t, 3> c{};
      for (int a = 0; a < 3; ++a) {
        unsigned v = 0;
        const auto& t = tokens[3 + a];
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size() || v > 255) {
          fail("ply", line_no, "invalid color '" + t + "'");
        }
        c[a] = static_cast<std::uint8_t>(v);
      }
      colors.push_back({c[0], c[1], c[2]});
    }
  }
  while (next()) {
    if (!split_ws(line).empty()) fail("ply", line_no, "trailing data after vertices");
  }
  return PointCloud(std::move(pts), std::move(colors));
}

PointCloud read_ply(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return read_ply(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << '\n'
      << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors()) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud[i];
    out << format_double(p[0]) << ' ' << format_double(p[1]) << ' ' << format_double(p[2]);
    if (cloud.has_colors()) {
      const auto& c = cloud.colors()[i];
      out << ' ' << static_cast<unsigned>(c.r) << ' ' << static_cast<unsigned>(c.g) << ' '
          << static_cast<unsigned>(c.b);
    }
    out << '\n';
  }
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_out(path);
  write_ply(out, cloud);
  if (!out) throw IoError("write failed: " + path.string());
}

PointCloud read_cloud(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".ply") return read_ply(path);
  if (ext == ".xyz" || ext == ".txt") return read_xyz(path);
  throw FormatError(path.string() + ": unsupported extension '" + ext + "' (expected .xyz or .ply)");
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  const auto ext = path.extension().string();
  if (ext == ".ply") return write_ply(path, cloud);
  if (ext == ".xyz" || ext == ".txt") return write_xyz(path, cloud);
  throw FormatError(path.string() + ": unsupported extension '" + ext + "' (expected .xyz or .ply)");
}

}  // namespace lakenet
