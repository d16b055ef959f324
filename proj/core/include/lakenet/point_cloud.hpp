#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lakenet {

using Vec3 = std::array<double, 3>;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

inline double distance(const Vec3& a, const Vec3& b) { return std::sqrt(squared_distance(a, b)); }

/// Ordered list of 3D points with optional per-point color.
///
/// Every coordinate is finite; construction and `push_back` reject NaN/Inf
/// with a ContractError. Colors are carried for export only and never take
/// part in any metric.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points);
  PointCloud(std::vector<Vec3> points, std::vector<Rgb> colors);

  /// Builds a cloud from a row-major (n x 3) buffer.
  static PointCloud from_flat(std::span<const double> xyz);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  std::span<const Vec3> points() const { return points_; }

  bool has_colors() const { return !colors_.empty(); }
  std::span<const Rgb> colors() const { return colors_; }
  void set_colors(std::vector<Rgb> colors);
  void set_uniform_color(Rgb color);

  void push_back(const Vec3& p);
  void push_back(const Vec3& p, Rgb color);
  void append(const PointCloud& other);

  /// Row-major (n x 3) copy of the coordinates.
  std::vector<double> flat() const;

  Vec3 centroid() const;
  std::pair<Vec3, Vec3> bounding_box() const;

  PointCloud translated(const Vec3& offset) const;
  PointCloud permuted(std::span<const std::size_t> order) const;
  PointCloud subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<Vec3> points_;
  std::vector<Rgb> colors_;
};

}  // namespace lakenet
