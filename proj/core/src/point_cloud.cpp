#include "lakenet/point_cloud.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "lakenet/errors.hpp"

namespace lakenet {
namespace {

void check_finite(const Vec3& p) {
  if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
    throw ContractError("point cloud coordinates must be finite");
  }
}

}  // namespace

PointCloud::PointCloud(std::vector<Vec3> points) : points_(std::move(points)) {
  for (const auto& p : points_) check_finite(p);
}

PointCloud::PointCloud(std::vector<Vec3> points, std::vector<Rgb> colors)
    : PointCloud(std::move(points)) {
  set_colors(std::move(colors));
}

PointCloud PointCloud::from_flat(std::span<const double> xyz) {
  if (xyz.size() % 3 != 0) {
    throw CardinalityError("flat coordinate buffer length " + std::to_string(xyz.size()) +
                           " is not a multiple of 3");
  }
  std::vector<Vec3> pts(xyz.size() / 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pts[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
  }
  return PointCloud(std::move(pts));
}

void PointCloud::set_colors(std::vector<Rgb> colors) {
  if (!colors.empty() && colors.size() != points_.size()) {
    throw CardinalityError("color count " + std::to_string(colors.size()) +
                           " does not match point count " + std::to_string(points_.size()));
  }
  colors_ = std::move(colors);
}

void PointCloud::set_uniform_color(Rgb color) { colors_.assign(points_.size(), color); }

void PointCloud::push_back(const Vec3& p) {
  if (has_colors()) throw ContractError("push_back without color on a colored cloud");
  check_finite(p);
  points_.push_back(p);
}

void PointCloud::push_back(const Vec3& p, Rgb color) {
  if (!empty() && !has_colors()) throw ContractError("push_back with color on an uncolored cloud");
  check_finite(p);
  points_.push_back(p);
  colors_.push_back(color);
}

void PointCloud::append(const PointCloud& other) {
  if (!empty() && has_colors() != other.has_colors()) {
    throw ContractError("cannot append clouds with mismatched color channels");
  }
  points_.insert(points_.end(), other.points_.begin(), other.points_.end());
  colors_.insert(colors_.end(), other.colors_.begin(), other.colors_.end());
}

std::vector<double> PointCloud::flat() const {
  std::vector<double> out(points_.size() * 3);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    out[3 * i] = points_[i][0];
    out[3 * i + 1] = points_[i][1];
    out[3 * i + 2] = points_[i][2];
  }
  return out;
}

Vec3 PointCloud::centroid() const {
  if (empty()) throw CardinalityError("centroid of an empty cloud");
  Vec3 sum{0.0, 0.0, 0.0};
  for (const auto& p : points_) sum = sum + p;
  return (1.0 / static_cast<double>(points_.size())) * sum;
}

std::pair<Vec3, Vec3> PointCloud::bounding_box() const {
  if (empty()) throw CardinalityError("bounding box of an empty cloud");
  constexpr double inf = std::numeric_limits<double>::infinity();
  Vec3 lo{inf, inf, inf};
  Vec3 hi{-inf, -inf, -inf};
  for (const auto& p : points_) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  return {lo, hi};
}

PointCloud PointCloud::translated(const Vec3& offset) const {
  PointCloud out = *this;
  for (auto& p : out.points_) p = p + offset;
  return out;
}

PointCloud PointCloud::permuted(std::span<const std::size_t> order) const {
  if (order.size() != size()) {
    throw CardinalityError("permutation length " + std::to_string(order.size()) +
                           " does not match cloud size " + std::to_string(size()));
  }
  return subset(order);
}

PointCloud PointCloud::subset(std::span<const std::size_t> indices) const {
  PointCloud out;
  out.points_.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw CardinalityError("subset index " + std::to_string(i) + " out of range");
    out.points_.push_back(points_[i]);
    if (has_colors()) out.colors_.push_back(colors_[i]);
  }
  return out;
}

}  // namespace lakenet
