#pragma once

#include <span>
#include <vector>

#include "lakenet/point_cloud.hpp"
#include "lakenet/tensor.hpp"

namespace lakenet {

/// (n x 3) tensor view of a cloud's coordinates.
inline nn::Tensor cloud_tensor(const PointCloud& cloud) {
  return nn::Tensor(cloud.size(), 3, cloud.flat());
}

/// Interprets an (n x 3) tensor as a cloud.
inline PointCloud tensor_cloud(const nn::Tensor& t) { return PointCloud::from_flat(t.values()); }

inline std::vector<Vec3> tensor_points(const nn::Tensor& t) {
  const PointCloud c = tensor_cloud(t);
  return {c.points().begin(), c.points().end()};
}

}  // namespace lakenet
