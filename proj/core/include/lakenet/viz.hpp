#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>

#include "lakenet/keypoints.hpp"
#include "lakenet/point_cloud.hpp"
#include "lakenet/skeleton.hpp"

namespace lakenet {

/// Keypoint color per scale (index 0 = scale 1).
inline constexpr std::array<Rgb, 3> kScaleColors{Rgb{255, 165, 0}, Rgb{0, 255, 255}, Rgb{255, 0, 255}};
inline constexpr Rgb kNodeColor{255, 0, 0};
inline constexpr Rgb kEdgeColor{0, 255, 0};
inline constexpr Rgb kTriangleColor{0, 0, 255};
inline constexpr Rgb kCoarseColor{160, 160, 160};
inline constexpr Rgb kFineColor{70, 130, 180};

/// All scales in one cloud, finest first, colored by scale.
PointCloud keypoint_overlay(const KeypointSet& keypoints);

/// Points of `overlay` carrying the color of `scale` (1-based). Throws
/// FormatError when the cloud has no colors, ContractError for a bad scale.
PointCloud select_scale(const PointCloud& overlay, std::size_t scale);

/// Skeleton points colored by origin: nodes, edge points, triangle points.
PointCloud skeleton_overlay(const SurfaceSkeleton& skeleton);

PointCloud colored(const PointCloud& cloud, Rgb color);

/// One "i j" line per edge, i < j, sorted.
void write_edge_list(std::ostream& out, const SkeletalGraph& graph);

}  // namespace lakenet
