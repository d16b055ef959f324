#include "lakenet/viz.hpp"

#include <ostream>
#include <string>

#include "lakenet/errors.hpp"

namespace lakenet {

PointCloud keypoint_overlay(const KeypointSet& keypoints) {
  PointCloud out;
  for (std::size_t i = 0; i < 3; ++i) {
    for (const auto& p : keypoints.scales[i].points()) out.push_back(p, kScaleColors[i]);
  }
  return out;
}

PointCloud select_scale(const PointCloud& overlay, std::size_t scale) {
  if (scale < 1 || scale > 3) throw ContractError("keypoint scale must be 1, 2 or 3, got " + std::to_string(scale));
  if (!overlay.has_colors()) throw FormatError("keypoint cloud carries no colors to identify scales");
  PointCloud out;
  const Rgb want = kScaleColors[scale - 1];
  for (std::size_t i = 0; i < overlay.size(); ++i) {
    if (overlay.colors()[i] == want) out.push_back(overlay[i]);
  }
  return out;
}

PointCloud skeleton_overlay(const SurfaceSkeleton& skeleton) {
  PointCloud out;
  for (std::size_t i = 0; i < skeleton.size(); ++i) {
    const OriginKind kind = skeleton.origins[i].kind;
    const Rgb c = kind == OriginKind::Node ? kNodeColor : kind == OriginKind::Edge ? kEdgeColor : kTriangleColor;
    out.push_back(skeleton.points[i], c);
  }
  return out;
}

PointCloud colored(const PointCloud& cloud, Rgb color) {
  PointCloud out = cloud;
  out.set_uniform_color(color);
  return out;
}

void write_edge_list(std::ostream& out, const SkeletalGraph& graph) {
  for (const auto& e : graph.edges()) out << e.a << ' ' << e.b << '\n';
}

}  // namespace lakenet
