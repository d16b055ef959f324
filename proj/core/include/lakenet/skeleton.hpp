#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lakenet/autograd.hpp"
#include "lakenet/point_cloud.hpp"

namespace lakenet {

/// Which prior produced an edge. Values combine as bit flags.
enum class EdgeSource : std::uint8_t { Topology = 1, Recovery = 2, Both = 3 };

struct GraphEdge {
  std::size_t a = 0;  ///< lower node index
  std::size_t b = 0;  ///< higher node index
  EdgeSource source = EdgeSource::Topology;
};

/// Keypoint graph with a symmetric, zero-diagonal adjacency matrix.
class SkeletalGraph {
 public:
  SkeletalGraph() = default;
  explicit SkeletalGraph(std::vector<Vec3> nodes);

  std::size_t node_count() const { return nodes_.size(); }
  std::span<const Vec3> nodes() const { return nodes_; }
  const Vec3& node(std::size_t i) const { return nodes_[i]; }

  bool adjacent(std::size_t i, std::size_t j) const { return adjacency_[i * nodes_.size() + j] != 0; }
  std::size_t degree(std::size_t i) const;
  /// Adds (or tags) the undirected edge {i, j}; self loops are ignored.
  void link(std::size_t i, std::size_t j, EdgeSource source);

  /// Edges sorted by (a, b).
  std::vector<GraphEdge> edges() const;
  std::size_t edge_count() const;

  /// Set by build_graph when two keypoints coincide.
  bool degenerate() const { return degenerate_; }
  void mark_degenerate() { degenerate_ = true; }

 private:
  std::vector<Vec3> nodes_;
  std::vector<std::uint8_t> adjacency_;
  bool degenerate_ = false;
};

/// Links each keypoint to its two nearest keypoints (topology prior) and,
/// for every reference point, its two nearest keypoints to each other
/// (recovery prior). Distance ties resolve to the lower index. An empty
/// reference applies the topology prior alone.
SkeletalGraph build_graph(std::span<const Vec3> keypoints, const PointCloud& reference);

/// All 3-cliques, each once as ascending (i, j, k), in lexicographic order.
std::vector<std::array<std::size_t, 3>> detect_triangles(const SkeletalGraph& graph);

enum class OriginKind : std::uint8_t { Node, Edge, Triangle };

/// Where a skeleton point came from: a convex combination of up to three
/// graph nodes.
struct SkeletonOrigin {
  OriginKind kind = OriginKind::Node;
  std::array<std::size_t, 3> nodes{};
  std::array<double, 3> weights{};

  std::size_t arity() const { return kind == OriginKind::Node ? 1 : kind == OriginKind::Edge ? 2 : 3; }
};

struct SurfaceSkeleton {
  std::vector<Vec3> points;
  std::vector<SkeletonOrigin> origins;
  std::size_t node_count = 0;

  std::size_t size() const { return points.size(); }
  PointCloud cloud() const { return PointCloud(points); }
  /// The same combination as a differentiable row map over the keypoints.
  nn::SparseRows combination() const;
};

struct InterpolationOptions {
  /// Share of the non-node budget given to edges when non-degenerate
  /// triangles exist; the remainder goes to triangle faces.
  double edge_fraction = 0.5;
  /// Triangles with area below this get no points.
  double min_triangle_area = 1e-12;
};

/// Samples exactly `target` points: every node, then edge points spaced
/// uniformly with counts proportional to edge length, then triangle points on
/// a Hammersley pattern with counts proportional to area. Counts use
/// largest-remainder rounding. Throws CardinalityError when target < nodes.
SurfaceSkeleton interpolate(const SkeletalGraph& graph,
                            std::span<const std::array<std::size_t, 3>> triangles, std::size_t target,
                            const InterpolationOptions& options = {});

/// build_graph + detect_triangles + interpolate.
SurfaceSkeleton make_surface_skeleton(std::span<const Vec3> keypoints, const PointCloud& reference,
                                      std::size_t target, const InterpolationOptions& options = {});

/// Distributes `total` units proportionally to non-negative weights using
/// largest-remainder rounding (ties to the lower index). All-zero weights
/// yield all-zero counts.
std::vector<std::size_t> allocate_proportional(std::span<const double> weights, std::size_t total);

}  // namespace lakenet
