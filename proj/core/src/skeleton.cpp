#include "lakenet/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lakenet/errors.hpp"

namespace lakenet {
namespace {

// Indices of the two smallest distances from `p` among `candidates`,
// excluding `skip`; lower index wins ties.
std::array<std::size_t, 2> two_nearest(const Vec3& p, std::span<const Vec3> candidates, std::size_t skip) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  double d0 = inf, d1 = inf;
  std::size_t i0 = 0, i1 = 0;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    if (j == skip) continue;
    const double d = squared_distance(p, candidates[j]);
    if (d < d0) {
      d1 = d0;
      i1 = i0;
      d0 = d;
      i0 = j;
    } else if (d < d1) {
      d1 = d;
      i1 = j;
    }
  }
  return {i0, i1};
}

double radical_inverse_base2(std::uint32_t bits) {
  bits = (bits << 16u) | (bits >> 16u);
  bits = ((bits & 0x55555555u) << 1u) | ((bits & 0xAAAAAAAAu) >> 1u);
  bits = ((bits & 0x33333333u) << 2u) | ((bits & 0xCCCCCCCCu) >> 2u);
  bits = ((bits & 0x0F0F0F0Fu) << 4u) | ((bits & 0xF0F0F0F0u) >> 4u);
  bits = ((bits & 0x00FF00FFu) << 8u) | ((bits & 0xFF00FF00u) >> 8u);
  return static_cast<double>(bits) * 0x1.0p-32;
}

}  // namespace

SkeletalGraph::SkeletalGraph(std::vector<Vec3> nodes)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size() * nodes_.size(), 0) {}

std::size_t SkeletalGraph::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) d += adjacent(i, j) ? 1 : 0;
  return d;
}

void SkeletalGraph::link(std::size_t i, std::size_t j, EdgeSource source) {
  const std::size_t k = nodes_.size();
  if (i >= k || j >= k) throw CardinalityError("SkeletalGraph::link: node index out of range");
  if (i == j) return;
  const auto bits = static_cast<std::uint8_t>(source);
  adjacency_[i * k + j] |= bits;
  adjacency_[j * k + i] |= bits;
}

std::vector<GraphEdge> SkeletalGraph::edges() const {
  std::vector<GraphEdge> out;
  const std::size_t k = nodes_.size();
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (const auto bits = adjacency_[i * k + j]; bits != 0) {
        out.push_back({i, j, static_cast<EdgeSource>(bits)});
      }
    }
  }
  return out;
}

std::size_t SkeletalGraph::edge_count() const {
  std::size_t n = 0;
  for (auto bits : adjacency_) n += bits != 0 ? 1 : 0;
  return n / 2;
}

SkeletalGraph build_graph(std::span<const Vec3> keypoints, const PointCloud& reference) {
  if (keypoints.size() < 3) {
    throw CardinalityError("build_graph: need at least 3 keypoints, got " + std::to_string(keypoints.size()));
  }
  SkeletalGraph g(std::vector<Vec3>(keypoints.begin(), keypoints.end()));
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    for (std::size_t j = i + 1; j < keypoints.size(); ++j) {
      if (keypoints[i] == keypoints[j]) g.mark_degenerate();
    }
  }
  for (std::size_t i = 0; i < keypoints.size(); ++i) {
    const auto nn = two_nearest(keypoints[i], keypoints, i);
    g.link(i, nn[0], EdgeSource::Topology);
    g.link(i, nn[1], EdgeSource::Topology);
  }
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  for (const auto& p : reference.points()) {
    const auto nn = two_nearest(p, keypoints, none);
    g.link(nn[0], nn[1], EdgeSource::Recovery);
  }
  return g;
}

std::vector<std::array<std::size_t, 3>> detect_triangles(const SkeletalGraph& graph) {
  std::vector<std::array<std::size_t, 3>> out;
  const std::size_t k = graph.node_count();
  std::vector<std::vector<std::size_t>> higher(k);
  for (const auto& e : graph.edges()) higher[e.a].push_back(e.b);
  for (std::size_t i = 0; i < k; ++i) {
    const auto& hi = higher[i];
    for (std::size_t x = 0; x < hi.size(); ++x) {
      for (std::size_t y = x + 1; y < hi.size(); ++y) {
        if (graph.adjacent(hi[x], hi[y])) out.push_back({i, hi[x], hi[y]});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> allocate_proportional(std::span<const double> weights, std::size_t total) {
  std::vector<std::size_t> counts(weights.size(), 0);
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ContractError("allocate_proportional: weights must be finite and >= 0");
    wsum += w;
  }
  if (wsum <= 0.0 || total == 0) return counts;
  std::vector<double> remainder(weights.size(), 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double quota = static_cast<double>(total) * weights[i] / wsum;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = weights[i] > 0.0 ? quota - std::floor(quota) : -1.0;
    assigned += counts[i];
  }
  // Floating error can push the floor sum past total; trim from the end.
  for (std::size_t i = counts.size(); assigned > total && i-- > 0;) {
    const std::size_t take = std::min(counts[i], assigned - total);
    counts[i] -= take;
    assigned -= take;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t l, std::size_t r) { return remainder[l] > remainder[r]; });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    if (weights[order[k]] > 0.0) {
      ++counts[order[k]];
      ++assigned;
    }
  }
  return counts;
}

nn::SparseRows SurfaceSkeleton::combination() const {
  nn::SparseRows map;
  map.input_rows = node_count;
  for (const auto& o : origins) {
    const std::size_t n = o.arity();
    map.add_row(std::span(o.nodes.data(), n), std::span(o.weights.data(), n));
  }
  return map;
}

SurfaceSkeleton interpolate(const SkeletalGraph& graph,
                            std::span<const std::array<std::size_t, 3>> triangles, std::size_t target,
                            const InterpolationOptions& options) {
  const std::size_t k = graph.node_count();
  if (target < k) {
    throw CardinalityError("interpolate: target " + std::to_string(target) + " is below the node count " +
                           std::to_string(k));
  }
  if (!(options.edge_fraction >= 0.0 && options.edge_fraction <= 1.0)) {
    throw ContractError("interpolate: edge_fraction must lie in [0, 1]");
  }
  SurfaceSkeleton s;
  s.node_count = k;
  s.points.reserve(target);
  s.origins.reserve(target);
  for (std::size_t i = 0; i < k; ++i) {
    s.points.push_back(graph.node(i));
    s.origins.push_back({OriginKind::Node, {i, 0, 0}, {1.0, 0.0, 0.0}});
  }
  const std::size_t budget = target - k;
  if (budget == 0) return s;

  const auto edges = graph.edges();
  std::vector<double> lengths(edges.size());
  double total_length = 0.0;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    lengths[e] = distance(graph.node(edges[e].a), graph.node(edges[e].b));
    total_length += lengths[e];
  }
  std::vector<double> areas(triangles.size());
  bool any_face = false;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    for (std::size_t v : tri) {
      if (v >= k) throw CardinalityError("interpolate: triangle index out of range");
    }
    const Vec3 ab = graph.node(tri[1]) - graph.node(tri[0]);
    const Vec3 ac = graph.node(tri[2]) - graph.node(tri[0]);
    const double area = 0.5 * norm(cross(ab, ac));
    areas[t] = area >= options.min_triangle_area ? area : 0.0;
    any_face = any_face || areas[t] > 0.0;
  }

  std::size_t face_budget = 0;
  if (any_face) {
    face_budget = edges.empty() ? budget
                                : static_cast<std::size_t>(std::floor((1.0 - options.edge_fraction) *
                                                                      static_cast<double>(budget)));
  }
  const std::size_t edge_budget = budget - face_budget;

  if (edge_budget > 0 && !edges.empty()) {
    std::vector<double> w = lengths;
    if (total_length <= 0.0) std::fill(w.begin(), w.end(), 1.0);
    const auto counts = allocate_proportional(w, edge_budget);
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const Vec3& a = graph.node(edges[e].a);
      const Vec3& b = graph.node(edges[e].b);
      const double denom = static_cast<double>(counts[e] + 1);
      for (std::size_t m = 1; m <= counts[e]; ++m) {
        const double t = static_cast<double>(m) / denom;
        s.points.push_back((1.0 - t) * a + t * b);
        s.origins.push_back({OriginKind::Edge, {edges[e].a, edges[e].b, 0}, {1.0 - t, t, 0.0}});
      }
    }
  } else if (edge_budget > 0) {
    // No edges: pad with node copies so the cardinality stays exact.
    for (std::size_t m = 0; m < edge_budget; ++m) {
      const std::size_t i = m % k;
      s.points.push_back(graph.node(i));
      s.origins.push_back({OriginKind::Node, {i, 0, 0}, {1.0, 0.0, 0.0}});
    }
  }

  if (face_budget > 0) {
    const auto counts = allocate_proportional(areas, face_budget);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const auto& tri = triangles[t];
      const Vec3& a = graph.node(tri[0]);
      const Vec3& b = graph.node(tri[1]);
      const Vec3& c = graph.node(tri[2]);
      const std::size_t n = counts[t];
      for (std::size_t m = 0; m < n; ++m) {
        // Hammersley point warped onto the triangle (uniform in area).
        const double u = (static_cast<double>(m) + 0.5) / static_cast<double>(n);
        const double v = radical_inverse_base2(static_cast<std::uint32_t>(m));
        const double su = std::sqrt(u);
        const double w0 = 1.0 - su;
        const double w1 = su * (1.0 - v);
        const double w2 = su * v;
        s.points.push_back(w0 * a + w1 * b + w2 * c);
        s.origins.push_back({OriginKind::Triangle, tri, {w0, w1, w2}});
      }
    }
  }
  return s;
}

SurfaceSkeleton make_surface_skeleton(std::span<const Vec3> keypoints, const PointCloud& reference,
                                      std::size_t target, const InterpolationOptions& options) {
  const auto graph = build_graph(keypoints, reference);
  const auto triangles = detect_triangles(graph);
  return interpolate(graph, triangles, target, options);
}

}  // namespace lakenet
