#include <doctest.h>

#include <algorithm>

#include "lakenet/dataset.hpp"
#include "lakenet/errors.hpp"
#include "lakenet/metrics.hpp"
#include "lakenet/skeleton.hpp"
#include "oracles.hpp"

using namespace lakenet;
using lakenet::testing::random_cloud;

namespace {

std::vector<Vec3> pts(const PointCloud& c) { return {c.points().begin(), c.points().end()}; }

// Distance from p to the line through a and b.
double off_line(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  return norm(cross(p - a, ab)) / norm(ab);
}

}  // namespace

TEST_SUITE("skeleton") {

TEST_CASE("three keypoints form a complete graph with one triangle") {
  const std::vector<Vec3> k{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}};
  const auto g = build_graph(k, PointCloud{});
  CHECK(g.edge_count() == 3);
  const auto tris = detect_triangles(g);
  REQUIRE(tris.size() == 1);
  CHECK(tris[0] == std::array<std::size_t, 3>{0, 1, 2});
}

TEST_CASE("unit square corners form a 4-cycle") {
  const std::vector<Vec3> k{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  const auto g = build_graph(k, PointCloud{});
  CHECK(g.edge_count() == 4);
  CHECK(g.adjacent(0, 1));
  CHECK(g.adjacent(1, 2));
  CHECK(g.adjacent(2, 3));
  CHECK(g.adjacent(0, 3));
  CHECK_FALSE(g.adjacent(0, 2));
  CHECK_FALSE(g.adjacent(1, 3));
  CHECK(detect_triangles(g).empty());
}

TEST_CASE("recovery prior links the two keypoints nearest a reference point") {
  const std::vector<Vec3> k{{0, 0, 0}, {1, 0, 0}, {5, 0, 0}};
  const auto g = build_graph(k, PointCloud(std::vector<Vec3>{{0.5, 0, 0}}));
  const auto edges = g.edges();
  const auto e01 = std::find_if(edges.begin(), edges.end(), [](const GraphEdge& e) { return e.a == 0 && e.b == 1; });
  REQUIRE(e01 != edges.end());
  CHECK((static_cast<int>(e01->source) & static_cast<int>(EdgeSource::Recovery)) != 0);

  // Far-apart pairs on a line: the reference adds an edge the topology prior lacks.
  const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {10, 0, 0}, {11, 0, 0}, {12, 0, 0}};
  const auto plain = build_graph(line, PointCloud{});
  CHECK_FALSE(plain.adjacent(2, 3));
  const auto bridged = build_graph(line, PointCloud(std::vector<Vec3>{{6, 0, 0}}));
  CHECK(bridged.adjacent(2, 3));
  for (const auto& e : bridged.edges()) {
    if (e.a == 2 && e.b == 3) CHECK(e.source == EdgeSource::Recovery);
  }
}

TEST_CASE("graph validity") {
  CHECK_THROWS_AS(build_graph(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}}, PointCloud{}), CardinalityError);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto k = pts(random_cloud(3 + seed % 20, seed));
    const auto g = build_graph(k, random_cloud(30, seed + 100));
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      CHECK_FALSE(g.adjacent(i, i));
      for (std::size_t j = 0; j < g.node_count(); ++j) CHECK(g.adjacent(i, j) == g.adjacent(j, i));
    }
    const auto topo = build_graph(k, PointCloud{});
    for (std::size_t i = 0; i < topo.node_count(); ++i) CHECK(topo.degree(i) >= 2);
  }
  const auto dup = build_graph(std::vector<Vec3>{{0, 0, 0}, {0, 0, 0}, {1, 0, 0}}, PointCloud{});
  CHECK(dup.degenerate());
}

TEST_CASE("K4 has four triangles") {
  SkeletalGraph g({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) g.link(i, j, EdgeSource::Topology);
  }
  const auto tris = detect_triangles(g);
  REQUIRE(tris.size() == 4);
  CHECK(tris[0] == std::array<std::size_t, 3>{0, 1, 2});
  CHECK(tris[3] == std::array<std::size_t, 3>{1, 2, 3});
}

TEST_CASE("edge points are uniformly spaced") {
  SkeletalGraph g({{0, 0, 0}, {1, 0, 0}});
  g.link(0, 1, EdgeSource::Topology);
  const auto s = interpolate(g, {}, 5);
  REQUIRE(s.size() == 5);
  CHECK(s.points[2][0] == 0.25);
  CHECK(s.points[3][0] == 0.5);
  CHECK(s.points[4][0] == 0.75);
  for (std::size_t i = 2; i < 5; ++i) CHECK(s.origins[i].kind == OriginKind::Edge);
}

TEST_CASE("triangle budget is proportional to area") {
  // Two disjoint right triangles with areas 1 and 3.
  SkeletalGraph g({{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {10, 0, 0}, {13, 0, 0}, {10, 2, 0}});
  const std::vector<std::array<std::size_t, 3>> tris{{0, 1, 2}, {3, 4, 5}};
  const auto s = interpolate(g, tris, 6 + 8);
  std::size_t first = 0;
  std::size_t second = 0;
  for (const auto& o : s.origins) {
    if (o.kind != OriginKind::Triangle) continue;
    (o.nodes[0] == 0 ? first : second) += 1;
  }
  CHECK(first == 2);
  CHECK(second == 6);

  const double w[] = {1.0, 3.0};
  CHECK(allocate_proportional(w, 8) == std::vector<std::size_t>{2, 6});
  const double thirds[] = {1.0, 1.0, 1.0};
  CHECK(allocate_proportional(thirds, 4) == std::vector<std::size_t>{2, 1, 1});
  const double zeros[] = {0.0, 0.0};
  CHECK(allocate_proportional(zeros, 5) == std::vector<std::size_t>{0, 0});
}

TEST_CASE("target equal to node count yields nodes only") {
  const auto k = pts(random_cloud(7, 3));
  const auto s = make_surface_skeleton(k, random_cloud(20, 4), 7);
  REQUIRE(s.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(s.origins[i].kind == OriginKind::Node);
    CHECK(s.points[i] == k[i]);
  }
  CHECK_THROWS_AS(make_surface_skeleton(k, PointCloud{}, 6), CardinalityError);
}

TEST_CASE("interpolation invariants over randomized instances") {
  Rng rng(2024);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const std::size_t k = 3 + rng.below(22);
    const std::size_t target = k + rng.below(200);
    InterpolationOptions opt;
    opt.edge_fraction = rng.uniform();
    const auto keys = pts(random_cloud(k, seed));
    const auto s = make_surface_skeleton(keys, random_cloud(1 + rng.below(40), seed + 7), target, opt);
    REQUIRE(s.size() == target);
    REQUIRE(s.origins.size() == target);
    Vec3 lo = keys[0];
    Vec3 hi = keys[0];
    for (const auto& p : keys) {
      for (int d = 0; d < 3; ++d) {
        lo[d] = std::min(lo[d], p[d]);
        hi[d] = std::max(hi[d], p[d]);
      }
    }
    for (std::size_t i = 0; i < target; ++i) {
      const auto& o = s.origins[i];
      const auto& p = s.points[i];
      for (int d = 0; d < 3; ++d) {
        CHECK(p[d] >= lo[d] - 1e-12);
        CHECK(p[d] <= hi[d] + 1e-12);
      }
      if (o.kind == OriginKind::Edge) {
        CHECK(off_line(p, keys[o.nodes[0]], keys[o.nodes[1]]) <= 1e-9);
      } else if (o.kind == OriginKind::Triangle) {
        CHECK(std::abs(o.weights[0] + o.weights[1] + o.weights[2] - 1.0) <= 1e-9);
        Vec3 q{0, 0, 0};
        for (int v = 0; v < 3; ++v) {
          CHECK(o.weights[v] >= 0.0);
          q = q + o.weights[v] * keys[o.nodes[v]];
        }
        CHECK(distance(p, q) <= 1e-9);
      }
    }
  }
}

TEST_CASE("the combination map reproduces the skeleton") {
  const auto keys = random_cloud(10, 5);
  const auto s = make_surface_skeleton(pts(keys), random_cloud(50, 6), 60);
  nn::Tape tape;
  const nn::Var kv = tape.constant(nn::Tensor(10, 3, keys.flat()));
  const auto out = nn::combine_rows(kv, s.combination()).value();
  REQUIRE(out.rows() == 60);
  for (std::size_t i = 0; i < 60; ++i) {
    for (std::size_t d = 0; d < 3; ++d) CHECK(out.at(i, d) == doctest::Approx(s.points[i][d]).epsilon(1e-12));
  }
}

TEST_CASE("graph ignores reference order and relabels with keypoints") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto keys = random_cloud(12, seed);
    const auto ref = random_cloud(60, seed + 50);
    const auto g = build_graph(pts(keys), ref);
    const auto ref_order = random_permutation(ref.size(), seed);
    const auto g_ref = build_graph(pts(keys), ref.permuted(ref_order));
    for (std::size_t i = 0; i < 12; ++i) {
      for (std::size_t j = 0; j < 12; ++j) CHECK(g.adjacent(i, j) == g_ref.adjacent(i, j));
    }
    // permuted()[n] = keys[order[n]], so node n of the new graph is node order[n].
    const auto order = random_permutation(12, seed + 1);
    const auto g_key = build_graph(pts(keys.permuted(order)), ref);
    for (std::size_t i = 0; i < 12; ++i) {
      for (std::size_t j = 0; j < 12; ++j) CHECK(g_key.adjacent(i, j) == g.adjacent(order[i], order[j]));
    }
  }
}

TEST_CASE("doubling the budget rarely loosens the fit to the reference") {
  std::size_t monotone = 0;
  std::size_t total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto family = static_cast<ShapeFamily>(seed % kFamilyCount);
    const auto shape = sample_shape(SyntheticShapeSpec::random(family, 512, seed));
    const auto keys = shape.cloud.subset(farthest_point_sampling(shape.cloud, 24));
    bool ok = true;
    double prev = chamfer_distance(make_surface_skeleton(pts(keys), shape.cloud, 48).cloud(), shape.cloud);
    for (std::size_t s = 96; s <= 768; s *= 2) {
      const double cd = chamfer_distance(make_surface_skeleton(pts(keys), shape.cloud, s).cloud(), shape.cloud);
      ok = ok && cd <= prev;
      prev = cd;
    }
    monotone += ok ? 1 : 0;
    ++total;
  }
  INFO(monotone << " of " << total);
  CHECK(static_cast<double>(monotone) >= 0.9 * static_cast<double>(total));
}

TEST_CASE("skeletons are bitwise deterministic") {
  const auto keys = pts(random_cloud(16, 8));
  const auto ref = random_cloud(100, 9);
  const auto a = make_surface_skeleton(keys, ref, 200);
  const auto b = make_surface_skeleton(keys, ref, 200);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);
}

}  // TEST_SUITE
