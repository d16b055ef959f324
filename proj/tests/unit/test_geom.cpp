#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lakenet/cloud_io.hpp"
#include "lakenet/errors.hpp"
#include "lakenet/metrics.hpp"
#include "lakenet/point_cloud.hpp"
#include "lakenet/rng.hpp"
#include "oracles.hpp"

using namespace lakenet;
using lakenet::testing::random_cloud;

namespace {

PointCloud cloud(std::initializer_list<Vec3> pts) { return PointCloud(std::vector<Vec3>(pts)); }

bool is_permutation_of_range(const std::vector<std::size_t>& v, std::size_t n) {
  std::vector<std::size_t> s = v;
  std::sort(s.begin(), s.end());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != i) return false;
  }
  return s.size() == n;
}

}  // namespace

TEST_SUITE("geom") {

TEST_CASE("point cloud rejects non-finite coordinates") {
  CHECK_THROWS_AS(cloud({{0, std::nan(""), 0}}), ContractError);
  PointCloud c;
  CHECK_THROWS_AS(c.push_back({0, 0, INFINITY}), ContractError);
  CHECK_THROWS_AS(PointCloud::from_flat(std::vector<double>{1, 2}), CardinalityError);
}

TEST_CASE("point cloud helpers") {
  const PointCloud c = cloud({{0, 0, 0}, {2, -1, 4}, {1, 1, 1}});
  const auto [lo, hi] = c.bounding_box();
  CHECK(lo == Vec3{0, -1, 0});
  CHECK(hi == Vec3{2, 1, 4});
  CHECK(c.centroid()[0] == doctest::Approx(1.0));
  const std::vector<std::size_t> order{2, 0, 1};
  const PointCloud p = c.permuted(order);
  CHECK(p[0] == c[2]);
  CHECK(p[1] == c[0]);
  const auto flat = c.flat();
  CHECK(flat.size() == 9);
  CHECK(PointCloud::from_flat(flat).points().size() == 3);
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}

TEST_CASE("random permutation") {
  CHECK(random_permutation(1, 9) == std::vector<std::size_t>{0});
  CHECK(random_permutation(20, 5) == random_permutation(20, 5));
  for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(is_permutation_of_range(random_permutation(5, seed), 5));
  CHECK_THROWS_AS(random_permutation(0, 1), CardinalityError);
}

TEST_CASE("chamfer distance hand cases") {
  const PointCloud x = random_cloud(17, 3);
  CHECK(chamfer_distance(x, x) == 0.0);
  CHECK(chamfer_distance(cloud({{0, 0, 0}}), cloud({{1, 0, 0}})) == 2.0);
  CHECK(chamfer_distance(cloud({{0, 0, 0}, {2, 0, 0}}), cloud({{1, 0, 0}})) == 2.0);
  CHECK_THROWS_AS(chamfer_distance(PointCloud{}, x), CardinalityError);
}

TEST_CASE("chamfer distance is symmetric and matches the pairwise oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud x = random_cloud(5 + seed, seed);
    const PointCloud y = random_cloud(9 + 2 * seed, 100 + seed);
    CHECK(chamfer_distance(x, y) == chamfer_distance(y, x));
    CHECK(chamfer_distance(x, y) == doctest::Approx(testing::brute_chamfer(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("metrics are translation invariant") {
  const Vec3 t{3.5, -2.0, 7.25};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const PointCloud x = random_cloud(12, seed);
    const PointCloud y = random_cloud(12, seed + 50);
    const PointCloud xa = x.translated(t), ya = y.translated(t);
    CHECK(std::abs(chamfer_distance(x, y) - chamfer_distance(xa, ya)) <= 1e-9);
    CHECK(std::abs(emd_exact(x, y).cost - emd_exact(xa, ya).cost) <= 1e-9);
    CHECK(std::abs(emd_approx(x, y, 1e-3).cost - emd_approx(xa, ya, 1e-3).cost) <= 1e-9 + 1e-3 * assignment_scale(x, y));
    CHECK(keypoint_miou(x, y, 0.5) == keypoint_miou(xa, ya, 0.5));
  }
}

TEST_CASE("exact assignment hand cases") {
  const PointCloud x = random_cloud(9, 4);
  const Assignment self = emd_exact(x, x);
  CHECK(self.cost == 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(self.mapping[i] == i);

  const Vec3 d{0.3, -0.4, 1.2};
  CHECK(emd_exact(cloud({{1, 2, 3}}), cloud({{1.3, 1.6, 4.2}})).cost == doctest::Approx(norm(d)).epsilon(1e-12));

  const Assignment sq = emd_exact(cloud({{0, 0, 0}, {1, 0, 0}}), cloud({{0, 1, 0}, {1, 1, 0}}));
  CHECK(sq.cost == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sq.mapping == std::vector<std::size_t>{0, 1});
}

TEST_CASE("exact assignment is optimal against enumeration") {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const PointCloud x = random_cloud(n, 10 * n + seed);
      const PointCloud y = random_cloud(n, 1000 + 10 * n + seed);
      const Assignment a = emd_exact(x, y);
      CHECK(is_permutation_of_range(a.mapping, n));
      CHECK(a.cost == doctest::Approx(assignment_cost(x, y, a.mapping)).epsilon(1e-12));
      CHECK(a.cost <= testing::brute_emd(x, y) + 1e-12);
    }
  }
}

TEST_CASE("exact assignment errors") {
  CHECK_THROWS_AS(emd_exact(random_cloud(3, 1), random_cloud(4, 2)), CardinalityError);
  CHECK_THROWS_AS(emd_exact(random_cloud(6, 1), random_cloud(6, 2), 5), CardinalityError);
  CHECK_THROWS_AS(emd_approx(random_cloud(3, 1), random_cloud(4, 2), 0.1), CardinalityError);
  CHECK_THROWS_AS(emd_approx(random_cloud(3, 1), random_cloud(3, 2), 0.0), ContractError);
}

TEST_CASE("approximate assignment stays within its bound") {
  const PointCloud x = random_cloud(30, 8);
  CHECK(emd_approx(x, x, 0.1).cost == 0.0);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
      const std::size_t n = 8 + 7 * seed;  // up to 57 points
      const PointCloud a = random_cloud(n, seed);
      const PointCloud b = random_cloud(n, seed + 77);
      const Assignment approx = emd_approx(a, b, eps);
      const double exact = emd_exact(a, b).cost;
      CHECK(is_permutation_of_range(approx.mapping, n));
      CHECK(approx.cost >= exact - 1e-12);
      CHECK(approx.cost <= exact + eps * assignment_scale(a, b) + 1e-12);
    }
  }
}

TEST_CASE("approximate assignment on 256 points") {
  const PointCloud a = random_cloud(256, 11);
  const PointCloud b = random_cloud(256, 12);
  const double eps = 1e-3;
  const double exact = emd_exact(a, b).cost;
  const double approx = emd_approx(a, b, eps).cost;
  CHECK(approx >= exact - 1e-12);
  CHECK(approx <= exact + eps * assignment_scale(a, b));
}

TEST_CASE("farthest point sampling hand cases") {
  std::vector<Vec3> line;
  for (int i = 0; i < 10; ++i) line.push_back({static_cast<double>(i), 0, 0});
  const PointCloud l(line);
  CHECK(farthest_point_sampling(l, 3, 0) == std::vector<std::size_t>{0, 9, 4});
  CHECK(farthest_point_sampling(l, 1, 6) == std::vector<std::size_t>{6});
  CHECK(is_permutation_of_range(farthest_point_sampling(l, 10, 3), 10));
  CHECK_THROWS_AS(farthest_point_sampling(l, 0), CardinalityError);
  CHECK_THROWS_AS(farthest_point_sampling(l, 11), CardinalityError);
  CHECK_THROWS_AS(farthest_point_sampling(l, 2, 10), CardinalityError);
}

TEST_CASE("farthest point sampling matches the greedy oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 1 + seed * 2;
    const PointCloud x = random_cloud(n, seed + 300);
    std::vector<std::vector<double>> rows;
    for (const auto& p : x.points()) rows.push_back({p[0], p[1], p[2]});
    const std::size_t k = 1 + seed % n;
    const std::size_t s = seed % n;
    CHECK(farthest_point_sampling(x, k, s) == testing::naive_fps(rows, k, s));
  }
}

TEST_CASE("keypoint IoU") {
  const PointCloud a = random_cloud(6, 2);
  CHECK(keypoint_miou(a, a, 0.1) == 1.0);
  CHECK(keypoint_miou(cloud({{0, 0, 0}, {1, 0, 0}}), cloud({{5, 5, 5}, {6, 6, 6}}), 0.1) == 0.0);
  CHECK(keypoint_miou(cloud({{0, 0, 0}, {5, 5, 5}}), cloud({{0.05, 0, 0}}), 0.1) == doctest::Approx(0.5));
  CHECK_THROWS_AS(keypoint_miou(a, a, 0.0), ContractError);
  CHECK_THROWS_AS(keypoint_miou(PointCloud{}, a, 0.1), CardinalityError);
}

TEST_CASE("keypoint IoU is monotone in the threshold") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PointCloud p = random_cloud(10, seed);
    const PointCloud q = random_cloud(7, seed + 40);
    double prev = 0.0;
    for (double t = 0.05; t < 4.0; t += 0.05) {
      const double v = keypoint_miou(p, q, t);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("xyz round trip is exact") {
  const PointCloud c = cloud({{0.1, 1e-300, -3.0}, {1.0 / 3.0, 2e10, 5.5}});
  std::stringstream ss;
  write_xyz(ss, c);
  const PointCloud back = read_xyz(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == c[0]);
  CHECK(back[1] == c[1]);
}

TEST_CASE("xyz reader reports the bad line") {
  std::stringstream ss("0 0 0\n\n1 2\n");
  try {
    read_xyz(ss);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("ply round trip with colors") {
  PointCloud c;
  c.push_back({0.5, -0.25, 1.0 / 7.0}, Rgb{255, 0, 10});
  c.push_back({1, 2, 3}, Rgb{0, 255, 0});
  std::stringstream ss;
  write_ply(ss, c);
  const PointCloud back = read_ply(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == c[0]);
  REQUIRE(back.has_colors());
  CHECK(back.colors()[0] == Rgb{255, 0, 10});
  CHECK(back.colors()[1] == Rgb{0, 255, 0});
}

TEST_CASE("ply reader rejects unknown elements") {
  std::stringstream ss(
      "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\n"
      "element face 0\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n");
  try {
    read_ply(ss);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 7") != std::string::npos);
    CHECK(msg.find("face") != std::string::npos);
  }
}

TEST_CASE("file dispatch and missing files") {
  CHECK_THROWS_AS(read_cloud("/nonexistent/cloud.xyz"), IoError);
  CHECK_THROWS_AS(read_cloud("/tmp/cloud.obj"), FormatError);
}

}  // TEST_SUITE
