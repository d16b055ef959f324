#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lakenet/point_cloud.hpp"

namespace lakenet {

/// Largest cloud size handled by the O(n^3) exact assignment solver.
inline constexpr std::size_t kExactAssignmentCap = 512;

/// Bijection between two equally sized clouds together with its mean cost.
struct Assignment {
  /// mapping[i] is the index in Y matched to X[i].
  std::vector<std::size_t> mapping;
  /// Mean Euclidean (non-squared) distance over matched pairs.
  double cost = 0.0;
};

/// Symmetric Chamfer distance with squared L2 norms, averaged per direction:
///   mean_x min_y |x-y|^2 + mean_y min_x |y-x|^2.
/// Throws CardinalityError if either cloud is empty.
double chamfer_distance(const PointCloud& x, const PointCloud& y);

/// Optimal assignment under mean Euclidean distance (Hungarian method).
/// Requires |X| == |Y| <= cap; larger inputs must use emd_approx.
Assignment emd_exact(const PointCloud& x, const PointCloud& y,
                     std::size_t cap = kExactAssignmentCap);

/// Epsilon-scaling auction approximation of emd_exact.
///
/// The returned cost is at most the optimal cost plus epsilon times the mean
/// pairwise distance between X and Y (see assignment_scale()).
Assignment emd_approx(const PointCloud& x, const PointCloud& y, double epsilon);

/// Mean of |x_i - y_j| over all pairs; the unit in which emd_approx's
/// epsilon is expressed.
double assignment_scale(const PointCloud& x, const PointCloud& y);

/// Mean distance of an arbitrary bijection.
double assignment_cost(const PointCloud& x, const PointCloud& y,
                       std::span<const std::size_t> mapping);

/// Greedy farthest point sampling over the rows of a row-major (n x dim)
/// buffer. Starts at seed_index and repeatedly appends the unselected row with
/// the largest distance to the selected set, lowest index on ties.
std::vector<std::size_t> farthest_sampling(std::span<const double> rows, std::size_t dim,
                                           std::size_t k, std::size_t seed_index = 0);

std::vector<std::size_t> farthest_point_sampling(const PointCloud& x, std::size_t k,
                                                 std::size_t seed_index = 0);

/// Keypoint IoU under a Euclidean threshold.
///
/// Candidate (annotated, predicted) pairs within the threshold are visited in
/// ascending distance order (ties by annotated then predicted index) and
/// accepted when both ends are still unused. Returns
/// matches / (|predicted| + |annotated| - matches).
double keypoint_miou(const PointCloud& predicted, const PointCloud& annotated, double threshold);

namespace detail {

/// For each row of `from` (n x 3) the index and squared distance of the
/// nearest row of `to` (m x 3); lowest index on ties.
struct NearestNeighbors {
  std::vector<std::size_t> index;
  std::vector<double> sq_dist;
};

NearestNeighbors nearest_neighbors(std::span<const double> from, std::span<const double> to);

}  // namespace detail

}  // namespace lakenet
