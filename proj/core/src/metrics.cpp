#include "lakenet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "lakenet/errors.hpp"

namespace lakenet {
namespace detail {

NearestNeighbors nearest_neighbors(std::span<const double> from, std::span<const double> to) {
  const std::size_t n = from.size() / 3;
  const std::size_t m = to.size() / 3;
  NearestNeighbors out;
  out.index.resize(n);
  out.sq_dist.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double fx = from[3 * i];
    const double fy = from[3 * i + 1];
    const double fz = from[3 * i + 2];
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double dx = fx - to[3 * j];
      const double dy = fy - to[3 * j + 1];
      const double dz = fz - to[3 * j + 2];
      const double d = dx * dx + dy * dy + dz * dz;
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    out.index[i] = best_j;
    out.sq_dist[i] = best;
  }
  return out;
}

}  // namespace detail

namespace {

void require_nonempty(const PointCloud& c, const char* what) {
  if (c.empty()) throw CardinalityError(std::string(what) + ": point cloud must not be empty");
}

void require_same_size(const PointCloud& x, const PointCloud& y, const char* what) {
  require_nonempty(x, what);
  require_nonempty(y, what);
  if (x.size() != y.size()) {
    throw CardinalityError(std::string(what) + ": size mismatch " + std::to_string(x.size()) +
                           " vs " + std::to_string(y.size()));
  }
}

double directed_mean(std::span<const double> from, std::span<const double> to) {
  const auto nn = detail::nearest_neighbors(from, to);
  double sum = 0.0;
  for (double d : nn.sq_dist) sum += d;
  return sum / static_cast<double>(nn.sq_dist.size());
}

// Hungarian method with row/column potentials, O(n^3). Rows are X, columns Y.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> mapping(n);
  for (std::size_t j = 1; j <= n; ++j) mapping[p[j] - 1] = j - 1;
  return mapping;
}

}  // namespace

double chamfer_distance(const PointCloud& x, const PointCloud& y) {
  require_nonempty(x, "chamfer_distance");
  require_nonempty(y, "chamfer_distance");
  const auto fx = x.flat();
  const auto fy = y.flat();
  return directed_mean(fx, fy) + directed_mean(fy, fx);
}

double assignment_cost(const PointCloud& x, const PointCloud& y,
                       std::span<const std::size_t> mapping) {
  require_same_size(x, y, "assignment_cost");
  if (mapping.size() != x.size()) throw CardinalityError("assignment_cost: mapping length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < mapping.size(); ++i) sum += distance(x[i], y[mapping[i]]);
  return sum / static_cast<double>(x.size());
}

Assignment emd_exact(const PointCloud& x, const PointCloud& y, std::size_t cap) {
  require_same_size(x, y, "emd_exact");
  const std::size_t n = x.size();
  if (n > cap) {
    throw CardinalityError("emd_exact: " + std::to_string(n) + " points exceeds the exact cap of " +
                           std::to_string(cap) + "; use emd_approx");
  }
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = distance(x[i], y[j]);
  }
  Assignment a;
  a.mapping = solve_assignment(cost, n);
  a.cost = assignment_cost(x, y, a.mapping);
  return a;
}

double assignment_scale(const PointCloud& x, const PointCloud& y) {
  require_nonempty(x, "assignment_scale");
  require_nonempty(y, "assignment_scale");
  double sum = 0.0;
  for (const auto& p : x.points()) {
    for (const auto& q : y.points()) sum += distance(p, q);
  }
  return sum / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

Assignment emd_approx(const PointCloud& x, const PointCloud& y, double epsilon) {
  require_same_size(x, y, "emd_approx");
  if (!(epsilon > 0.0)) throw ContractError("emd_approx: epsilon must be positive");
  const std::size_t n = x.size();
  constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

  const double scale = assignment_scale(x, y);
  Assignment result;
  if (scale == 0.0) {
    result.mapping.resize(n);
    std::iota(result.mapping.begin(), result.mapping.end(), std::size_t{0});
    result.cost = 0.0;
    return result;
  }

  // Forward auction on benefits -|x_i - y_j|; a final phase at eps_final
  // guarantees total cost <= optimum + n * eps_final.
  const double eps_final = epsilon * scale;
  double eps = std::max(scale, eps_final);
  std::vector<double> price(n, 0.0);
  std::vector<std::size_t> owner(n), assigned(n);
  std::vector<std::size_t> queue;
  queue.reserve(n);

  while (true) {
    std::fill(owner.begin(), owner.end(), kUnassigned);
    std::fill(assigned.begin(), assigned.end(), kUnassigned);
    queue.clear();
    for (std::size_t i = n; i-- > 0;) queue.push_back(i);

    while (!queue.empty()) {
      const std::size_t i = queue.back();
      queue.pop_back();
      double best = -std::numeric_limits<double>::infinity();
      double second = best;
      std::size_t best_j = 0;
      for (std::size_t j = 0; j < n; ++j) {
        const double value = -distance(x[i], y[j]) - price[j];
        if (value > best) {
          second = best;
          best = value;
          best_j = j;
        } else if (value > second) {
          second = value;
        }
      }
      const double increment = (n == 1 ? 0.0 : best - second) + eps;
      price[best_j] += increment;
      if (owner[best_j] != kUnassigned) {
        assigned[owner[best_j]] = kUnassigned;
        queue.push_back(owner[best_j]);
      }
      owner[best_j] = i;
      assigned[i] = best_j;
    }
    if (eps <= eps_final) break;
    eps = std::max(eps / 5.0, eps_final);
  }

  result.mapping = assigned;
  result.cost = assignment_cost(x, y, result.mapping);
  return result;
}

std::vector<std::size_t> farthest_sampling(std::span<const double> rows, std::size_t dim,
                                           std::size_t k, std::size_t seed_index) {
  if (dim == 0 || rows.size() % dim != 0) {
    throw ContractError("farthest_sampling: buffer is not a whole number of rows");
  }
  const std::size_t n = rows.size() / dim;
  if (k < 1 || k > n) {
    throw CardinalityError("farthest_sampling: k=" + std::to_string(k) + " outside [1, " +
                           std::to_string(n) + "]");
  }
  if (seed_index >= n) {
    throw CardinalityError("farthest_sampling: seed index " + std::to_string(seed_index) +
                           " out of range");
  }
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> selected(n, 0);
  std::vector<std::size_t> out;
  out.reserve(k);
  std::size_t current = seed_index;
  for (std::size_t step = 0; step < k; ++step) {
    out.push_back(current);
    selected[current] = 1;
    if (step + 1 == k) break;
    const double* c = rows.data() + current * dim;
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (selected[i]) continue;
      const double* r = rows.data() + i * dim;
      double d = 0.0;
      for (std::size_t a = 0; a < dim; ++a) {
        const double diff = r[a] - c[a];
        d += diff * diff;
      }
      if (d < min_dist[i]) min_dist[i] = d;
      if (min_dist[i] > best) {
        best = min_dist[i];
        best_i = i;
      }
    }
    current = best_i;
  }
  return out;
}

std::vector<std::size_t> farthest_point_sampling(const PointCloud& x, std::size_t k,
                                                 std::size_t seed_index) {
  const auto flat = x.flat();
  return farthest_sampling(flat, 3, k, seed_index);
}

double keypoint_miou(const PointCloud& predicted, const PointCloud& annotated, double threshold) {
  require_nonempty(predicted, "keypoint_miou");
  require_nonempty(annotated, "keypoint_miou");
  if (!(threshold > 0.0)) throw ContractError("keypoint_miou: threshold must be positive");

  struct Candidate {
    double dist;
    std::size_t ann;
    std::size_t pred;
  };
  std::vector<Candidate> candidates;
  for (std::size_t a = 0; a < annotated.size(); ++a) {
    for (std::size_t p = 0; p < predicted.size(); ++p) {
      const double d = distance(annotated[a], predicted[p]);
      if (d <= threshold) candidates.push_back({d, a, p});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& l, const Candidate& r) {
    return std::tie(l.dist, l.ann, l.pred) < std::tie(r.dist, r.ann, r.pred);
  });
  std::vector<char> ann_used(annotated.size(), 0), pred_used(predicted.size(), 0);
  std::size_t matches = 0;
  for (const auto& c : candidates) {
    if (ann_used[c.ann] || pred_used[c.pred]) continue;
    ann_used[c.ann] = 1;
    pred_used[c.pred] = 1;
    ++matches;
  }
  const double m = static_cast<double>(matches);
  return m / (static_cast<double>(predicted.size() + annotated.size()) - m);
}

}  // namespace lakenet
