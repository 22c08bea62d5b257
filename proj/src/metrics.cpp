#include "ppc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "ppc/rng.hpp"

namespace ppc {

namespace {

// The one distance kernel both Chamfer paths use. Writing the subtraction
// out componentwise fixes the evaluation order, so brute force and the tree
// produce identical squared distances.
inline double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

// Exact nearest-neighbor kd-tree over a fixed cloud. Nodes hold index ranges
// into a reordered index array; leaves keep up to 16 points.
class KdTree {
 public:
  explicit KdTree(const PointCloud& cloud) : cloud_(cloud), indices_(cloud.size()) {
    std::iota(indices_.begin(), indices_.end(), std::size_t{0});
    nodes_.reserve(cloud.size() / 8 + 8);
    root_ = build(0, cloud.size());
  }

  double nearest_squared(const Vec3& q) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, q, best);
    return best;
  }

 private:
  static constexpr std::size_t kLeafSize = 16;
  static constexpr int kNone = -1;

  struct Node {
    double split = 0.0;
    int dim = 0;
    int left = kNone;
    int right = kNone;
    std::size_t begin = 0;
    std::size_t end = 0;  // leaf iff left == kNone
  };

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});

    if (end - begin <= kLeafSize) {
      nodes_[id].begin = begin;
      nodes_[id].end = end;
      return id;
    }

    Vec3 lo = cloud_[indices_[begin]];
    Vec3 hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(cloud_[indices_[i]]);
      hi = hi.cwiseMax(cloud_[indices_[i]]);
    }
    int dim = 0;
    const Vec3 extent = hi - lo;
    if (extent.y() > extent.x()) dim = 1;
    if (extent.z() > extent[dim]) dim = 2;

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(indices_.begin() + begin, indices_.begin() + mid,
                     indices_.begin() + end, [&](std::size_t a, std::size_t b) {
                       return cloud_[a][dim] < cloud_[b][dim];
                     });

    nodes_[id].dim = dim;
    nodes_[id].split = cloud_[indices_[mid]][dim];
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(int id, const Vec3& q, double& best) const {
    const Node& node = nodes_[id];
    if (node.left == kNone) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const double d2 = squared_distance(q, cloud_[indices_[i]]);
        if (d2 < best) best = d2;
      }
      return;
    }

    const double diff = q[node.dim] - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search(near, q, best);
    // The far half can only improve on best if the splitting plane is
    // strictly closer than the current nearest point.
    if (diff * diff < best) search(far, q, best);
  }

  const PointCloud& cloud_;
  std::vector<std::size_t> indices_;
  std::vector<Node> nodes_;
  int root_ = kNone;
};

// Mean over queries of the Euclidean nearest-neighbor distance produced by
// `nearest`, compensated, in query row order.
template <typename NearestSquared>
double directed_mean(const PointCloud& queries, NearestSquared nearest) {
  CompensatedSum sum;
  for (const Vec3& q : queries.points) sum.add(std::sqrt(nearest(q)));
  return sum.value() / static_cast<double>(queries.size());
}

}  // namespace

ChamferResult chamfer_brute(const PointCloud& a, const PointCloud& b) {
  validate_cloud(a);
  validate_cloud(b);

  auto nearest_in = [](const PointCloud& cloud) {
    return [&cloud](const Vec3& q) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& p : cloud.points) {
        const double d2 = squared_distance(q, p);
        if (d2 < best) best = d2;
      }
      return best;
    };
  };

  ChamferResult out;
  out.forward_mean = directed_mean(a, nearest_in(b));
  out.backward_mean = directed_mean(b, nearest_in(a));
  out.value = 0.5 * (out.forward_mean + out.backward_mean);
  return out;
}

ChamferResult chamfer_fast(const PointCloud& a, const PointCloud& b) {
  validate_cloud(a);
  validate_cloud(b);

  const KdTree tree_b(b);
  const KdTree tree_a(a);

  ChamferResult out;
  out.forward_mean = directed_mean(a, [&](const Vec3& q) { return tree_b.nearest_squared(q); });
  out.backward_mean = directed_mean(b, [&](const Vec3& q) { return tree_a.nearest_squared(q); });
  out.value = 0.5 * (out.forward_mean + out.backward_mean);
  return out;
}

double basis_distance(const Mat3& a, const Mat3& b) {
  auto check_orthonormal = [](const Mat3& m) {
    if (!m.allFinite()) throw NotOrthonormal();
    const Mat3 gram = m.transpose() * m - Mat3::Identity();
    if (gram.cwiseAbs().maxCoeff() > 1e-8) throw NotOrthonormal();
  };
  check_orthonormal(a);
  check_orthonormal(b);
  return (a - b).cwiseAbs().maxCoeff();
}

double distance_preservation(const PointCloud& before, const PointCloud& after) {
  validate_cloud(before);
  validate_cloud(after);
  if (before.size() != after.size()) throw RowCountMismatch(before.size(), after.size());
  const std::size_t n = before.size();
  if (n < 2) return 0.0;

  auto pair_error = [&](std::size_t i, std::size_t j) {
    const double db = std::sqrt(squared_distance(before[i], before[j]));
    const double da = std::sqrt(squared_distance(after[i], after[j]));
    return std::abs(da - db) / std::max(db, 1e-300);
  };

  double worst = 0.0;
  if (n <= 2048) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) worst = std::max(worst, pair_error(i, j));
  } else {
    // Fixed-seed sample so repeated calls on the same clouds agree.
    SplitMix64 rng(0x505043u);  // arbitrary constant, pinned
    const std::size_t samples = std::size_t{1} << 21;
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t i = rng.below(n);
      std::size_t j = rng.below(n - 1);
      if (j >= i) ++j;
      worst = std::max(worst, pair_error(i, j));
    }
  }
  return worst;
}

double diameter(const PointCloud& cloud) {
  validate_cloud(cloud);
  double best = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t j = i + 1; j < cloud.size(); ++j)
      best = std::max(best, squared_distance(cloud[i], cloud[j]));
  return std::sqrt(best);
}

}  // namespace ppc
