#include "ppc/downsample.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>

namespace ppc {

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    auto mix = [](std::uint64_t v) {
      v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
      v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
      return v ^ (v >> 31);
    };
    std::uint64_t h = mix(static_cast<std::uint64_t>(k.x));
    h = mix(h ^ static_cast<std::uint64_t>(k.y));
    h = mix(h ^ static_cast<std::uint64_t>(k.z));
    return static_cast<std::size_t>(h);
  }
};

std::int64_t cell_coord(double v, double s) {
  const double q = std::floor(v / s);
  if (!(q >= -9.0e18 && q <= 9.0e18)) {
    throw InvalidParam("voxel index overflow; voxel_size too small for coordinate range");
  }
  return static_cast<std::int64_t>(q);
}

double squared_dist_to_cell_center(const Vec3& p, const CellKey& c, double s) {
  const double dx = p.x() - (static_cast<double>(c.x) + 0.5) * s;
  const double dy = p.y() - (static_cast<double>(c.y) + 0.5) * s;
  const double dz = p.z() - (static_cast<double>(c.z) + 0.5) * s;
  return dx * dx + dy * dy + dz * dz;
}

std::size_t fps_seed_index(const PointCloud& cloud, SeedRule rule) {
  if (rule == SeedRule::FIRST_INDEX) {
    return 0;
  }
  // Farthest from the centroid, ties to the lowest index. The centroid uses
  // the same compensated accumulation as canonicalize::centroid so the seed
  // is rigid-equivariant together with it.
  CompensatedSum sx, sy, sz;
  for (const Vec3& p : cloud.points) {
    sx.add(p.x());
    sy.add(p.y());
    sz.add(p.z());
  }
  const double n = static_cast<double>(cloud.size());
  const Vec3 mu(sx.value() / n, sy.value() / n, sz.value() / n);
  std::size_t best = 0;
  double best_d2 = -1.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 d = cloud[i] - mu;
    const double d2 = d.x() * d.x() + d.y() * d.y() + d.z() * d.z();
    if (d2 > best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

PointCloud gather(const PointCloud& cloud, const std::vector<std::size_t>& idx) {
  PointCloud out;
  out.points.reserve(idx.size());
  for (std::size_t i : idx) {
    out.points.push_back(cloud[i]);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> voxel_downsample_indices(const PointCloud& cloud,
                                                  const VoxelParams& params) {
  validate_cloud(cloud);
  if (!(std::isfinite(params.voxel_size) && params.voxel_size > 0.0)) {
    throw InvalidParam("voxel_size must be finite and > 0");
  }
  const double s = params.voxel_size;

  struct Best {
    std::size_t index;
    double d2;
  };
  std::unordered_map<CellKey, Best, CellHash> cells;
  cells.reserve(cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud[i];
    const CellKey key{cell_coord(p.x(), s), cell_coord(p.y(), s), cell_coord(p.z(), s)};
    const double d2 = squared_dist_to_cell_center(p, key, s);
    auto [it, inserted] = cells.try_emplace(key, Best{i, d2});
    if (!inserted && d2 < it->second.d2) {
      // Strict < keeps the lowest index on exact ties.
      it->second = Best{i, d2};
    }
  }

  std::vector<std::size_t> kept;
  kept.reserve(cells.size());
  for (const auto& [key, best] : cells) {
    kept.push_back(best.index);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

PointCloud voxel_downsample(const PointCloud& cloud, const VoxelParams& params) {
  return gather(cloud, voxel_downsample_indices(cloud, params));
}

std::vector<std::size_t> farthest_point_sample_indices(const PointCloud& cloud,
                                                       const FpsParams& params) {
  validate_cloud(cloud);
  const std::size_t n = cloud.size();
  if (params.target_count < 1) {
    throw InvalidParam("target_count must be >= 1");
  }
  if (params.target_count > n) {
    throw TargetExceedsCloud(params.target_count, n);
  }

  std::vector<std::size_t> selected;
  selected.reserve(params.target_count);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);

  std::size_t current = fps_seed_index(cloud, params.seed_rule);
  taken[current] = 1;
  selected.push_back(current);

  while (selected.size() < params.target_count) {
    const Vec3& q = cloud[current];
    std::size_t next = n;
    double next_d2 = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec3 d = cloud[i] - q;
      const double d2 = d.x() * d.x() + d.y() * d.y() + d.z() * d.z();
      if (d2 < min_d2[i]) {
        min_d2[i] = d2;
      }
      // Strict > scans in index order, so ties resolve to the lowest
      // unselected index.
      if (!taken[i] && min_d2[i] > next_d2) {
        next_d2 = min_d2[i];
        next = i;
      }
    }
    current = next;
    taken[current] = 1;
    selected.push_back(current);
  }
  return selected;
}

PointCloud farthest_point_sample(const PointCloud& cloud, const FpsParams& params) {
  return gather(cloud, farthest_point_sample_indices(cloud, params));
}

PipelineResult downsample_pipeline(const PointCloud& cloud, const VoxelParams& vp,
                                   const FpsParams& fp) {
  PipelineResult result;
  PointCloud thinned = voxel_downsample(cloud, vp);
  if (thinned.size() < fp.target_count) {
    result.cloud = std::move(thinned);
    result.short_cloud = true;
    return result;
  }
  result.cloud = farthest_point_sample(thinned, fp);
  return result;
}

}  // namespace ppc
