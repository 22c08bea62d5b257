#pragma once

#include "ppc/core.hpp"

namespace ppc {

struct VoxelParams {
  double voxel_size = 0.0;  // cell edge length, cloud units, > 0
};

enum class SeedRule {
  FIRST_INDEX,             // seed at input row 0
  FARTHEST_FROM_CENTROID,  // seed at the point farthest from the centroid
};

struct FpsParams {
  std::size_t target_count = 0;
  SeedRule seed_rule = SeedRule::FARTHEST_FROM_CENTROID;
};

/// Result of the two-stage pipeline. `short_cloud` is set when the voxel
/// stage produced fewer points than the FPS target; in that case the voxel
/// output is returned as-is and FPS is skipped (a warning condition, not an
/// error, so streaming callers stay total on sparse frames).
struct PipelineResult {
  PointCloud cloud;
  bool short_cloud = false;
};

/// Keeps at most one input point per voxel cell. The grid is anchored at the
/// raw origin; the cell of p is (floor(p.x/s), floor(p.y/s), floor(p.z/s)).
/// Within a cell the survivor is the point nearest the cell center, ties
/// going to the lowest input index. Output is ordered by ascending kept
/// input index, so this is a pure selection: every output point is an input
/// point, bit for bit.
PointCloud voxel_downsample(const PointCloud& cloud, const VoxelParams& params);

/// Input indices kept by voxel_downsample, ascending.
std::vector<std::size_t> voxel_downsample_indices(const PointCloud& cloud,
                                                  const VoxelParams& params);

/// Greedy max-min farthest point sampling. After seeding per `seed_rule`,
/// repeatedly selects the point with the largest minimum distance to the
/// already-selected set, ties going to the lowest input index. Output is in
/// selection order. Fully deterministic; throws TargetExceedsCloud rather
/// than padding when target_count > n.
PointCloud farthest_point_sample(const PointCloud& cloud, const FpsParams& params);

/// Input indices chosen by farthest_point_sample, in selection order.
std::vector<std::size_t> farthest_point_sample_indices(const PointCloud& cloud,
                                                       const FpsParams& params);

/// voxel_downsample then farthest_point_sample, composed exactly.
PipelineResult downsample_pipeline(const PointCloud& cloud, const VoxelParams& vp,
                                   const FpsParams& fp);

}  // namespace ppc
