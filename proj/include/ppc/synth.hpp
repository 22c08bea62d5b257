#pragma once

#include <cstdint>

#include "ppc/core.hpp"

namespace ppc {
namespace synth {

enum class SceneKind {
  GAUSSIAN_ANISO,     // anisotropic gaussian blob with an off-axis cluster
  ELLIPSOID_SHELL,    // points on an axis-aligned ellipsoid surface, warped
  TABLETOP_CLUSTERS,  // several uneven object clusters on a plane
  CUBE_CORNERS,       // the 8 corners of a box: equal-eigenvalue fixture
  MIRROR_SYMMETRIC,   // exact mirror pairs across x = 0: vanishing-score fixture
  PLANE,              // z = 0 slab: rank-deficient covariance fixture
};

const char* to_string(SceneKind kind);

struct SceneSpec {
  SceneKind kind = SceneKind::GAUSSIAN_ANISO;
  std::size_t point_count = 512;
  std::array<double, 3> scale{3.0, 2.0, 1.0};  // per-axis extent, meters
  std::uint64_t rng_seed = 1;
  double jitter_sigma = 0.0;  // isotropic gaussian noise added at the end
};

/// Deterministic scene synthesis: the same spec always yields the same
/// cloud, byte for byte. CUBE_CORNERS ignores point_count (always 8 rows);
/// every other kind requires point_count >= 3. Scales must be positive and
/// jitter_sigma non-negative, else InvalidSpec.
PointCloud generate(const SceneSpec& spec);

/// Rotation drawn uniformly from SO(3) (normalized gaussian quaternion).
Mat3 sample_rotation(std::uint64_t seed);

/// x_i -> R x_i + t for every row, validating both arguments.
PointCloud apply_rigid(const PointCloud& cloud, const RigidTransform& transform);

/// Adds iid gaussian noise with standard deviation sigma to every
/// coordinate. sigma = 0 returns the input unchanged.
PointCloud add_gaussian_jitter(const PointCloud& cloud, double sigma, std::uint64_t seed);

}  // namespace synth
}  // namespace ppc
