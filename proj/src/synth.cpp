#include "ppc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ppc/rng.hpp"

namespace ppc {
namespace synth {

namespace {

constexpr std::uint64_t kJitterStream = 0x6A69747465720ULL;

void check_spec(const SceneSpec& spec) {
  for (double s : spec.scale)
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidSpec("scale entries must be positive");
  if (!(spec.jitter_sigma >= 0.0) || !std::isfinite(spec.jitter_sigma))
    throw InvalidSpec("jitter_sigma must be non-negative");
  if (spec.kind != SceneKind::CUBE_CORNERS && spec.point_count < 3)
    throw InvalidSpec("point_count must be at least 3");
}

// Anisotropic gaussian blob plus two displaced satellite groups, one off +x
// and one off +y. The satellites give both leading axes a heavy-tailed mass
// imbalance, so the asymmetry scores sit far from zero on almost every seed.
PointCloud gen_gaussian_aniso(const SceneSpec& spec, SplitMix64& rng) {
  const std::size_t n = spec.point_count;
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 g = rng.normal3();
    cloud.points.push_back(
        Vec3(spec.scale[0] * g.x(), spec.scale[1] * g.y(), spec.scale[2] * g.z()));
  }
  const std::size_t satellite = std::max<std::size_t>(1, n / 16);
  for (std::size_t i = n - satellite; i < n; ++i)
    cloud.points[i].x() += 2.5 * spec.scale[0];
  const std::size_t lo = satellite <= n - satellite ? n - 2 * satellite : 0;
  for (std::size_t i = lo; i < n - satellite; ++i) cloud.points[i].y() += 2.0 * spec.scale[1];
  return cloud;
}

// Points on an ellipsoid surface with a density bias toward the +x and +y
// hemispheres (every 3rd point is folded to x >= 0, every 5th to y >= 0).
PointCloud gen_ellipsoid_shell(const SceneSpec& spec, SplitMix64& rng) {
  PointCloud cloud;
  cloud.points.reserve(spec.point_count);
  for (std::size_t i = 0; i < spec.point_count; ++i) {
    Vec3 u = rng.normal3();
    double norm = u.norm();
    while (norm < 1e-12) {
      u = rng.normal3();
      norm = u.norm();
    }
    u /= norm;
    if (i % 3 == 0) u.x() = std::abs(u.x());
    if (i % 5 == 0) u.y() = std::abs(u.y());
    cloud.points.push_back(
        Vec3(spec.scale[0] * u.x(), spec.scale[1] * u.y(), spec.scale[2] * u.z()));
  }
  return cloud;
}

// Two to five clusters of unequal size scattered over the z = 0 slab, point
// heights folded upward. The size imbalance is what keeps the scene
// asymmetric.
PointCloud gen_tabletop_clusters(const SceneSpec& spec, SplitMix64& rng) {
  const std::size_t n = spec.point_count;
  const std::size_t k = 2 + static_cast<std::size_t>(rng.below(4));

  struct Cluster {
    Vec3 center;
    double spread;
    std::size_t count;
  };
  std::vector<Cluster> clusters(k);
  std::size_t weight_total = 0;
  for (std::size_t c = 0; c < k; ++c) weight_total += c + 1;

  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    Cluster& cl = clusters[c];
    cl.center = Vec3(rng.uniform(-0.8, 0.8) * spec.scale[0],
                     rng.uniform(-0.8, 0.8) * spec.scale[1], 0.0);
    cl.spread = (0.05 + 0.10 * rng.uniform01()) * spec.scale[2];
    cl.count = c + 1 == k ? n - assigned : n * (c + 1) / weight_total;
    assigned += cl.count;
  }

  PointCloud cloud;
  cloud.points.reserve(n);
  for (const Cluster& cl : clusters) {
    for (std::size_t i = 0; i < cl.count; ++i) {
      const Vec3 g = rng.normal3();
      cloud.points.push_back(cl.center + Vec3(cl.spread * g.x(), cl.spread * g.y(),
                                              cl.spread * std::abs(g.z())));
    }
  }
  return cloud;
}

// The 8 corners of the box [-s1, s1] x [-s2, s2] x [-s3, s3], lexicographic
// sign order. With equal scales every covariance eigenvalue coincides
// exactly, which makes this the canonical simple-spectrum failure fixture.
PointCloud gen_cube_corners(const SceneSpec& spec) {
  PointCloud cloud;
  cloud.points.reserve(8);
  for (int sx : {-1, 1})
    for (int sy : {-1, 1})
      for (int sz : {-1, 1})
        cloud.points.push_back(
            Vec3(sx * spec.scale[0], sy * spec.scale[1], sz * spec.scale[2]));
  return cloud;
}

// Mirror pairs across x = 0, emitted adjacently so every compensated sum
// cancels the x contributions exactly: the centroid x, the xy and xz
// covariance entries, and the asymmetry score along x are all exact zeros.
// Odd point counts get one final point on the mirror plane.
PointCloud gen_mirror_symmetric(const SceneSpec& spec, SplitMix64& rng) {
  const std::size_t n = spec.point_count;
  PointCloud cloud;
  cloud.points.reserve(n);
  while (cloud.size() + 2 <= n) {
    const Vec3 g = rng.normal3();
    const Vec3 p(spec.scale[0] * g.x(), spec.scale[1] * g.y(), spec.scale[2] * g.z());
    cloud.points.push_back(p);
    cloud.points.push_back(Vec3(-p.x(), p.y(), p.z()));
  }
  if (cloud.size() < n) {
    const Vec3 g = rng.normal3();
    cloud.points.push_back(Vec3(0.0, spec.scale[1] * g.x(), spec.scale[2] * g.y()));
  }
  return cloud;
}

// z = 0 exactly: the covariance is rank deficient with a zero eigenvalue.
// The +x fold on every 3rd point keeps the in-plane scores away from zero.
PointCloud gen_plane(const SceneSpec& spec, SplitMix64& rng) {
  PointCloud cloud;
  cloud.points.reserve(spec.point_count);
  for (std::size_t i = 0; i < spec.point_count; ++i) {
    double x = spec.scale[0] * rng.normal();
    const double y = spec.scale[1] * rng.normal();
    if (i % 3 == 0) x = std::abs(x) + 0.5 * spec.scale[0];
    cloud.points.push_back(Vec3(x, y, 0.0));
  }
  return cloud;
}

}  // namespace

const char* to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::GAUSSIAN_ANISO: return "gaussian_aniso";
    case SceneKind::ELLIPSOID_SHELL: return "ellipsoid_shell";
    case SceneKind::TABLETOP_CLUSTERS: return "tabletop_clusters";
    case SceneKind::CUBE_CORNERS: return "cube_corners";
    case SceneKind::MIRROR_SYMMETRIC: return "mirror_symmetric";
    case SceneKind::PLANE: return "plane";
  }
  return "unknown";
}

PointCloud generate(const SceneSpec& spec) {
  check_spec(spec);
  SplitMix64 rng(spec.rng_seed);

  PointCloud cloud;
  switch (spec.kind) {
    case SceneKind::GAUSSIAN_ANISO: cloud = gen_gaussian_aniso(spec, rng); break;
    case SceneKind::ELLIPSOID_SHELL: cloud = gen_ellipsoid_shell(spec, rng); break;
    case SceneKind::TABLETOP_CLUSTERS: cloud = gen_tabletop_clusters(spec, rng); break;
    case SceneKind::CUBE_CORNERS: cloud = gen_cube_corners(spec); break;
    case SceneKind::MIRROR_SYMMETRIC: cloud = gen_mirror_symmetric(spec, rng); break;
    case SceneKind::PLANE: cloud = gen_plane(spec, rng); break;
    default: throw InvalidSpec("unknown scene kind");
  }

  if (spec.jitter_sigma > 0.0)
    cloud = add_gaussian_jitter(cloud, spec.jitter_sigma,
                                mix_seed(spec.rng_seed, kJitterStream));
  return cloud;
}

Mat3 sample_rotation(std::uint64_t seed) {
  SplitMix64 rng(seed);
  double w, x, y, z, norm;
  do {
    w = rng.normal();
    x = rng.normal();
    y = rng.normal();
    z = rng.normal();
    norm = std::sqrt(w * w + x * x + y * y + z * z);
  } while (norm < 1e-12);
  w /= norm;
  x /= norm;
  y /= norm;
  z /= norm;

  Mat3 r;
  r(0, 0) = 1.0 - 2.0 * (y * y + z * z);
  r(0, 1) = 2.0 * (x * y - w * z);
  r(0, 2) = 2.0 * (x * z + w * y);
  r(1, 0) = 2.0 * (x * y + w * z);
  r(1, 1) = 1.0 - 2.0 * (x * x + z * z);
  r(1, 2) = 2.0 * (y * z - w * x);
  r(2, 0) = 2.0 * (x * z - w * y);
  r(2, 1) = 2.0 * (y * z + w * x);
  r(2, 2) = 1.0 - 2.0 * (x * x + y * y);
  return r;
}

PointCloud apply_rigid(const PointCloud& cloud, const RigidTransform& transform) {
  validate_cloud(cloud);
  validate_transform(transform);
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points)
    out.points.push_back(transform.rotation * p + transform.translation);
  return out;
}

PointCloud add_gaussian_jitter(const PointCloud& cloud, double sigma, std::uint64_t seed) {
  validate_cloud(cloud);
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidParam("sigma must be non-negative");
  if (sigma == 0.0) return cloud;

  SplitMix64 rng(seed);
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(p + sigma * rng.normal3());
  return out;
}

}  // namespace synth
}  // namespace ppc
