#include "ppc/core.hpp"

#include <Eigen/LU>

namespace ppc {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::OK:
      return "OK";
    case Verdict::NEAR_DEGENERATE:
      return "NEAR_DEGENERATE";
    case Verdict::DEGENERATE:
      return "DEGENERATE";
  }
  return "UNKNOWN";
}

const PointCloud& validate_cloud(const PointCloud& cloud) {
  if (cloud.empty()) {
    throw EmptyCloud();
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud[i];
    if (!std::isfinite(p.x()) || !std::isfinite(p.y()) || !std::isfinite(p.z())) {
      throw NonFiniteCoordinate(i);
    }
  }
  return cloud;
}

const RigidTransform& validate_transform(const RigidTransform& t) {
  const Mat3 gram = t.rotation.transpose() * t.rotation;
  const double ortho_err = (gram - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho_err <= 1e-12)) {
    throw InvalidTransform("rotation is not orthonormal (max |R^T R - I| = " +
                           std::to_string(ortho_err) + ")");
  }
  const double det = t.rotation.determinant();
  if (!(std::abs(det - 1.0) <= 1e-12)) {
    throw InvalidTransform("rotation determinant is not +1 (det = " + std::to_string(det) +
                           ")");
  }
  if (!std::isfinite(t.translation.x()) || !std::isfinite(t.translation.y()) ||
      !std::isfinite(t.translation.z())) {
    throw InvalidTransform("translation has non-finite component");
  }
  return t;
}

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
  RigidTransform out;
  out.rotation = outer.rotation * inner.rotation;
  out.translation = outer.rotation * inner.translation + outer.translation;
  return out;
}

}  // namespace ppc
