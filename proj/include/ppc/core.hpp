#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ppc {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Ordered 3D point cloud. Row i of the conceptual n x 3 matrix is points[i].
/// Coordinates are double precision; units are caller-defined (the CLI
/// documents them as meters). Row order is meaningful: operations that do not
/// resample preserve the row i <-> row i correspondence.
struct PointCloud {
  std::vector<Vec3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Vec3& operator[](std::size_t i) const { return points[i]; }
  Vec3& operator[](std::size_t i) { return points[i]; }
};

/// Proper rigid motion (rotation + translation). Points are row vectors, so
/// the cloud transforms as x' = x R^T + 1 t^T; per point with column vectors
/// that is p' = R p + t.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

/// Eigendecomposition of a 3x3 covariance: eigenvalues sorted descending,
/// matching orthonormal eigenvector columns, and the two spectral gaps
/// (l1-l2, l2-l3).
struct EigenResult {
  std::array<double, 3> eigenvalues{};
  Mat3 basis = Mat3::Identity();
  std::array<double, 2> spectral_gaps{};
};

enum class Verdict { OK, NEAR_DEGENERATE, DEGENERATE };

std::string to_string(Verdict v);

/// Diagnostics for the two failure modes of canonicalization: a non-simple
/// covariance spectrum and a vanishing asymmetry score. Gap ratios are
/// normalized by the largest eigenvalue, phi margins by the total score
/// weight, so both are scale-free.
struct DegeneracyReport {
  bool spectrum_simple = true;
  double gap_ratio_12 = 0.0;
  double gap_ratio_23 = 0.0;
  bool phi_nondegenerate = true;
  double phi_margin_1 = 0.0;
  double phi_margin_2 = 0.0;
  Verdict verdict = Verdict::OK;
};

/// Output of canonicalize(): the canonical cloud together with everything
/// needed to audit how it was produced.
struct CanonicalResult {
  PointCloud canonical;             // centered cloud re-expressed in `basis`
  Mat3 basis = Mat3::Identity();    // disambiguated eigenbasis, det +1
  Vec3 centroid = Vec3::Zero();     // centroid of the input cloud
  std::array<int, 3> signs{1, 1, 1};
  std::array<double, 2> phi_values{};  // scores of e1, e2 before sign fixing
  std::array<double, 2> gaps{};        // spectral gaps (l1-l2, l2-l3)
  DegeneracyReport report;
};

// ---------------------------------------------------------------------------
// Error taxonomy
// ---------------------------------------------------------------------------
// Every failure mode gets its own type so callers can dispatch on the class
// rather than parse message text.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyCloud : public Error {
 public:
  EmptyCloud() : Error("point cloud is empty") {}
};

class NonFiniteCoordinate : public Error {
 public:
  explicit NonFiniteCoordinate(std::size_t row)
      : Error("non-finite coordinate at row " + std::to_string(row)), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

class InvalidParam : public Error {
 public:
  using Error::Error;
};

class TargetExceedsCloud : public Error {
 public:
  TargetExceedsCloud(std::size_t target, std::size_t available)
      : Error("sample target " + std::to_string(target) + " exceeds cloud size " +
              std::to_string(available)),
        target_(target),
        available_(available) {}
  std::size_t target() const { return target_; }
  std::size_t available() const { return available_; }

 private:
  std::size_t target_;
  std::size_t available_;
};

class InsufficientPoints : public Error {
 public:
  InsufficientPoints(std::size_t required, std::size_t actual)
      : Error("operation needs at least " + std::to_string(required) + " points, got " +
              std::to_string(actual)),
        required_(required),
        actual_(actual) {}
  std::size_t required() const { return required_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t required_;
  std::size_t actual_;
};

class NotSymmetric : public Error {
 public:
  NotSymmetric() : Error("matrix is not symmetric") {}
  using Error::Error;
};

class NonUnitVector : public Error {
 public:
  NonUnitVector() : Error("vector is not unit length") {}
  using Error::Error;
};

class NotOrthonormal : public Error {
 public:
  NotOrthonormal() : Error("matrix is not orthonormal") {}
  using Error::Error;
};

class RowCountMismatch : public Error {
 public:
  RowCountMismatch(std::size_t a, std::size_t b)
      : Error("row counts differ: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

class InvalidTransform : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class FileNotFound : public Error {
 public:
  explicit FileNotFound(const std::string& path) : Error("file not found: " + path) {}
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t byte_offset, const std::string& what)
      : Error(what + " (line " + std::to_string(line) + ", byte " +
              std::to_string(byte_offset) + ")"),
        line_(line),
        byte_offset_(byte_offset) {}
  std::size_t line() const { return line_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t line_;
  std::size_t byte_offset_;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Numeric conventions
// ---------------------------------------------------------------------------

/// Neumaier-compensated accumulator. All contractual reductions (centroid,
/// covariance, scores, metric means) run through this in fixed index order,
/// which pins the result bit-for-bit on a given platform.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Checks the PointCloud invariants (n >= 1, all coordinates finite) and
/// returns the cloud unchanged. Idempotent.
const PointCloud& validate_cloud(const PointCloud& cloud);

/// Checks that `t.rotation` is orthonormal (max |R^T R - I| <= 1e-12) with
/// determinant 1 within 1e-12. Throws InvalidTransform otherwise.
const RigidTransform& validate_transform(const RigidTransform& t);

/// Composition: apply `inner` first, then `outer`.
RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);

}  // namespace ppc
