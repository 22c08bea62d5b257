#pragma once

#include "ppc/core.hpp"

namespace ppc {

/// Weighting of the asymmetry score phi(v, x) = sum_i w(|x_i|) sign<x_i, v>
/// over a centered cloud. All three satisfy translation invariance (they see
/// only centered points), rotation invariance (norms and inner-product signs
/// rotate along), and oddness in v; the test suites exercise each as a
/// property, not an assumption.
enum class ScoreKind {
  SQUARED_NORM,  // w(r) = r^2
  QUARTIC_NORM,  // w(r) = r^4
  INVERSE_NORM,  // w(r) = 1/r, points with r < eps_abs skipped
};

/// Thresholds for the degeneracy verdict. Gap ratios are
/// (l_k - l_{k+1}) / max(l_1, eps_abs), phi margins |phi| / total weight;
/// both must clear their *_rel_min for an OK spectrum/score. A margin within
/// warn_factor of the hard threshold yields NEAR_DEGENERATE.
struct DegeneracyThresholds {
  double gap_rel_min = 1e-6;
  double phi_rel_min = 1e-6;
  double warn_factor = 100.0;
  double eps_abs = 1e-12;
};

/// Arithmetic mean of the rows, computed with compensated summation in input
/// order.
Vec3 centroid(const PointCloud& cloud);

struct CenterResult {
  PointCloud cloud;  // x_i - mu, same row order
  Vec3 centroid;
};

/// Subtracts the centroid from every point.
CenterResult center(const PointCloud& cloud);

/// Sample covariance (1/(n-1)) x^T x of an already-centered cloud. Requires
/// n >= 2.
Mat3 covariance(const PointCloud& centered);

/// Eigendecomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations
/// (sweeps until the off-diagonal Frobenius norm falls below 1e-14 times the
/// input norm, at most 50 sweeps). The input is symmetrized as (A + A^T)/2
/// first; asymmetry beyond 1e-10 (relative to max(1, |A|_max)) throws
/// NotSymmetric. Eigenvalues come back descending, with near-ties (within
/// 1e-12) kept in Jacobi order; values in [-1e-12, 0) are round-off from PSD
/// inputs and are clamped to 0. Column signs are fixed deterministically
/// (largest-|entry| positive) but carry no meaning; disambiguation overrides
/// them.
EigenResult eig3_sym(const Mat3& sigma);

/// Asymmetry score phi(v, centered) = sum_i w(|x_i|) sign<x_i, v>, with
/// sign(0) = 0, summed with compensation in input order. `v` must be unit
/// length within 1e-10.
double score_phi(const Vec3& v, const PointCloud& centered, ScoreKind kind,
                 double eps_abs = 1e-12);

struct ScoreResult {
  double phi = 0.0;
  double total_weight = 0.0;  // sum_i w(|x_i|) over contributing points
};

/// score_phi together with the total weight used to normalize phi margins.
ScoreResult score_phi_with_weight(const Vec3& v, const PointCloud& centered,
                                  ScoreKind kind, double eps_abs = 1e-12);

struct DisambiguationResult {
  Mat3 basis = Mat3::Identity();  // E diag(s1, s2, s3+), det +1
  std::array<int, 3> signs{1, 1, 1};
  std::array<double, 2> phi_values{};
  DegeneracyReport report;
};

/// Resolves the eigenvector sign ambiguity: s_k = sign phi(e_k, centered)
/// for k = 1, 2 and s3+ = det(E) s1 s2 (right-hand rule), so the result is a
/// proper rotation. Degeneracy is reported, never thrown; a vanished score
/// falls back to +1 and the verdict marks that invariance is not guaranteed.
DisambiguationResult disambiguate(const EigenResult& eig, const PointCloud& centered,
                                  ScoreKind kind, const DegeneracyThresholds& thresholds);

/// Builds the degeneracy report for the given eigenvalues and scores without
/// deciding signs.
DegeneracyReport make_degeneracy_report(const EigenResult& eig, double phi1, double phi2,
                                        double total_weight,
                                        const DegeneracyThresholds& thresholds);

/// The full canonicalization map: center, eigendecompose the covariance,
/// disambiguate signs, and re-express the centered cloud in the resulting
/// basis. On non-degenerate inputs the output is invariant to any rigid
/// motion of the input. Requires n >= 3.
CanonicalResult canonicalize(const PointCloud& cloud,
                             ScoreKind kind = ScoreKind::SQUARED_NORM,
                             const DegeneracyThresholds& thresholds = {});

/// The degeneracy diagnostics of canonicalize without computing the
/// canonical cloud.
DegeneracyReport degeneracy_check(const PointCloud& cloud,
                                  ScoreKind kind = ScoreKind::SQUARED_NORM,
                                  const DegeneracyThresholds& thresholds = {});

}  // namespace ppc
