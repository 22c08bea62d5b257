#pragma once

#include "ppc/core.hpp"

namespace ppc {

struct ChamferResult {
  double value = 0.0;          // (forward_mean + backward_mean) / 2
  double forward_mean = 0.0;   // mean over a of min_b |a - b|
  double backward_mean = 0.0;  // mean over b of min_a |b - a|
};

/// Symmetric Chamfer distance with Euclidean (not squared) point distances,
/// by exhaustive nearest-neighbor search. O(|a| * |b|).
ChamferResult chamfer_brute(const PointCloud& a, const PointCloud& b);

/// Same metric through a kd-tree. Exact, not approximate: both paths share
/// one distance kernel and sum in the same row order, so the results match
/// chamfer_brute bit for bit.
ChamferResult chamfer_fast(const PointCloud& a, const PointCloud& b);

/// Largest absolute entry difference between two basis matrices. Both must
/// be orthonormal within 1e-8 (max entry of B^T B - I), else NotOrthonormal.
double basis_distance(const Mat3& a, const Mat3& b);

/// Worst relative change of pairwise distances between two equal-length
/// clouds: max over pairs of |d_after - d_before| / max(d_before, 1e-300).
/// All pairs when n <= 2048; above that a fixed-seed sample of pairs. A rigid
/// motion or basis change keeps this at round-off level.
double distance_preservation(const PointCloud& before, const PointCloud& after);

/// Largest pairwise distance, exhaustive. O(n^2).
double diameter(const PointCloud& cloud);

}  // namespace ppc
