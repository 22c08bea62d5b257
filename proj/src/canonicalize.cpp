#include "ppc/canonicalize.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ppc {

namespace {

// One Jacobi rotation in the (p, q) plane that annihilates A(p, q). Rotations
// are accumulated into V so its columns converge to the eigenvectors.
void jacobi_rotate(Mat3& a, Mat3& v, int p, int q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;

  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  // Stable root choice: t = sign(theta) / (|theta| + sqrt(theta^2 + 1)).
  double t;
  if (std::abs(theta) > 1e150) {
    t = 1.0 / (2.0 * theta);  // avoid overflow in theta^2
  } else {
    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    if (theta < 0.0) t = -t;
  }
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const double app = a(p, p);
  const double aqq = a(q, q);
  a(p, p) = app - t * apq;
  a(q, q) = aqq + t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;

  const int r = 3 - p - q;  // remaining axis
  const double arp = a(r, p);
  const double arq = a(r, q);
  a(r, p) = c * arp - s * arq;
  a(p, r) = a(r, p);
  a(r, q) = s * arp + c * arq;
  a(q, r) = a(r, q);

  for (int i = 0; i < 3; ++i) {
    const double vip = v(i, p);
    const double viq = v(i, q);
    v(i, p) = c * vip - s * viq;
    v(i, q) = s * vip + c * viq;
  }
}

double offdiag_norm(const Mat3& a) {
  return std::sqrt(2.0 * (a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2)));
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

Vec3 centroid(const PointCloud& cloud) {
  validate_cloud(cloud);
  CompensatedSum sx, sy, sz;
  for (const Vec3& p : cloud.points) {
    sx.add(p.x());
    sy.add(p.y());
    sz.add(p.z());
  }
  const double n = static_cast<double>(cloud.size());
  return Vec3(sx.value() / n, sy.value() / n, sz.value() / n);
}

CenterResult center(const PointCloud& cloud) {
  CenterResult out;
  out.centroid = centroid(cloud);
  out.cloud.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.cloud.points.push_back(p - out.centroid);
  return out;
}

Mat3 covariance(const PointCloud& centered) {
  validate_cloud(centered);
  if (centered.size() < 2) throw InsufficientPoints(2, centered.size());

  // Six independent compensated sums, upper triangle.
  CompensatedSum sxx, sxy, sxz, syy, syz, szz;
  for (const Vec3& p : centered.points) {
    sxx.add(p.x() * p.x());
    sxy.add(p.x() * p.y());
    sxz.add(p.x() * p.z());
    syy.add(p.y() * p.y());
    syz.add(p.y() * p.z());
    szz.add(p.z() * p.z());
  }
  const double inv = 1.0 / static_cast<double>(centered.size() - 1);
  Mat3 sigma;
  sigma(0, 0) = sxx.value() * inv;
  sigma(0, 1) = sxy.value() * inv;
  sigma(0, 2) = sxz.value() * inv;
  sigma(1, 0) = sigma(0, 1);
  sigma(1, 1) = syy.value() * inv;
  sigma(1, 2) = syz.value() * inv;
  sigma(2, 0) = sigma(0, 2);
  sigma(2, 1) = sigma(1, 2);
  sigma(2, 2) = szz.value() * inv;
  return sigma;
}

EigenResult eig3_sym(const Mat3& sigma) {
  double max_abs = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) max_abs = std::max(max_abs, std::abs(sigma(i, j)));
  if (!sigma.allFinite()) throw NotSymmetric();

  double max_asym = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      max_asym = std::max(max_asym, std::abs(sigma(i, j) - sigma(j, i)));
  if (max_asym > 1e-10 * std::max(1.0, max_abs)) throw NotSymmetric();

  Mat3 a = 0.5 * (sigma + sigma.transpose());
  Mat3 v = Mat3::Identity();

  const double frob = a.norm();
  const double tol = 1e-14 * frob;
  for (int sweep = 0; sweep < 50; ++sweep) {
    if (offdiag_norm(a) <= tol) break;
    jacobi_rotate(a, v, 0, 1);
    jacobi_rotate(a, v, 0, 2);
    jacobi_rotate(a, v, 1, 2);
  }

  std::array<double, 3> lam{a(0, 0), a(1, 1), a(2, 2)};
  std::array<int, 3> order{0, 1, 2};

  // Round-off on PSD inputs: tiny negatives are zero.
  for (double& l : lam)
    if (l >= -1e-12 && l < 0.0) l = 0.0;

  // Descending sort, stable under near-ties: an element moves ahead of
  // another only if strictly larger by more than eps_abs. Three elements,
  // insertion style, so the comparison never needs to be a strict weak order.
  constexpr double kTie = 1e-12;
  auto ahead = [&](int i, int j) { return lam[i] > lam[j] + kTie; };
  if (ahead(order[1], order[0])) std::swap(order[0], order[1]);
  if (ahead(order[2], order[1])) {
    std::swap(order[1], order[2]);
    if (ahead(order[1], order[0])) std::swap(order[0], order[1]);
  }

  EigenResult out;
  for (int k = 0; k < 3; ++k) {
    out.eigenvalues[k] = lam[order[k]];
    out.basis.col(k) = v.col(order[k]);
  }

  // Deterministic column signs: the entry of largest magnitude is positive
  // (first such entry on exact ties). Disambiguation overrides these.
  for (int k = 0; k < 3; ++k) {
    int arg = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(out.basis(i, k)) > std::abs(out.basis(arg, k))) arg = i;
    if (out.basis(arg, k) < 0.0) out.basis.col(k) = -out.basis.col(k);
  }

  out.spectral_gaps[0] = out.eigenvalues[0] - out.eigenvalues[1];
  out.spectral_gaps[1] = out.eigenvalues[1] - out.eigenvalues[2];
  return out;
}

ScoreResult score_phi_with_weight(const Vec3& v, const PointCloud& centered,
                                  ScoreKind kind, double eps_abs) {
  validate_cloud(centered);
  if (std::abs(v.norm() - 1.0) > 1e-10) throw NonUnitVector();

  CompensatedSum phi_sum, weight_sum;
  for (const Vec3& p : centered.points) {
    const double r2 = p.squaredNorm();
    double w;
    switch (kind) {
      case ScoreKind::SQUARED_NORM:
        w = r2;
        break;
      case ScoreKind::QUARTIC_NORM:
        w = r2 * r2;
        break;
      case ScoreKind::INVERSE_NORM: {
        const double r = std::sqrt(r2);
        if (r < eps_abs) continue;  // unbounded weight, skip
        w = 1.0 / r;
        break;
      }
      default:
        throw InvalidParam("unknown score kind");
    }
    const int s = sign_of(p.dot(v));
    phi_sum.add(w * static_cast<double>(s));
    weight_sum.add(w);
  }
  return {phi_sum.value(), weight_sum.value()};
}

double score_phi(const Vec3& v, const PointCloud& centered, ScoreKind kind,
                 double eps_abs) {
  return score_phi_with_weight(v, centered, kind, eps_abs).phi;
}

DegeneracyReport make_degeneracy_report(const EigenResult& eig, double phi1, double phi2,
                                        double total_weight,
                                        const DegeneracyThresholds& thresholds) {
  DegeneracyReport report;

  const double scale = std::max(eig.eigenvalues[0], thresholds.eps_abs);
  report.gap_ratio_12 = eig.spectral_gaps[0] / scale;
  report.gap_ratio_23 = eig.spectral_gaps[1] / scale;
  report.spectrum_simple = report.gap_ratio_12 >= thresholds.gap_rel_min &&
                           report.gap_ratio_23 >= thresholds.gap_rel_min;

  const double wscale = std::max(total_weight, thresholds.eps_abs);
  report.phi_margin_1 = std::abs(phi1) / wscale;
  report.phi_margin_2 = std::abs(phi2) / wscale;
  report.phi_nondegenerate = report.phi_margin_1 >= thresholds.phi_rel_min &&
                             report.phi_margin_2 >= thresholds.phi_rel_min;

  if (!report.spectrum_simple || !report.phi_nondegenerate) {
    report.verdict = Verdict::DEGENERATE;
  } else {
    const double gap_warn = thresholds.gap_rel_min * thresholds.warn_factor;
    const double phi_warn = thresholds.phi_rel_min * thresholds.warn_factor;
    const bool near = report.gap_ratio_12 < gap_warn || report.gap_ratio_23 < gap_warn ||
                      report.phi_margin_1 < phi_warn || report.phi_margin_2 < phi_warn;
    report.verdict = near ? Verdict::NEAR_DEGENERATE : Verdict::OK;
  }
  return report;
}

DisambiguationResult disambiguate(const EigenResult& eig, const PointCloud& centered,
                                  ScoreKind kind, const DegeneracyThresholds& thresholds) {
  DisambiguationResult out;

  const ScoreResult s1 = score_phi_with_weight(eig.basis.col(0), centered, kind,
                                               thresholds.eps_abs);
  const ScoreResult s2 = score_phi_with_weight(eig.basis.col(1), centered, kind,
                                               thresholds.eps_abs);
  out.phi_values = {s1.phi, s2.phi};

  // sign phi, with +1 fallback only when the score vanished exactly; the
  // report then says the choice was arbitrary.
  out.signs[0] = s1.phi == 0.0 ? 1 : sign_of(s1.phi);
  out.signs[1] = s2.phi == 0.0 ? 1 : sign_of(s2.phi);

  // Right-hand rule: the third sign makes det(basis) = +1 given the first
  // two. det of an orthonormal eigenbasis is +-1 up to round-off.
  const double det = eig.basis.determinant();
  const int det_sign = det >= 0.0 ? 1 : -1;
  out.signs[2] = det_sign * out.signs[0] * out.signs[1];

  out.basis = eig.basis;
  for (int k = 0; k < 3; ++k)
    if (out.signs[k] < 0) out.basis.col(k) = -out.basis.col(k);

  out.report = make_degeneracy_report(eig, s1.phi, s2.phi, s1.total_weight, thresholds);
  return out;
}

CanonicalResult canonicalize(const PointCloud& cloud, ScoreKind kind,
                             const DegeneracyThresholds& thresholds) {
  validate_cloud(cloud);
  if (cloud.size() < 3) throw InsufficientPoints(3, cloud.size());

  CenterResult centered = center(cloud);
  const Mat3 sigma = covariance(centered.cloud);
  const EigenResult eig = eig3_sym(sigma);
  const DisambiguationResult dis = disambiguate(eig, centered.cloud, kind, thresholds);

  CanonicalResult out;
  out.basis = dis.basis;
  out.centroid = centered.centroid;
  out.signs = dis.signs;
  out.phi_values = dis.phi_values;
  out.gaps = eig.spectral_gaps;
  out.report = dis.report;

  // Row i of the canonical cloud is E^T (x_i - mu): coordinates of the
  // centered point in the disambiguated eigenbasis.
  out.canonical.points.reserve(cloud.size());
  const Mat3 bt = dis.basis.transpose();
  for (const Vec3& p : centered.cloud.points) out.canonical.points.push_back(bt * p);
  return out;
}

DegeneracyReport degeneracy_check(const PointCloud& cloud, ScoreKind kind,
                                  const DegeneracyThresholds& thresholds) {
  validate_cloud(cloud);
  if (cloud.size() < 3) throw InsufficientPoints(3, cloud.size());

  CenterResult centered = center(cloud);
  const Mat3 sigma = covariance(centered.cloud);
  const EigenResult eig = eig3_sym(sigma);
  return disambiguate(eig, centered.cloud, kind, thresholds).report;
}

}  // namespace ppc
