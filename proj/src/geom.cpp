#include "gorereg/geom.hpp"

#include <algorithm>
#include <cmath>

namespace gorereg {

bool is_unit(const Vec3& v, double tol) { return std::abs(v.norm() - 1.0) <= tol; }

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!m.allFinite()) throw InputError("rotation matrix has non-finite entries");
  const double ortho_err = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9 || std::abs(m.determinant() - 1.0) > 1e-9) {
    throw InputError("matrix is not a proper rotation");
  }
  return Rotation(m, 0);
}

Rotation Rotation::from_rotation_vector(const Vec3& v) {
  const double angle = v.norm();
  if (angle == 0.0) return Rotation();
  return Rotation(Eigen::AngleAxisd(angle, v / angle).toRotationMatrix(), 0);
}

Vec3 Rotation::log() const {
  Eigen::Quaterniond q(m_);
  q.normalize();
  Vec3 v = q.vec();
  double w = q.w();
  if (w < 0.0) {
    v = -v;
    w = -w;
  }
  const double s = v.norm();
  if (s == 0.0) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, w);
  return v * (angle / s);
}

double Rotation::angle() const { return log().norm(); }

bool SphericalCap::contains(const Vec3& p) const {
  return angle_between(p, center) <= radius + kAngleTol;
}

Rotation rotation_from_axis_angle(const Vec3& axis, double angle) {
  if (!is_unit(axis)) throw InputError("rotation axis must have unit norm");
  return Rotation::from_rotation_vector(axis.normalized() * angle);
}

double angle_between(const Vec3& u, const Vec3& v) {
  if (u.squaredNorm() == 0.0 || v.squaredNorm() == 0.0) {
    throw InputError("angle_between: zero vector");
  }
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

double rotation_distance(const Rotation& r1, const Rotation& r2) {
  return (r1 * r2.inverse()).angle();
}

Vec3 fallback_orthogonal(const Vec3& v) {
  const Vec3 n = v.normalized();
  Vec3 dir = Vec3::UnitZ();
  Vec3 proj = dir - n * n.dot(dir);
  if (proj.norm() < 1e-6) {
    dir = Vec3::UnitY();
    proj = dir - n * n.dot(dir);
  }
  return proj.normalized();
}

Rotation minimal_geodesic_rotation(const Vec3& x, const Vec3& y) {
  const Vec3 c = x.cross(y);
  const double s = c.norm();
  const double d = x.dot(y);
  if (s < 1e-15) {
    if (d > 0.0) return Rotation();
    return rotation_from_axis_angle(fallback_orthogonal(x), kPi);
  }
  return Rotation::from_rotation_vector(c * (std::atan2(s, d) / s));
}

TangentFrame tangent_frame(const Vec3& pole) {
  const Vec3 n = pole.normalized();
  const Vec3 e1 = fallback_orthogonal(n);
  return {e1, n.cross(e1), n};
}

TangentFrame tangent_frame(const Vec3& pole, const Vec3& anchor) {
  const Vec3 n = pole.normalized();
  const Vec3 proj = anchor - n * n.dot(anchor);
  if (proj.norm() < 1e-12) throw DegenerateError("tangent frame anchor is parallel to the pole");
  const Vec3 e1 = proj.normalized();
  return {e1, n.cross(e1), n};
}

SphericalCoords spherical_coords(const Vec3& p, const TangentFrame& f) {
  const double a = p.dot(f.e1);
  const double b = p.dot(f.e2);
  const double c = p.dot(f.pole);
  const double r = std::sqrt(a * a + b * b);
  SphericalCoords out;
  out.inclination = std::atan2(r, c);
  if (r > 0.0) {
    const double az = std::atan2(b, a);
    out.azimuth = az <= -kPi ? kPi : az;
  }
  return out;
}

SphericalCoords spherical_coords(const Vec3& p, const Vec3& pole) {
  return spherical_coords(p, tangent_frame(pole));
}

Vec3 from_spherical(const SphericalCoords& c, const TangentFrame& f) {
  const double s = std::sin(c.inclination);
  return s * (std::cos(c.azimuth) * f.e1 + std::sin(c.azimuth) * f.e2) +
         std::cos(c.inclination) * f.pole;
}

double wrap_angle(double a) {
  if (a > -kPi && a <= kPi) return a;
  if (a > kPi && a <= 3.0 * kPi) return a - 2.0 * kPi;
  if (a > -3.0 * kPi && a <= -kPi) return a + 2.0 * kPi;
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

}  // namespace gorereg
