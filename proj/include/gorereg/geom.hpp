#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <numbers>
#include <stdexcept>

namespace gorereg {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

/// Absolute slack used by every angular comparison (radians).
inline constexpr double kAngleTol = 1e-9;

/// Absolute slack used by Euclidean consensus tests (scene units).
inline constexpr double kDistTol = 1e-9;

/// Tolerance on ||v|| = 1 for operations that require unit vectors.
inline constexpr double kUnitTol = 1e-9;

/// Raised when an argument violates an operation's precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a geometric construction has no well-defined answer
/// (parallel vectors, collinear samples, rank-deficient fits).
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool is_unit(const Vec3& v, double tol = kUnitTol);

/// Element of SO(3). Stored as an orthonormal matrix.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Validates orthonormality and det = +1 within 1e-9.
  static Rotation from_matrix(const Mat3& m);

  /// exp([v]x): rotation about v/|v| by |v| radians.
  static Rotation from_rotation_vector(const Vec3& v);

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, 0); }

  Rotation inverse() const { return Rotation(m_.transpose(), 0); }

  /// Rotation vector (axis * angle) with angle in [0, pi].
  Vec3 log() const;

  /// Rotation angle in [0, pi].
  double angle() const;

  const Mat3& matrix() const { return m_; }

 private:
  Rotation(const Mat3& m, int /*trusted*/) : m_(m) {}
  Mat3 m_;
};

struct RigidTransform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }

  /// (this * other).apply(x) == this->apply(other.apply(x))
  RigidTransform operator*(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  RigidTransform inverse() const {
    Rotation r = rotation.inverse();
    return {r, -(r * translation)};
  }
};

/// Set of unit vectors within `radius` of `center`.
struct SphericalCap {
  Vec3 center;
  double radius = 0.0;

  bool contains(const Vec3& p) const;
};

/// Right-handed rotation about a unit axis.
Rotation rotation_from_axis_angle(const Vec3& axis, double angle);

/// Unsigned angle in [0, pi]; atan2(|u x v|, u . v).
double angle_between(const Vec3& u, const Vec3& v);

/// Geodesic distance |log(R1 R2^T)| in [0, pi].
double rotation_distance(const Rotation& r1, const Rotation& r2);

/// Rotation taking x onto y about x × y. Antipodal inputs rotate by pi about
/// the fallback axis (see fallback_orthogonal).
Rotation minimal_geodesic_rotation(const Vec3& x, const Vec3& y);

/// Unit vector orthogonal to `v`: normalized projection of +z onto the plane
/// orthogonal to v, or of +y when v is nearly parallel to z.
Vec3 fallback_orthogonal(const Vec3& v);

/// Orthonormal right-handed frame (e1, e2, pole) with e1 × e2 = pole.
struct TangentFrame {
  Vec3 e1;
  Vec3 e2;
  Vec3 pole;
};

TangentFrame tangent_frame(const Vec3& pole);
TangentFrame tangent_frame(const Vec3& pole, const Vec3& anchor);

struct SphericalCoords {
  double azimuth = 0.0;      // (-pi, pi]
  double inclination = 0.0;  // [0, pi]
};

/// Azimuth/inclination of p about frame.pole. Rotating p about the pole by
/// theta increases the azimuth by theta (mod 2 pi).
SphericalCoords spherical_coords(const Vec3& p, const TangentFrame& frame);
SphericalCoords spherical_coords(const Vec3& p, const Vec3& pole);

Vec3 from_spherical(const SphericalCoords& c, const TangentFrame& frame);

/// Maps an angle to (-pi, pi].
double wrap_angle(double a);

}  // namespace gorereg
