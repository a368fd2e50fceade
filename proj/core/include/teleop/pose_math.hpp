#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string_view>

namespace teleop {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(Vec3 a, Vec3 b) { return (a - b).norm(); }

/// Roll about X, pitch about Y, yaw about Z, composed as extrinsic
/// fixed-axis X-Y-Z (R = Rz(yaw) * Ry(pitch) * Rx(roll)).
struct Rpy {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  friend constexpr bool operator==(Rpy, Rpy) = default;
  bool finite() const { return std::isfinite(roll) && std::isfinite(pitch) && std::isfinite(yaw); }
};

/// Unit quaternion kept in canonical sign (w >= 0, ties broken on the
/// first nonzero vector component) so that equality is well defined.
class Quat {
 public:
  /// Identity rotation.
  constexpr Quat() = default;

  /// Normalizes and canonicalizes. Throws DomainError for zero-norm or
  /// non-finite input.
  static Quat from_wxyz(double w, double x, double y, double z);

  static constexpr Quat identity() { return Quat{}; }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  Quat operator*(const Quat& rhs) const;
  Quat conjugate() const;

  friend constexpr bool operator==(const Quat&, const Quat&) = default;

 private:
  constexpr Quat(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) {}

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Rotation angle (radians, in [0, pi]) between two orientations.
double geodesic_distance(const Quat& a, const Quat& b);

/// Spherical interpolation from a toward b; t in [0, 1].
Quat slerp(const Quat& a, const Quat& b, double t);

struct RpyConversion {
  Rpy rpy;
  // Set when |pitch| is within kGimbalTolerance of pi/2. The whole twist
  // is then assigned to roll and yaw is fixed to 0.
  bool gimbal_locked = false;
};

inline constexpr double kGimbalTolerance = 1e-6;

/// Maps any finite angle into [-pi, pi): (delta + pi) mod 2pi - pi with a
/// floored modulus, so +pi maps to -pi.
double wrap_angle(double delta);

Rpy wrap(const Rpy& r);

RpyConversion quat_to_rpy(const Quat& q);
Quat rpy_to_quat(const Rpy& r);

/// Row-major 3x3 matrix taking phone-frame axes to robot-base axes, with a
/// uniform scale applied to the phone delta before mapping.
struct AxisMap {
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  double scale = 1.0;

  static AxisMap identity(double scale = 1.0);
  // Phone held in landscape facing the robot: phone forward (-Z) drives
  // robot +X, phone right (+X) drives robot -Y, phone up (+Y) drives +Z.
  static AxisMap landscape(double scale = 1.0);
  // Looks up "identity" or "landscape". Throws std::invalid_argument.
  static AxisMap preset(std::string_view name, double scale = 1.0);

  Vec3 apply(Vec3 v) const;
  // Full rank and positive finite scale.
  bool valid() const;
  // Every row and column has exactly one entry of magnitude 1.
  bool is_signed_permutation() const;
};

/// r_initial + M * (dp * S).
Vec3 map_phone_delta(Vec3 dp, const AxisMap& map, Vec3 r_initial);

/// Per-component wrap_angle(current - reference).
Rpy rotation_delta(const Rpy& reference, const Rpy& current);

inline constexpr double deg_to_rad(double deg) { return deg * (kPi / 180.0); }
inline constexpr double rad_to_deg(double rad) { return rad * (180.0 / kPi); }

}  // namespace teleop
