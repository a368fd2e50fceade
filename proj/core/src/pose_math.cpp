#include "teleop/pose_math.hpp"

#include <algorithm>

namespace teleop {

Quat Quat::from_wxyz(double w, double x, double y, double z) {
  if (!(std::isfinite(w) && std::isfinite(x) && std::isfinite(y) && std::isfinite(z))) {
    throw DomainError("quaternion has non-finite component");
  }
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (n == 0.0) throw DomainError("quaternion has zero norm");
  w /= n;
  x /= n;
  y /= n;
  z /= n;
  bool flip = w < 0.0;
  if (w == 0.0) {
    const double first = x != 0.0 ? x : (y != 0.0 ? y : z);
    flip = first < 0.0;
  }
  if (flip) {
    w = -w;
    x = -x;
    y = -y;
    z = -z;
  }
  // A negative zero would compare equal anyway, but keep it out of
  // serialized output.
  return Quat(w + 0.0, x + 0.0, y + 0.0, z + 0.0);
}

Quat Quat::operator*(const Quat& r) const {
  return from_wxyz(w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
                   w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
                   w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
                   w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_);
}

Quat Quat::conjugate() const { return from_wxyz(w_, -x_, -y_, -z_); }

double geodesic_distance(const Quat& a, const Quat& b) {
  // 2*acos(dot) loses precision near identity; the atan2 form does not.
  const Quat d = a.conjugate() * b;
  const double vec = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
  return 2.0 * std::atan2(vec, std::abs(d.w()));
}

Quat slerp(const Quat& a, const Quat& b, double t) {
  double bw = b.w(), bx = b.x(), by = b.y(), bz = b.z();
  double dot = a.w() * bw + a.x() * bx + a.y() * by + a.z() * bz;
  if (dot < 0.0) {
    dot = -dot;
    bw = -bw;
    bx = -bx;
    by = -by;
    bz = -bz;
  }
  if (dot > 0.9995) {
    return Quat::from_wxyz(a.w() + t * (bw - a.w()), a.x() + t * (bx - a.x()),
                           a.y() + t * (by - a.y()), a.z() + t * (bz - a.z()));
  }
  const double theta = std::acos(std::clamp(dot, -1.0, 1.0));
  const double s = std::sin(theta);
  const double wa = std::sin((1.0 - t) * theta) / s;
  const double wb = std::sin(t * theta) / s;
  return Quat::from_wxyz(wa * a.w() + wb * bw, wa * a.x() + wb * bx, wa * a.y() + wb * by,
                         wa * a.z() + wb * bz);
}

double wrap_angle(double delta) {
  if (!std::isfinite(delta)) throw DomainError("wrap_angle: non-finite angle");
  // fmod is exact, so the only rounding is the single +-2pi shift.
  double r = std::fmod(delta, kTwoPi);
  if (r >= kPi) {
    r -= kTwoPi;
  } else if (r < -kPi) {
    r += kTwoPi;
  }
  if (r >= kPi) r = -kPi;
  return r;
}

Rpy wrap(const Rpy& r) { return {wrap_angle(r.roll), wrap_angle(r.pitch), wrap_angle(r.yaw)}; }

RpyConversion quat_to_rpy(const Quat& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double r00 = 1.0 - 2.0 * (y * y + z * z);
  const double r10 = 2.0 * (w * z + x * y);
  const double r20 = 2.0 * (x * z - w * y);
  const double r21 = 2.0 * (w * x + y * z);
  const double r22 = 1.0 - 2.0 * (x * x + y * y);

  RpyConversion out;
  const double pitch = std::atan2(-r20, std::hypot(r00, r10));
  if (std::abs(std::abs(pitch) - kPi / 2.0) < kGimbalTolerance) {
    const double r01 = 2.0 * (x * y - w * z);
    const double r11 = 1.0 - 2.0 * (x * x + z * z);
    const double roll = pitch > 0.0 ? std::atan2(r01, r11) : std::atan2(-r01, r11);
    out.rpy = {wrap_angle(roll), pitch, 0.0};
    out.gimbal_locked = true;
    return out;
  }
  out.rpy = {wrap_angle(std::atan2(r21, r22)), wrap_angle(pitch),
             wrap_angle(std::atan2(r10, r00))};
  return out;
}

Quat rpy_to_quat(const Rpy& r) {
  if (!r.finite()) throw DomainError("rpy_to_quat: non-finite angle");
  const double cr = std::cos(r.roll / 2), sr = std::sin(r.roll / 2);
  const double cp = std::cos(r.pitch / 2), sp = std::sin(r.pitch / 2);
  const double cy = std::cos(r.yaw / 2), sy = std::sin(r.yaw / 2);
  return Quat::from_wxyz(cr * cp * cy + sr * sp * sy, sr * cp * cy - cr * sp * sy,
                         cr * sp * cy + sr * cp * sy, cr * cp * sy - sr * sp * cy);
}

AxisMap AxisMap::identity(double scale) {
  AxisMap a;
  a.scale = scale;
  return a;
}

AxisMap AxisMap::landscape(double scale) {
  AxisMap a;
  a.m = {{{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}}};
  a.scale = scale;
  return a;
}

AxisMap AxisMap::preset(std::string_view name, double scale) {
  if (name == "identity") return identity(scale);
  if (name == "landscape") return landscape(scale);
  throw std::invalid_argument("unknown axis map preset: " + std::string(name));
}

Vec3 AxisMap::apply(Vec3 v) const {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
          m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

bool AxisMap::valid() const {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return std::isfinite(det) && det != 0.0 && std::isfinite(scale) && scale > 0.0;
}

bool AxisMap::is_signed_permutation() const {
  for (int i = 0; i < 3; ++i) {
    int row_nz = 0, col_nz = 0;
    for (int j = 0; j < 3; ++j) {
      if (m[i][j] != 0.0) {
        if (std::abs(m[i][j]) != 1.0) return false;
        ++row_nz;
      }
      if (m[j][i] != 0.0) ++col_nz;
    }
    if (row_nz != 1 || col_nz != 1) return false;
  }
  return true;
}

Vec3 map_phone_delta(Vec3 dp, const AxisMap& map, Vec3 r_initial) {
  return r_initial + map.apply(dp * map.scale);
}

Rpy rotation_delta(const Rpy& reference, const Rpy& current) {
  return {wrap_angle(current.roll - reference.roll), wrap_angle(current.pitch - reference.pitch),
          wrap_angle(current.yaw - reference.yaw)};
}

}  // namespace teleop
