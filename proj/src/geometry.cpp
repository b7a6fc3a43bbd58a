#include "roadwatch/geometry.hpp"

#include <cmath>

namespace roadwatch {

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_,
                                   double cy_, int width_, int height_)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(width_), height(height_) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ConfigError("camera intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ConfigError("camera intrinsics: image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw ConfigError(
        "camera intrinsics: principal point must lie inside the image");
  }
}

Matrix3 CameraIntrinsics::matrix() const {
  Matrix3 k;
  k << fx, 0.0, cx,  //
      0.0, fy, cy,   //
      0.0, 0.0, 1.0;
  return k;
}

Matrix3 CameraIntrinsics::inverse_matrix() const {
  Matrix3 k_inv;
  k_inv << 1.0 / fx, 0.0, -cx / fx,  //
      0.0, 1.0 / fy, -cy / fy,       //
      0.0, 0.0, 1.0;
  return k_inv;
}

TranslationDirection::TranslationDirection(const Vector3& direction) {
  const double norm = direction.norm();
  if (!(norm > 1e-12) || !std::isfinite(norm)) {
    throw DomainError("translation direction must be a nonzero finite vector");
  }
  t_ = direction / norm;
}

PitchAngle::PitchAngle(double radians) : radians_(radians) {
  if (!std::isfinite(radians) || std::abs(radians) >= M_PI / 2.0) {
    throw DomainError("pitch angle must satisfy |phi| < pi/2");
  }
}

Matrix3 skew(const Vector3& v) {
  Matrix3 s;
  s << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return s;
}

Matrix3 pitch_rotation(PitchAngle phi) {
  const double c = std::cos(phi.radians());
  const double s = std::sin(phi.radians());
  Matrix3 r;
  r << 1.0, 0.0, 0.0,  //
      0.0, c, -s,      //
      0.0, s, c;
  return r;
}

Matrix3 fundamental_from_pitch(const CameraIntrinsics& intr,
                               const TranslationDirection& t, PitchAngle phi) {
  const Matrix3 k_inv = intr.inverse_matrix();
  return -k_inv.transpose() * skew(t.vec()) * pitch_rotation(phi) * k_inv;
}

double sampson_error(const PointPair& pair, const Matrix3& F) {
  const Vector3 p0(pair.p0.x(), pair.p0.y(), 1.0);
  const Vector3 p1(pair.p1.x(), pair.p1.y(), 1.0);
  const Vector3 f_p0 = F * p0;
  const Vector3 ft_p1 = F.transpose() * p1;
  const double numerator = p1.dot(f_p0);
  const double denominator = f_p0.x() * f_p0.x() + f_p0.y() * f_p0.y() +
                             ft_p1.x() * ft_p1.x() + ft_p1.y() * ft_p1.y();
  if (denominator < kSampsonDenominatorFloor) {
    throw DegenerateGeometry("point pair at the epipole");
  }
  return numerator * numerator / denominator;
}

}  // namespace roadwatch
