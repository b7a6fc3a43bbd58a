// Pinhole camera model, pitch-parameterized fundamental matrix and Sampson
// error: the algebraic core of the pitch estimator.
//
// Coordinate conventions used throughout the library:
//   - image: origin top-left, x right, y DOWN (pixel convention);
//   - camera: x right, y down, z forward (right handed).
//
// fundamental_from_pitch() builds F(phi) = -K^-T [t]x R(phi) K^-1 where
// R(phi) is the rotation applied to point coordinates when mapping them
// from the frame-t camera into the frame-t+1 camera (x1 = R x0 + t_vec).
// The epipolar constraint for a correspondence p0 -> p1 is p1~' F p0~ = 0
// with p~ the homogeneous lift (x, y, 1).
//
// Note that the coordinate-transform angle is the NEGATIVE of the physical
// rotation of the camera body between the two frames. The pitch estimator
// reports body angles (nose-up positive, see pitch_estimator.hpp); this
// module is agnostic and simply evaluates the formulas above.

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "roadwatch/errors.hpp"

namespace roadwatch {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;
using Vector2 = Eigen::Vector2d;

/// Denominator below this is treated as "point at the epipole".
inline constexpr double kSampsonDenominatorFloor = 1e-20;

/// Pinhole intrinsics. Validated at construction; fields are plain data
/// afterwards.
struct CameraIntrinsics {
  double fx;
  double fy;
  double cx;
  double cy;
  int width;
  int height;

  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int width_,
                   int height_);

  /// K = [[fx,0,cx],[0,fy,cy],[0,0,1]].
  Matrix3 matrix() const;

  /// Analytic K^-1 (exact, no numeric inversion).
  Matrix3 inverse_matrix() const;
};

/// Unit forward direction of the ego motion in camera coordinates,
/// calibrated offline. Normalized at construction.
class TranslationDirection {
 public:
  explicit TranslationDirection(const Vector3& direction);

  /// (0, 0, 1): straight ahead along the optical axis.
  static TranslationDirection forward() {
    return TranslationDirection(Vector3(0.0, 0.0, 1.0));
  }

  const Vector3& vec() const { return t_; }

 private:
  Vector3 t_;
};

/// Pitch angle in radians, restricted to (-pi/2, pi/2) so tan stays finite.
class PitchAngle {
 public:
  explicit PitchAngle(double radians);

  double radians() const { return radians_; }

 private:
  double radians_;
};

/// One correspondence between consecutive frames: p0 in frame t, p1 in
/// frame t+1. Pairs with is_static == false (points on vehicles) are
/// excluded from pitch estimation.
struct PointPair {
  Vector2 p0;
  Vector2 p1;
  bool is_static = true;
};

/// All correspondences of one frame pair (t, t+1).
struct CorrespondenceSet {
  std::vector<PointPair> pairs;
};

/// Skew-symmetric matrix [v]x with [v]x w = v x w.
Matrix3 skew(const Vector3& v);

/// Rotation about the camera x axis:
/// [[1,0,0],[0,cos,-sin],[0,sin,cos]]. Orthonormal, det = 1.
Matrix3 pitch_rotation(PitchAngle phi);

/// F(phi) = -K^-T [t]x R(phi) K^-1. Rank 2, not normalized (the Sampson
/// error is invariant to the scale of F).
Matrix3 fundamental_from_pitch(const CameraIntrinsics& intr,
                               const TranslationDirection& t, PitchAngle phi);

/// First-order geometric (Sampson) error of a correspondence with respect
/// to the epipolar constraint, in squared pixels:
///   S = (p1~' F p0~)^2 / ((F p0~)_1^2 + (F p0~)_2^2 + (F' p1~)_1^2 + (F' p1~)_2^2)
/// Throws DegenerateGeometry when the denominator falls below
/// kSampsonDenominatorFloor (point at the epipole); callers drop the pair.
double sampson_error(const PointPair& pair, const Matrix3& F);

}  // namespace roadwatch
