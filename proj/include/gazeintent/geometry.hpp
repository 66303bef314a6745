#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace gazeintent {

using Point2 = Eigen::Vector2d;  // pixels
using Point3 = Eigen::Vector3d;  // meters

/// Named reference frames.
///   RobotBase     r   robot base
///   RobotCamera   c   robot RGB-D camera
///   GlassesCamera gc  user-centric camera on the glasses (time-indexed)
///   GlassesPupil  gp  gaze origin at the glasses' bridge midpoint
///   SlamWorld     s   world frame of the head-pose tracker
enum class FrameName { RobotBase, RobotCamera, GlassesCamera, GlassesPupil, SlamWorld };

std::string_view frame_symbol(FrameName name) noexcept;
std::optional<FrameName> frame_from_symbol(std::string_view symbol) noexcept;

struct FrameId {
  FrameName name = FrameName::RobotBase;
  std::optional<double> timestamp;

  static FrameId at(FrameName name, double t);
  static FrameId fixed(FrameName name) { return FrameId{name, std::nullopt}; }

  /// Same name, and equal timestamps when both carry one. An untimestamped
  /// frame is a static frame and links to any instant of the same name.
  bool links_to(const FrameId& other) const noexcept;
  bool operator==(const FrameId& other) const noexcept;
  std::string str() const;
};

/// Rigid transform mapping coordinates in `from` to coordinates in `to`.
class Pose {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;
  static constexpr double kIngestTolerance = 1e-6;

  /// Requires an orthonormal rotation with det +1 (within 1e-9).
  Pose(FrameId from, FrameId to, const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Pose identity(FrameId frame);

  /// Accepts rotations up to 1e-6 off orthonormal and snaps them onto SO(3)
  /// by polar decomposition. Anything worse throws InvalidPose.
  static Pose ingest(FrameId from, FrameId to, const Eigen::Matrix3d& rotation,
                     const Eigen::Vector3d& translation);

  const FrameId& from() const noexcept { return from_; }
  const FrameId& to() const noexcept { return to_; }
  const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  const Eigen::Vector3d& translation() const noexcept { return translation_; }

  Eigen::Matrix4d matrix() const;

 private:
  struct Unchecked {};
  Pose(Unchecked, FrameId from, FrameId to, const Eigen::Matrix3d& rotation,
       const Eigen::Vector3d& translation);

  friend Pose compose(const Pose& a, const Pose& b);
  friend Pose invert(const Pose& p);

  FrameId from_;
  FrameId to_;
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Frobenius norm of R^T R - I.
double orthonormality_error(const Eigen::Matrix3d& rotation);

/// a * b: maps b.from() to a.to(). Throws FrameMismatch unless a.from() links to b.to().
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);
Point3 transform_point(const Pose& pose, const Point3& p);

struct Intrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  /// Throws InvalidIntrinsics on fx, fy <= 0 or a principal point outside the image.
  void validate() const;
  bool contains(const Point2& p) const noexcept;
};

inline constexpr double kMinDepth = 1e-9;

/// Pinhole projection with explicit perspective divide. Throws BehindCamera for z <= 1e-9.
Point2 project(const Intrinsics& k, const Point3& p);
Point3 unproject(const Intrinsics& k, const Point2& pixel, double depth);

/// Gaze point sampled at t_{i+n} in the pupil frame, expressed on the glasses
/// image at t_i:  K * (world_T_gc(t_i))^-1 * world_T_gc(t_{i+n}) * gc_T_gp * gaze.
Point2 reproject_gaze(const Point3& gaze_pupil, const Pose& camera_from_pupil,
                      const Pose& world_from_camera_ti, const Pose& world_from_camera_tin,
                      const Intrinsics& k);

/// A pupil-frame gaze ray given as a direction is placed at this range.
inline constexpr double kNominalGazeRange = 1.0;

Point3 gaze_point_from_direction(const Eigen::Vector3d& direction,
                                 double depth = kNominalGazeRange);

}  // namespace gazeintent
