#include "gazeintent/geometry.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "gazeintent/error.hpp"

namespace gazeintent {

namespace {

constexpr double kTimestampTolerance = 1e-9;

bool timestamps_equal(double a, double b) { return std::abs(a - b) <= kTimestampTolerance; }

bool finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

// Static frames pick up the instant of whatever they were chained onto.
FrameId carry_timestamp(const FrameId& frame, const FrameId& linked) {
  if (frame.timestamp || !linked.timestamp) return frame;
  return FrameId{frame.name, linked.timestamp};
}

}  // namespace

std::string_view frame_symbol(FrameName name) noexcept {
  switch (name) {
    case FrameName::RobotBase: return "r";
    case FrameName::RobotCamera: return "c";
    case FrameName::GlassesCamera: return "gc";
    case FrameName::GlassesPupil: return "gp";
    case FrameName::SlamWorld: return "s";
  }
  return "?";
}

std::optional<FrameName> frame_from_symbol(std::string_view symbol) noexcept {
  if (symbol == "r") return FrameName::RobotBase;
  if (symbol == "c") return FrameName::RobotCamera;
  if (symbol == "gc") return FrameName::GlassesCamera;
  if (symbol == "gp") return FrameName::GlassesPupil;
  if (symbol == "s") return FrameName::SlamWorld;
  return std::nullopt;
}

FrameId FrameId::at(FrameName name, double t) {
  if (!std::isfinite(t) || t < 0) {
    throw Error(ErrorCode::InvalidPose, "frame timestamp must be finite and non-negative");
  }
  return FrameId{name, t};
}

bool FrameId::links_to(const FrameId& other) const noexcept {
  if (name != other.name) return false;
  if (timestamp && other.timestamp) return timestamps_equal(*timestamp, *other.timestamp);
  return true;
}

bool FrameId::operator==(const FrameId& other) const noexcept {
  if (name != other.name || timestamp.has_value() != other.timestamp.has_value()) return false;
  return !timestamp || timestamps_equal(*timestamp, *other.timestamp);
}

std::string FrameId::str() const {
  std::ostringstream out;
  out << frame_symbol(name);
  if (timestamp) out << "@" << *timestamp;
  return out.str();
}

double orthonormality_error(const Eigen::Matrix3d& rotation) {
  return (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm();
}

Pose::Pose(Unchecked, FrameId from, FrameId to, const Eigen::Matrix3d& rotation,
           const Eigen::Vector3d& translation)
    : from_(from), to_(to), rotation_(rotation), translation_(translation) {}

Pose::Pose(FrameId from, FrameId to, const Eigen::Matrix3d& rotation,
           const Eigen::Vector3d& translation)
    : Pose(Unchecked{}, from, to, rotation, translation) {
  if (!finite(rotation) || !finite(translation)) {
    throw Error(ErrorCode::InvalidPose, "non-finite pose entries");
  }
  if (orthonormality_error(rotation) > kOrthonormalTolerance ||
      std::abs(rotation.determinant() - 1.0) > kOrthonormalTolerance) {
    throw Error(ErrorCode::InvalidPose, "rotation is not in SO(3)");
  }
}

Pose Pose::identity(FrameId frame) {
  return Pose(Unchecked{}, frame, frame, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
}

Pose Pose::ingest(FrameId from, FrameId to, const Eigen::Matrix3d& rotation,
                  const Eigen::Vector3d& translation) {
  if (!finite(rotation) || !finite(translation)) {
    throw Error(ErrorCode::InvalidPose, "non-finite pose entries");
  }
  const double err = orthonormality_error(rotation);
  if (err > kIngestTolerance || rotation.determinant() <= 0) {
    std::ostringstream msg;
    msg << "rotation " << from.str() << "->" << to.str() << " is off SO(3) by " << err;
    throw Error(ErrorCode::InvalidPose, msg.str());
  }
  if (err == 0.0) return Pose(Unchecked{}, from, to, rotation, translation);

  // Closest rotation in the Frobenius sense.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d snapped = svd.matrixU() * svd.matrixV().transpose();
  return Pose(from, to, snapped, translation);
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  if (!a.from().links_to(b.to())) {
    throw Error(ErrorCode::FrameMismatch,
                "cannot chain " + b.from().str() + "->" + b.to().str() + " into " +
                    a.from().str() + "->" + a.to().str());
  }
  FrameId from = b.from();
  if (!b.to().timestamp) from = carry_timestamp(from, a.from());
  FrameId to = a.to();
  if (!a.from().timestamp) to = carry_timestamp(to, b.to());
  return Pose(Pose::Unchecked{}, from, to, a.rotation_ * b.rotation_,
              a.rotation_ * b.translation_ + a.translation_);
}

Pose invert(const Pose& p) {
  Eigen::Matrix3d rt = p.rotation_.transpose();
  return Pose(Pose::Unchecked{}, p.to_, p.from_, rt, -(rt * p.translation_));
}

Point3 transform_point(const Pose& pose, const Point3& p) {
  return pose.rotation() * p + pose.translation();
}

void Intrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw Error(ErrorCode::InvalidIntrinsics, "focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidIntrinsics, "image size must be positive");
  if (!(cx >= 0 && cx < width && cy >= 0 && cy < height)) {
    throw Error(ErrorCode::InvalidIntrinsics, "principal point outside the image");
  }
}

bool Intrinsics::contains(const Point2& p) const noexcept {
  return p.x() >= 0 && p.y() >= 0 && p.x() <= width && p.y() <= height;
}

Point2 project(const Intrinsics& k, const Point3& p) {
  if (!(p.z() > kMinDepth)) {
    throw Error(ErrorCode::BehindCamera, "point has depth " + std::to_string(p.z()));
  }
  return Point2(k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy);
}

Point3 unproject(const Intrinsics& k, const Point2& pixel, double depth) {
  return Point3((pixel.x() - k.cx) / k.fx * depth, (pixel.y() - k.cy) / k.fy * depth, depth);
}

Point2 reproject_gaze(const Point3& gaze_pupil, const Pose& camera_from_pupil,
                      const Pose& world_from_camera_ti, const Pose& world_from_camera_tin,
                      const Intrinsics& k) {
  if (world_from_camera_ti.from().name != FrameName::GlassesCamera ||
      world_from_camera_tin.from().name != FrameName::GlassesCamera ||
      camera_from_pupil.from().name != FrameName::GlassesPupil) {
    throw Error(ErrorCode::FrameMismatch, "gaze chain expects gc->s head poses and a gp->gc extrinsic");
  }
  const Pose chain =
      compose(compose(invert(world_from_camera_ti), world_from_camera_tin), camera_from_pupil);
  return project(k, transform_point(chain, gaze_pupil));
}

Point3 gaze_point_from_direction(const Eigen::Vector3d& direction, double depth) {
  const double norm = direction.norm();
  if (!(norm > 0) || !std::isfinite(norm) || !(depth > 0)) {
    throw Error(ErrorCode::InvalidPose, "gaze direction must be non-zero and depth positive");
  }
  return direction / norm * depth;
}

}  // namespace gazeintent
