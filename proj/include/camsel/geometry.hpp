#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "camsel/detail/text_io.hpp"
#include "camsel/errors.hpp"

namespace camsel {

inline constexpr double kRadToDeg = 180.0 / M_PI;

inline bool is_rotation(const Eigen::Matrix3d& r, double tol = 1e-9) {
  if (!r.allFinite()) return false;
  const Eigen::Matrix3d should_be_identity = r.transpose() * r;
  return (should_be_identity - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

// Rigid transform. A pose named `a_from_b` maps points expressed in frame b
// into frame a; localization outputs are world-from-body.
class Pose {
 public:
  Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
      : rotation_(rotation), translation_(translation) {
    if (!is_rotation(rotation_)) throw DomainError("pose rotation is not a proper orthonormal matrix");
    if (!translation_.allFinite()) throw DomainError("pose translation is not finite");
  }

  static Pose identity() { return Pose{}; }

  static Pose from_axis_angle(const Eigen::Vector3d& axis_angle, const Eigen::Vector3d& translation) {
    const double angle = axis_angle.norm();
    if (angle == 0.0) return Pose(Eigen::Matrix3d::Identity(), translation);
    return Pose(Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix(), translation);
  }

  const Eigen::Matrix3d& rotation() const noexcept { return rotation_; }
  const Eigen::Vector3d& translation() const noexcept { return translation_; }

  Eigen::Vector3d apply(const Eigen::Vector3d& point) const { return rotation_ * point + translation_; }

  bool operator==(const Pose& other) const {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

// Applying the result equals applying b, then a.
inline Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

inline Pose inverse(const Pose& p) {
  const Eigen::Matrix3d rt = p.rotation().transpose();
  return Pose(rt, -rt * p.translation());
}

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

class CameraModel {
 public:
  CameraModel(int camera_id, const Intrinsics& intrinsics, int width, int height, const Pose& body_from_camera)
      : id_(camera_id), k_(intrinsics), width_(width), height_(height), extrinsic_(body_from_camera) {
    if (camera_id < 0) throw DomainError("camera id must be non-negative");
    if (width <= 0 || height <= 0) throw DomainError("image size must be positive");
    if (!(k_.fx > 0.0) || !(k_.fy > 0.0)) throw DomainError("focal lengths must be positive");
    if (!(k_.cx >= 0.0 && k_.cx < width) || !(k_.cy >= 0.0 && k_.cy < height))
      throw DomainError("principal point must lie inside the image");
  }

  int id() const noexcept { return id_; }
  const Intrinsics& intrinsics() const noexcept { return k_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const Pose& extrinsic() const noexcept { return extrinsic_; }

  bool in_bounds(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.x() < width_ && px.y() >= 0.0 && px.y() < height_;
  }

  // Unit-depth normalized ray through a pixel, camera frame.
  Eigen::Vector3d ray(const Eigen::Vector2d& px) const {
    return {(px.x() - k_.cx) / k_.fx, (px.y() - k_.cy) / k_.fy, 1.0};
  }

  bool operator==(const CameraModel& o) const {
    return id_ == o.id_ && k_.fx == o.k_.fx && k_.fy == o.k_.fy && k_.cx == o.k_.cx && k_.cy == o.k_.cy &&
           width_ == o.width_ && height_ == o.height_ && extrinsic_ == o.extrinsic_;
  }

 private:
  int id_;
  Intrinsics k_;
  int width_;
  int height_;
  Pose extrinsic_;
};

class Rig {
 public:
  explicit Rig(std::vector<CameraModel> cameras) : cameras_(std::move(cameras)) {
    if (cameras_.empty()) throw DomainError("rig needs at least one camera");
    for (std::size_t i = 0; i < cameras_.size(); ++i)
      if (cameras_[i].id() != static_cast<int>(i))
        throw DomainError("rig camera ids must be contiguous from 0 in order");
  }

  std::size_t size() const noexcept { return cameras_.size(); }
  const CameraModel& camera(int id) const { return cameras_.at(static_cast<std::size_t>(id)); }
  const std::vector<CameraModel>& cameras() const noexcept { return cameras_; }

  bool operator==(const Rig& o) const { return cameras_ == o.cameras_; }

 private:
  std::vector<CameraModel> cameras_;
};

struct PoseError {
  double translation_err = 0.0;  // meters
  double rotation_err = 0.0;     // degrees, [0, 180]
};

// Geodesic angle between two rotations in degrees: arccos((trace(R1 R2^T) - 1) / 2),
// evaluated as atan2(sin, cos) to keep precision near zero.
inline double rotation_angle_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const Eigen::Matrix3d rel = a * b.transpose();
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d axis(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0), rel(1, 0) - rel(0, 1));
  const double s = std::min(axis.norm() / 2.0, 1.0);
  return std::atan2(s, c) * kRadToDeg;
}

inline PoseError pose_error(const Pose& estimate, const Pose& truth) {
  return {(estimate.translation() - truth.translation()).norm(),
          rotation_angle_deg(estimate.rotation(), truth.rotation())};
}

// Pinhole projection of a world point seen by `cam` mounted on a body at
// `body_pose` (world-from-body). nullopt when the point is not in front of
// the camera.
inline std::optional<Eigen::Vector2d> project(const CameraModel& cam, const Pose& body_pose,
                                              const Eigen::Vector3d& world_point) {
  if (!world_point.allFinite()) throw DomainError("cannot project a non-finite point");
  const Pose camera_from_world = inverse(compose(body_pose, cam.extrinsic()));
  const Eigen::Vector3d pc = camera_from_world.apply(world_point);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const auto& k = cam.intrinsics();
  return Eigen::Vector2d(k.fx * pc.x() / pc.z() + k.cx, k.fy * pc.y() / pc.z() + k.cy);
}

// World point at camera-frame depth `depth` along the ray through `pixel`.
inline Eigen::Vector3d unproject(const CameraModel& cam, const Pose& body_pose, const Eigen::Vector2d& pixel,
                                 double depth) {
  const Pose world_from_camera = compose(body_pose, cam.extrinsic());
  return world_from_camera.apply(cam.ray(pixel) * depth);
}

// Poses serialize as 12 numbers: row-major rotation, then translation.
inline void write_pose(std::ostream& out, const Pose& p) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out << detail::format_double(p.rotation()(r, c)) << ' ';
  out << detail::format_double(p.translation().x()) << ' ' << detail::format_double(p.translation().y()) << ' '
      << detail::format_double(p.translation().z());
}

inline std::string pose_to_string(const Pose& p) {
  std::ostringstream os;
  write_pose(os, p);
  return os.str();
}

template <typename Range>
Pose pose_from_numbers(const Range& values) {
  if (values.size() != 12) throw DomainError("a pose needs exactly 12 numbers");
  Eigen::Matrix3d r;
  Eigen::Vector3d t;
  auto it = values.begin();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = *it++;
  for (int i = 0; i < 3; ++i) t(i) = *it++;
  return Pose(r, t);
}

}  // namespace camsel
