#pragma once

#include <array>
#include <vector>

#include "qsrevents/vec.hpp"

namespace qsrev {

// Orthonormal moving frame along a sampled curve. When the motion carries no
// usable curvature information the frame is flagged degenerate and the axes
// hold fixed placeholder values.
struct FsFrame {
  Vec3 tangent{1.0, 0.0, 0.0};
  Vec3 normal{0.0, 1.0, 0.0};
  Vec3 binormal{0.0, 0.0, 1.0};
  bool degenerate = false;
};

struct Rotation3 {
  // m[row][col]
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  Vec3 apply(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }
};

// All angles in radians, each in (-pi, pi].
struct EulerAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

// Axis-aligned bounding box.
struct Mbhr {
  Vec3 lo;
  Vec3 hi;

  bool contains(const Vec3& p) const {
    return lo.x <= p.x && p.x <= hi.x && lo.y <= p.y && p.y <= hi.y &&
           lo.z <= p.z && p.z <= hi.z;
  }
  Vec3 center() const { return (lo + hi) * 0.5; }
};

// Top-2 principal plane of a 3D point cloud.
struct PcaModel {
  Vec3 mean;
  Vec3 basis1;
  Vec3 basis2;
  double var_fraction1 = 0.0;
  double var_fraction2 = 0.0;
};

// Derivatives of the sampled position at the newest of the three samples,
// via the exact quadratic through them. Timestamps need not be uniform.
Vec3 velocity(const TimedPoint& a, const TimedPoint& b, const TimedPoint& c);
Vec3 second_derivative(const TimedPoint& a, const TimedPoint& b,
                       const TimedPoint& c);

FsFrame fs_frame(const TimedPoint& a, const TimedPoint& b,
                 const TimedPoint& c);

// Rotation carrying f1's axes onto f2's axes. Throws DegenerateFrameError
// when either frame is degenerate.
Rotation3 rotation_between(const FsFrame& f1, const FsFrame& f2);

// Z-Y-X intrinsic Tait-Bryan decomposition: r = Rz(yaw) Ry(pitch) Rx(roll).
// At the gimbal-lock pole roll is forced to 0.
EulerAngles decompose_ypr(const Rotation3& r);
Rotation3 compose_ypr(const EulerAngles& e);

Mbhr mbhr(const std::vector<Vec3>& points);

PcaModel pca_fit(const std::vector<Vec3>& points);
Vec2 pca_project(const PcaModel& model, const Vec3& p);

}  // namespace qsrev
