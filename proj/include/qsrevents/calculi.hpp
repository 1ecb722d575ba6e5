#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "qsrevents/vec.hpp"

namespace qsrev {

// Compass sector from a reference point to a target, plus EQ for coincidence.
enum class CardinalDir2D { N, NE, E, SE, S, SW, W, NW, EQ };

const char* to_string(CardinalDir2D d);
CardinalDir2D opposite(CardinalDir2D d);

// 27-voxel relation of a target centroid against a reference bounding box.
// Each axis reports -1 / 0 / +1 for below / inside / above; +y is North,
// +x is East, +z is Above.
struct CardinalDir3D {
  int ns = 0;
  int ew = 0;
  int ab = 0;

  int index() const { return (ns + 1) * 9 + (ew + 1) * 3 + (ab + 1); }
  bool operator==(const CardinalDir3D& o) const {
    return ns == o.ns && ew == o.ew && ab == o.ab;
  }
};

std::string to_string(const CardinalDir3D& d);

enum class MosState { Moving, Static };

// Relative-motion signs for a point pair. Slots use -1/0/+1 for -/0/+.
// A: first point approaching (-) or receding (+) from the second.
// B: the same for the second point. C/D: sideways motion of the first and
// second point against the directed first->second line, left = -.
struct QtcC {
  int a = 0;
  int b = 0;
  int c = 0;
  int d = 0;

  bool operator==(const QtcC& o) const {
    return a == o.a && b == o.b && c == o.c && d == o.d;
  }
};

// Relative-orientation sign for one Euler angle; Deg marks that no moving
// frame could be built for at least one of the two points.
enum class AngleSign { Minus, Zero, Plus, Deg };

struct Qtc3D {
  int a = 0;
  int b = 0;
  AngleSign yaw = AngleSign::Deg;
  AngleSign pitch = AngleSign::Deg;
  AngleSign roll = AngleSign::Deg;

  bool operator==(const Qtc3D& o) const {
    return a == o.a && b == o.b && yaw == o.yaw && pitch == o.pitch &&
           roll == o.roll;
  }
};

struct QtcParams {
  double theta = 0.05;           // motion significant iff step > theta * |kl|
  double beta = 0.08726646259971647;  // 5 degrees; deadzone half-width
};

inline constexpr double kPosEps = 1e-9;  // below this two positions coincide

CardinalDir2D cardir2d(const Vec2& ref, const Vec2& target);

CardinalDir3D cardir3d(const std::vector<Vec3>& ref_points,
                       const std::vector<Vec3>& target_points);

MosState mos(const Vec3& prev, const Vec3& curr, double dt,
             double v_min = 0.01);

int argd_bin(double d, double w, int b_max);

QtcC qtc_c(const Vec2& k_prev, const Vec2& k_curr, const Vec2& l_prev,
           const Vec2& l_curr, const QtcParams& params);

// Approach/recede signs for both points of a 3D pair, anchored on their
// previous positions; the radial half of the double cross.
std::pair<int, int> qtc_radial3d(const Vec3& k_prev, const Vec3& k_curr,
                                 const Vec3& l_prev, const Vec3& l_curr,
                                 const QtcParams& params);

Qtc3D qtc_3d(const std::array<TimedPoint, 3>& k_hist,
             const std::array<TimedPoint, 3>& l_hist,
             const QtcParams& params);

}  // namespace qsrev
