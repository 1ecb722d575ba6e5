#include "qsrevents/calculi.hpp"

#include <cmath>

#include "qsrevents/error.hpp"
#include "qsrevents/geometry.hpp"

namespace qsrev {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_qtc_params(const QtcParams& p) {
  if (!(p.theta >= 0.0)) throw InvalidInput("qtc theta must be >= 0");
  if (!(p.beta > 0.0 && p.beta < kPi / 4.0))
    throw InvalidInput("qtc beta must lie in (0, pi/4)");
}

int sign_with_deadzone(double value, double deadzone) {
  if (std::abs(value) < deadzone) return 0;
  return value > 0.0 ? 1 : -1;
}

AngleSign angle_sign(double angle, double beta) {
  if (std::abs(angle) < beta) return AngleSign::Zero;
  return angle > 0.0 ? AngleSign::Plus : AngleSign::Minus;
}

}  // namespace

const char* to_string(CardinalDir2D d) {
  switch (d) {
    case CardinalDir2D::N: return "N";
    case CardinalDir2D::NE: return "NE";
    case CardinalDir2D::E: return "E";
    case CardinalDir2D::SE: return "SE";
    case CardinalDir2D::S: return "S";
    case CardinalDir2D::SW: return "SW";
    case CardinalDir2D::W: return "W";
    case CardinalDir2D::NW: return "NW";
    case CardinalDir2D::EQ: return "EQ";
  }
  return "?";
}

CardinalDir2D opposite(CardinalDir2D d) {
  if (d == CardinalDir2D::EQ) return CardinalDir2D::EQ;
  return static_cast<CardinalDir2D>((static_cast<int>(d) + 4) % 8);
}

std::string to_string(const CardinalDir3D& d) {
  if (d.ns == 0 && d.ew == 0 && d.ab == 0) return "interior";
  std::string s;
  s += d.ns > 0 ? "N" : (d.ns < 0 ? "S" : "-");
  s += d.ew > 0 ? "E" : (d.ew < 0 ? "W" : "-");
  s += d.ab > 0 ? "A" : (d.ab < 0 ? "B" : "-");
  return s;
}

CardinalDir2D cardir2d(const Vec2& ref, const Vec2& target) {
  Vec2 d = target - ref;
  if (d.norm() < kPosEps) return CardinalDir2D::EQ;
  // bearing from North, clockwise positive, so +y -> 0 and +x -> pi/2
  double bearing = std::atan2(d.x, d.y);
  int idx = static_cast<int>(std::floor((bearing + kPi / 8.0) / (kPi / 4.0)));
  idx = ((idx % 8) + 8) % 8;
  return static_cast<CardinalDir2D>(idx);
}

CardinalDir3D cardir3d(const std::vector<Vec3>& ref_points,
                       const std::vector<Vec3>& target_points) {
  if (target_points.empty())
    throw InvalidInput("cardir3d: empty target point set");
  Mbhr box = mbhr(ref_points);  // throws on empty ref
  Vec3 c;
  for (const Vec3& p : target_points) c += p;
  c = c / static_cast<double>(target_points.size());
  // Boundary counts as inside, so only strict excess leaves the box interval.
  CardinalDir3D out;
  out.ns = c.y > box.hi.y ? 1 : (c.y < box.lo.y ? -1 : 0);
  out.ew = c.x > box.hi.x ? 1 : (c.x < box.lo.x ? -1 : 0);
  out.ab = c.z > box.hi.z ? 1 : (c.z < box.lo.z ? -1 : 0);
  return out;
}

MosState mos(const Vec3& prev, const Vec3& curr, double dt, double v_min) {
  if (!(dt > 0.0)) throw InvalidInput("mos: dt must be positive");
  double speed = (curr - prev).norm() / dt;
  return speed > v_min ? MosState::Moving : MosState::Static;
}

int argd_bin(double d, double w, int b_max) {
  if (d < 0.0) throw InvalidInput("argd_bin: negative distance");
  if (!(w > 0.0)) throw InvalidInput("argd_bin: bin width must be positive");
  if (b_max < 1) throw InvalidInput("argd_bin: need at least one bin");
  // clamp in double: d/w can exceed int range long before it stops being a
  // legitimate "top bin" query
  double idx = std::floor(d / w);
  if (idx >= static_cast<double>(b_max)) return b_max - 1;
  return static_cast<int>(idx);
}

QtcC qtc_c(const Vec2& k_prev, const Vec2& k_curr, const Vec2& l_prev,
           const Vec2& l_curr, const QtcParams& params) {
  check_qtc_params(params);
  Vec2 line = l_prev - k_prev;
  double dist = line.norm();
  if (dist < kPosEps) throw InvalidInput("qtc_c: reference points coincide");
  Vec2 dir = line * (1.0 / dist);
  double sinb = std::sin(params.beta);

  QtcC out;
  Vec2 dk = k_curr - k_prev;
  double nk = dk.norm();
  if (nk > params.theta * dist) {
    // approaching l means a positive component along dir, mapped to -
    out.a = -sign_with_deadzone(dir.dot(dk) / nk, sinb);
    // left of the directed k->l line (positive cross) is -
    out.c = -sign_with_deadzone(dir.cross(dk) / nk, sinb);
  }
  Vec2 dl = l_curr - l_prev;
  double nl = dl.norm();
  if (nl > params.theta * dist) {
    out.b = -sign_with_deadzone((dir * -1.0).dot(dl) / nl, sinb);
    out.d = -sign_with_deadzone(dir.cross(dl) / nl, sinb);
  }
  return out;
}

std::pair<int, int> qtc_radial3d(const Vec3& k_prev, const Vec3& k_curr,
                                 const Vec3& l_prev, const Vec3& l_curr,
                                 const QtcParams& params) {
  check_qtc_params(params);
  // The radial slots anchor on the previous-frame pair line, matching the 2D
  // double cross.
  Vec3 line = l_prev - k_prev;
  double dist = line.norm();
  if (dist < kPosEps)
    throw InvalidInput("qtc radial: previous positions coincide");
  Vec3 dir = line / dist;
  double sinb = std::sin(params.beta);

  int a = 0, b = 0;
  Vec3 dk = k_curr - k_prev;
  double nk = dk.norm();
  if (nk > params.theta * dist)
    a = -sign_with_deadzone(dir.dot(dk) / nk, sinb);
  Vec3 dl = l_curr - l_prev;
  double nl = dl.norm();
  if (nl > params.theta * dist)
    b = -sign_with_deadzone((dir * -1.0).dot(dl) / nl, sinb);
  return {a, b};
}

Qtc3D qtc_3d(const std::array<TimedPoint, 3>& k_hist,
             const std::array<TimedPoint, 3>& l_hist,
             const QtcParams& params) {
  check_qtc_params(params);
  if ((l_hist[2].p - k_hist[2].p).norm() < kPosEps)
    throw InvalidInput("qtc_3d: current positions coincide");
  Qtc3D out;
  auto [a, b] =
      qtc_radial3d(k_hist[1].p, k_hist[2].p, l_hist[1].p, l_hist[2].p, params);
  out.a = a;
  out.b = b;

  FsFrame fk = fs_frame(k_hist[0], k_hist[1], k_hist[2]);
  FsFrame fl = fs_frame(l_hist[0], l_hist[1], l_hist[2]);
  if (fk.degenerate || fl.degenerate) return out;  // signs stay Deg

  EulerAngles e = decompose_ypr(rotation_between(fk, fl));
  out.yaw = angle_sign(e.yaw, params.beta);
  out.pitch = angle_sign(e.pitch, params.beta);
  out.roll = angle_sign(e.roll, params.beta);
  return out;
}

}  // namespace qsrev
