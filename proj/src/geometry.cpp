#include "qsrevents/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "qsrevents/error.hpp"

namespace qsrev {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedEps = 1e-4;      // m/s below which motion counts as rest
constexpr double kCurvatureEps = 1e-4;  // 1/m below which the path is straight

void check_increasing(const TimedPoint& a, const TimedPoint& b,
                      const TimedPoint& c) {
  if (!(a.t < b.t && b.t < c.t))
    throw InvalidInput("derivative samples need strictly increasing timestamps");
}

// Angles from atan2 live in [-pi, pi]; fold the single excluded endpoint.
double wrap_half_open(double a) {
  if (a <= -kPi) return a + 2.0 * kPi;
  return a;
}

// One Jacobi rotation zeroing a[p][q] of a symmetric 3x3, accumulating the
// eigenvector matrix in v.
void jacobi_rotate(std::array<std::array<double, 3>, 3>& a,
                   std::array<std::array<double, 3>, 3>& v, int p, int q) {
  if (a[p][q] == 0.0) return;
  double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
  double t = (theta >= 0.0 ? 1.0 : -1.0) /
             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  double c = 1.0 / std::sqrt(t * t + 1.0);
  double s = t * c;
  for (int k = 0; k < 3; ++k) {
    double akp = a[k][p], akq = a[k][q];
    a[k][p] = c * akp - s * akq;
    a[k][q] = s * akp + c * akq;
  }
  for (int k = 0; k < 3; ++k) {
    double apk = a[p][k], aqk = a[q][k];
    a[p][k] = c * apk - s * aqk;
    a[q][k] = s * apk + c * aqk;
  }
  for (int k = 0; k < 3; ++k) {
    double vkp = v[k][p], vkq = v[k][q];
    v[k][p] = c * vkp - s * vkq;
    v[k][q] = s * vkp + c * vkq;
  }
}

struct EigenResult {
  std::array<double, 3> values;        // descending
  std::array<Vec3, 3> vectors;         // matching order, unit length
};

EigenResult eigen_symmetric3(std::array<std::array<double, 3>, 3> a) {
  std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-300) break;
    jacobi_rotate(a, v, 0, 1);
    jacobi_rotate(a, v, 0, 2);
    jacobi_rotate(a, v, 1, 2);
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a[i][i] > a[j][j]; });
  EigenResult r;
  for (int i = 0; i < 3; ++i) {
    int k = order[i];
    r.values[i] = a[k][k];
    r.vectors[i] = Vec3{v[0][k], v[1][k], v[2][k]};
  }
  return r;
}

// Flip so the largest-magnitude component is positive; ties pick the lowest
// index. Keeps eigenvector signs stable across platforms.
Vec3 canonical_sign(const Vec3& v) {
  double comps[3] = {v.x, v.y, v.z};
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(comps[i]) > std::abs(comps[best])) best = i;
  return comps[best] < 0.0 ? v * -1.0 : v;
}

}  // namespace

Vec3 velocity(const TimedPoint& a, const TimedPoint& b, const TimedPoint& c) {
  check_increasing(a, b, c);
  // Derivative at c.t of the Lagrange quadratic through the three samples.
  double c0 = (c.t - b.t) / ((a.t - b.t) * (a.t - c.t));
  double c1 = (c.t - a.t) / ((b.t - a.t) * (b.t - c.t));
  double c2 = (2.0 * c.t - a.t - b.t) / ((c.t - a.t) * (c.t - b.t));
  return a.p * c0 + b.p * c1 + c.p * c2;
}

Vec3 second_derivative(const TimedPoint& a, const TimedPoint& b,
                       const TimedPoint& c) {
  check_increasing(a, b, c);
  double c0 = 2.0 / ((a.t - b.t) * (a.t - c.t));
  double c1 = 2.0 / ((b.t - a.t) * (b.t - c.t));
  double c2 = 2.0 / ((c.t - a.t) * (c.t - b.t));
  return a.p * c0 + b.p * c1 + c.p * c2;
}

FsFrame fs_frame(const TimedPoint& a, const TimedPoint& b,
                 const TimedPoint& c) {
  Vec3 v = velocity(a, b, c);
  Vec3 acc = second_derivative(a, b, c);
  double speed = v.norm();
  FsFrame f;
  if (speed < kSpeedEps) {
    f.degenerate = true;
    return f;
  }
  Vec3 vxa = v.cross(acc);
  double curvature = vxa.norm() / (speed * speed * speed);
  if (curvature < kCurvatureEps) {
    f.degenerate = true;
    return f;
  }
  f.tangent = v / speed;
  f.binormal = vxa / vxa.norm();
  f.normal = f.binormal.cross(f.tangent);
  f.degenerate = false;
  return f;
}

Rotation3 rotation_between(const FsFrame& f1, const FsFrame& f2) {
  if (f1.degenerate || f2.degenerate)
    throw DegenerateFrameError("rotation between degenerate frames");
  // R = M2 * M1^T with frame axes as matrix columns.
  const Vec3 c1[3] = {f1.tangent, f1.normal, f1.binormal};
  const Vec3 c2[3] = {f2.tangent, f2.normal, f2.binormal};
  auto comp = [](const Vec3& v, int i) {
    return i == 0 ? v.x : (i == 1 ? v.y : v.z);
  };
  Rotation3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += comp(c2[k], i) * comp(c1[k], j);
      r.m[i][j] = s;
    }
  return r;
}

EulerAngles decompose_ypr(const Rotation3& r) {
  EulerAngles e;
  double sp = -r.m[2][0];
  if (sp >= 1.0 - 1e-15 || sp <= -1.0 + 1e-15) {
    // Gimbal lock: only yaw-roll combination is determined; pin roll to 0.
    e.pitch = sp > 0.0 ? kPi / 2.0 : -kPi / 2.0;
    e.roll = 0.0;
    e.yaw = wrap_half_open(std::atan2(-r.m[0][1], r.m[1][1]));
    return e;
  }
  e.pitch = std::asin(sp);
  e.yaw = wrap_half_open(std::atan2(r.m[1][0], r.m[0][0]));
  e.roll = wrap_half_open(std::atan2(r.m[2][1], r.m[2][2]));
  return e;
}

Rotation3 compose_ypr(const EulerAngles& e) {
  double cy = std::cos(e.yaw), sy = std::sin(e.yaw);
  double cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  double cr = std::cos(e.roll), sr = std::sin(e.roll);
  Rotation3 r;
  r.m = {{{cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr},
          {sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr},
          {-sp, cp * sr, cp * cr}}};
  return r;
}

Mbhr mbhr(const std::vector<Vec3>& points) {
  if (points.empty()) throw InvalidInput("mbhr of empty point set");
  Mbhr box{points[0], points[0]};
  for (const Vec3& p : points) {
    box.lo.x = std::min(box.lo.x, p.x);
    box.lo.y = std::min(box.lo.y, p.y);
    box.lo.z = std::min(box.lo.z, p.z);
    box.hi.x = std::max(box.hi.x, p.x);
    box.hi.y = std::max(box.hi.y, p.y);
    box.hi.z = std::max(box.hi.z, p.z);
  }
  return box;
}

PcaModel pca_fit(const std::vector<Vec3>& points) {
  if (points.size() < 2) throw InvalidInput("pca_fit needs at least 2 points");
  Vec3 mean;
  for (const Vec3& p : points) mean += p;
  mean = mean / static_cast<double>(points.size());

  std::array<std::array<double, 3>, 3> cov{};
  for (const Vec3& p : points) {
    Vec3 d = p - mean;
    double c[3] = {d.x, d.y, d.z};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) cov[i][j] += c[i] * c[j];
  }
  double n = static_cast<double>(points.size());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) cov[i][j] /= n;

  double trace = cov[0][0] + cov[1][1] + cov[2][2];
  if (trace <= 0.0) throw InvalidInput("pca_fit: all points identical");

  EigenResult eig = eigen_symmetric3(cov);
  std::array<double, 3> lam = eig.values;
  for (double& l : lam) l = std::max(l, 0.0);
  double total = lam[0] + lam[1] + lam[2];

  PcaModel model;
  model.mean = mean;
  model.basis1 = canonical_sign(eig.vectors[0]);
  // Rank-1 data leaves the second direction free; derive it from the
  // coordinate axis least aligned with basis1 so the choice is reproducible.
  if (lam[1] <= lam[0] * 1e-12) {
    double ax = std::abs(model.basis1.x), ay = std::abs(model.basis1.y),
           az = std::abs(model.basis1.z);
    Vec3 seed = (ax <= ay && ax <= az) ? Vec3{1, 0, 0}
                : (ay <= az)           ? Vec3{0, 1, 0}
                                       : Vec3{0, 0, 1};
    Vec3 ortho = seed - model.basis1 * seed.dot(model.basis1);
    model.basis2 = canonical_sign(ortho / ortho.norm());
    model.var_fraction1 = 1.0;
    model.var_fraction2 = 0.0;
    return model;
  }
  model.basis2 = canonical_sign(eig.vectors[1]);
  model.var_fraction1 = lam[0] / total;
  model.var_fraction2 = lam[1] / total;
  return model;
}

Vec2 pca_project(const PcaModel& model, const Vec3& p) {
  Vec3 d = p - model.mean;
  return {d.dot(model.basis1), d.dot(model.basis2)};
}

}  // namespace qsrev
