#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qsrevents/calculi.hpp"
#include "qsrevents/error.hpp"
#include "qsrevents/geometry.hpp"
#include "qsrevents/rng.hpp"

using namespace qsrev;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Slot rules restated from scratch via explicit angles, used to cross-check
// the production dot/cross implementation.
QtcC qtc_c_by_angles(const Vec2& kp, const Vec2& kc, const Vec2& lp,
                     const Vec2& lc, const QtcParams& prm) {
  Vec2 line = lp - kp;
  double dist = line.norm();
  double ref = std::atan2(line.y, line.x);
  auto alpha_of = [&](const Vec2& disp) {
    double a = std::atan2(disp.y, disp.x) - ref;
    while (a > kPi) a -= 2 * kPi;
    while (a <= -kPi) a += 2 * kPi;
    return a;  // angle from the k->l direction, counterclockwise positive
  };
  auto radial = [&](double a, bool toward_is_line_dir) {
    if (std::abs(std::abs(a) - kPi / 2) < prm.beta) return 0;
    bool toward = std::abs(a) < kPi / 2;
    if (!toward_is_line_dir) toward = !toward;
    return toward ? -1 : 1;
  };
  auto lateral = [&](double a) {
    if (std::abs(a) < prm.beta || kPi - std::abs(a) < prm.beta) return 0;
    return a > 0 ? -1 : 1;  // counterclockwise of the line is left is minus
  };
  QtcC out;
  Vec2 dk = kc - kp, dl = lc - lp;
  if (dk.norm() > prm.theta * dist) {
    double a = alpha_of(dk);
    out.a = radial(a, true);
    out.c = lateral(a);
  }
  if (dl.norm() > prm.theta * dist) {
    double a = alpha_of(dl);
    out.b = radial(a, false);  // l approaches k by moving against the line
    out.d = lateral(a);
  }
  return out;
}

struct AnalyticFrame {
  Vec3 t, n, b;
};

AnalyticFrame frame_from(const Vec3& vel, const Vec3& acc) {
  AnalyticFrame f;
  f.t = vel / vel.norm();
  Vec3 vxa = vel.cross(acc);
  f.b = vxa / vxa.norm();
  f.n = f.b.cross(f.t);
  return f;
}

// Euler angle extraction written directly from the matrix entries of
// Rz(yaw) Ry(pitch) Rx(roll); independent cross-check for the sign slots.
void ypr_of(const AnalyticFrame& fk, const AnalyticFrame& fl, double out[3]) {
  auto comp = [](const Vec3& v, int i) {
    return i == 0 ? v.x : (i == 1 ? v.y : v.z);
  };
  const Vec3 ck[3] = {fk.t, fk.n, fk.b};
  const Vec3 cl[3] = {fl.t, fl.n, fl.b};
  double r[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      r[i][j] = 0.0;
      for (int k = 0; k < 3; ++k) r[i][j] += comp(cl[k], i) * comp(ck[k], j);
    }
  out[0] = std::atan2(r[1][0], r[0][0]);
  out[1] = std::asin(-r[2][0]);
  out[2] = std::atan2(r[2][1], r[2][2]);
}

}  // namespace

TEST_CASE("compass sectors hit the eight bearings and the identity") {
  Vec2 o{0, 0};
  CHECK(cardir2d(o, {0, 1}) == CardinalDir2D::N);
  CHECK(cardir2d(o, {1, 1}) == CardinalDir2D::NE);
  CHECK(cardir2d(o, {1, 0}) == CardinalDir2D::E);
  CHECK(cardir2d(o, {1, -1}) == CardinalDir2D::SE);
  CHECK(cardir2d(o, {0, -1}) == CardinalDir2D::S);
  CHECK(cardir2d(o, {-1, -1}) == CardinalDir2D::SW);
  CHECK(cardir2d(o, {-1, 0}) == CardinalDir2D::W);
  CHECK(cardir2d(o, {-1, 1}) == CardinalDir2D::NW);
  CHECK(cardir2d(o, o) == CardinalDir2D::EQ);
  CHECK(cardir2d({2, 3}, {2, 3}) == CardinalDir2D::EQ);
}

TEST_CASE("compass sector edges fall on the expected side") {
  Vec2 o{0, 0};
  double eps = 1e-9;
  // just inside / outside the N sector's clockwise edge at bearing pi/8
  CHECK(cardir2d(o, {std::sin(kPi / 8 - eps), std::cos(kPi / 8 - eps)}) ==
        CardinalDir2D::N);
  CHECK(cardir2d(o, {std::sin(kPi / 8 + eps), std::cos(kPi / 8 + eps)}) ==
        CardinalDir2D::NE);
  // and the counterclockwise edge at bearing -pi/8
  CHECK(cardir2d(o, {std::sin(-kPi / 8 + eps), std::cos(-kPi / 8 + eps)}) ==
        CardinalDir2D::N);
  CHECK(cardir2d(o, {std::sin(-kPi / 8 - eps), std::cos(-kPi / 8 - eps)}) ==
        CardinalDir2D::NW);
}

TEST_CASE("compass relation flips to its opposite when viewed backwards") {
  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    Vec2 a{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    Vec2 b{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    CardinalDir2D ab = cardir2d(a, b), ba = cardir2d(b, a);
    if (ab == CardinalDir2D::EQ) continue;
    CHECK(ba == opposite(ab));
  }
}

TEST_CASE("voxel relation of an interior centroid is neutral") {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i)
    cube.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  CardinalDir3D d = cardir3d(cube, {{0.5, 0.5, 0.5}});
  CHECK(d == CardinalDir3D{});
  CHECK(to_string(d) == "interior");
}

TEST_CASE("voxel relation reports only the exceeded axes") {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i)
    cube.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  CardinalDir3D above = cardir3d(cube, {{0.5, 0.5, 5.0}});
  CHECK(above.ns == 0);
  CHECK(above.ew == 0);
  CHECK(above.ab == 1);
  CHECK(to_string(above) == "--A");

  CardinalDir3D nea = cardir3d(cube, {{9, 9, 9}});
  CHECK(nea.ns == 1);
  CHECK(nea.ew == 1);
  CHECK(nea.ab == 1);
  CHECK(to_string(nea) == "NEA");
}

TEST_CASE("voxel relation treats box boundaries as inside") {
  std::vector<Vec3> cube;
  for (int i = 0; i < 8; ++i)
    cube.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  CHECK(cardir3d(cube, {{1.0, 1.0, 1.0}}) == CardinalDir3D{});
  CHECK(cardir3d(cube, {{0.0, 0.5, 1.0}}) == CardinalDir3D{});
}

TEST_CASE("voxel relation partitions space for random inputs") {
  Rng rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Vec3> ref;
    for (int i = 0; i < 5; ++i)
      ref.push_back({rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)});
    Vec3 c{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4)};
    CardinalDir3D d = cardir3d(ref, {c});
    CHECK(d.index() >= 0);
    CHECK(d.index() < 27);
    // independent per-axis interval classification
    Mbhr box = mbhr(ref);
    int ns = c.y > box.hi.y ? 1 : (c.y < box.lo.y ? -1 : 0);
    int ew = c.x > box.hi.x ? 1 : (c.x < box.lo.x ? -1 : 0);
    int ab = c.z > box.hi.z ? 1 : (c.z < box.lo.z ? -1 : 0);
    CHECK(d.ns == ns);
    CHECK(d.ew == ew);
    CHECK(d.ab == ab);
    CHECK(d.index() == (ns + 1) * 9 + (ew + 1) * 3 + (ab + 1));
  }
}

TEST_CASE("voxel relation refuses empty point sets") {
  CHECK_THROWS_AS(cardir3d({}, {{1, 1, 1}}), InvalidInput);
  CHECK_THROWS_AS(cardir3d({{1, 1, 1}}, {}), InvalidInput);
}

TEST_CASE("motion state distinguishes moving from static") {
  CHECK(mos({1, 2, 3}, {1, 2, 3}, 1.0 / 24) == MosState::Static);
  CHECK(mos({0, 0, 0}, {0.1, 0, 0}, 1.0 / 24) == MosState::Moving);
}

TEST_CASE("speed exactly at the threshold counts as static") {
  // 0.25 m over 1 s against v_min = 0.25: all values exact in binary
  CHECK(mos({0, 0, 0}, {0.25, 0, 0}, 1.0, 0.25) == MosState::Static);
  CHECK(mos({0, 0, 0}, {0.2500001, 0, 0}, 1.0, 0.25) == MosState::Moving);
}

TEST_CASE("motion state rejects non-positive time steps") {
  CHECK_THROWS_AS(mos({0, 0, 0}, {1, 0, 0}, 0.0), InvalidInput);
  CHECK_THROWS_AS(mos({0, 0, 0}, {1, 0, 0}, -0.1), InvalidInput);
}

TEST_CASE("distance bins are equal width with a clamped top bin") {
  CHECK(argd_bin(0.0, 0.05, 40) == 0);
  CHECK(argd_bin(0.07, 0.05, 40) == 1);
  CHECK(argd_bin(10.0, 0.05, 40) == 39);
  CHECK_THROWS_AS(argd_bin(-0.01, 0.05, 40), InvalidInput);
  CHECK_THROWS_AS(argd_bin(0.1, 0.0, 40), InvalidInput);
}

TEST_CASE("distance bins grow monotonically with distance") {
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    double d1 = rng.uniform(0, 3), d2 = rng.uniform(0, 3);
    if (d1 > d2) std::swap(d1, d2);
    CHECK(argd_bin(d1, 0.05, 40) <= argd_bin(d2, 0.05, 40));
  }
}

TEST_CASE("double cross of two static points is all zeros") {
  QtcParams prm;
  QtcC q = qtc_c({0, 0}, {0, 0}, {1, 0}, {1, 0}, prm);
  CHECK(q == QtcC{0, 0, 0, 0});
}

TEST_CASE("moving straight at the other point reads as approaching") {
  QtcParams prm;  // theta = 0.05
  QtcC q = qtc_c({0, 0}, {0.5, 0}, {1, 0}, {1, 0}, prm);
  CHECK(q == QtcC{-1, 0, 0, 0});
}

TEST_CASE("moving perpendicular left reads as a left side slot") {
  QtcParams prm;
  QtcC q = qtc_c({0, 0}, {0, 0.5}, {1, 0}, {1, 0}, prm);
  CHECK(q == QtcC{0, 0, -1, 0});
}

TEST_CASE("second point receding shows in the B slot") {
  QtcParams prm;
  QtcC q = qtc_c({0, 0}, {0, 0}, {1, 0}, {1.5, 0}, prm);
  CHECK(q == QtcC{0, 1, 0, 0});
}

TEST_CASE("a step exactly at the significance threshold does not count") {
  QtcParams prm;
  prm.theta = 0.25;
  // |kl| = 1 so the threshold step is exactly 0.25
  QtcC q = qtc_c({0, 0}, {0.25, 0}, {1, 0}, {1, 0}, prm);
  CHECK(q == QtcC{0, 0, 0, 0});
  QtcC q2 = qtc_c({0, 0}, {0.2500001, 0}, {1, 0}, {1, 0}, prm);
  CHECK(q2.a == -1);
}

TEST_CASE("double cross refuses coincident reference points") {
  QtcParams prm;
  CHECK_THROWS_AS(qtc_c({1, 1}, {2, 2}, {1, 1}, {0, 0}, prm), InvalidInput);
}

TEST_CASE("double cross matches an angle-rule restatement on random input") {
  Rng rng(331);
  QtcParams prm;
  int checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    Vec2 kp{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    Vec2 lp{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    if ((lp - kp).norm() < 0.05) continue;
    // mix of insignificant, borderline and large steps
    double scale = (trial % 3 == 0) ? 0.001 : 0.3;
    Vec2 kc = kp + Vec2{rng.uniform(-1, 1), rng.uniform(-1, 1)} * scale;
    Vec2 lc = lp + Vec2{rng.uniform(-1, 1), rng.uniform(-1, 1)} * scale;
    QtcC got = qtc_c(kp, kc, lp, lc, prm);
    QtcC want = qtc_c_by_angles(kp, kc, lp, lc, prm);
    CHECK(got == want);
    ++checked;
  }
  CHECK(checked > 1500);
}

TEST_CASE("swapping the two points swaps and mirrors the slots") {
  Rng rng(443);
  QtcParams prm;
  for (int trial = 0; trial < 1000; ++trial) {
    Vec2 kp{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    Vec2 lp{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    if ((lp - kp).norm() < 0.05) continue;
    Vec2 kc = kp + Vec2{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
    Vec2 lc = lp + Vec2{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
    QtcC fwd = qtc_c(kp, kc, lp, lc, prm);
    QtcC rev = qtc_c(lp, lc, kp, kc, prm);
    CHECK(rev.a == fwd.b);
    CHECK(rev.b == fwd.a);
    CHECK(rev.c == -fwd.d);
    CHECK(rev.d == -fwd.c);
  }
}

TEST_CASE("double cross is invariant under uniform scaling") {
  Rng rng(557);
  QtcParams prm;
  for (int trial = 0; trial < 300; ++trial) {
    Vec2 kp{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    Vec2 lp{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    if ((lp - kp).norm() < 0.05) continue;
    Vec2 kc = kp + Vec2{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
    Vec2 lc = lp + Vec2{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
    QtcC base = qtc_c(kp, kc, lp, lc, prm);
    for (double s : {0.1, 3.0, 1000.0}) {
      QtcC scaled = qtc_c(kp * s, kc * s, lp * s, lc * s, prm);
      CHECK(scaled == base);
    }
  }
}

TEST_CASE("straight-line motion degrades the orientation slots") {
  QtcParams prm;
  auto ray = [](Vec3 base, Vec3 vel, double t) {
    return TimedPoint{t, base + vel * t};
  };
  // fast enough that one 24fps step clears theta times the separation
  std::array<TimedPoint, 3> k{ray({0, 0, 0}, {4, 0, 0}, 0.0),
                              ray({0, 0, 0}, {4, 0, 0}, 1.0 / 24),
                              ray({0, 0, 0}, {4, 0, 0}, 2.0 / 24)};
  std::array<TimedPoint, 3> l{ray({2, 0, 0}, {0, 0, 0}, 0.0),
                              ray({2, 0, 0}, {0, 0, 0}, 1.0 / 24),
                              ray({2, 0, 0}, {0, 0, 0}, 2.0 / 24)};
  Qtc3D q = qtc_3d(k, l, prm);
  CHECK(q.a == -1);  // closing in on the static point
  CHECK(q.b == 0);
  CHECK(q.yaw == AngleSign::Deg);
  CHECK(q.pitch == AngleSign::Deg);
  CHECK(q.roll == AngleSign::Deg);
}

TEST_CASE("identically oriented frames give zero orientation slots") {
  QtcParams prm;
  double w = 2.0, h = 1.0 / 24;
  auto on_circle = [&](double radius, double t) {
    return TimedPoint{t,
                      {radius * std::cos(w * t), radius * std::sin(w * t), 0}};
  };
  // concentric circles, same phase: both frames coincide so R is the identity
  std::array<TimedPoint, 3> k{on_circle(1.0, 1.0), on_circle(1.0, 1.0 + h),
                              on_circle(1.0, 1.0 + 2 * h)};
  std::array<TimedPoint, 3> l{on_circle(2.0, 1.0), on_circle(2.0, 1.0 + h),
                              on_circle(2.0, 1.0 + 2 * h)};
  Qtc3D q = qtc_3d(k, l, prm);
  CHECK(q.yaw == AngleSign::Zero);
  CHECK(q.pitch == AngleSign::Zero);
  CHECK(q.roll == AngleSign::Zero);
  CHECK(q.a == 0);  // tangential steps stay within the radial deadzone
  CHECK(q.b == 0);
}

TEST_CASE("helix against circle matches an analytic orientation oracle") {
  QtcParams prm;
  double h = 1.0 / 24, t2 = 1.0;
  double rk = 0.5, wk = 2.0, ck = 0.8;
  auto helix = [&](double t) {
    return TimedPoint{t, {rk * std::cos(wk * t), rk * std::sin(wk * t), ck * t}};
  };
  double rl = 0.7, wl = 1.5;
  auto circle = [&](double t) {
    return TimedPoint{
        t, {2.0 + rl * std::cos(wl * t), rl * std::sin(wl * t), 0.0}};
  };
  std::array<TimedPoint, 3> k{helix(t2 - 2 * h), helix(t2 - h), helix(t2)};
  std::array<TimedPoint, 3> l{circle(t2 - 2 * h), circle(t2 - h), circle(t2)};
  Qtc3D q = qtc_3d(k, l, prm);

  Vec3 vk{-rk * wk * std::sin(wk * t2), rk * wk * std::cos(wk * t2), ck};
  Vec3 ak{-rk * wk * wk * std::cos(wk * t2), -rk * wk * wk * std::sin(wk * t2),
          0};
  Vec3 vl{-rl * wl * std::sin(wl * t2), rl * wl * std::cos(wl * t2), 0};
  Vec3 al{-rl * wl * wl * std::cos(wl * t2), -rl * wl * wl * std::sin(wl * t2),
          0};
  double angles[3];
  ypr_of(frame_from(vk, ak), frame_from(vl, al), angles);

  // discretization shifts the angles a little; demand a safe margin before
  // trusting the analytic sign
  AngleSign want[3];
  for (int i = 0; i < 3; ++i) {
    REQUIRE(std::abs(std::abs(angles[i]) - prm.beta) > 0.1);
    want[i] = std::abs(angles[i]) < prm.beta
                  ? AngleSign::Zero
                  : (angles[i] > 0 ? AngleSign::Plus : AngleSign::Minus);
  }
  CHECK(q.yaw == want[0]);
  CHECK(q.pitch == want[1]);
  CHECK(q.roll == want[2]);
}

TEST_CASE("planar histories reproduce the flat double cross radial slots") {
  Rng rng(613);
  QtcParams prm;
  int checked = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Vec2 kp{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    Vec2 lp{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    if ((lp - kp).norm() < 0.05) continue;
    Vec2 kc = kp + Vec2{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
    Vec2 lc = lp + Vec2{rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
    if ((lc - kc).norm() < 0.05) continue;
    Vec2 k0{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    Vec2 l0{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    std::array<TimedPoint, 3> kh{TimedPoint{0.0, {k0.x, k0.y, 0}},
                                 TimedPoint{1.0 / 24, {kp.x, kp.y, 0}},
                                 TimedPoint{2.0 / 24, {kc.x, kc.y, 0}}};
    std::array<TimedPoint, 3> lh{TimedPoint{0.0, {l0.x, l0.y, 0}},
                                 TimedPoint{1.0 / 24, {lp.x, lp.y, 0}},
                                 TimedPoint{2.0 / 24, {lc.x, lc.y, 0}}};
    Qtc3D q3 = qtc_3d(kh, lh, prm);
    QtcC q2 = qtc_c(kp, kc, lp, lc, prm);
    CHECK(q3.a == q2.a);
    CHECK(q3.b == q2.b);
    ++checked;
  }
  CHECK(checked > 300);
}

TEST_CASE("orientation slots refuse coincident point pairs") {
  QtcParams prm;
  std::array<TimedPoint, 3> k{TimedPoint{0.0, {0, 0, 0}},
                              TimedPoint{1.0 / 24, {0.1, 0, 0}},
                              TimedPoint{2.0 / 24, {0.2, 0, 0}}};
  std::array<TimedPoint, 3> same_curr{TimedPoint{0.0, {1, 0, 0}},
                                      TimedPoint{1.0 / 24, {0.6, 0, 0}},
                                      TimedPoint{2.0 / 24, {0.2, 0, 0}}};
  CHECK_THROWS_AS(qtc_3d(k, same_curr, prm), InvalidInput);
  std::array<TimedPoint, 3> same_prev{TimedPoint{0.0, {1, 0, 0}},
                                      TimedPoint{1.0 / 24, {0.1, 0, 0}},
                                      TimedPoint{2.0 / 24, {0.5, 0, 0}}};
  CHECK_THROWS_AS(qtc_3d(k, same_prev, prm), InvalidInput);
}

TEST_CASE("quantisation parameters are validated") {
  QtcParams bad;
  bad.theta = -0.1;
  CHECK_THROWS_AS(qtc_c({0, 0}, {0, 0}, {1, 0}, {1, 0}, bad), InvalidInput);
  QtcParams wide;
  wide.beta = 1.0;  // >= pi/4
  CHECK_THROWS_AS(qtc_c({0, 0}, {0, 0}, {1, 0}, {1, 0}, wide), InvalidInput);
}
