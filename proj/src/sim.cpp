#include "qsrevents/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qsrevents/error.hpp"
#include "qsrevents/labels.hpp"
#include "qsrevents/rng.hpp"

namespace qsrev {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Tabletop scale. The table is the z=0 plane, motion runs along +x in the
// canonical scene, and everything is posed by one rigid transform afterwards.
constexpr double kTravelShort = 0.45;
constexpr double kTravelPast = 0.60;   // landmark sits at the halfway point
constexpr double kReachSeconds = 8.0 / 24.0;
constexpr double kCubeHalf = 0.05;
constexpr double kCubeTop = 0.10;      // markers sit on the top face
constexpr double kCylRadius = 0.05;
// short relative to the radius so a plane fit on the markers picks the roll
// plane, not the axis
constexpr double kCylHalfLen = 0.025;
constexpr double kHandGap = 0.03;      // hand to centroid while in contact
constexpr double kRollPhase0 = 0.4;    // keeps markers off sector boundaries

// Eases 0..1 with zero end velocities; strictly increasing inside.
double smoothstep01(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

Vec3 lerp(const Vec3& a, const Vec3& b, double u) { return a + (b - a) * u; }

struct ScenePose {
  double c = 1.0, s = 0.0;  // yaw about z
  double dx = 0.0, dy = 0.0;

  Vec3 apply(const Vec3& p) const {
    return {c * p.x - s * p.y + dx, s * p.x + c * p.y + dy, p.z};
  }
};

struct Layout {
  double travel = kTravelShort;
  Vec3 o2;             // landmark cube centroid (marker plane height)
  Vec3 rig_anchor;     // foot position between the shoulders
  double facing = 1.0; // +1 looks along +x, -1 along -x
  bool rig_reaches = false;
  double hand_off = 0.0;  // x offset of the contact hand from the centroid
};

Layout plan_layout(const ScenarioSpec& spec, int verb, int prep) {
  Layout l;
  l.travel = prep == 2 ? kTravelPast : kTravelShort;
  switch (prep) {
    case 0: l.o2 = {l.travel + 0.20, 0.0, kCubeTop}; break;   // toward
    case 1: l.o2 = {-0.20, 0.0, kCubeTop}; break;             // away_from
    case 2: l.o2 = {l.travel / 2.0, 0.18, kCubeTop}; break;   // past
    default: l.o2 = {l.travel / 2.0, 0.80, kCubeTop}; break;  // unrelated
  }
  l.rig_reaches = verb == 0 || verb == 1;
  if (verb == 1) {  // pull: performer on the far side, object comes closer
    l.rig_anchor = {l.travel + 0.35, -0.30, 0.0};
    l.facing = -1.0;
    l.hand_off = kHandGap;
  } else if (l.rig_reaches || spec.actor_involved) {
    l.rig_anchor = {-0.35, -0.30, 0.0};
    l.facing = 1.0;
    l.hand_off = -kHandGap;
  } else {  // object-only description: rig parked away from the action
    l.rig_anchor = {-0.55, -0.55, 0.0};
    l.facing = 1.0;
  }
  return l;
}

// Rig joints at rest. Left is +y when facing +x.
struct RigRest {
  Vec3 shoulder_l, shoulder_r, hand_l, hand_r;
};

RigRest rig_rest(const Layout& l) {
  const Vec3 fwd{l.facing, 0.0, 0.0};
  const Vec3 left{0.0, l.facing, 0.0};
  RigRest r;
  r.shoulder_l = l.rig_anchor + left * 0.20 + Vec3{0, 0, 0.46};
  r.shoulder_r = l.rig_anchor - left * 0.20 + Vec3{0, 0, 0.46};
  r.hand_l = l.rig_anchor + left * 0.18 + fwd * 0.22 + Vec3{0, 0, 0.24};
  r.hand_r = l.rig_anchor - left * 0.18 + fwd * 0.22 + Vec3{0, 0, 0.24};
  return r;
}

void append_cube(std::vector<Vec3>& pts, const Vec3& centroid) {
  pts.push_back(centroid + Vec3{-kCubeHalf, -kCubeHalf, 0});
  pts.push_back(centroid + Vec3{kCubeHalf, -kCubeHalf, 0});
  pts.push_back(centroid + Vec3{kCubeHalf, kCubeHalf, 0});
  pts.push_back(centroid + Vec3{-kCubeHalf, kCubeHalf, 0});
}

// Rolling cylinder, axis along y. No-slip ties the roll angle to x, so the
// markers at angle phi and phi+pi circle in the xz plane while the marker
// centroid stays at the axis center.
void append_cylinder(std::vector<Vec3>& pts, double x) {
  const Vec3 center{x, 0.0, kCylRadius};
  const double phi = kRollPhase0 - x / kCylRadius;
  const Vec3 rim_a{kCylRadius * std::cos(phi), 0.0,
                   kCylRadius * std::sin(phi)};
  const Vec3 rim_b = rim_a * -1.0;
  pts.push_back(center + rim_a + Vec3{0, -kCylHalfLen, 0});
  pts.push_back(center + rim_a + Vec3{0, kCylHalfLen, 0});
  pts.push_back(center + rim_b + Vec3{0, -kCylHalfLen, 0});
  pts.push_back(center + rim_b + Vec3{0, kCylHalfLen, 0});
}

SessionSchema scene_schema() {
  SessionSchema sch;
  sch.entities.push_back({"performer",
                          {"shoulder-left", "shoulder-right", "hand-tip-left",
                           "hand-tip-right"}});
  sch.entities.push_back({"O1", {"m0", "m1", "m2", "m3"}});
  sch.entities.push_back({"O2", {"m0", "m1", "m2", "m3"}});
  return sch;
}

void check_spec(const ScenarioSpec& spec, int verb, int prep) {
  if (verb < 0 || verb >= kVerbNone)
    throw InvalidInput("unknown scenario verb: " + spec.verb);
  if (prep < 0 || prep > kPrepNone)
    throw InvalidInput("unknown scenario preposition: " + spec.preposition);
  const bool cube = spec.object_kind == "cube";
  const bool cyl = spec.object_kind == "cylinder";
  if (!cube && !cyl)
    throw InvalidInput("unknown object kind: " + spec.object_kind);
  if (verb == 3 && !cyl)
    throw InvalidInput("roll needs a cylinder, got " + spec.object_kind);
  if (verb == 2 && !cube)
    throw InvalidInput("slide needs a cube, got " + spec.object_kind);
  if (!(spec.duration_s > 0.0) || !(spec.rate_hz > 0.0))
    throw InvalidInput("scenario duration and rate must be positive");
  if (spec.sigma < 0.0)
    throw InvalidInput("noise sigma must be nonnegative");
  if (spec.dropout < 0.0 || spec.dropout >= 0.5)
    throw InvalidInput("dropout must lie in [0, 0.5)");
}

}  // namespace

SyntheticSession generate(const ScenarioSpec& spec) {
  const int verb = verb_index(spec.verb);
  const int prep = prep_index(spec.preposition);
  check_spec(spec, verb, prep);

  const Layout lay = plan_layout(spec, verb, prep);
  const RigRest rest = rig_rest(lay);
  const double duration = spec.duration_s;
  // Hand reaches first for push/pull; a described object moves from frame one.
  const double move_start = lay.rig_reaches
                                ? std::min(kReachSeconds, duration * 0.2)
                                : 0.0;

  Rng pose_rng(derive_seed(spec.seed, 11));
  ScenePose pose;
  const double yaw = pose_rng.uniform(0.0, 2.0 * kPi);
  pose.c = std::cos(yaw);
  pose.s = std::sin(yaw);
  pose.dx = pose_rng.uniform(-0.3, 0.3);
  pose.dy = pose_rng.uniform(-0.3, 0.3);

  Session s;
  s.id = spec.session_id;
  s.rate_hz = spec.rate_hz;
  s.schema = scene_schema();

  const int n_frames =
      static_cast<int>(std::lround(duration * spec.rate_hz)) + 1;
  const double obj_z = spec.object_kind == "cube" ? kCubeTop : kCylRadius;
  for (int f = 0; f < n_frames; ++f) {
    const double t = f / spec.rate_hz;
    const double u = duration > move_start
                         ? (t - move_start) / (duration - move_start)
                         : 1.0;
    const double x = lay.travel * smoothstep01(u);

    Frame fr;
    fr.t = t;
    fr.points.reserve(12);

    Vec3 hand_r = rest.hand_r;
    if (lay.rig_reaches) {
      const Vec3 contact = Vec3{x + lay.hand_off, 0.0, obj_z};
      if (t < move_start) {
        const Vec3 first_contact{lay.hand_off, 0.0, obj_z};
        hand_r = lerp(rest.hand_r, first_contact,
                      smoothstep01(move_start > 0 ? t / move_start : 1.0));
      } else {
        hand_r = contact;
      }
    }
    fr.points.push_back(rest.shoulder_l);
    fr.points.push_back(rest.shoulder_r);
    fr.points.push_back(rest.hand_l);
    fr.points.push_back(hand_r);

    if (spec.object_kind == "cube")
      append_cube(fr.points, Vec3{x, 0.0, kCubeTop});
    else
      append_cylinder(fr.points, x);
    append_cube(fr.points, lay.o2);

    for (Vec3& p : fr.points) p = pose.apply(p);
    fr.tracked.assign(fr.points.size(), 1);
    s.frames.push_back(std::move(fr));
  }

  LabelTuple base;
  if (lay.rig_reaches) {
    base.subject = entity_index("performer");
    base.object = entity_index("O1");
  } else {
    base.subject = entity_index("O1");
    base.object = kEntityNone;
  }
  base.verb = verb;
  if (prep == kPrepNone) {
    base.preposition = kPrepNone;
    base.locative = kEntityNone;
  } else {
    base.preposition = prep;
    base.locative = entity_index("O2");
  }

  if (prep == 2) {
    // A pass decomposes: closing in, alongside, receding.
    LabelTuple t0 = base, t1 = base, t2 = base;
    t0.preposition = prep_index("toward");
    t2.preposition = prep_index("away_from");
    s.spans.push_back({-1.0, duration / 3.0, t0});
    s.spans.push_back({duration / 3.0, 2.0 * duration / 3.0, t1});
    s.spans.push_back({2.0 * duration / 3.0, 1e9, t2});
  } else {
    s.spans.push_back({-1.0, 1e9, base});
  }

  if (spec.sigma > 0.0 || spec.dropout > 0.0)
    s = corrupt(s, spec.sigma, spec.dropout, derive_seed(spec.seed, 12));

  return {std::move(s), spec};
}

Session corrupt(const Session& s, double sigma, double dropout,
                std::uint64_t seed) {
  if (sigma < 0.0) throw InvalidInput("noise sigma must be nonnegative");
  if (dropout < 0.0 || dropout >= 0.5)
    throw InvalidInput("dropout must lie in [0, 0.5)");
  Session out = s;
  Rng rng(seed);
  const int last = static_cast<int>(out.frames.size()) - 1;
  for (int f = 0; f <= last; ++f) {
    Frame& fr = out.frames[f];
    for (std::size_t p = 0; p < fr.points.size(); ++p) {
      fr.points[p].x += rng.gaussian(0.0, sigma);
      fr.points[p].y += rng.gaussian(0.0, sigma);
      fr.points[p].z += rng.gaussian(0.0, sigma);
      // dropping a point's boundary frames would leave gap filling nothing
      // to anchor on
      if (f != 0 && f != last && rng.uniform01() < dropout)
        fr.tracked[p] = 0;
    }
  }
  return out;
}

std::vector<SyntheticSession> make_corpus(int n_sessions, const CorpusMix& mix,
                                          std::uint64_t master_seed) {
  if (n_sessions < 5) throw InvalidInput("a corpus needs at least 5 sessions");
  if (mix.verbs.empty() || mix.preps.empty() || mix.rates.empty())
    throw InvalidInput("corpus mix lists must be nonempty");

  std::vector<SyntheticSession> out;
  out.reserve(n_sessions);
  const int nv = static_cast<int>(mix.verbs.size());
  const int np = static_cast<int>(mix.preps.size());
  const int nr = static_cast<int>(mix.rates.size());
  for (int i = 0; i < n_sessions; ++i) {
    ScenarioSpec sp;
    sp.verb = mix.verbs[i % nv];
    sp.preposition = mix.preps[(i / nv) % np];
    sp.object_kind = sp.verb == "roll" ? "cylinder" : "cube";
    sp.actor_involved = sp.verb == "push" || sp.verb == "pull";
    sp.rate_hz = mix.rates[i % nr];
    sp.duration_s = sp.preposition == "past" ? 60.0 / 24.0 : 40.0 / 24.0;
    sp.sigma = mix.sigma;
    sp.dropout = mix.dropout;
    sp.seed = derive_seed(master_seed, static_cast<std::uint64_t>(i));
    char id[32];
    std::snprintf(id, sizeof id, "sim-%03d", i);
    sp.session_id = id;
    out.push_back(generate(sp));
  }
  return out;
}

std::string scenario_to_text(const ScenarioSpec& spec) {
  char num[64];
  std::string out;
  auto kv = [&out](const std::string& k, const std::string& v) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  };
  auto fmt = [&num](double v) {
    std::snprintf(num, sizeof num, "%.17g", v);
    return std::string(num);
  };
  kv("id", spec.session_id);
  kv("verb", spec.verb);
  kv("preposition", spec.preposition);
  kv("actor_involved", spec.actor_involved ? "1" : "0");
  kv("object_kind", spec.object_kind);
  kv("duration_s", fmt(spec.duration_s));
  kv("rate_hz", fmt(spec.rate_hz));
  kv("sigma", fmt(spec.sigma));
  kv("dropout", fmt(spec.dropout));
  kv("seed", std::to_string(spec.seed));
  return out;
}

}  // namespace qsrev
