#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "qsrevents/calculi.hpp"
#include "qsrevents/config.hpp"
#include "qsrevents/error.hpp"
#include "qsrevents/features.hpp"
#include "qsrevents/labels.hpp"
#include "qsrevents/preprocess.hpp"
#include "qsrevents/session.hpp"
#include "qsrevents/sim.hpp"

using namespace qsrev;

namespace {

// flattened point layout: performer joints 0..3, O1 markers 4..7, O2 8..11
constexpr int kO1Base = 4;
constexpr int kO2Base = 8;
constexpr int kHandRight = 3;

Vec3 entity_centroid(const Frame& f, int base) {
  Vec3 c;
  for (int i = 0; i < 4; ++i) c += f.points[base + i];
  return c / 4.0;
}

double o1o2_dist(const Frame& f) {
  return (entity_centroid(f, kO1Base) - entity_centroid(f, kO2Base)).norm();
}

ScenarioSpec clean_spec(const std::string& verb, const std::string& prep,
                        std::uint64_t seed = 1) {
  ScenarioSpec sp;
  sp.verb = verb;
  sp.preposition = prep;
  sp.object_kind = verb == "roll" ? "cylinder" : "cube";
  sp.actor_involved = verb == "push" || verb == "pull";
  sp.duration_s = prep == "past" ? 60.0 / 24.0 : 40.0 / 24.0;
  sp.sigma = 0.0;
  sp.dropout = 0.0;
  sp.seed = seed;
  sp.session_id = "t-" + verb + "-" + prep;
  return sp;
}

// Frames in which the object is in motion: push/pull spend the first third
// of a second reaching while the object waits, everything else moves from
// the first frame.
std::vector<int> motion_frames(const SyntheticSession& ss) {
  const bool reaches = ss.spec.verb == "push" || ss.spec.verb == "pull";
  const double t0 = reaches ? 8.0 / 24.0 - 1e-9 : -1.0;
  std::vector<int> idx;
  for (int f = 0; f < static_cast<int>(ss.session.frames.size()); ++f)
    if (ss.session.frames[f].t >= t0) idx.push_back(f);
  return idx;
}

// 2D projection that keeps the roll plane visible: component along the
// motion direction in the table plane, and height.
Vec2 motion_plane(const Session& s, const Vec3& v) {
  const Vec3 d = entity_centroid(s.frames.back(), kO1Base) -
                 entity_centroid(s.frames.front(), kO1Base);
  const double n = std::hypot(d.x, d.y);
  REQUIRE(n > 1e-9);
  return {(v.x * d.x + v.y * d.y) / n, v.z};
}

std::vector<CardinalDir2D> pair_symbols(const Session& s) {
  std::vector<CardinalDir2D> syms;
  for (const Frame& f : s.frames) {
    const Vec3 d = f.points[kO1Base + 2] - f.points[kO1Base];
    syms.push_back(cardir2d(Vec2{0.0, 0.0}, motion_plane(s, d)));
  }
  return syms;
}

}  // namespace

TEST_CASE("generated sessions are well formed") {
  const SyntheticSession ss = generate(clean_spec("push", "toward"));
  const Session& s = ss.session;
  CHECK(s.id == "t-push-toward");
  CHECK(s.rate_hz == 24.0);
  REQUIRE(s.schema.entities.size() == 3);
  CHECK(s.schema.entities[0].name == "performer");
  CHECK(s.schema.entities[1].name == "O1");
  CHECK(s.schema.entities[2].name == "O2");
  CHECK(s.schema.point_count() == 12);
  CHECK(s.frames.size() == 41);
  for (size_t f = 0; f < s.frames.size(); ++f) {
    CHECK(s.frames[f].t == doctest::Approx(f / 24.0).epsilon(1e-12));
    for (std::uint8_t tr : s.frames[f].tracked) CHECK(tr == 1);
    for (const Vec3& p : s.frames[f].points) CHECK(p.finite());
  }
  CHECK_NOTHROW(validate_session(s));
  REQUIRE(s.spans.size() == 1);
  const LabelTuple& l = s.spans[0].label;
  CHECK(l.subject == entity_index("performer"));
  CHECK(l.verb == verb_index("push"));
  CHECK(l.object == entity_index("O1"));
  CHECK(l.preposition == prep_index("toward"));
  CHECK(l.locative == entity_index("O2"));
  CHECK(satisfies_hard_constraints(l));
}

TEST_CASE("object-only verbs describe the object as subject") {
  for (const char* verb : {"slide", "roll"}) {
    const SyntheticSession ss = generate(clean_spec(verb, "away_from"));
    REQUIRE(ss.session.spans.size() == 1);
    const LabelTuple& l = ss.session.spans[0].label;
    CHECK(l.subject == entity_index("O1"));
    CHECK(l.verb == verb_index(verb));
    CHECK(l.object == kEntityNone);
    CHECK(l.preposition == prep_index("away_from"));
    CHECK(l.locative == entity_index("O2"));
    CHECK(satisfies_hard_constraints(l));
  }
}

TEST_CASE("unrelated placement drops preposition and locative together") {
  const SyntheticSession ss = generate(clean_spec("slide", "None"));
  REQUIRE(ss.session.spans.size() == 1);
  const LabelTuple& l = ss.session.spans[0].label;
  CHECK(l.preposition == kPrepNone);
  CHECK(l.locative == kEntityNone);
  CHECK(satisfies_hard_constraints(l));
}

TEST_CASE("distance profiles match the preposition") {
  int checked = 0;
  for (const char* verb : {"push", "pull", "slide", "roll"}) {
    for (const char* prep : {"toward", "away_from", "past"}) {
      ScenarioSpec sp = clean_spec(verb, prep, 20 + checked);
      const SyntheticSession ss = generate(sp);
      const std::vector<int> idx = motion_frames(ss);
      REQUIRE(idx.size() >= 20);
      std::vector<double> d;
      for (int f : idx) d.push_back(o1o2_dist(ss.session.frames[f]));

      if (std::string(prep) == "toward") {
        for (size_t i = 1; i < d.size(); ++i) CHECK(d[i] < d[i - 1]);
      } else if (std::string(prep) == "away_from") {
        for (size_t i = 1; i < d.size(); ++i) CHECK(d[i] > d[i - 1]);
      } else {
        const size_t k = std::min_element(d.begin(), d.end()) - d.begin();
        CHECK(k > 0);
        CHECK(k < d.size() - 1);
        for (size_t i = 1; i <= k; ++i) CHECK(d[i] < d[i - 1]);
        for (size_t i = k + 1; i < d.size(); ++i) CHECK(d[i] > d[i - 1]);
      }
      ++checked;
    }
  }
  CHECK(checked == 12);
}

TEST_CASE("profiles stay strict at a fine native rate") {
  ScenarioSpec sp = clean_spec("slide", "toward", 91);
  sp.rate_hz = 60.0;
  const SyntheticSession ss = generate(sp);
  CHECK(ss.session.frames.size() == 101);
  double prev = o1o2_dist(ss.session.frames[0]);
  for (size_t f = 1; f < ss.session.frames.size(); ++f) {
    const double cur = o1o2_dist(ss.session.frames[f]);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("push keeps the hand on the object and drives it away") {
  const SyntheticSession ss = generate(clean_spec("push", "away_from", 7));
  const Session& s = ss.session;

  // reach: the hand starts clear of the object and closes in
  const double d0 =
      (s.frames[0].points[kHandRight] - entity_centroid(s.frames[0], kO1Base))
          .norm();
  CHECK(d0 > 0.05);

  const std::vector<int> idx = motion_frames(ss);
  Vec3 rig_mid =
      (s.frames[0].points[0] + s.frames[0].points[1]) * 0.5;  // shoulders
  double prev_dist = -1.0;
  double prev_rig = -1.0;
  for (int f : idx) {
    const Vec3 c = entity_centroid(s.frames[f], kO1Base);
    CHECK((s.frames[f].points[kHandRight] - c).norm() <= 0.05);
    const double obj_o2 = o1o2_dist(s.frames[f]);
    if (prev_dist >= 0.0) CHECK(obj_o2 > prev_dist);
    prev_dist = obj_o2;
    const double rig_d = (c - rig_mid).norm();
    if (prev_rig >= 0.0) CHECK(rig_d >= prev_rig);  // recedes from the rig
    prev_rig = rig_d;
  }
}

TEST_CASE("pull moves the object toward the rig") {
  const SyntheticSession ss = generate(clean_spec("pull", "toward", 8));
  const Session& s = ss.session;
  const Vec3 rig_mid = (s.frames[0].points[0] + s.frames[0].points[1]) * 0.5;
  const std::vector<int> idx = motion_frames(ss);
  double prev = -1.0;
  for (int f : idx) {
    const Vec3 c = entity_centroid(s.frames[f], kO1Base);
    CHECK((s.frames[f].points[kHandRight] - c).norm() <= 0.05);
    const double rig_d = (c - rig_mid).norm();
    if (prev >= 0.0) CHECK(rig_d <= prev);
    prev = rig_d;
  }
  // and it actually got meaningfully closer
  const double first =
      (entity_centroid(s.frames[idx.front()], kO1Base) - rig_mid).norm();
  const double last =
      (entity_centroid(s.frames[idx.back()], kO1Base) - rig_mid).norm();
  CHECK(first - last > 0.3);
}

TEST_CASE("slide shows one marker-pair bearing, roll cycles through them") {
  const SyntheticSession slid = generate(clean_spec("slide", "toward", 33));
  std::set<CardinalDir2D> slide_syms;
  for (CardinalDir2D c : pair_symbols(slid.session)) slide_syms.insert(c);
  CHECK(slide_syms.size() == 1);
  CHECK(slide_syms.count(CardinalDir2D::EQ) == 0);

  const SyntheticSession rolled = generate(clean_spec("roll", "toward", 34));
  const Session& s = rolled.session;

  // unwrapped bearing of the diagonal marker pair sweeps travel/radius
  double sweep = 0.0;
  double prev_angle = 0.0;
  for (size_t f = 0; f < s.frames.size(); ++f) {
    const Vec3 d = s.frames[f].points[kO1Base + 2] - s.frames[f].points[kO1Base];
    const Vec2 v = motion_plane(s, d);
    const double ang = std::atan2(v.y, v.x);
    if (f > 0) {
      double step = ang - prev_angle;
      while (step > 3.14159265358979323846) step -= 2 * 3.14159265358979323846;
      while (step < -3.14159265358979323846) step += 2 * 3.14159265358979323846;
      sweep += step;
    }
    prev_angle = ang;
  }
  CHECK(std::abs(std::abs(sweep) - 0.45 / 0.05) < 1e-9);
  CHECK(std::abs(sweep) > 2 * 3.14159265358979323846);

  const std::vector<CardinalDir2D> syms = pair_symbols(s);
  std::set<CardinalDir2D> roll_syms(syms.begin(), syms.end());
  CHECK(roll_syms.size() >= 4);
  CHECK(roll_syms.count(CardinalDir2D::EQ) == 0);
}

TEST_CASE("roll past has one closest approach and a periodic bearing cycle") {
  const SyntheticSession ss = generate(clean_spec("roll", "past", 35));
  const Session& s = ss.session;

  std::vector<double> d;
  for (const Frame& f : s.frames) d.push_back(o1o2_dist(f));
  const size_t k = std::min_element(d.begin(), d.end()) - d.begin();
  CHECK(k > 0);
  CHECK(k < d.size() - 1);
  for (size_t i = 1; i <= k; ++i) CHECK(d[i] < d[i - 1]);
  for (size_t i = k + 1; i < d.size(); ++i) CHECK(d[i] > d[i - 1]);

  // collapse the symbol stream to runs; a rolling pair repeats its 8-sector
  // cycle, so run r and run r+8 carry the same symbol
  const std::vector<CardinalDir2D> syms = pair_symbols(s);
  std::vector<CardinalDir2D> runs;
  for (CardinalDir2D c : syms)
    if (runs.empty() || runs.back() != c) runs.push_back(c);
  CHECK(runs.size() >= 9);  // more than one full revolution witnessed
  for (size_t r = 0; r + 8 < runs.size(); ++r) CHECK(runs[r] == runs[r + 8]);
}

TEST_CASE("corrupt with zero noise and dropout is the identity") {
  const SyntheticSession ss = generate(clean_spec("slide", "toward", 50));
  const Session out = corrupt(ss.session, 0.0, 0.0, 999);
  REQUIRE(out.frames.size() == ss.session.frames.size());
  for (size_t f = 0; f < out.frames.size(); ++f) {
    for (size_t p = 0; p < out.frames[f].points.size(); ++p) {
      CHECK(out.frames[f].points[p].x == ss.session.frames[f].points[p].x);
      CHECK(out.frames[f].points[p].y == ss.session.frames[f].points[p].y);
      CHECK(out.frames[f].points[p].z == ss.session.frames[f].points[p].z);
      CHECK(out.frames[f].tracked[p] == 1);
    }
  }
}

TEST_CASE("corrupt jitter has the requested scale") {
  const SyntheticSession ss = generate(clean_spec("slide", "toward", 51));
  const Session out = corrupt(ss.session, 0.005, 0.0, 123);
  double sq = 0.0;
  int n = 0;
  for (size_t f = 0; f < out.frames.size(); ++f) {
    for (size_t p = 0; p < out.frames[f].points.size(); ++p) {
      const Vec3 delta =
          out.frames[f].points[p] - ss.session.frames[f].points[p];
      sq += delta.x * delta.x + delta.y * delta.y + delta.z * delta.z;
      n += 3;
    }
  }
  REQUIRE(n >= 1000);
  const double rms = std::sqrt(sq / n);
  CHECK(rms > 0.005 * 0.8);
  CHECK(rms < 0.005 * 1.2);
}

TEST_CASE("corrupt dropout hits the requested rate and spares the ends") {
  ScenarioSpec sp = clean_spec("slide", "toward", 52);
  sp.rate_hz = 60.0;  // 101 frames so the interior sample is large enough
  const SyntheticSession ss = generate(sp);

  int missing = 0, interior = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const Session out = corrupt(ss.session, 0.0, 0.2, seed);
    const size_t last = out.frames.size() - 1;
    for (std::uint8_t tr : out.frames[0].tracked) CHECK(tr == 1);
    for (std::uint8_t tr : out.frames[last].tracked) CHECK(tr == 1);
    for (size_t f = 1; f < last; ++f)
      for (std::uint8_t tr : out.frames[f].tracked) {
        ++interior;
        if (!tr) ++missing;
      }
  }
  REQUIRE(interior >= 1000);
  const double rate = static_cast<double>(missing) / interior;
  CHECK(rate > 0.15);
  CHECK(rate < 0.25);
}

TEST_CASE("incompatible scenario settings are rejected") {
  auto bad = [](auto mutate) {
    ScenarioSpec sp = clean_spec("push", "toward");
    mutate(sp);
    CHECK_THROWS_AS(generate(sp), InvalidInput);
  };
  bad([](ScenarioSpec& sp) { sp.verb = "roll"; });  // cube stays
  bad([](ScenarioSpec& sp) {
    sp.verb = "slide";
    sp.object_kind = "cylinder";
  });
  bad([](ScenarioSpec& sp) { sp.verb = "None"; });
  bad([](ScenarioSpec& sp) { sp.verb = "shove"; });
  bad([](ScenarioSpec& sp) { sp.preposition = "under"; });
  bad([](ScenarioSpec& sp) { sp.object_kind = "sphere"; });
  bad([](ScenarioSpec& sp) { sp.duration_s = 0.0; });
  bad([](ScenarioSpec& sp) { sp.rate_hz = -24.0; });
  bad([](ScenarioSpec& sp) { sp.sigma = -0.001; });
  bad([](ScenarioSpec& sp) { sp.dropout = 0.5; });
  CHECK_THROWS_AS(corrupt(generate(clean_spec("push", "toward")).session, 0.0,
                          0.5, 1),
                  InvalidInput);
}

TEST_CASE("corpus is balanced, labeled consistently, and deterministic") {
  const CorpusMix mix;
  const std::vector<SyntheticSession> corpus = make_corpus(30, mix, 42);
  REQUIRE(corpus.size() == 30);

  std::map<std::string, int> verb_count;
  std::set<std::string> ids;
  for (const SyntheticSession& ss : corpus) {
    ++verb_count[ss.spec.verb];
    ids.insert(ss.session.id);
    CHECK_NOTHROW(validate_session(ss.session));
    REQUIRE(!ss.session.spans.empty());
    for (const Span& span : ss.session.spans)
      CHECK(satisfies_hard_constraints(span.label));
  }
  CHECK(ids.size() == 30);
  for (const char* verb : {"push", "pull", "slide", "roll"}) {
    CHECK(verb_count[verb] >= 7);
    CHECK(verb_count[verb] <= 8);
  }

  const std::vector<SyntheticSession> again = make_corpus(30, mix, 42);
  for (size_t i = 0; i < corpus.size(); ++i) {
    CHECK(session_to_json(corpus[i].session) ==
          session_to_json(again[i].session));
    CHECK(scenario_to_text(corpus[i].spec) ==
          scenario_to_text(again[i].spec));
  }

  const std::vector<SyntheticSession> other = make_corpus(30, mix, 43);
  bool differs = false;
  for (size_t i = 0; i < corpus.size() && !differs; ++i)
    differs = session_to_json(corpus[i].session) !=
              session_to_json(other[i].session);
  CHECK(differs);

  CHECK_THROWS_AS(make_corpus(4, mix, 1), InvalidInput);
}

TEST_CASE("every feature kind extracts from every corpus segment") {
  CorpusMix mix;
  const std::vector<SyntheticSession> corpus = make_corpus(8, mix, 77);
  const PipelineConfig cfg;

  int segments = 0;
  std::map<FeatureKind, int> cols_seen;
  for (const SyntheticSession& ss : corpus) {
    Session prepped = resample(interpolate_gaps(ss.session), cfg.rate_hz);
    const std::vector<Segment> segs = slice(prepped);
    CHECK(!segs.empty());
    for (const Segment& seg : segs) {
      ++segments;
      CHECK(satisfies_hard_constraints(seg.label));
      for (FeatureKind kind : all_feature_kinds()) {
        const FeatureMatrix m = extract(kind, seg, cfg);
        CHECK(m.rows == (is_event_kind(kind) ? 1 : kSegmentFrames));
        CHECK(m.cols > 0);
        CHECK(m.cols == static_cast<int>(m.legend.size()));
        if (cols_seen.count(kind))
          CHECK(cols_seen[kind] == m.cols);
        else
          cols_seen[kind] = m.cols;
        for (double v : m.values) CHECK(std::isfinite(v));
      }
    }
  }
  // 2 segments per short session, 3 per pass session
  CHECK(segments >= 16);
  CHECK(cols_seen.size() == 7);
}
