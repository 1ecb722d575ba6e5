#include "qsrevents/features.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "qsrevents/calculi.hpp"
#include "qsrevents/error.hpp"
#include "qsrevents/geometry.hpp"

namespace qsrev {

const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::Raw3D: return "3D-Raw";
    case FeatureKind::Quant3D: return "3D-Quant";
    case FeatureKind::Quant2D: return "2D-Quant";
    case FeatureKind::Qual3D: return "3D-Qual";
    case FeatureKind::Qual2D: return "2D-Qual";
    case FeatureKind::EventQual3D: return "3D-Event-Qual";
    case FeatureKind::EventQual2D: return "2D-Event-Qual";
  }
  return "?";
}

FeatureKind feature_kind_from(const std::string& name) {
  for (FeatureKind k : all_feature_kinds())
    if (name == to_string(k)) return k;
  std::string valid;
  for (FeatureKind k : all_feature_kinds()) {
    if (!valid.empty()) valid += ", ";
    valid += to_string(k);
  }
  throw InvalidInput("unknown feature kind '" + name + "' (valid: " + valid +
                     ")");
}

const std::vector<FeatureKind>& all_feature_kinds() {
  static const std::vector<FeatureKind> kinds{
      FeatureKind::Raw3D,       FeatureKind::Quant3D,
      FeatureKind::Quant2D,     FeatureKind::Qual3D,
      FeatureKind::Qual2D,      FeatureKind::EventQual3D,
      FeatureKind::EventQual2D,
  };
  return kinds;
}

bool is_event_kind(FeatureKind k) {
  return k == FeatureKind::EventQual3D || k == FeatureKind::EventQual2D;
}

namespace {

// Raw and derived point trajectories over the segment, one position per frame.
struct Tracks {
  std::vector<std::string> names;
  std::vector<std::vector<Vec3>> pos;  // [track][frame]

  int add(const std::string& name, std::vector<Vec3> p) {
    names.push_back(name);
    pos.push_back(std::move(p));
    return static_cast<int>(names.size()) - 1;
  }
};

// One term of the event-model factorization with its vector/pair layout.
struct Factor {
  std::string name;
  std::vector<int> members;                       // track indices
  std::vector<std::pair<int, int>> quant_pairs;   // member-index pairs, b - a
  std::vector<std::pair<int, int>> qual_pairs;
};

struct Layout {
  Tracks tracks;
  std::vector<Factor> factors;
};

int schema_point_offset(const SessionSchema& schema, const std::string& entity,
                        const std::string& point) {
  int i = 0;
  for (const SchemaEntity& e : schema.entities)
    for (const std::string& p : e.points) {
      if (e.name == entity && p == point) return i;
      ++i;
    }
  throw InvalidInput("segment schema lacks point " + entity + "/" + point);
}

const SchemaEntity& schema_entity(const SessionSchema& schema,
                                  const std::string& name) {
  for (const SchemaEntity& e : schema.entities)
    if (e.name == name) return e;
  throw InvalidInput("segment schema lacks entity " + name);
}

Layout build_layout(const Segment& seg) {
  int n_frames = static_cast<int>(seg.frames.size());
  Layout lay;

  auto raw_track = [&](const std::string& entity, const std::string& point) {
    int off = schema_point_offset(seg.schema, entity, point);
    std::vector<Vec3> p(n_frames);
    for (int f = 0; f < n_frames; ++f) p[f] = seg.frames[f].points[off];
    return lay.tracks.add(entity + "/" + point, std::move(p));
  };

  int sl = raw_track("performer", "shoulder-left");
  int sr = raw_track("performer", "shoulder-right");
  int lt = raw_track("performer", "hand-tip-left");
  int rt = raw_track("performer", "hand-tip-right");

  std::vector<Vec3> mid(n_frames);
  for (int f = 0; f < n_frames; ++f)
    mid[f] = (lay.tracks.pos[sl][f] + lay.tracks.pos[sr][f]) * 0.5;
  int sm = lay.tracks.add("mid", std::move(mid));

  auto object_tracks = [&](const std::string& obj, std::vector<int>& markers) {
    const SchemaEntity& e = schema_entity(seg.schema, obj);
    if (e.points.size() != 4)
      throw InvalidInput("object " + obj + " must carry 4 marker points");
    for (const std::string& p : e.points) markers.push_back(raw_track(obj, p));
    std::vector<Vec3> c(n_frames);
    for (int f = 0; f < n_frames; ++f) {
      Vec3 sum;
      for (int m : markers) sum += lay.tracks.pos[m][f];
      c[f] = sum * 0.25;
    }
    return lay.tracks.add(obj + "/centroid", std::move(c));
  };

  std::vector<int> m1, m2;
  int c1 = object_tracks("O1", m1);
  int c2 = object_tracks("O2", m2);

  // rig: middle of the shoulders plus both hand tips, all pairings
  lay.factors.push_back(
      {"rig", {sm, lt, rt}, {{0, 1}, {0, 2}, {1, 2}}, {{0, 1}, {0, 2}, {1, 2}}});
  // each object: the two diagonals of its 4 corner markers
  lay.factors.push_back(
      {"O1", m1, {{0, 2}, {1, 3}}, {{0, 2}, {1, 3}}});
  lay.factors.push_back(
      {"O2", m2, {{0, 2}, {1, 3}}, {{0, 2}, {1, 3}}});
  // object pair: centroid against centroid
  lay.factors.push_back({"O1O2", {c1, c2}, {{0, 1}}, {{0, 1}}});
  // rig against each object: vectors from the rig points to the centroid,
  // qualitative relations from the hand tips only
  lay.factors.push_back(
      {"RO1", {sm, lt, rt, c1}, {{0, 3}, {1, 3}, {2, 3}}, {{1, 3}, {2, 3}}});
  lay.factors.push_back(
      {"RO2", {sm, lt, rt, c2}, {{0, 3}, {1, 3}, {2, 3}}, {{1, 3}, {2, 3}}});
  return lay;
}

// short display name for a track inside legend entries
std::string track_label(const Tracks& tracks, int idx) {
  const std::string& n = tracks.names[idx];
  size_t slash = n.find('/');
  if (slash == std::string::npos) return n;
  std::string entity = n.substr(0, slash);
  std::string point = n.substr(slash + 1);
  if (entity == "performer") {
    if (point == "hand-tip-left") return "ltip";
    if (point == "hand-tip-right") return "rtip";
    if (point == "shoulder-left") return "lsho";
    if (point == "shoulder-right") return "rsho";
  }
  if (point == "centroid") return entity + "c";
  return entity + "." + point;
}

std::string voxel_label(int index) {
  CardinalDir3D d;
  d.ns = index / 9 - 1;
  d.ew = (index % 9) / 3 - 1;
  d.ab = index % 3 - 1;
  return to_string(d);
}

const char* kSignLabels[3] = {"-", "0", "+"};
const char* kAngleLabels[4] = {"-", "0", "+", "deg"};
const char* kMosLabels[2] = {"moving", "static"};

int angle_sign_index(AngleSign s) {
  switch (s) {
    case AngleSign::Minus: return 0;
    case AngleSign::Zero: return 1;
    case AngleSign::Plus: return 2;
    case AngleSign::Deg: return 3;
  }
  return 3;
}

std::string bin_label(int b) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "bin%02d", b);
  return buf;
}

// Column writer that grows the legend on the first row only, keeping values
// and column names aligned by construction.
struct RowBuilder {
  FeatureMatrix& m;
  bool first_row;
  std::vector<double> row;

  void push(const std::string& name, double v) {
    if (first_row) m.legend.push_back(name);
    row.push_back(v);
  }
  void push_one_hot(const std::string& prefix, const char* const* labels,
                    int size, int idx) {
    for (int i = 0; i < size; ++i)
      push(prefix + "|" + labels[i], i == idx ? 1.0 : 0.0);
  }
  template <typename LabelFn>
  void push_one_hot_fn(const std::string& prefix, LabelFn label, int size,
                       int idx) {
    for (int i = 0; i < size; ++i)
      push(prefix + "|" + label(i), i == idx ? 1.0 : 0.0);
  }
  void commit() {
    m.values.insert(m.values.end(), row.begin(), row.end());
    if (first_row) m.cols = static_cast<int>(row.size());
    row.clear();
  }
};

FeatureMatrix extract_raw3d(const Segment& seg) {
  FeatureMatrix m;
  m.kind = FeatureKind::Raw3D;
  m.rows = static_cast<int>(seg.frames.size());
  std::vector<std::string> ids = seg.schema.point_ids();
  const char* comp[3] = {"x", "y", "z"};
  for (int f = 0; f < m.rows; ++f) {
    RowBuilder rb{m, f == 0, {}};
    for (size_t p = 0; p < ids.size(); ++p)
      for (int c = 0; c < 3; ++c) {
        const Vec3& v = seg.frames[f].points[p];
        rb.push("raw|" + ids[p] + "|" + comp[c],
                c == 0 ? v.x : (c == 1 ? v.y : v.z));
      }
    rb.commit();
  }
  return m;
}

FeatureMatrix extract_quant3d(const Segment& seg, const Layout& lay) {
  FeatureMatrix m;
  m.kind = FeatureKind::Quant3D;
  m.rows = static_cast<int>(seg.frames.size());
  for (int f = 0; f < m.rows; ++f) {
    RowBuilder rb{m, f == 0, {}};
    for (const Factor& fac : lay.factors)
      for (auto [ia, ib] : fac.quant_pairs) {
        int ta = fac.members[ia], tb = fac.members[ib];
        Vec3 d = lay.tracks.pos[tb][f] - lay.tracks.pos[ta][f];
        std::string base = fac.name + "|" + track_label(lay.tracks, ta) +
                           "->" + track_label(lay.tracks, tb);
        rb.push(base + "|x", d.x);
        rb.push(base + "|y", d.y);
        rb.push(base + "|z", d.z);
      }
    rb.commit();
  }
  return m;
}

// Per-factor plane embeddings, fitted on the factor's own points pooled over
// the whole segment.
std::vector<std::vector<std::vector<Vec2>>> embed_factors(const Layout& lay,
                                                          int n_frames) {
  std::vector<std::vector<std::vector<Vec2>>> em(lay.factors.size());
  for (size_t fi = 0; fi < lay.factors.size(); ++fi) {
    const Factor& fac = lay.factors[fi];
    std::vector<Vec3> pool;
    pool.reserve(fac.members.size() * n_frames);
    for (int t : fac.members)
      for (int f = 0; f < n_frames; ++f) pool.push_back(lay.tracks.pos[t][f]);
    PcaModel pca = pca_fit(pool);
    em[fi].resize(fac.members.size());
    for (size_t mi = 0; mi < fac.members.size(); ++mi) {
      em[fi][mi].resize(n_frames);
      for (int f = 0; f < n_frames; ++f)
        em[fi][mi][f] = pca_project(pca, lay.tracks.pos[fac.members[mi]][f]);
    }
  }
  return em;
}

FeatureMatrix extract_quant2d(const Segment& seg, const Layout& lay) {
  FeatureMatrix m;
  m.kind = FeatureKind::Quant2D;
  m.rows = static_cast<int>(seg.frames.size());
  auto em = embed_factors(lay, m.rows);
  for (int f = 0; f < m.rows; ++f) {
    RowBuilder rb{m, f == 0, {}};
    for (size_t fi = 0; fi < lay.factors.size(); ++fi) {
      const Factor& fac = lay.factors[fi];
      for (auto [ia, ib] : fac.quant_pairs) {
        Vec2 d = em[fi][ib][f] - em[fi][ia][f];
        std::string base =
            fac.name + "|" + track_label(lay.tracks, fac.members[ia]) + "->" +
            track_label(lay.tracks, fac.members[ib]);
        rb.push(base + "|u", d.x);
        rb.push(base + "|v", d.y);
      }
    }
    rb.commit();
  }
  return m;
}

QtcParams qtc_params(const PipelineConfig& cfg) {
  QtcParams p;
  p.theta = cfg.theta;
  p.beta = cfg.beta;
  return p;
}

FeatureMatrix extract_qual3d(const Segment& seg, const Layout& lay,
                             const PipelineConfig& cfg) {
  FeatureMatrix m;
  m.kind = FeatureKind::Qual3D;
  m.rows = static_cast<int>(seg.frames.size());
  QtcParams prm = qtc_params(cfg);
  for (int f = 0; f < m.rows; ++f) {
    RowBuilder rb{m, f == 0, {}};
    double dt = f > 0 ? seg.frames[f].t - seg.frames[f - 1].t : 1.0;
    for (const Factor& fac : lay.factors)
      for (auto [ia, ib] : fac.qual_pairs) {
        const std::vector<Vec3>& pa = lay.tracks.pos[fac.members[ia]];
        const std::vector<Vec3>& pb = lay.tracks.pos[fac.members[ib]];
        std::string la = track_label(lay.tracks, fac.members[ia]);
        std::string lb = track_label(lay.tracks, fac.members[ib]);
        std::string base = fac.name + "|" + la + "~" + lb;

        CardinalDir3D cd = cardir3d({pa[f]}, {pb[f]});
        rb.push_one_hot_fn(base + "|cardir3d", voxel_label, 27, cd.index());

        int mos_a = 1, mos_b = 1;  // first frame counts as static
        if (f > 0) {
          mos_a = mos(pa[f - 1], pa[f], dt, cfg.v_min) == MosState::Moving ? 0 : 1;
          mos_b = mos(pb[f - 1], pb[f], dt, cfg.v_min) == MosState::Moving ? 0 : 1;
        }
        rb.push_one_hot(base + "|mos(" + la + ")", kMosLabels, 2, mos_a);
        rb.push_one_hot(base + "|mos(" + lb + ")", kMosLabels, 2, mos_b);

        int bin = argd_bin((pb[f] - pa[f]).norm(), cfg.bin_width, cfg.bin_count);
        rb.push_one_hot_fn(base + "|argd", bin_label, cfg.bin_count, bin);

        Qtc3D q;  // frame 0 default: no motion, no orientation frames
        q.a = 0;
        q.b = 0;
        if (f == 1) {
          auto [a, b] = qtc_radial3d(pa[0], pa[1], pb[0], pb[1], prm);
          q.a = a;
          q.b = b;
        } else if (f >= 2) {
          std::array<TimedPoint, 3> ka{
              TimedPoint{seg.frames[f - 2].t, pa[f - 2]},
              TimedPoint{seg.frames[f - 1].t, pa[f - 1]},
              TimedPoint{seg.frames[f].t, pa[f]}};
          std::array<TimedPoint, 3> lb3{
              TimedPoint{seg.frames[f - 2].t, pb[f - 2]},
              TimedPoint{seg.frames[f - 1].t, pb[f - 1]},
              TimedPoint{seg.frames[f].t, pb[f]}};
          q = qtc_3d(ka, lb3, prm);
        }
        rb.push_one_hot(base + "|qtc3d.A", kSignLabels, 3, q.a + 1);
        rb.push_one_hot(base + "|qtc3d.B", kSignLabels, 3, q.b + 1);
        rb.push_one_hot(base + "|qtc3d.yaw", kAngleLabels, 4,
                        angle_sign_index(q.yaw));
        rb.push_one_hot(base + "|qtc3d.pitch", kAngleLabels, 4,
                        angle_sign_index(q.pitch));
        rb.push_one_hot(base + "|qtc3d.roll", kAngleLabels, 4,
                        angle_sign_index(q.roll));
      }
    rb.commit();
  }
  return m;
}

FeatureMatrix extract_qual2d(const Segment& seg, const Layout& lay,
                             const PipelineConfig& cfg) {
  FeatureMatrix m;
  m.kind = FeatureKind::Qual2D;
  m.rows = static_cast<int>(seg.frames.size());
  QtcParams prm = qtc_params(cfg);
  auto em = embed_factors(lay, m.rows);
  auto cardir_label = [](int i) {
    return std::string(to_string(static_cast<CardinalDir2D>(i)));
  };
  for (int f = 0; f < m.rows; ++f) {
    RowBuilder rb{m, f == 0, {}};
    double dt = f > 0 ? seg.frames[f].t - seg.frames[f - 1].t : 1.0;
    for (size_t fi = 0; fi < lay.factors.size(); ++fi) {
      const Factor& fac = lay.factors[fi];
      for (auto [ia, ib] : fac.qual_pairs) {
        const std::vector<Vec2>& pa = em[fi][ia];
        const std::vector<Vec2>& pb = em[fi][ib];
        std::string la = track_label(lay.tracks, fac.members[ia]);
        std::string lb = track_label(lay.tracks, fac.members[ib]);
        std::string base = fac.name + "|" + la + "~" + lb;

        CardinalDir2D cd = cardir2d(pa[f], pb[f]);
        rb.push_one_hot_fn(base + "|cardir2d", cardir_label, 9,
                           static_cast<int>(cd));

        auto as3 = [](const Vec2& v) { return Vec3{v.x, v.y, 0.0}; };
        int mos_a = 1, mos_b = 1;
        if (f > 0) {
          mos_a = mos(as3(pa[f - 1]), as3(pa[f]), dt, cfg.v_min) ==
                          MosState::Moving
                      ? 0
                      : 1;
          mos_b = mos(as3(pb[f - 1]), as3(pb[f]), dt, cfg.v_min) ==
                          MosState::Moving
                      ? 0
                      : 1;
        }
        rb.push_one_hot(base + "|mos(" + la + ")", kMosLabels, 2, mos_a);
        rb.push_one_hot(base + "|mos(" + lb + ")", kMosLabels, 2, mos_b);

        int bin = argd_bin((pb[f] - pa[f]).norm(), cfg.bin_width, cfg.bin_count);
        rb.push_one_hot_fn(base + "|argd", bin_label, cfg.bin_count, bin);

        QtcC q;  // frame 0 default: all slots 0
        if (f > 0) q = qtc_c(pa[f - 1], pa[f], pb[f - 1], pb[f], prm);
        rb.push_one_hot(base + "|qtc2d.A", kSignLabels, 3, q.a + 1);
        rb.push_one_hot(base + "|qtc2d.B", kSignLabels, 3, q.b + 1);
        rb.push_one_hot(base + "|qtc2d.C", kSignLabels, 3, q.c + 1);
        rb.push_one_hot(base + "|qtc2d.D", kSignLabels, 3, q.d + 1);
      }
    }
    rb.commit();
  }
  return m;
}

FeatureMatrix extract_event(const Segment& seg, const Layout& lay,
                            const PipelineConfig& cfg, FeatureKind kind) {
  FeatureMatrix frame =
      kind == FeatureKind::EventQual3D
          ? extract_qual3d(seg, lay, cfg)
          : extract_qual2d(seg, lay, cfg);
  FeatureMatrix m;
  m.kind = kind;
  m.rows = 1;
  m.cols = frame.cols * 3;
  m.values.reserve(m.cols);
  m.legend.reserve(m.cols);
  int last = frame.rows - 1;
  for (int c = 0; c < frame.cols; ++c) {
    m.legend.push_back("first|" + frame.legend[c]);
    m.values.push_back(frame.at(0, c));
  }
  for (int c = 0; c < frame.cols; ++c) {
    m.legend.push_back("last|" + frame.legend[c]);
    m.values.push_back(frame.at(last, c));
  }
  for (int c = 0; c < frame.cols; ++c) {
    m.legend.push_back("diff|" + frame.legend[c]);
    m.values.push_back(frame.at(last, c) - frame.at(0, c));
  }
  return m;
}

}  // namespace

FeatureMatrix extract(FeatureKind kind, const Segment& seg,
                      const PipelineConfig& cfg) {
  if (seg.frames.empty()) throw InvalidInput("extract: empty segment");
  Layout lay = build_layout(seg);
  switch (kind) {
    case FeatureKind::Raw3D: return extract_raw3d(seg);
    case FeatureKind::Quant3D: return extract_quant3d(seg, lay);
    case FeatureKind::Quant2D: return extract_quant2d(seg, lay);
    case FeatureKind::Qual3D: return extract_qual3d(seg, lay, cfg);
    case FeatureKind::Qual2D: return extract_qual2d(seg, lay, cfg);
    case FeatureKind::EventQual3D:
    case FeatureKind::EventQual2D: return extract_event(seg, lay, cfg, kind);
  }
  throw InvalidInput("extract: unknown feature kind");
}

std::vector<EmbeddedFactor> embed_session(const Session& s) {
  if (s.frames.empty()) throw InvalidInput("embed_session: empty session");
  Segment seg;
  seg.session_id = s.id;
  seg.start_frame = 0;
  seg.schema = s.schema;
  seg.frames = s.frames;
  Layout lay = build_layout(seg);
  auto em = embed_factors(lay, static_cast<int>(seg.frames.size()));

  std::vector<EmbeddedFactor> out;
  out.reserve(lay.factors.size());
  for (size_t fi = 0; fi < lay.factors.size(); ++fi) {
    EmbeddedFactor ef;
    ef.factor = lay.factors[fi].name;
    for (size_t mi = 0; mi < lay.factors[fi].members.size(); ++mi) {
      EmbeddedTrace tr;
      tr.point = track_label(lay.tracks, lay.factors[fi].members[mi]);
      tr.pts = em[fi][mi];
      ef.traces.push_back(std::move(tr));
    }
    out.push_back(std::move(ef));
  }
  return out;
}

std::string feature_matrix_to_csv(const FeatureMatrix& m,
                                  std::uint64_t cfg_hash) {
  char head[128];
  std::snprintf(head, sizeof(head),
                "# kind=%s config=%016llx rows=%d cols=%d\n", to_string(m.kind),
                static_cast<unsigned long long>(cfg_hash), m.rows, m.cols);
  std::string out = head;
  for (int c = 0; c < m.cols; ++c) {
    if (c) out += ",";
    out += m.legend[c];
  }
  out += "\n";
  char buf[40];
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      if (c) out += ",";
      std::snprintf(buf, sizeof(buf), "%.17g", m.at(r, c));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void save_feature_csv(const FeatureMatrix& m, std::uint64_t cfg_hash,
                      const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write feature file: " + path);
  f << feature_matrix_to_csv(m, cfg_hash);
}

}  // namespace qsrev
