#include "qsrevents/preprocess.hpp"

#include <cmath>

#include "qsrevents/error.hpp"

namespace qsrev {

Session interpolate_gaps(const Session& s) {
  validate_session(s);
  Session out = s;
  int n_points = s.schema.point_count();
  int n_frames = static_cast<int>(s.frames.size());
  if (n_frames == 0) return out;
  for (int p = 0; p < n_points; ++p) {
    if (!s.frames.front().tracked[p] || !s.frames.back().tracked[p])
      throw BoundaryExtrapolationError(
          "point " + s.schema.point_ids()[p] +
          " untracked at a sequence boundary; trim the session first");
    int prev_tracked = 0;
    for (int i = 1; i < n_frames; ++i) {
      if (!s.frames[i].tracked[p]) continue;
      if (i > prev_tracked + 1) {
        const Frame& a = s.frames[prev_tracked];
        const Frame& b = s.frames[i];
        for (int g = prev_tracked + 1; g < i; ++g) {
          double w = (s.frames[g].t - a.t) / (b.t - a.t);
          out.frames[g].points[p] = a.points[p] * (1.0 - w) + b.points[p] * w;
          out.frames[g].tracked[p] = 1;
        }
      }
      prev_tracked = i;
    }
  }
  return out;
}

Session resample(const Session& s, double rate_hz) {
  validate_session(s);
  if (s.frames.size() < 2)
    throw InvalidInput("resample needs at least 2 frames");
  if (!(rate_hz > 0.0)) throw InvalidInput("resample rate must be positive");
  Session out;
  out.id = s.id;
  out.rate_hz = rate_hz;
  out.schema = s.schema;
  out.spans = s.spans;

  double t0 = s.frames.front().t;
  double t_end = s.frames.back().t;
  double dt = 1.0 / rate_hz;
  int count = static_cast<int>(std::floor((t_end - t0) * rate_hz + 1e-9)) + 1;
  int n_points = s.schema.point_count();

  size_t hi = 1;  // frames[hi-1].t <= t <= frames[hi].t
  for (int k = 0; k < count; ++k) {
    double t = t0 + k * dt;
    if (t > t_end) t = t_end;
    while (hi + 1 < s.frames.size() && s.frames[hi].t < t) ++hi;
    const Frame& a = s.frames[hi - 1];
    const Frame& b = s.frames[hi];
    double w = (t - a.t) / (b.t - a.t);
    Frame f;
    f.t = t;
    f.points.reserve(n_points);
    f.tracked.reserve(n_points);
    for (int p = 0; p < n_points; ++p) {
      f.points.push_back(a.points[p] * (1.0 - w) + b.points[p] * w);
      f.tracked.push_back(a.tracked[p] && b.tracked[p] ? 1 : 0);
    }
    out.frames.push_back(std::move(f));
  }
  return out;
}

std::vector<Segment> slice(const Session& s) {
  validate_session(s);
  int n = static_cast<int>(s.frames.size());
  for (int i = 1; i < n; ++i) {
    double dt = s.frames[i].t - s.frames[i - 1].t;
    if (std::abs(dt - 1.0 / 24.0) > 1e-9)
      throw InvalidInput("slice expects a session resampled to 24 fps");
  }
  std::vector<Segment> out;
  for (int start = 0; start + kSegmentFrames <= n; start += kSegmentFrames) {
    double mid =
        0.5 * (s.frames[start].t + s.frames[start + kSegmentFrames - 1].t);
    const Span* found = nullptr;
    for (const Span& sp : s.spans)
      if (sp.start_t <= mid && mid <= sp.end_t) {
        found = &sp;
        break;
      }
    if (!found) continue;
    Segment seg;
    seg.session_id = s.id;
    seg.start_frame = start;
    seg.schema = s.schema;
    seg.frames.assign(s.frames.begin() + start,
                      s.frames.begin() + start + kSegmentFrames);
    seg.label = found->label;
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace qsrev
