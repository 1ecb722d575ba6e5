#pragma once

#include <vector>

#include "qsrevents/session.hpp"

namespace qsrev {

inline constexpr int kSegmentFrames = 20;

// One classification unit: 20 consecutive frames at the target rate plus the
// gold label of the span they fall in.
struct Segment {
  std::string session_id;
  int start_frame = 0;
  SessionSchema schema;
  std::vector<Frame> frames;
  LabelTuple label;
};

// Fills untracked runs by linear interpolation between the nearest tracked
// neighbors. A point untracked at either sequence end cannot be recovered
// and raises BoundaryExtrapolationError.
Session interpolate_gaps(const Session& s);

// Uniform timestamps at 1/rate from the first source stamp, values linearly
// interpolated between bracketing source frames.
Session resample(const Session& s, double rate_hz);

// Non-overlapping 20-frame windows; the trailing remainder is discarded.
// Each window takes the label of the span containing its midpoint; windows
// outside every span are dropped.
std::vector<Segment> slice(const Session& s);

}  // namespace qsrev
