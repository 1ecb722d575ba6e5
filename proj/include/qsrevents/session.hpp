#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsrevents/labels.hpp"
#include "qsrevents/vec.hpp"

namespace qsrev {

// Labeled time range inside one session.
struct Span {
  double start_t = 0.0;
  double end_t = 0.0;
  LabelTuple label;
};

struct SchemaEntity {
  std::string name;
  std::vector<std::string> points;
};

struct SessionSchema {
  std::vector<SchemaEntity> entities;

  // flattened "entity/point" ids in schema order
  std::vector<std::string> point_ids() const;
  int point_count() const;
};

// One capture instant; points and tracked run parallel to the schema's
// flattened point order.
struct Frame {
  double t = 0.0;
  std::vector<Vec3> points;
  std::vector<std::uint8_t> tracked;
};

struct Session {
  std::string id;
  double rate_hz = 0.0;
  SessionSchema schema;
  std::vector<Frame> frames;
  std::vector<Span> spans;

  // index into the flattened point order; throws InvalidInput when missing
  int point_index(const std::string& flat_id) const;
};

// Checks schema/frame consistency and strictly increasing timestamps.
void validate_session(const Session& s);

Session parse_session_json(const std::string& text);
Session load_session(const std::string& path);
std::string session_to_json(const Session& s);
void save_session(const Session& s, const std::string& path);

}  // namespace qsrev
