#include "qsrevents/session.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qsrevents/error.hpp"

namespace qsrev {

using json = nlohmann::ordered_json;

std::vector<std::string> SessionSchema::point_ids() const {
  std::vector<std::string> ids;
  for (const SchemaEntity& e : entities)
    for (const std::string& p : e.points) ids.push_back(e.name + "/" + p);
  return ids;
}

int SessionSchema::point_count() const {
  int n = 0;
  for (const SchemaEntity& e : entities) n += static_cast<int>(e.points.size());
  return n;
}

int Session::point_index(const std::string& flat_id) const {
  int i = 0;
  for (const SchemaEntity& e : schema.entities)
    for (const std::string& p : e.points) {
      if (e.name + "/" + p == flat_id) return i;
      ++i;
    }
  throw InvalidInput("session has no point named " + flat_id);
}

void validate_session(const Session& s) {
  int n = s.schema.point_count();
  if (n == 0) throw DataError("session schema has no points");
  double prev_t = -1.0;
  for (size_t i = 0; i < s.frames.size(); ++i) {
    const Frame& f = s.frames[i];
    if (static_cast<int>(f.points.size()) != n ||
        static_cast<int>(f.tracked.size()) != n)
      throw DataError("frame " + std::to_string(i) +
                      " does not cover the schema point set");
    if (!(f.t > prev_t))
      throw DataError("timestamps not strictly increasing at frame " +
                      std::to_string(i));
    prev_t = f.t;
    for (const Vec3& p : f.points)
      if (!p.finite())
        throw DataError("non-finite coordinate in frame " + std::to_string(i));
  }
}

namespace {

LabelTuple label_from_json(const json& j) {
  LabelTuple t;
  t.subject = entity_index(j.at("subject").get<std::string>());
  t.verb = verb_index(j.at("verb").get<std::string>());
  t.object = entity_index(j.at("object").get<std::string>());
  t.preposition = prep_index(j.at("preposition").get<std::string>());
  t.locative = entity_index(j.at("locative").get<std::string>());
  return t;
}

json label_to_json(const LabelTuple& t) {
  json j;
  j["subject"] = kEntityVocab[t.subject];
  j["verb"] = kVerbVocab[t.verb];
  j["object"] = kEntityVocab[t.object];
  j["preposition"] = kPrepVocab[t.preposition];
  j["locative"] = kEntityVocab[t.locative];
  return j;
}

}  // namespace

Session parse_session_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("session JSON parse error: ") + e.what());
  }
  Session s;
  try {
    s.id = j.at("id").get<std::string>();
    s.rate_hz = j.at("rate_hz").get<double>();
    for (const json& je : j.at("schema").at("entities")) {
      SchemaEntity e;
      e.name = je.at("name").get<std::string>();
      for (const json& jp : je.at("points"))
        e.points.push_back(jp.get<std::string>());
      s.schema.entities.push_back(std::move(e));
    }
    std::vector<std::string> ids = s.schema.point_ids();
    for (const json& jf : j.at("frames")) {
      Frame f;
      f.t = jf.at("t").get<double>();
      const json& pts = jf.at("points");
      const json* tracked = jf.contains("tracked") ? &jf.at("tracked") : nullptr;
      for (const std::string& id : ids) {
        const json& c = pts.at(id);
        f.points.push_back({c.at(0).get<double>(), c.at(1).get<double>(),
                            c.at(2).get<double>()});
        bool tr = true;
        if (tracked && tracked->contains(id)) tr = tracked->at(id).get<bool>();
        f.tracked.push_back(tr ? 1 : 0);
      }
      s.frames.push_back(std::move(f));
    }
    if (j.contains("spans"))
      for (const json& js : j.at("spans")) {
        Span sp;
        sp.start_t = js.at("start_t").get<double>();
        sp.end_t = js.at("end_t").get<double>();
        sp.label = label_from_json(js.at("label"));
        s.spans.push_back(sp);
      }
  } catch (const json::exception& e) {
    throw DataError(std::string("session JSON shape error: ") + e.what());
  }
  validate_session(s);
  return s;
}

Session load_session(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open session file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_session_json(buf.str());
}

std::string session_to_json(const Session& s) {
  json j;
  j["id"] = s.id;
  j["rate_hz"] = s.rate_hz;
  json entities = json::array();
  for (const SchemaEntity& e : s.schema.entities) {
    json je;
    je["name"] = e.name;
    je["points"] = e.points;
    entities.push_back(je);
  }
  j["schema"] = json{{"entities", entities}};
  std::vector<std::string> ids = s.schema.point_ids();
  json frames = json::array();
  for (const Frame& f : s.frames) {
    json jf;
    jf["t"] = f.t;
    json pts;
    json tracked;
    for (size_t i = 0; i < ids.size(); ++i) {
      pts[ids[i]] = {f.points[i].x, f.points[i].y, f.points[i].z};
      tracked[ids[i]] = f.tracked[i] != 0;
    }
    jf["points"] = pts;
    jf["tracked"] = tracked;
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  json spans = json::array();
  for (const Span& sp : s.spans) {
    json js;
    js["start_t"] = sp.start_t;
    js["end_t"] = sp.end_t;
    js["label"] = label_to_json(sp.label);
    spans.push_back(js);
  }
  j["spans"] = std::move(spans);
  return j.dump(1);
}

void save_session(const Session& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write session file: " + path);
  out << session_to_json(s) << "\n";
}

}  // namespace qsrev
