#include "qsrevents/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qsrevents/error.hpp"

namespace qsrev {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void validate(const PipelineConfig& c) {
  if (!(c.theta >= 0.0)) throw InvalidInput("config: theta must be >= 0");
  if (!(c.beta > 0.0 && c.beta < 0.7853981633974483))
    throw InvalidInput("config: beta must lie in (0, pi/4)");
  if (!(c.v_min >= 0.0)) throw InvalidInput("config: v_min must be >= 0");
  if (!(c.bin_width > 0.0)) throw InvalidInput("config: bin_width must be > 0");
  if (c.bin_count < 1) throw InvalidInput("config: bin_count must be >= 1");
  if (!(c.rate_hz > 0.0)) throw InvalidInput("config: rate_hz must be > 0");
  if (c.north_axis != "+y")
    throw InvalidInput("config: only north_axis=+y is supported");
  if (c.sector_edge != "ccw-closed")
    throw InvalidInput("config: only sector_edge=ccw-closed is supported");
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(lineno) +
                      ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      size_t b2 = s.find_first_not_of(" \t");
      size_t e2 = s.find_last_not_of(" \t");
      s = b2 == std::string::npos ? "" : s.substr(b2, e2 - b2 + 1);
    };
    trim(key);
    trim(val);
    try {
      if (key == "theta") cfg.theta = std::stod(val);
      else if (key == "beta") cfg.beta = std::stod(val);
      else if (key == "v_min") cfg.v_min = std::stod(val);
      else if (key == "bin_width") cfg.bin_width = std::stod(val);
      else if (key == "bin_count") cfg.bin_count = std::stoi(val);
      else if (key == "rate_hz") cfg.rate_hz = std::stod(val);
      else if (key == "north_axis") cfg.north_axis = val;
      else if (key == "sector_edge") cfg.sector_edge = val;
      else
        throw DataError("config line " + std::to_string(lineno) +
                        ": unknown key " + key);
    } catch (const std::invalid_argument&) {
      throw DataError("config line " + std::to_string(lineno) +
                      ": bad value for " + key);
    }
  }
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_text(const PipelineConfig& cfg) {
  std::string s;
  s += "theta=" + format_double(cfg.theta) + "\n";
  s += "beta=" + format_double(cfg.beta) + "\n";
  s += "v_min=" + format_double(cfg.v_min) + "\n";
  s += "bin_width=" + format_double(cfg.bin_width) + "\n";
  s += "bin_count=" + std::to_string(cfg.bin_count) + "\n";
  s += "rate_hz=" + format_double(cfg.rate_hz) + "\n";
  s += "north_axis=" + cfg.north_axis + "\n";
  s += "sector_edge=" + cfg.sector_edge + "\n";
  return s;
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
  std::string text = config_to_text(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace qsrev
