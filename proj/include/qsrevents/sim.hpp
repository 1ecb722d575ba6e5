#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsrevents/session.hpp"

namespace qsrev {

// One synthetic tabletop scenario. Verbs and prepositions use the label
// vocabulary spellings; "None" means the event references no second object.
struct ScenarioSpec {
  std::string verb = "push";           // push, pull, slide, roll
  std::string preposition = "toward";  // toward, away_from, past, None
  bool actor_involved = true;          // rig near the action vs parked away
  std::string object_kind = "cube";    // cube or cylinder
  double duration_s = 40.0 / 24.0;
  double rate_hz = 24.0;
  double sigma = 0.0;     // capture noise, meters per coordinate
  double dropout = 0.0;   // per point per frame tracking loss
  std::uint64_t seed = 1;
  std::string session_id = "sim-000";
};

struct SyntheticSession {
  Session session;
  ScenarioSpec spec;
};

// Builds the kinematic template for the scenario, randomizes the scene pose
// (yaw about z plus a table-plane translation, drawn from the seed), fills
// ground-truth spans, then applies the scenario's noise and dropout.
SyntheticSession generate(const ScenarioSpec& spec);

// Seeded Gaussian jitter on every coordinate plus tracking dropout; the
// first and last frame of every point always stay tracked so gap filling
// remains possible.
Session corrupt(const Session& s, double sigma, double dropout,
                std::uint64_t seed);

// Cycled scenario ingredients for corpus generation.
struct CorpusMix {
  std::vector<std::string> verbs = {"push", "pull", "slide", "roll"};
  std::vector<std::string> preps = {"toward", "away_from", "past", "None"};
  std::vector<double> rates = {24.0, 30.0, 60.0};
  double sigma = 0.005;
  double dropout = 0.05;
};

// n balanced sessions (verb cycles fastest, then preposition), deterministic
// in the master seed. Needs n >= 5.
std::vector<SyntheticSession> make_corpus(int n_sessions, const CorpusMix& mix,
                                          std::uint64_t master_seed);

// Flat key=value manifest of one scenario.
std::string scenario_to_text(const ScenarioSpec& spec);

}  // namespace qsrev
