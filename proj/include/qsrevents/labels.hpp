#pragma once

#include <array>
#include <string>

namespace qsrev {

// Slot vocabularies. None is an ordinary entry, always the last index.
inline constexpr std::array<const char*, 4> kEntityVocab{"performer", "O1",
                                                         "O2", "None"};
inline constexpr std::array<const char*, 5> kVerbVocab{"push", "pull", "slide",
                                                       "roll", "None"};
inline constexpr std::array<const char*, 4> kPrepVocab{"toward", "away_from",
                                                       "past", "None"};

inline constexpr int kEntityNone = 3;
inline constexpr int kVerbNone = 4;
inline constexpr int kPrepNone = 3;

// One labeled event description; fields hold vocabulary indices.
struct LabelTuple {
  int subject = kEntityNone;
  int verb = kVerbNone;
  int object = kEntityNone;
  int preposition = kPrepNone;
  int locative = kEntityNone;

  bool operator==(const LabelTuple& o) const {
    return subject == o.subject && verb == o.verb && object == o.object &&
           preposition == o.preposition && locative == o.locative;
  }
  bool operator!=(const LabelTuple& o) const { return !(*this == o); }
};

int entity_index(const std::string& name);
int verb_index(const std::string& name);
int prep_index(const std::string& name);

std::string label_to_string(const LabelTuple& t);

// True when the tuple is internally consistent: no entity fills two of
// subject/object/locative, a None verb empties every other slot, and
// locative and preposition are present or absent together.
bool satisfies_hard_constraints(const LabelTuple& t);

}  // namespace qsrev
