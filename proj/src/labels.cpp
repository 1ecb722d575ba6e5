#include "qsrevents/labels.hpp"

#include "qsrevents/error.hpp"

namespace qsrev {

namespace {

template <typename Vocab>
int index_in(const Vocab& vocab, const std::string& name, const char* what) {
  for (int i = 0; i < static_cast<int>(vocab.size()); ++i)
    if (name == vocab[i]) return i;
  throw InvalidInput(std::string("unknown ") + what + " label: " + name);
}

}  // namespace

int entity_index(const std::string& name) {
  return index_in(kEntityVocab, name, "entity");
}

int verb_index(const std::string& name) {
  return index_in(kVerbVocab, name, "verb");
}

int prep_index(const std::string& name) {
  return index_in(kPrepVocab, name, "preposition");
}

std::string label_to_string(const LabelTuple& t) {
  std::string s;
  s += kEntityVocab[t.subject];
  s += " ";
  s += kVerbVocab[t.verb];
  s += " ";
  s += kEntityVocab[t.object];
  s += " ";
  s += kPrepVocab[t.preposition];
  s += " ";
  s += kEntityVocab[t.locative];
  return s;
}

bool satisfies_hard_constraints(const LabelTuple& t) {
  if (t.subject != kEntityNone &&
      (t.subject == t.object || t.subject == t.locative))
    return false;
  if (t.object != kEntityNone && t.object == t.locative) return false;
  if (t.verb == kVerbNone &&
      (t.subject != kEntityNone || t.object != kEntityNone ||
       t.locative != kEntityNone || t.preposition != kPrepNone))
    return false;
  if ((t.locative == kEntityNone) != (t.preposition == kPrepNone))
    return false;
  return true;
}

}  // namespace qsrev
