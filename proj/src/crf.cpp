#include "qsrevents/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsrevents/error.hpp"

namespace qsrev {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Dims {
  int l, s, o, p, v;
};

bool mask_at(const std::vector<std::uint8_t>& mask, int r, int c, int cols) {
  return mask.empty() || mask[static_cast<size_t>(r) * cols + c] != 0;
}

bool mask_at(const std::vector<std::uint8_t>& mask, int i) {
  return mask.empty() || mask[i] != 0;
}

Dims check_dims(const SlotScores& scores, const TreeCrfWeights& w) {
  Dims d;
  d.l = static_cast<int>(w.start.size());
  d.s = w.ls.cols;
  d.o = w.lo.cols;
  d.p = w.lp.cols;
  d.v = w.sv.cols;
  if (d.l < 1 || d.s < 1 || d.o < 1 || d.p < 1 || d.v < 1)
    throw InvalidInput("crf: empty slot");
  if (w.ls.rows != d.l || w.lo.rows != d.l || w.lp.rows != d.l ||
      w.sv.rows != d.s)
    throw InvalidInput("crf: table shapes disagree about slot sizes");
  auto need = [](const std::vector<double>& v, int n, const char* name) {
    if (static_cast<int>(v.size()) != n)
      throw InvalidInput(std::string("crf: score vector for ") + name +
                         " has the wrong length");
  };
  need(scores[kSlotLocative], d.l, kSlotNames[kSlotLocative]);
  need(scores[kSlotSubject], d.s, kSlotNames[kSlotSubject]);
  need(scores[kSlotObject], d.o, kSlotNames[kSlotObject]);
  need(scores[kSlotPrep], d.p, kSlotNames[kSlotPrep]);
  need(scores[kSlotVerb], d.v, kSlotNames[kSlotVerb]);
  auto need_mask = [](const std::vector<std::uint8_t>& m, size_t n,
                      const char* name) {
    if (!m.empty() && m.size() != n)
      throw InvalidInput(std::string("crf: mask for ") + name +
                         " has the wrong shape");
  };
  need_mask(w.start_mask, w.start.size(), "start");
  need_mask(w.ls_mask, w.ls.v.size(), "ls");
  need_mask(w.lo_mask, w.lo.v.size(), "lo");
  need_mask(w.lp_mask, w.lp.v.size(), "lp");
  need_mask(w.sv_mask, w.sv.v.size(), "sv");
  return d;
}

// log sum exp over the finite entries; -inf when none are.
double lse(const std::vector<double>& xs) {
  double best = kNegInf;
  for (double x : xs) best = std::max(best, x);
  if (best == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : xs)
    if (x != kNegInf) sum += std::exp(x - best);
  return best + std::log(sum);
}

// Inward messages. mv[s]: verb folded into each subject value. ms/mo/mp[l]:
// child chains folded into each locative value.
struct Messages {
  std::vector<double> mv, ms, mo, mp;
};

Messages inward(const SlotScores& sc, const TreeCrfWeights& w, const Dims& d) {
  Messages m;
  m.mv.assign(d.s, kNegInf);
  std::vector<double> terms;
  for (int s = 0; s < d.s; ++s) {
    terms.clear();
    for (int v = 0; v < d.v; ++v)
      if (mask_at(w.sv_mask, s, v, d.v))
        terms.push_back(sc[kSlotVerb][v] + w.sv.at(s, v));
    m.mv[s] = lse(terms);
  }
  m.ms.assign(d.l, kNegInf);
  m.mo.assign(d.l, kNegInf);
  m.mp.assign(d.l, kNegInf);
  for (int l = 0; l < d.l; ++l) {
    terms.clear();
    for (int s = 0; s < d.s; ++s)
      if (mask_at(w.ls_mask, l, s, d.s) && m.mv[s] != kNegInf)
        terms.push_back(sc[kSlotSubject][s] + w.ls.at(l, s) + m.mv[s]);
    m.ms[l] = lse(terms);
    terms.clear();
    for (int o = 0; o < d.o; ++o)
      if (mask_at(w.lo_mask, l, o, d.o))
        terms.push_back(sc[kSlotObject][o] + w.lo.at(l, o));
    m.mo[l] = lse(terms);
    terms.clear();
    for (int p = 0; p < d.p; ++p)
      if (mask_at(w.lp_mask, l, p, d.p))
        terms.push_back(sc[kSlotPrep][p] + w.lp.at(l, p));
    m.mp[l] = lse(terms);
  }
  return m;
}

}  // namespace

const char* const kSlotNames[kNumSlots] = {"subject", "verb", "object",
                                           "preposition", "locative"};

SlotScores vocab_slot_scores() {
  SlotScores s;
  s[kSlotSubject].assign(kEntityVocab.size(), 0.0);
  s[kSlotVerb].assign(kVerbVocab.size(), 0.0);
  s[kSlotObject].assign(kEntityVocab.size(), 0.0);
  s[kSlotPrep].assign(kPrepVocab.size(), 0.0);
  s[kSlotLocative].assign(kEntityVocab.size(), 0.0);
  return s;
}

TreeCrfWeights vocab_crf_weights() {
  TreeCrfWeights w;
  int e = static_cast<int>(kEntityVocab.size());
  int v = static_cast<int>(kVerbVocab.size());
  int p = static_cast<int>(kPrepVocab.size());
  w.start.assign(e, 0.0);
  w.ls = Matrix(e, e);
  w.lo = Matrix(e, e);
  w.lp = Matrix(e, p);
  w.sv = Matrix(e, v);
  return w;
}

int slot_value(const LabelTuple& t, int slot) {
  switch (slot) {
    case kSlotSubject: return t.subject;
    case kSlotVerb: return t.verb;
    case kSlotObject: return t.object;
    case kSlotPrep: return t.preposition;
    case kSlotLocative: return t.locative;
  }
  throw InvalidInput("bad slot id");
}

void set_slot_value(LabelTuple& t, int slot, int value) {
  switch (slot) {
    case kSlotSubject: t.subject = value; return;
    case kSlotVerb: t.verb = value; return;
    case kSlotObject: t.object = value; return;
    case kSlotPrep: t.preposition = value; return;
    case kSlotLocative: t.locative = value; return;
  }
  throw InvalidInput("bad slot id");
}

double tuple_score(const SlotScores& sc, const TreeCrfWeights& w,
                   const LabelTuple& y) {
  Dims d = check_dims(sc, w);
  for (int slot = 0; slot < kNumSlots; ++slot) {
    int val = slot_value(y, slot);
    int size = static_cast<int>(sc[slot].size());
    if (val < 0 || val >= size)
      throw InvalidInput(std::string("crf: ") + kSlotNames[slot] +
                         " value out of range");
  }
  if (!mask_at(w.start_mask, y.locative) ||
      !mask_at(w.ls_mask, y.locative, y.subject, d.s) ||
      !mask_at(w.lo_mask, y.locative, y.object, d.o) ||
      !mask_at(w.lp_mask, y.locative, y.preposition, d.p) ||
      !mask_at(w.sv_mask, y.subject, y.verb, d.v))
    return kNegInf;
  return w.start[y.locative] + w.ls.at(y.locative, y.subject) +
         w.lo.at(y.locative, y.object) + w.lp.at(y.locative, y.preposition) +
         w.sv.at(y.subject, y.verb) + sc[kSlotLocative][y.locative] +
         sc[kSlotSubject][y.subject] + sc[kSlotObject][y.object] +
         sc[kSlotPrep][y.preposition] + sc[kSlotVerb][y.verb];
}

double crf_log_partition(const SlotScores& sc, const TreeCrfWeights& w) {
  Dims d = check_dims(sc, w);
  Messages m = inward(sc, w, d);
  std::vector<double> terms;
  for (int l = 0; l < d.l; ++l) {
    if (!mask_at(w.start_mask, l)) continue;
    if (m.ms[l] == kNegInf || m.mo[l] == kNegInf || m.mp[l] == kNegInf)
      continue;
    terms.push_back(w.start[l] + sc[kSlotLocative][l] + m.ms[l] + m.mo[l] +
                    m.mp[l]);
  }
  return lse(terms);
}

DecodeResult crf_decode(const SlotScores& sc, const TreeCrfWeights& w) {
  Dims d = check_dims(sc, w);

  // max-product inward pass with backpointers; strict > keeps the lowest
  // index on ties
  std::vector<double> mv(d.s, kNegInf), ms(d.l, kNegInf), mo(d.l, kNegInf),
      mp(d.l, kNegInf);
  std::vector<int> bv(d.s, -1), bs(d.l, -1), bo(d.l, -1), bp(d.l, -1);
  for (int s = 0; s < d.s; ++s)
    for (int v = 0; v < d.v; ++v) {
      if (!mask_at(w.sv_mask, s, v, d.v)) continue;
      double t = sc[kSlotVerb][v] + w.sv.at(s, v);
      if (t > mv[s]) {
        mv[s] = t;
        bv[s] = v;
      }
    }
  for (int l = 0; l < d.l; ++l) {
    for (int s = 0; s < d.s; ++s) {
      if (!mask_at(w.ls_mask, l, s, d.s) || mv[s] == kNegInf) continue;
      double t = sc[kSlotSubject][s] + w.ls.at(l, s) + mv[s];
      if (t > ms[l]) {
        ms[l] = t;
        bs[l] = s;
      }
    }
    for (int o = 0; o < d.o; ++o) {
      if (!mask_at(w.lo_mask, l, o, d.o)) continue;
      double t = sc[kSlotObject][o] + w.lo.at(l, o);
      if (t > mo[l]) {
        mo[l] = t;
        bo[l] = o;
      }
    }
    for (int p = 0; p < d.p; ++p) {
      if (!mask_at(w.lp_mask, l, p, d.p)) continue;
      double t = sc[kSlotPrep][p] + w.lp.at(l, p);
      if (t > mp[l]) {
        mp[l] = t;
        bp[l] = p;
      }
    }
  }
  double best = kNegInf;
  int best_l = -1;
  for (int l = 0; l < d.l; ++l) {
    if (!mask_at(w.start_mask, l)) continue;
    if (ms[l] == kNegInf || mo[l] == kNegInf || mp[l] == kNegInf) continue;
    double t = w.start[l] + sc[kSlotLocative][l] + ms[l] + mo[l] + mp[l];
    if (t > best) {
      best = t;
      best_l = l;
    }
  }
  if (best_l < 0)
    throw InfeasibleDecodeError("crf decode: masks rule out every assignment");
  DecodeResult r;
  r.score = best;
  r.tuple.locative = best_l;
  r.tuple.subject = bs[best_l];
  r.tuple.object = bo[best_l];
  r.tuple.preposition = bp[best_l];
  r.tuple.verb = bv[r.tuple.subject];
  return r;
}

DecodeResult crf_decode_constrained(const SlotScores& sc,
                                    const TreeCrfWeights& w) {
  Dims d = check_dims(sc, w);
  DecodeResult best;
  bool found = false;
  LabelTuple y;
  for (int l = 0; l < d.l; ++l)
    for (int s = 0; s < d.s; ++s)
      for (int o = 0; o < d.o; ++o)
        for (int p = 0; p < d.p; ++p)
          for (int v = 0; v < d.v; ++v) {
            y.locative = l;
            y.subject = s;
            y.object = o;
            y.preposition = p;
            y.verb = v;
            if (!satisfies_hard_constraints(y)) continue;
            double t = tuple_score(sc, w, y);
            if (t == kNegInf) continue;
            if (!found || t > best.score) {
              found = true;
              best.score = t;
              best.tuple = y;
            }
          }
  if (!found)
    throw InfeasibleDecodeError(
        "crf decode: no assignment satisfies the constraints and masks");
  return best;
}

double crf_loss(const SlotScores& sc, const TreeCrfWeights& w,
                const LabelTuple& gold) {
  double g = tuple_score(sc, w, gold);
  if (g == kNegInf)
    throw InvalidInput("crf loss: gold tuple is masked out");
  return crf_log_partition(sc, w) - g;
}

CrfGradients crf_gradients(const SlotScores& sc, const TreeCrfWeights& w,
                           const LabelTuple& gold) {
  Dims d = check_dims(sc, w);
  if (tuple_score(sc, w, gold) == kNegInf)
    throw InvalidInput("crf gradients: gold tuple is masked out");
  Messages m = inward(sc, w, d);

  std::vector<double> root_terms;
  for (int l = 0; l < d.l; ++l) {
    double t = kNegInf;
    if (mask_at(w.start_mask, l) && m.ms[l] != kNegInf &&
        m.mo[l] != kNegInf && m.mp[l] != kNegInf)
      t = w.start[l] + sc[kSlotLocative][l] + m.ms[l] + m.mo[l] + m.mp[l];
    root_terms.push_back(t);
  }
  double log_z = lse(root_terms);

  CrfGradients g;
  g.d_scores[kSlotSubject].assign(d.s, 0.0);
  g.d_scores[kSlotVerb].assign(d.v, 0.0);
  g.d_scores[kSlotObject].assign(d.o, 0.0);
  g.d_scores[kSlotPrep].assign(d.p, 0.0);
  g.d_scores[kSlotLocative].assign(d.l, 0.0);
  g.d_w.start.assign(d.l, 0.0);
  g.d_w.ls = Matrix(d.l, d.s);
  g.d_w.lo = Matrix(d.l, d.o);
  g.d_w.lp = Matrix(d.l, d.p);
  g.d_w.sv = Matrix(d.s, d.v);

  // root marginal and the three edges at the root
  std::vector<double> out_s(d.s, kNegInf);  // message into subject from above
  for (int l = 0; l < d.l; ++l) {
    if (root_terms[l] == kNegInf) continue;
    double pl = std::exp(root_terms[l] - log_z);
    g.d_scores[kSlotLocative][l] += pl;
    g.d_w.start[l] += pl;
    double above_s = w.start[l] + sc[kSlotLocative][l] + m.mo[l] + m.mp[l];
    double above_o = w.start[l] + sc[kSlotLocative][l] + m.ms[l] + m.mp[l];
    double above_p = w.start[l] + sc[kSlotLocative][l] + m.ms[l] + m.mo[l];
    for (int s = 0; s < d.s; ++s) {
      if (!mask_at(w.ls_mask, l, s, d.s) || m.mv[s] == kNegInf) continue;
      double joint = above_s + sc[kSlotSubject][s] + w.ls.at(l, s) + m.mv[s];
      g.d_w.ls.at(l, s) += std::exp(joint - log_z);
      // pairwise log-sum-exp accumulation; exp(-inf)=0 handles the first term
      double into_s = above_s + w.ls.at(l, s);
      out_s[s] = std::max(out_s[s], into_s) +
                 std::log1p(std::exp(-std::abs(out_s[s] - into_s)));
    }
    for (int o = 0; o < d.o; ++o) {
      if (!mask_at(w.lo_mask, l, o, d.o)) continue;
      double joint = above_o + sc[kSlotObject][o] + w.lo.at(l, o);
      double q = std::exp(joint - log_z);
      g.d_w.lo.at(l, o) += q;
      g.d_scores[kSlotObject][o] += q;
    }
    for (int p = 0; p < d.p; ++p) {
      if (!mask_at(w.lp_mask, l, p, d.p)) continue;
      double joint = above_p + sc[kSlotPrep][p] + w.lp.at(l, p);
      double q = std::exp(joint - log_z);
      g.d_w.lp.at(l, p) += q;
      g.d_scores[kSlotPrep][p] += q;
    }
  }

  // subject marginal via the ls edge, then the sv edge
  for (int s = 0; s < d.s; ++s) {
    double row = 0.0;
    for (int l = 0; l < d.l; ++l) row += g.d_w.ls.at(l, s);
    g.d_scores[kSlotSubject][s] += row;
  }
  for (int s = 0; s < d.s; ++s) {
    if (out_s[s] == kNegInf) continue;
    for (int v = 0; v < d.v; ++v) {
      if (!mask_at(w.sv_mask, s, v, d.v)) continue;
      double joint =
          out_s[s] + sc[kSlotSubject][s] + w.sv.at(s, v) + sc[kSlotVerb][v];
      double q = std::exp(joint - log_z);
      g.d_w.sv.at(s, v) += q;
      g.d_scores[kSlotVerb][v] += q;
    }
  }

  g.d_scores[kSlotSubject][gold.subject] -= 1.0;
  g.d_scores[kSlotVerb][gold.verb] -= 1.0;
  g.d_scores[kSlotObject][gold.object] -= 1.0;
  g.d_scores[kSlotPrep][gold.preposition] -= 1.0;
  g.d_scores[kSlotLocative][gold.locative] -= 1.0;
  g.d_w.start[gold.locative] -= 1.0;
  g.d_w.ls.at(gold.locative, gold.subject) -= 1.0;
  g.d_w.lo.at(gold.locative, gold.object) -= 1.0;
  g.d_w.lp.at(gold.locative, gold.preposition) -= 1.0;
  g.d_w.sv.at(gold.subject, gold.verb) -= 1.0;
  return g;
}

}  // namespace qsrev
