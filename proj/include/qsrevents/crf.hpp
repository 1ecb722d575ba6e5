#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qsrevents/labels.hpp"
#include "qsrevents/matrix.hpp"

namespace qsrev {

// Slot order used for score vectors, network heads and gradients.
enum : int {
  kSlotSubject = 0,
  kSlotVerb = 1,
  kSlotObject = 2,
  kSlotPrep = 3,
  kSlotLocative = 4,
  kNumSlots = 5,
};

extern const char* const kSlotNames[kNumSlots];

// Per-slot unary score vectors as emitted by a network.
using SlotScores = std::array<std::vector<double>, kNumSlots>;

// Score vectors sized for the label vocabularies, zero-filled.
SlotScores vocab_slot_scores();

int slot_value(const LabelTuple& t, int slot);
void set_slot_value(LabelTuple& t, int slot, int value);

// Pairwise tables of the tree: locative is the root, subject/object/
// preposition hang off it, and the verb hangs off the subject. Masks are
// optional (empty = everything allowed); a 0 entry scores -inf in inference.
struct TreeCrfWeights {
  std::vector<double> start;  // [L]
  Matrix ls, lo, lp;          // [L x S], [L x O], [L x P]
  Matrix sv;                  // [S x V]
  std::vector<std::uint8_t> start_mask;
  std::vector<std::uint8_t> ls_mask, lo_mask, lp_mask, sv_mask;

  bool has_masks() const {
    return !start_mask.empty() || !ls_mask.empty() || !lo_mask.empty() ||
           !lp_mask.empty() || !sv_mask.empty();
  }
};

// Tables shaped for the label vocabularies, zero-filled, no masks.
TreeCrfWeights vocab_crf_weights();

struct DecodeResult {
  LabelTuple tuple;
  double score = 0.0;
};

// Joint score of one assignment: unaries plus start plus the four pairwise
// terms; -inf if any participating entry is masked.
double tuple_score(const SlotScores& scores, const TreeCrfWeights& w,
                   const LabelTuple& y);

// log sum over all assignments, by inward message passing (verb -> subject,
// then subject/object/preposition -> locative). -inf when masks leave
// nothing.
double crf_log_partition(const SlotScores& scores, const TreeCrfWeights& w);

// Exact max/argmax on the tree; ties pick the lowest index at each argmax.
// Throws InfeasibleDecodeError when masks rule out every assignment.
DecodeResult crf_decode(const SlotScores& scores, const TreeCrfWeights& w);

// Exhaustive decode over assignments that satisfy both the table masks and
// the hard label constraints (which include subject != object, a relation the
// tree cannot express). Ties pick the lexicographically smallest tuple in
// (locative, subject, object, preposition, verb) order, matching crf_decode.
DecodeResult crf_decode_constrained(const SlotScores& scores,
                                    const TreeCrfWeights& w);

// Negative log likelihood of the gold tuple. Throws InvalidInput if gold is
// masked out.
double crf_loss(const SlotScores& scores, const TreeCrfWeights& w,
                const LabelTuple& gold);

struct CrfGradients {
  SlotScores d_scores;
  TreeCrfWeights d_w;  // gradient tables, masks left empty
};

// Analytic gradient of crf_loss: marginal minus gold indicator, for the unary
// scores and every table entry.
CrfGradients crf_gradients(const SlotScores& scores, const TreeCrfWeights& w,
                           const LabelTuple& gold);

}  // namespace qsrev
