#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qsrevents/nets.hpp"

namespace qsrev {

struct Example {
  std::string session_id;
  FeatureMatrix features;
  LabelTuple label;
};

using Dataset = std::vector<Example>;

// Full corpus-to-examples bridge: gap-fill, resample to the config rate,
// slice into fixed windows, and extract the requested features from every
// segment.
Dataset extract_dataset(const std::vector<Session>& sessions, FeatureKind kind,
                        const PipelineConfig& cfg);

struct TrainReportRow {
  int epoch = 0;
  double mean_loss = 0.0;
  double grad_norm = 0.0;  // mean pre-clip global norm over the batches
};

struct TrainReport {
  std::vector<TrainReportRow> rows;
};

std::string train_report_to_csv(const TrainReport& r);

// One trained classifier; exactly one of mlp/lstm is active per kind.
struct TrainedModel {
  ModelKind kind = ModelKind::Lstm;
  MlpModel mlp;
  LstmModel lstm;
  Hyperparameters hp;
};

struct Metrics {
  int count = 0;
  double all_slot = 0.0;
  std::array<double, kNumSlots> per_slot{};
};

// Mini-batch SGD over the joint net+CRF parameters: lr decays per epoch,
// gradients are clipped by global norm, shuffling and dropout draw from the
// seed. Event-level kinds train an MLP, frame-level kinds an LSTM.
TrainedModel train(const Dataset& data, const Hyperparameters& hp,
                   ModelKind kind, TrainReport* report = nullptr);

SlotScores model_scores(const TrainedModel& m, const FeatureMatrix& x);
LabelTuple predict(const TrainedModel& m, const FeatureMatrix& x);

Metrics evaluate(const TrainedModel& m, const Dataset& data);

ModelKind model_kind_for(FeatureKind kind);

// ---- cross validation with grid search ----

struct FoldAssignment {
  std::vector<std::string> session_ids;  // distinct ids
  std::vector<int> fold_of;              // parallel to session_ids
};

FoldAssignment assign_folds(const Dataset& data, int folds,
                            std::uint64_t seed);

struct XvalResult {
  FeatureKind kind;
  Hyperparameters best;             // grid entry with the best mean precision
  double mean = 0.0, sd = 0.0;      // all-slot precision over folds (best hp)
  std::array<double, kNumSlots> per_slot_mean{};
  std::vector<double> fold_precision;  // per fold, best hp
  std::vector<std::pair<Hyperparameters, double>> grid_means;
};

// Splits at session granularity into 5 folds (sizes differ by at most one),
// trains every grid point on each fold's complement, and picks the grid point
// with the best mean validation precision. Jobs are independent and may run
// on several threads; results merge by index so the outcome is
// deterministic.
XvalResult cross_validate(const Dataset& data, FeatureKind kind,
                          const std::vector<Hyperparameters>& grid,
                          std::uint64_t master_seed, int threads = 1);

// ---- checkpoints ----
void save_model(const TrainedModel& m, const std::string& path);
TrainedModel load_model(const std::string& path);

// ---- finite-difference gradient checking ----

struct GradCheckResult {
  int checked = 0;
  int passed = 0;
  double worst_rel = 0.0;
  std::string worst_param;
  bool ok(double fraction = 0.95) const {
    return checked > 0 && passed >= static_cast<int>(fraction * checked);
  }
};

// Compares analytic gradients of the mean CRF loss over `data` against
// central differences (h = 1e-5) on `samples` randomly chosen coordinates.
// Relative tolerance 1e-4; gaps at or below 1e-8 absolute pass outright since
// they sit under the difference quotient's own noise. `inject` is a negative
// control: it is added to every analytic gradient so callers can prove the
// check is able to fail.
GradCheckResult grad_check(TrainedModel& m, const Dataset& data, int samples,
                           std::uint64_t seed, double inject = 0.0);

// Run a generic job list on up to `threads` workers (serial when <= 1).
void parallel_for(int jobs, int threads,
                  const std::function<void(int)>& fn);

}  // namespace qsrev
