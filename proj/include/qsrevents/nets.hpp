#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qsrevents/crf.hpp"
#include "qsrevents/features.hpp"
#include "qsrevents/matrix.hpp"
#include "qsrevents/rng.hpp"

namespace qsrev {

enum class ModelKind { Mlp, Lstm };

const char* to_string(ModelKind k);
ModelKind model_kind_from(const std::string& name);

struct Hyperparameters {
  int lstm_layers = 1;
  int hidden = 200;
  double learning_rate = 0.1;
  double dropout_keep = 0.8;  // keep probability
  double decay = 0.95;
  int epochs = 0;  // 0 = model default (200 lstm, 500 mlp)
  int batch_size = 16;
  double clip_norm = 5.0;
  int proj_dim = 64;
  std::uint64_t seed = 1;
};

// Event-level classifier: relu stack over one feature row, five linear heads,
// joint CRF tables.
struct MlpModel {
  FeatureKind feature = FeatureKind::EventQual3D;
  int input_dim = 0;
  std::vector<int> hidden_sizes;
  double dropout_keep = 1.0;
  std::vector<Matrix> w;  // per hidden layer: in x out
  std::vector<std::vector<double>> b;
  std::array<Matrix, kNumSlots> head_w;
  std::array<std::vector<double>, kNumSlots> head_b;
  TreeCrfWeights crf;
};

struct LstmLayerParams {
  Matrix wx;              // in x 4H, gate order [i f g o]
  Matrix wh;              // H x 4H
  std::vector<double> b;  // 4H
};

// Frame-level classifier: shared linear input projection, one independent
// LSTM stack per slot, scores read at the final step, joint CRF tables.
struct LstmModel {
  FeatureKind feature = FeatureKind::Qual2D;
  int input_dim = 0;
  int proj_dim = 0;
  int hidden = 0;
  int layers = 1;
  double dropout_keep = 1.0;
  Matrix proj_w;  // input_dim x proj_dim
  std::vector<double> proj_b;
  std::array<std::vector<LstmLayerParams>, kNumSlots> stacks;
  std::array<Matrix, kNumSlots> head_w;  // H x slot size
  std::array<std::vector<double>, kNumSlots> head_b;
  TreeCrfWeights crf;
};

MlpModel make_mlp(FeatureKind feature, int input_dim,
                  const Hyperparameters& hp);
LstmModel make_lstm(FeatureKind feature, int input_dim,
                    const Hyperparameters& hp);

// Visit every parameter array, CRF tables included. Used by initialization,
// SGD, clipping, checkpointing and the gradient checker.
using ParamVisitor =
    std::function<void(const std::string& name, double* values, size_t n)>;
void for_each_param(MlpModel& m, const ParamVisitor& fn);
void for_each_param(LstmModel& m, const ParamVisitor& fn);

void init_params(MlpModel& m, Rng& rng);   // uniform in [-0.1, 0.1]
void init_params(LstmModel& m, Rng& rng);

// ---- batched forward/backward ----
// Row layout for LSTM batches is step-major: row t*batch + b holds sample b
// at step t, so each step is a contiguous block.

struct MlpBatchCache {
  Matrix x;
  std::vector<Matrix> z;     // pre-activations per hidden layer
  std::vector<Matrix> h;     // post relu (and dropout) per hidden layer
  std::vector<Matrix> mask;  // dropout masks, empty rows when eval
  bool train = false;
};

void mlp_forward_batch(const MlpModel& m, const Matrix& x, bool train,
                       Rng* rng, MlpBatchCache& cache,
                       std::array<Matrix, kNumSlots>& scores);
void mlp_backward_batch(const MlpModel& m, const MlpBatchCache& cache,
                        const std::array<Matrix, kNumSlots>& d_scores,
                        MlpModel& grad);

struct LstmLayerCache {
  Matrix gates;  // (T*B) x 4H, post-activation
  Matrix c;      // (T*B) x H
  Matrix tanhc;  // (T*B) x H
  Matrix h;      // (T*B) x H, pre-dropout
  Matrix hd;     // (T*B) x H, post-dropout (what upper layers and heads see)
  Matrix mask;   // (T*B) x H dropout mask, unit when eval
};

struct LstmBatchCache {
  int batch = 0;
  int steps = 0;
  Matrix x;   // (T*B) x D
  Matrix xp;  // (T*B) x P
  std::array<std::vector<LstmLayerCache>, kNumSlots> stacks;
  bool train = false;
};

void lstm_forward_batch(const LstmModel& m, const Matrix& x, int batch,
                        int steps, bool train, Rng* rng, LstmBatchCache& cache,
                        std::array<Matrix, kNumSlots>& scores);
void lstm_backward_batch(const LstmModel& m, const LstmBatchCache& cache,
                         const std::array<Matrix, kNumSlots>& d_scores,
                         LstmModel& grad);

// ---- single-sample wrappers ----
SlotScores mlp_forward(const MlpModel& m, const std::vector<double>& x,
                       bool train_mode, Rng* rng = nullptr);
SlotScores lstm_forward(const LstmModel& m, const FeatureMatrix& x,
                        bool train_mode, Rng* rng = nullptr);

}  // namespace qsrev
