#include "qsrevents/nets.hpp"

#include <cmath>

#include "qsrevents/error.hpp"

namespace qsrev {

namespace {

int vocab_slot_size(int slot) {
  switch (slot) {
    case kSlotVerb: return static_cast<int>(kVerbVocab.size());
    case kSlotPrep: return static_cast<int>(kPrepVocab.size());
    default: return static_cast<int>(kEntityVocab.size());
  }
}

void add_bias(Matrix& m, const std::vector<double>& b) {
  for (int r = 0; r < m.rows; ++r) {
    double* row = m.row(r);
    for (int c = 0; c < m.cols; ++c) row[c] += b[c];
  }
}

void add_col_sums(const Matrix& m, std::vector<double>& out) {
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    for (int c = 0; c < m.cols; ++c) out[c] += row[c];
  }
}

Matrix transposed(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) t.at(c, r) = m.at(r, c);
  return t;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// scaled bernoulli masks so expectations match eval mode (inverted dropout)
void fill_dropout_mask(Matrix& mask, double keep, Rng& rng) {
  double inv = 1.0 / keep;
  for (double& v : mask.v) v = rng.uniform01() < keep ? inv : 0.0;
}

}  // namespace

const char* to_string(ModelKind k) {
  return k == ModelKind::Mlp ? "mlp" : "lstm";
}

ModelKind model_kind_from(const std::string& name) {
  if (name == "mlp") return ModelKind::Mlp;
  if (name == "lstm") return ModelKind::Lstm;
  throw InvalidInput("unknown model kind '" + name + "' (valid: mlp, lstm)");
}

MlpModel make_mlp(FeatureKind feature, int input_dim,
                  const Hyperparameters& hp) {
  if (input_dim < 1) throw InvalidInput("mlp: input dimension must be >= 1");
  MlpModel m;
  m.feature = feature;
  m.input_dim = input_dim;
  m.hidden_sizes = {hp.hidden};
  m.dropout_keep = hp.dropout_keep;
  int in = input_dim;
  for (int h : m.hidden_sizes) {
    m.w.emplace_back(in, h);
    m.b.emplace_back(h, 0.0);
    in = h;
  }
  for (int s = 0; s < kNumSlots; ++s) {
    m.head_w[s] = Matrix(in, vocab_slot_size(s));
    m.head_b[s].assign(vocab_slot_size(s), 0.0);
  }
  m.crf = vocab_crf_weights();
  return m;
}

LstmModel make_lstm(FeatureKind feature, int input_dim,
                    const Hyperparameters& hp) {
  if (input_dim < 1) throw InvalidInput("lstm: input dimension must be >= 1");
  if (hp.lstm_layers < 1 || hp.lstm_layers > 2)
    throw InvalidInput("lstm: layer count must be 1 or 2");
  LstmModel m;
  m.feature = feature;
  m.input_dim = input_dim;
  m.proj_dim = hp.proj_dim;
  m.hidden = hp.hidden;
  m.layers = hp.lstm_layers;
  m.dropout_keep = hp.dropout_keep;
  m.proj_w = Matrix(input_dim, m.proj_dim);
  m.proj_b.assign(m.proj_dim, 0.0);
  for (int s = 0; s < kNumSlots; ++s) {
    int in = m.proj_dim;
    for (int j = 0; j < m.layers; ++j) {
      LstmLayerParams layer;
      layer.wx = Matrix(in, 4 * m.hidden);
      layer.wh = Matrix(m.hidden, 4 * m.hidden);
      layer.b.assign(4 * m.hidden, 0.0);
      m.stacks[s].push_back(std::move(layer));
      in = m.hidden;
    }
    m.head_w[s] = Matrix(m.hidden, vocab_slot_size(s));
    m.head_b[s].assign(vocab_slot_size(s), 0.0);
  }
  m.crf = vocab_crf_weights();
  return m;
}

namespace {

void visit_crf(TreeCrfWeights& w, const ParamVisitor& fn) {
  fn("crf.start", w.start.data(), w.start.size());
  fn("crf.ls", w.ls.v.data(), w.ls.v.size());
  fn("crf.lo", w.lo.v.data(), w.lo.v.size());
  fn("crf.lp", w.lp.v.data(), w.lp.v.size());
  fn("crf.sv", w.sv.v.data(), w.sv.v.size());
}

}  // namespace

void for_each_param(MlpModel& m, const ParamVisitor& fn) {
  for (size_t i = 0; i < m.w.size(); ++i) {
    std::string tag = "layer" + std::to_string(i);
    fn(tag + ".w", m.w[i].v.data(), m.w[i].v.size());
    fn(tag + ".b", m.b[i].data(), m.b[i].size());
  }
  for (int s = 0; s < kNumSlots; ++s) {
    std::string tag = std::string("head.") + kSlotNames[s];
    fn(tag + ".w", m.head_w[s].v.data(), m.head_w[s].v.size());
    fn(tag + ".b", m.head_b[s].data(), m.head_b[s].size());
  }
  visit_crf(m.crf, fn);
}

void for_each_param(LstmModel& m, const ParamVisitor& fn) {
  fn("proj.w", m.proj_w.v.data(), m.proj_w.v.size());
  fn("proj.b", m.proj_b.data(), m.proj_b.size());
  for (int s = 0; s < kNumSlots; ++s) {
    for (int j = 0; j < m.layers; ++j) {
      std::string tag = std::string("stack.") + kSlotNames[s] + ".layer" +
                        std::to_string(j);
      LstmLayerParams& l = m.stacks[s][j];
      fn(tag + ".wx", l.wx.v.data(), l.wx.v.size());
      fn(tag + ".wh", l.wh.v.data(), l.wh.v.size());
      fn(tag + ".b", l.b.data(), l.b.size());
    }
    std::string tag = std::string("head.") + kSlotNames[s];
    fn(tag + ".w", m.head_w[s].v.data(), m.head_w[s].v.size());
    fn(tag + ".b", m.head_b[s].data(), m.head_b[s].size());
  }
  visit_crf(m.crf, fn);
}

namespace {

template <typename M>
void uniform_init(M& m, Rng& rng) {
  for_each_param(m, [&](const std::string&, double* v, size_t n) {
    for (size_t i = 0; i < n; ++i) v[i] = rng.uniform(-0.1, 0.1);
  });
}

}  // namespace

void init_params(MlpModel& m, Rng& rng) { uniform_init(m, rng); }
void init_params(LstmModel& m, Rng& rng) { uniform_init(m, rng); }

void mlp_forward_batch(const MlpModel& m, const Matrix& x, bool train,
                       Rng* rng, MlpBatchCache& cache,
                       std::array<Matrix, kNumSlots>& scores) {
  if (x.cols != m.input_dim)
    throw InvalidInput("mlp: input dimension mismatch");
  if (train && m.dropout_keep < 1.0 && !rng)
    throw InvalidInput("mlp: training forward needs an rng for dropout");
  int layers = static_cast<int>(m.w.size());
  cache.x = x;
  cache.train = train;
  cache.z.assign(layers, Matrix());
  cache.h.assign(layers, Matrix());
  cache.mask.assign(layers, Matrix());
  const Matrix* cur = &cache.x;
  for (int i = 0; i < layers; ++i) {
    Matrix& z = cache.z[i];
    z = Matrix(cur->rows, m.w[i].cols);
    gemm_nn(*cur, m.w[i], z);
    add_bias(z, m.b[i]);
    Matrix& h = cache.h[i];
    h = z;
    for (double& v : h.v) v = v > 0.0 ? v : 0.0;
    if (train && m.dropout_keep < 1.0) {
      Matrix& mask = cache.mask[i];
      mask = Matrix(h.rows, h.cols);
      fill_dropout_mask(mask, m.dropout_keep, *rng);
      for (size_t k = 0; k < h.v.size(); ++k) h.v[k] *= mask.v[k];
    }
    cur = &h;
  }
  for (int s = 0; s < kNumSlots; ++s) {
    scores[s] = Matrix(cur->rows, m.head_w[s].cols);
    gemm_nn(*cur, m.head_w[s], scores[s]);
    add_bias(scores[s], m.head_b[s]);
  }
}

void mlp_backward_batch(const MlpModel& m, const MlpBatchCache& cache,
                        const std::array<Matrix, kNumSlots>& d_scores,
                        MlpModel& grad) {
  int layers = static_cast<int>(m.w.size());
  const Matrix& top = layers > 0 ? cache.h[layers - 1] : cache.x;
  Matrix d_top(top.rows, top.cols);
  for (int s = 0; s < kNumSlots; ++s) {
    gemm_tn(top, d_scores[s], grad.head_w[s]);
    add_col_sums(d_scores[s], grad.head_b[s]);
    gemm_nt(d_scores[s], m.head_w[s], d_top);
  }
  Matrix d_cur = std::move(d_top);
  for (int i = layers - 1; i >= 0; --i) {
    // through dropout and relu
    if (cache.train && m.dropout_keep < 1.0)
      for (size_t k = 0; k < d_cur.v.size(); ++k)
        d_cur.v[k] *= cache.mask[i].v[k];
    for (size_t k = 0; k < d_cur.v.size(); ++k)
      if (cache.z[i].v[k] <= 0.0) d_cur.v[k] = 0.0;
    const Matrix& in = i > 0 ? cache.h[i - 1] : cache.x;
    gemm_tn(in, d_cur, grad.w[i]);
    add_col_sums(d_cur, grad.b[i]);
    if (i > 0) {
      Matrix d_prev(in.rows, in.cols);
      gemm_nt(d_cur, m.w[i], d_prev);
      d_cur = std::move(d_prev);
    }
  }
}

void lstm_forward_batch(const LstmModel& m, const Matrix& x, int batch,
                        int steps, bool train, Rng* rng, LstmBatchCache& cache,
                        std::array<Matrix, kNumSlots>& scores) {
  if (x.cols != m.input_dim)
    throw InvalidInput("lstm: input dimension mismatch");
  if (x.rows != batch * steps)
    throw InvalidInput("lstm: row count is not batch * steps");
  if (batch < 1 || steps < 1) throw InvalidInput("lstm: empty batch");
  if (train && m.dropout_keep < 1.0 && !rng)
    throw InvalidInput("lstm: training forward needs an rng for dropout");
  int H = m.hidden;
  cache.batch = batch;
  cache.steps = steps;
  cache.train = train;
  cache.x = x;
  cache.xp = Matrix(x.rows, m.proj_dim);
  gemm_nn(x, m.proj_w, cache.xp);
  add_bias(cache.xp, m.proj_b);

  for (int s = 0; s < kNumSlots; ++s) {
    cache.stacks[s].assign(m.layers, LstmLayerCache());
    const Matrix* in = &cache.xp;
    for (int j = 0; j < m.layers; ++j) {
      const LstmLayerParams& p = m.stacks[s][j];
      LstmLayerCache& lc = cache.stacks[s][j];
      lc.gates = Matrix(x.rows, 4 * H);
      lc.c = Matrix(x.rows, H);
      lc.tanhc = Matrix(x.rows, H);
      lc.h = Matrix(x.rows, H);
      // input contribution for every step in one pass
      gemm_nn(*in, p.wx, lc.gates);
      add_bias(lc.gates, p.b);
      for (int t = 0; t < steps; ++t) {
        size_t r0 = static_cast<size_t>(t) * batch;
        double* gates_t = lc.gates.row(static_cast<int>(r0));
        if (t > 0) {
          const double* h_prev = lc.h.row(static_cast<int>(r0 - batch));
          gemm_nn(h_prev, p.wh.v.data(), gates_t, batch, H, 4 * H);
        }
        for (int bi = 0; bi < batch; ++bi) {
          double* g = gates_t + static_cast<size_t>(bi) * 4 * H;
          const double* c_prev =
              t > 0 ? lc.c.row(static_cast<int>(r0 - batch + bi)) : nullptr;
          double* c = lc.c.row(static_cast<int>(r0 + bi));
          double* tc = lc.tanhc.row(static_cast<int>(r0 + bi));
          double* h = lc.h.row(static_cast<int>(r0 + bi));
          for (int u = 0; u < H; ++u) {
            double gi = sigmoid(g[u]);
            double gf = sigmoid(g[H + u]);
            double gg = std::tanh(g[2 * H + u]);
            double go = sigmoid(g[3 * H + u]);
            g[u] = gi;
            g[H + u] = gf;
            g[2 * H + u] = gg;
            g[3 * H + u] = go;
            double cv = gi * gg + (t > 0 ? gf * c_prev[u] : 0.0);
            c[u] = cv;
            tc[u] = std::tanh(cv);
            h[u] = go * tc[u];
          }
        }
      }
      if (train && m.dropout_keep < 1.0) {
        lc.mask = Matrix(x.rows, H);
        fill_dropout_mask(lc.mask, m.dropout_keep, *rng);
        lc.hd = lc.h;
        for (size_t k = 0; k < lc.hd.v.size(); ++k)
          lc.hd.v[k] *= lc.mask.v[k];
      } else {
        lc.hd = lc.h;
      }
      in = &lc.hd;
    }
    // scores from the final step rows
    const Matrix& top = cache.stacks[s][m.layers - 1].hd;
    const double* last = top.row((steps - 1) * batch);
    scores[s] = Matrix(batch, m.head_w[s].cols);
    gemm_nn(last, m.head_w[s].v.data(), scores[s].v.data(), batch, H,
            m.head_w[s].cols);
    add_bias(scores[s], m.head_b[s]);
  }
}

void lstm_backward_batch(const LstmModel& m, const LstmBatchCache& cache,
                         const std::array<Matrix, kNumSlots>& d_scores,
                         LstmModel& grad) {
  int H = m.hidden;
  int batch = cache.batch;
  int steps = cache.steps;
  Matrix d_xp(cache.xp.rows, cache.xp.cols);
  for (int s = 0; s < kNumSlots; ++s) {
    // gradient entering each layer's hd rows; starts with the head at the
    // final step of the top layer
    Matrix d_hd(cache.x.rows, H);
    {
      const Matrix& top = cache.stacks[s][m.layers - 1].hd;
      const double* last = top.row((steps - 1) * batch);
      gemm_tn(last, d_scores[s].v.data(),
              grad.head_w[s].v.data(), batch, H, m.head_w[s].cols);
      add_col_sums(d_scores[s], grad.head_b[s]);
      double* d_last = d_hd.row((steps - 1) * batch);
      gemm_nt(d_scores[s].v.data(), m.head_w[s].v.data(), d_last, batch,
              m.head_w[s].cols, H);
    }
    for (int j = m.layers - 1; j >= 0; --j) {
      const LstmLayerParams& p = m.stacks[s][j];
      const LstmLayerCache& lc = cache.stacks[s][j];
      Matrix whT = transposed(p.wh);
      Matrix dA(cache.x.rows, 4 * H);
      std::vector<double> dh(static_cast<size_t>(batch) * H);
      std::vector<double> dc(static_cast<size_t>(batch) * H, 0.0);
      std::vector<double> dh_rec(static_cast<size_t>(batch) * H, 0.0);
      for (int t = steps - 1; t >= 0; --t) {
        size_t r0 = static_cast<size_t>(t) * batch;
        // dropout backward plus recurrent gradient from step t+1
        for (int bi = 0; bi < batch; ++bi) {
          const double* ext = d_hd.row(static_cast<int>(r0 + bi));
          const double* mask =
              lc.mask.v.empty() ? nullptr
                                : lc.mask.row(static_cast<int>(r0 + bi));
          double* dhb = dh.data() + static_cast<size_t>(bi) * H;
          const double* rec = dh_rec.data() + static_cast<size_t>(bi) * H;
          for (int u = 0; u < H; ++u)
            dhb[u] = ext[u] * (mask ? mask[u] : 1.0) + rec[u];
        }
        for (int bi = 0; bi < batch; ++bi) {
          const double* g = lc.gates.row(static_cast<int>(r0 + bi));
          const double* tc = lc.tanhc.row(static_cast<int>(r0 + bi));
          const double* c_prev =
              t > 0 ? lc.c.row(static_cast<int>(r0 - batch + bi)) : nullptr;
          double* dhb = dh.data() + static_cast<size_t>(bi) * H;
          double* dcb = dc.data() + static_cast<size_t>(bi) * H;
          double* da = dA.row(static_cast<int>(r0 + bi));
          for (int u = 0; u < H; ++u) {
            double gi = g[u], gf = g[H + u], gg = g[2 * H + u],
                   go = g[3 * H + u];
            double d_o = dhb[u] * tc[u];
            double d_c = dcb[u] + dhb[u] * go * (1.0 - tc[u] * tc[u]);
            double d_i = d_c * gg;
            double d_g = d_c * gi;
            double d_f = t > 0 ? d_c * c_prev[u] : 0.0;
            da[u] = d_i * gi * (1.0 - gi);
            da[H + u] = d_f * gf * (1.0 - gf);
            da[2 * H + u] = d_g * (1.0 - gg * gg);
            da[3 * H + u] = d_o * go * (1.0 - go);
            dcb[u] = d_c * gf;  // becomes dc_prev
          }
        }
        if (t > 0) {
          std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
          gemm_nn(dA.row(static_cast<int>(r0)), whT.v.data(), dh_rec.data(),
                  batch, 4 * H, H);
          gemm_tn(lc.h.row(static_cast<int>(r0 - batch)),
                  dA.row(static_cast<int>(r0)), grad.stacks[s][j].wh.v.data(),
                  batch, H, 4 * H);
        }
      }
      const Matrix& in = j > 0 ? cache.stacks[s][j - 1].hd : cache.xp;
      gemm_tn(in, dA, grad.stacks[s][j].wx);
      add_col_sums(dA, grad.stacks[s][j].b);
      Matrix wxT = transposed(p.wx);
      if (j > 0) {
        d_hd.zero();
        gemm_nn(dA, wxT, d_hd);
      } else {
        gemm_nn(dA, wxT, d_xp);
      }
    }
  }
  gemm_tn(cache.x, d_xp, grad.proj_w);
  add_col_sums(d_xp, grad.proj_b);
}

SlotScores mlp_forward(const MlpModel& m, const std::vector<double>& x,
                       bool train_mode, Rng* rng) {
  if (static_cast<int>(x.size()) != m.input_dim)
    throw InvalidInput("mlp: input dimension mismatch");
  Matrix xm(1, m.input_dim);
  xm.v = x;
  MlpBatchCache cache;
  std::array<Matrix, kNumSlots> sm;
  mlp_forward_batch(m, xm, train_mode, rng, cache, sm);
  SlotScores out;
  for (int s = 0; s < kNumSlots; ++s)
    out[s].assign(sm[s].row(0), sm[s].row(0) + sm[s].cols);
  return out;
}

SlotScores lstm_forward(const LstmModel& m, const FeatureMatrix& x,
                        bool train_mode, Rng* rng) {
  if (x.rows != kSegmentFrames)
    throw InvalidInput("lstm: expected one row per segment frame");
  if (x.cols != m.input_dim)
    throw InvalidInput("lstm: input dimension mismatch");
  Matrix xm(x.rows, x.cols);
  xm.v = x.values;
  LstmBatchCache cache;
  std::array<Matrix, kNumSlots> sm;
  lstm_forward_batch(m, xm, 1, x.rows, train_mode, rng, cache, sm);
  SlotScores out;
  for (int s = 0; s < kNumSlots; ++s)
    out[s].assign(sm[s].row(0), sm[s].row(0) + sm[s].cols);
  return out;
}

}  // namespace qsrev
