#include "nesum/seq2seq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "nesum/rng.hpp"

namespace nesum::seq2seq {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

int Vocab::lookup(const std::string& token) const {
  auto it = token_to_id.find(token);
  return it == token_to_id.end() ? kUnk : it->second;
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& documents,
                   std::size_t max_size) {
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& doc : documents)
    for (const auto& tok : doc) ++freq[tok];
  if (freq.empty()) throw ArgumentError("vocabulary stream holds no tokens");

  std::vector<std::pair<std::string, std::uint64_t>> by_count(freq.begin(), freq.end());
  std::sort(by_count.begin(), by_count.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocab v;
  v.id_to_token = {"<pad>", "<sos>", "<eos>", "<unk>"};
  const std::size_t budget = max_size > kReserved ? max_size - kReserved : 0;
  for (std::size_t i = 0; i < std::min(budget, by_count.size()); ++i)
    v.id_to_token.push_back(by_count[i].first);
  for (std::size_t id = 0; id < v.id_to_token.size(); ++id)
    v.token_to_id[v.id_to_token[id]] = static_cast<int>(id);
  return v;
}

// ---------------------------------------------------------------------------
// Config and parameters
// ---------------------------------------------------------------------------

void ModelConfig::validate() const {
  if (embed_dim < 1 || hidden_dim < 1 || energy_dim < 1)
    throw ArgumentError("model dimensions must be positive");
  if (dropout < 0.0 || dropout >= 1.0)
    throw ArgumentError("dropout must lie in [0, 1)");
  if (ner_feature_dim != 0 && ner_feature_dim != kNerFeatureDim)
    throw ArgumentError("ner_feature_dim must be 0 or 17");
  if (max_src_len < 1 || max_tgt_len < 0)
    throw ArgumentError("sequence length caps must be positive");
  if (teacher_forcing < 0.0 || teacher_forcing > 1.0)
    throw ArgumentError("teacher_forcing must lie in [0, 1]");
  if (learning_rate < 0.0) throw ArgumentError("learning_rate must be >= 0");
  if (batch_size < 1) throw ArgumentError("batch_size must be positive");
  if (max_epochs < 1) throw ArgumentError("max_epochs must be positive");
}

namespace {

void fill_uniform(Matrix& m, SplitMix64& rng, double lo, double hi) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.next_range(lo, hi);
}

GruParams gru_zeros(int input_dim, int hidden_dim) {
  GruParams g;
  g.wz = Matrix::Zero(hidden_dim, input_dim);
  g.wr = Matrix::Zero(hidden_dim, input_dim);
  g.wn = Matrix::Zero(hidden_dim, input_dim);
  g.uz = Matrix::Zero(hidden_dim, hidden_dim);
  g.ur = Matrix::Zero(hidden_dim, hidden_dim);
  g.un = Matrix::Zero(hidden_dim, hidden_dim);
  g.bz = Vector::Zero(hidden_dim);
  g.br = Vector::Zero(hidden_dim);
  g.bn = Vector::Zero(hidden_dim);
  return g;
}

void gru_init(GruParams& g, SplitMix64& rng, double scale) {
  fill_uniform(g.wz, rng, -scale, scale);
  fill_uniform(g.wr, rng, -scale, scale);
  fill_uniform(g.wn, rng, -scale, scale);
  fill_uniform(g.uz, rng, -scale, scale);
  fill_uniform(g.ur, rng, -scale, scale);
  fill_uniform(g.un, rng, -scale, scale);
}

void gru_add_scaled(GruParams& g, const GruParams& o, double f) {
  g.wz += f * o.wz;
  g.wr += f * o.wr;
  g.wn += f * o.wn;
  g.uz += f * o.uz;
  g.ur += f * o.ur;
  g.un += f * o.un;
  g.bz += f * o.bz;
  g.br += f * o.br;
  g.bn += f * o.bn;
}

bool gru_finite(const GruParams& g) {
  return g.wz.allFinite() && g.wr.allFinite() && g.wn.allFinite() &&
         g.uz.allFinite() && g.ur.allFinite() && g.un.allFinite() &&
         g.bz.allFinite() && g.br.allFinite() && g.bn.allFinite();
}

}  // namespace

ModelParams ModelParams::zeros(const ModelConfig& config, int vocab_size) {
  config.validate();
  ModelParams p;
  p.embedding = Matrix::Zero(vocab_size, config.embed_dim);
  p.encoder = gru_zeros(config.embed_dim + config.ner_feature_dim, config.hidden_dim);
  p.decoder = gru_zeros(config.embed_dim + config.hidden_dim, config.hidden_dim);
  p.enc_energy = Matrix::Zero(config.energy_dim, config.hidden_dim);
  p.dec_energy = Matrix::Zero(config.energy_dim, config.hidden_dim);
  p.out_w = Matrix::Zero(vocab_size, config.hidden_dim);
  p.out_b = Vector::Zero(vocab_size);
  return p;
}

ModelParams ModelParams::init(const ModelConfig& config, int vocab_size) {
  ModelParams p = zeros(config, vocab_size);
  SplitMix64 rng(config.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.hidden_dim));
  fill_uniform(p.embedding, rng, -0.1, 0.1);
  gru_init(p.encoder, rng, scale);
  gru_init(p.decoder, rng, scale);
  fill_uniform(p.enc_energy, rng, -scale, scale);
  fill_uniform(p.dec_energy, rng, -scale, scale);
  fill_uniform(p.out_w, rng, -scale, scale);
  return p;
}

bool ModelParams::all_finite() const {
  return embedding.allFinite() && gru_finite(encoder) && gru_finite(decoder) &&
         enc_energy.allFinite() && dec_energy.allFinite() && out_w.allFinite() &&
         out_b.allFinite();
}

void ModelParams::check_shapes(const ModelConfig& config, int vocab_size) const {
  auto expect = [](bool ok, const char* what) {
    if (!ok) throw DataError(std::string("parameter shape mismatch: ") + what);
  };
  expect(embedding.rows() == vocab_size && embedding.cols() == config.embed_dim,
         "embedding");
  expect(encoder.wz.rows() == config.hidden_dim &&
             encoder.wz.cols() == config.embed_dim + config.ner_feature_dim,
         "encoder input width");
  expect(decoder.wz.rows() == config.hidden_dim &&
             decoder.wz.cols() == config.embed_dim + config.hidden_dim,
         "decoder input width");
  expect(enc_energy.rows() == config.energy_dim &&
             enc_energy.cols() == config.hidden_dim,
         "encoder energy projection");
  expect(dec_energy.rows() == config.energy_dim &&
             dec_energy.cols() == config.hidden_dim,
         "decoder energy projection");
  expect(out_w.rows() == vocab_size && out_w.cols() == config.hidden_dim,
         "output projection");
  expect(out_b.size() == vocab_size, "output bias");
}

void ModelParams::add_scaled(const ModelParams& other, double factor) {
  embedding += factor * other.embedding;
  gru_add_scaled(encoder, other.encoder, factor);
  gru_add_scaled(decoder, other.decoder, factor);
  enc_energy += factor * other.enc_energy;
  dec_energy += factor * other.dec_energy;
  out_w += factor * other.out_w;
  out_b += factor * other.out_b;
}

// ---------------------------------------------------------------------------
// Entity feature channel
// ---------------------------------------------------------------------------

namespace {
constexpr int kNerOutside = 14;
constexpr int kNerPad = 15;
constexpr int kNerBoundary = 16;
}  // namespace

int ner_feature_index(const IobTag& tag) {
  switch (tag.kind) {
    case IobTag::Kind::B:
      return 2 * static_cast<int>(tag.type);
    case IobTag::Kind::I:
      return 2 * static_cast<int>(tag.type) + 1;
    case IobTag::Kind::O:
    default:
      return kNerOutside;
  }
}

int ner_feature_index(NerSpecial special) {
  return special == NerSpecial::pad ? kNerPad : kNerBoundary;
}

namespace {
Vector one_hot17(int index) {
  Vector v = Vector::Zero(kNerFeatureDim);
  v(index) = 1.0;
  return v;
}
}  // namespace

Vector ner_one_hot(const IobTag& tag) { return one_hot17(ner_feature_index(tag)); }
Vector ner_one_hot(NerSpecial special) { return one_hot17(ner_feature_index(special)); }

// ---------------------------------------------------------------------------
// Recurrent unit forward/backward
// ---------------------------------------------------------------------------

namespace {

Vector sigmoid(const Vector& v) {
  return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

struct GruCache {
  Vector x, h_prev, z, r, rh, n, h;
};

GruCache gru_forward(const GruParams& g, Vector x, Vector h_prev) {
  GruCache c;
  c.x = std::move(x);
  c.h_prev = std::move(h_prev);
  c.z = sigmoid(g.wz * c.x + g.uz * c.h_prev + g.bz);
  c.r = sigmoid(g.wr * c.x + g.ur * c.h_prev + g.br);
  c.rh = c.r.cwiseProduct(c.h_prev);
  c.n = (g.wn * c.x + g.un * c.rh + g.bn).array().tanh().matrix();
  c.h = (1.0 - c.z.array()).matrix().cwiseProduct(c.n) + c.z.cwiseProduct(c.h_prev);
  return c;
}

void gru_backward(const GruParams& g, const GruCache& c, const Vector& dh,
                  GruParams& grad, Vector& dx, Vector& dh_prev) {
  const Vector dn = dh.cwiseProduct((1.0 - c.z.array()).matrix());
  const Vector dz = dh.cwiseProduct(c.h_prev - c.n);
  Vector dhp = dh.cwiseProduct(c.z);

  const Vector dan = dn.cwiseProduct((1.0 - c.n.array().square()).matrix());
  grad.wn.noalias() += dan * c.x.transpose();
  grad.un.noalias() += dan * c.rh.transpose();
  grad.bn += dan;

  const Vector drh = g.un.transpose() * dan;
  const Vector dr = drh.cwiseProduct(c.h_prev);
  dhp += drh.cwiseProduct(c.r);

  const Vector daz = dz.cwiseProduct(c.z.cwiseProduct((1.0 - c.z.array()).matrix()));
  const Vector dar = dr.cwiseProduct(c.r.cwiseProduct((1.0 - c.r.array()).matrix()));
  grad.wz.noalias() += daz * c.x.transpose();
  grad.uz.noalias() += daz * c.h_prev.transpose();
  grad.bz += daz;
  grad.wr.noalias() += dar * c.x.transpose();
  grad.ur.noalias() += dar * c.h_prev.transpose();
  grad.br += dar;

  dx = g.wz.transpose() * daz + g.wr.transpose() * dar + g.wn.transpose() * dan;
  dh_prev = dhp + g.uz.transpose() * daz + g.ur.transpose() * dar;
}

Vector stable_softmax(const Vector& v) {
  const double m = v.maxCoeff();
  Vector e = (v.array() - m).exp().matrix();
  return e / e.sum();
}

Vector embed_input(const ModelParams& p, const ModelConfig& cfg, int token,
                   int ner_index) {
  Vector x(cfg.embed_dim + cfg.ner_feature_dim);
  x.head(cfg.embed_dim) = p.embedding.row(token).transpose();
  if (cfg.ner_feature_dim > 0) {
    x.tail(cfg.ner_feature_dim).setZero();
    x(cfg.embed_dim + ner_index) = 1.0;
  }
  return x;
}

void check_src(const ModelConfig& cfg, std::span<const int> src,
               std::span<const int> src_ner) {
  if (src.empty()) throw ArgumentError("encoder input is empty");
  if (cfg.ner_feature_dim > 0) {
    if (src_ner.size() != src.size())
      throw ArgumentError("entity features missing or misaligned with source");
  } else if (!src_ner.empty()) {
    throw ArgumentError("entity features passed to a model without the channel");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Forward operations
// ---------------------------------------------------------------------------

EncodeResult encode(const ModelParams& params, const ModelConfig& config,
                    std::span<const int> src, std::span<const int> src_ner) {
  check_src(config, src, src_ner);
  EncodeResult result;
  std::size_t n = src.size();
  if (n > static_cast<std::size_t>(config.max_src_len)) {
    n = config.max_src_len;
    result.truncated = true;
  }
  result.states.resize(config.hidden_dim, static_cast<Eigen::Index>(n));
  Vector h = Vector::Zero(config.hidden_dim);
  for (std::size_t s = 0; s < n; ++s) {
    const int ner = config.ner_feature_dim > 0 ? src_ner[s] : 0;
    auto cache = gru_forward(params.encoder,
                             embed_input(params, config, src[s], ner), std::move(h));
    h = cache.h;
    result.states.col(static_cast<Eigen::Index>(s)) = cache.h;
  }
  return result;
}

Vector attention_weights(const ModelParams& params, const Vector& dec_hidden_prev,
                         const Matrix& enc_states, Eigen::Index valid_len) {
  const Eigen::Index n = enc_states.cols();
  if (n == 0) throw ArgumentError("attention over empty encoder states");
  const Eigen::Index valid = valid_len < 0 ? n : valid_len;
  if (valid < 1 || valid > n)
    throw ArgumentError("attention valid length out of range");
  const Vector pd = params.dec_energy * dec_hidden_prev;
  const Vector scores =
      (params.enc_energy * enc_states.leftCols(valid)).transpose() * pd;
  Vector weights = Vector::Zero(n);
  weights.head(valid) = stable_softmax(scores);
  return weights;
}

Vector context_vector(const Vector& weights, const Matrix& enc_states) {
  if (weights.size() != enc_states.cols())
    throw ArgumentError("context_vector: weight/state length mismatch");
  return enc_states * weights;
}

StepResult decode_step(const ModelParams& params, const ModelConfig& config,
                       int prev_token, const Vector& dec_hidden_prev,
                       const Matrix& enc_states, bool ban_unk,
                       Eigen::Index valid_len) {
  StepResult r;
  r.attention = attention_weights(params, dec_hidden_prev, enc_states, valid_len);
  const Vector ctx = context_vector(r.attention, enc_states);
  Vector x(config.embed_dim + config.hidden_dim);
  x.head(config.embed_dim) = params.embedding.row(prev_token).transpose();
  x.tail(config.hidden_dim) = ctx;
  auto cache = gru_forward(params.decoder, std::move(x), dec_hidden_prev);
  r.hidden = cache.h;
  r.logits = params.out_w * cache.h + params.out_b;
  if (ban_unk) r.logits(Vocab::kUnk) = -std::numeric_limits<double>::infinity();
  return r;
}

// ---------------------------------------------------------------------------
// Batch forward/backward
// ---------------------------------------------------------------------------

namespace {

struct DecStep {
  GruCache gru;
  Vector attn;
  Vector hd;    // hidden after output dropout (== gru.h in eval)
  Vector mask;  // empty when dropout is off
  Vector prob;
  int prev = 0;
  int target = 0;
};

struct TruncatedExample {
  std::vector<int> src, src_ner, tgt;
};

TruncatedExample truncate_example(const ModelConfig& cfg, const Example& ex,
                                  BatchStats* stats) {
  if (ex.src.empty()) throw ArgumentError("example with empty source");
  if (ex.tgt.empty() || ex.tgt.back() != Vocab::kEos)
    throw ArgumentError("example target must end with <eos>");
  TruncatedExample t;
  t.src.assign(ex.src.begin(), ex.src.end());
  t.src_ner.assign(ex.src_ner.begin(), ex.src_ner.end());
  t.tgt.assign(ex.tgt.begin(), ex.tgt.end());
  if (t.src.size() > static_cast<std::size_t>(cfg.max_src_len)) {
    t.src.resize(cfg.max_src_len);
    if (!t.src_ner.empty()) t.src_ner.resize(cfg.max_src_len);
    if (stats) ++stats->truncated_src;
  }
  if (cfg.max_tgt_len >= 1 &&
      t.tgt.size() > static_cast<std::size_t>(cfg.max_tgt_len)) {
    t.tgt.resize(cfg.max_tgt_len);
    t.tgt.back() = Vocab::kEos;  // keep the terminal symbol
    if (stats) ++stats->truncated_tgt;
  }
  return t;
}

// Forward (and optional backward) over one batch. The RNG draw order is
// pinned -- per example: encoder output mask column by column, then per
// decoder step the output mask followed by the teacher-forcing draw -- so
// that forward_loss and gradients see identical masks for a given seed.
double run_batch(const ModelParams& params, const ModelConfig& config,
                 std::span<const Example> batch, bool training,
                 std::uint64_t step_seed, ModelParams* grads, BatchStats* stats) {
  config.validate();
  if (batch.empty()) throw ArgumentError("empty batch");
  const int H = config.hidden_dim;
  const int E = config.embed_dim;
  const bool use_dropout = training && config.dropout > 0.0;
  const double keep_scale = use_dropout ? 1.0 / (1.0 - config.dropout) : 1.0;
  SplitMix64 rng(step_seed);
  const double batch_weight = 1.0 / static_cast<double>(batch.size());

  double total_loss = 0.0;
  for (const Example& raw : batch) {
    TruncatedExample ex = truncate_example(config, raw, stats);
    if (config.ner_feature_dim > 0 && ex.src_ner.size() != ex.src.size())
      throw ArgumentError("entity features missing or misaligned with source");
    if (config.ner_feature_dim == 0 && !ex.src_ner.empty())
      throw ArgumentError("entity features passed to a model without the channel");
    const auto n = static_cast<Eigen::Index>(ex.src.size());
    const auto T = static_cast<Eigen::Index>(ex.tgt.size());

    // encoder
    std::vector<GruCache> enc_steps;
    enc_steps.reserve(n);
    Matrix states_raw(H, n);
    {
      Vector h = Vector::Zero(H);
      for (Eigen::Index s = 0; s < n; ++s) {
        const int ner = config.ner_feature_dim > 0 ? ex.src_ner[s] : 0;
        enc_steps.push_back(gru_forward(
            params.encoder, embed_input(params, config, ex.src[s], ner),
            std::move(h)));
        h = enc_steps.back().h;
        states_raw.col(s) = h;
      }
    }
    Matrix enc_mask;
    Matrix states_used;
    if (use_dropout) {
      enc_mask.resize(H, n);
      for (Eigen::Index s = 0; s < n; ++s)
        for (int i = 0; i < H; ++i)
          enc_mask(i, s) = rng.next_unit() < config.dropout ? 0.0 : keep_scale;
      states_used = states_raw.cwiseProduct(enc_mask);
    } else {
      states_used = states_raw;
    }
    const Matrix pe = params.enc_energy * states_used;  // energy x n

    // decoder
    std::vector<DecStep> dec_steps;
    dec_steps.reserve(T);
    double example_loss = 0.0;
    {
      Vector h = states_used.col(n - 1);
      int prev = Vocab::kSos;
      for (Eigen::Index j = 0; j < T; ++j) {
        DecStep st;
        st.prev = prev;
        st.target = ex.tgt[j];
        const Vector pd = params.dec_energy * h;
        st.attn = stable_softmax(pe.transpose() * pd);
        const Vector ctx = states_used * st.attn;
        Vector x(E + H);
        x.head(E) = params.embedding.row(prev).transpose();
        x.tail(H) = ctx;
        st.gru = gru_forward(params.decoder, std::move(x), std::move(h));
        if (use_dropout) {
          st.mask.resize(H);
          for (int i = 0; i < H; ++i)
            st.mask(i) = rng.next_unit() < config.dropout ? 0.0 : keep_scale;
          st.hd = st.gru.h.cwiseProduct(st.mask);
        } else {
          st.hd = st.gru.h;
        }
        const Vector logits = params.out_w * st.hd + params.out_b;
        const double m = logits.maxCoeff();
        const double lse = m + std::log((logits.array() - m).exp().sum());
        example_loss += lse - logits(st.target);
        st.prob = (logits.array() - lse).exp().matrix();

        if (config.teacher_forcing >= 1.0) {
          prev = st.target;
        } else if (rng.next_unit() < config.teacher_forcing) {
          prev = st.target;
        } else {
          Eigen::Index best;
          logits.maxCoeff(&best);
          prev = static_cast<int>(best);
        }
        h = st.gru.h;
        dec_steps.push_back(std::move(st));
      }
    }
    example_loss /= static_cast<double>(T);
    total_loss += example_loss * batch_weight;

    if (!grads) continue;

    // backward for this example; every term carries weight 1/(T*B)
    const double w = batch_weight / static_cast<double>(T);
    Vector dh = Vector::Zero(H);
    Matrix denc_used = Matrix::Zero(H, n);
    for (Eigen::Index j = T - 1; j >= 0; --j) {
      const DecStep& st = dec_steps[j];
      Vector dlogits = st.prob * w;
      dlogits(st.target) -= w;
      grads->out_w.noalias() += dlogits * st.hd.transpose();
      grads->out_b += dlogits;
      Vector dhd = params.out_w.transpose() * dlogits;
      if (use_dropout) dhd = dhd.cwiseProduct(st.mask);
      const Vector dh_total = dh + dhd;

      Vector dx, dh_prev;
      gru_backward(params.decoder, st.gru, dh_total, grads->decoder, dx, dh_prev);
      grads->embedding.row(st.prev) += dx.head(E).transpose();
      const Vector dctx = dx.tail(H);

      Vector dattn = states_used.transpose() * dctx;
      denc_used.noalias() += dctx * st.attn.transpose();

      const double attn_dot = st.attn.dot(dattn);
      const Vector dscores =
          st.attn.cwiseProduct((dattn.array() - attn_dot).matrix());
      const Vector pd = params.dec_energy * st.gru.h_prev;
      const Vector dpd = pe * dscores;
      grads->dec_energy.noalias() += dpd * st.gru.h_prev.transpose();
      grads->enc_energy.noalias() += pd * (states_used * dscores).transpose();
      denc_used.noalias() +=
          (params.enc_energy.transpose() * pd) * dscores.transpose();

      dh = dh_prev + params.dec_energy.transpose() * dpd;
    }
    denc_used.col(n - 1) += dh;  // decoder initial state

    Matrix denc_raw =
        use_dropout ? denc_used.cwiseProduct(enc_mask).eval() : std::move(denc_used);
    Vector dhe = Vector::Zero(H);
    for (Eigen::Index s = n - 1; s >= 0; --s) {
      dhe += denc_raw.col(s);
      Vector dx, dh_prev;
      gru_backward(params.encoder, enc_steps[s], dhe, grads->encoder, dx, dh_prev);
      grads->embedding.row(ex.src[s]) += dx.head(E).transpose();
      dhe = dh_prev;
    }
  }
  return total_loss;
}

}  // namespace

double forward_loss(const ModelParams& params, const ModelConfig& config,
                    std::span<const Example> batch, bool training,
                    std::uint64_t step_seed, BatchStats* stats) {
  return run_batch(params, config, batch, training, step_seed, nullptr, stats);
}

LossAndGrads gradients(const ModelParams& params, const ModelConfig& config,
                       std::span<const Example> batch, bool training,
                       std::uint64_t step_seed) {
  LossAndGrads out;
  out.grads = ModelParams::zeros(config, static_cast<int>(params.embedding.rows()));
  out.loss = run_batch(params, config, batch, training, step_seed, &out.grads, nullptr);
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

double eval_loss(const ModelParams& params, const ModelConfig& config,
                 std::span<const Example> set) {
  double sum = 0.0;
  std::size_t seen = 0;
  for (std::size_t at = 0; at < set.size();
       at += static_cast<std::size_t>(config.batch_size)) {
    const std::size_t count =
        std::min<std::size_t>(config.batch_size, set.size() - at);
    sum += forward_loss(params, config, set.subspan(at, count), false, 0) *
           static_cast<double>(count);
    seen += count;
  }
  return sum / static_cast<double>(seen);
}

}  // namespace

TrainResult train(const ModelParams& initial, const ModelConfig& config,
                  std::span<const Example> train_set,
                  std::span<const Example> dev_set) {
  config.validate();
  if (train_set.empty() || dev_set.empty())
    throw ArgumentError("train and dev sets must be non-empty");

  ModelParams params = initial;
  TrainResult result;
  result.best_params = params;
  result.best_dev_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();

    SplitMix64 shuffler(config.seed ^
                        (static_cast<std::uint64_t>(epoch) * 0x9e3779b97f4a7c15ull));
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[shuffler.below(i + 1)]);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::size_t batch_index = 0;
    for (std::size_t at = 0; at < order.size();
         at += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count =
          std::min<std::size_t>(config.batch_size, order.size() - at);
      std::vector<Example> batch;
      batch.reserve(count);
      for (std::size_t k = 0; k < count; ++k)
        batch.push_back(train_set[order[at + k]]);

      const std::uint64_t step_seed = config.seed ^
                                      (static_cast<std::uint64_t>(epoch) << 32) ^
                                      batch_index;
      auto lg = gradients(params, config, batch, true, step_seed);
      if (!std::isfinite(lg.loss))
        throw NumericError("loss diverged at epoch " + std::to_string(epoch) +
                           " batch " + std::to_string(batch_index));
      params.add_scaled(lg.grads, -config.learning_rate);
      if (!params.all_finite())
        throw NumericError("parameters diverged at epoch " + std::to_string(epoch) +
                           " batch " + std::to_string(batch_index));
      loss_sum += lg.loss * static_cast<double>(count);
      seen += count;
      ++batch_index;
    }

    TrainLogRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / static_cast<double>(seen);
    row.dev_loss = eval_loss(params, config, dev_set);
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.push_back(row);

    if (row.dev_loss < result.best_dev_loss) {
      result.best_dev_loss = row.dev_loss;
      result.best_epoch = epoch;
      result.best_params = params;
    } else if (row.dev_loss > result.best_dev_loss) {
      break;  // patience 1
    }
  }
  return result;
}

std::vector<std::string> greedy_decode(const ModelParams& params,
                                       const ModelConfig& config, const Vocab& vocab,
                                       std::span<const int> src,
                                       std::span<const int> src_ner) {
  auto enc = encode(params, config, src, src_ner);
  Vector h = enc.final_state();
  int prev = Vocab::kSos;
  std::vector<std::string> out;
  for (int step = 0; step < config.max_tgt_len; ++step) {
    auto sr = decode_step(params, config, prev, h, enc.states, true);
    // the reserved non-surface ids are never emitted
    sr.logits(Vocab::kPad) = -std::numeric_limits<double>::infinity();
    sr.logits(Vocab::kSos) = -std::numeric_limits<double>::infinity();
    Eigen::Index best;
    sr.logits.maxCoeff(&best);
    if (best == Vocab::kEos) break;
    out.push_back(vocab.token(static_cast<int>(best)));
    prev = static_cast<int>(best);
    h = sr.hidden;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 ||
      static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw DataError("checkpoint tensor data does not match its shape");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++];
  return m;
}

json vector_to_json(const Vector& v) { return matrix_to_json(Matrix(v)); }

Vector vector_from_json(const json& j) {
  Matrix m = matrix_from_json(j);
  if (m.cols() != 1) throw DataError("checkpoint tensor is not a vector");
  return Vector(m.col(0));
}

json config_to_json(const ModelConfig& c) {
  return json{{"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},
              {"energy_dim", c.energy_dim},
              {"dropout", c.dropout},
              {"ner_feature_dim", c.ner_feature_dim},
              {"max_src_len", c.max_src_len},
              {"max_tgt_len", c.max_tgt_len},
              {"teacher_forcing", c.teacher_forcing},
              {"learning_rate", c.learning_rate},
              {"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.embed_dim = j.at("embed_dim").get<int>();
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.energy_dim = j.at("energy_dim").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.ner_feature_dim = j.at("ner_feature_dim").get<int>();
  c.max_src_len = j.at("max_src_len").get<int>();
  c.max_tgt_len = j.at("max_tgt_len").get<int>();
  c.teacher_forcing = j.at("teacher_forcing").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void gru_to_json(json& tensors, const std::string& prefix, const GruParams& g) {
  tensors[prefix + ".wz"] = matrix_to_json(g.wz);
  tensors[prefix + ".wr"] = matrix_to_json(g.wr);
  tensors[prefix + ".wn"] = matrix_to_json(g.wn);
  tensors[prefix + ".uz"] = matrix_to_json(g.uz);
  tensors[prefix + ".ur"] = matrix_to_json(g.ur);
  tensors[prefix + ".un"] = matrix_to_json(g.un);
  tensors[prefix + ".bz"] = vector_to_json(g.bz);
  tensors[prefix + ".br"] = vector_to_json(g.br);
  tensors[prefix + ".bn"] = vector_to_json(g.bn);
}

GruParams gru_from_json(const json& tensors, const std::string& prefix) {
  GruParams g;
  g.wz = matrix_from_json(tensors.at(prefix + ".wz"));
  g.wr = matrix_from_json(tensors.at(prefix + ".wr"));
  g.wn = matrix_from_json(tensors.at(prefix + ".wn"));
  g.uz = matrix_from_json(tensors.at(prefix + ".uz"));
  g.ur = matrix_from_json(tensors.at(prefix + ".ur"));
  g.un = matrix_from_json(tensors.at(prefix + ".un"));
  g.bz = vector_from_json(tensors.at(prefix + ".bz"));
  g.br = vector_from_json(tensors.at(prefix + ".br"));
  g.bn = vector_from_json(tensors.at(prefix + ".bn"));
  return g;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json j;
  j["format"] = "nesum-checkpoint";
  j["version"] = 1;
  j["config"] = config_to_json(ckpt.config);
  j["vocab"] = ckpt.vocab.id_to_token;
  json tensors;
  tensors["embedding"] = matrix_to_json(ckpt.params.embedding);
  gru_to_json(tensors, "encoder", ckpt.params.encoder);
  gru_to_json(tensors, "decoder", ckpt.params.decoder);
  tensors["enc_energy"] = matrix_to_json(ckpt.params.enc_energy);
  tensors["dec_energy"] = matrix_to_json(ckpt.params.dec_energy);
  tensors["out_w"] = matrix_to_json(ckpt.params.out_w);
  tensors["out_b"] = vector_to_json(ckpt.params.out_b);
  j["tensors"] = std::move(tensors);

  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump();
  if (!out.good()) throw IoError("failed while writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "nesum-checkpoint")
      throw DataError("not a checkpoint file");
    if (j.at("version").get<int>() != 1)
      throw DataError("unsupported checkpoint version");
    Checkpoint ckpt;
    ckpt.config = config_from_json(j.at("config"));
    ckpt.config.validate();
    ckpt.vocab.id_to_token = j.at("vocab").get<std::vector<std::string>>();
    if (ckpt.vocab.id_to_token.size() < Vocab::kReserved)
      throw DataError("checkpoint vocabulary is missing the reserved symbols");
    for (std::size_t id = 0; id < ckpt.vocab.id_to_token.size(); ++id)
      ckpt.vocab.token_to_id[ckpt.vocab.id_to_token[id]] = static_cast<int>(id);
    const auto& tensors = j.at("tensors");
    ckpt.params.embedding = matrix_from_json(tensors.at("embedding"));
    ckpt.params.encoder = gru_from_json(tensors, "encoder");
    ckpt.params.decoder = gru_from_json(tensors, "decoder");
    ckpt.params.enc_energy = matrix_from_json(tensors.at("enc_energy"));
    ckpt.params.dec_energy = matrix_from_json(tensors.at("dec_energy"));
    ckpt.params.out_w = matrix_from_json(tensors.at("out_w"));
    ckpt.params.out_b = vector_from_json(tensors.at("out_b"));
    ckpt.params.check_shapes(ckpt.config, ckpt.vocab.size());
    return ckpt;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed checkpoint: ") + e.what());
  }
}

std::string train_log_to_csv(const std::vector<TrainLogRow>& log) {
  std::string out = "epoch,train_loss,dev_loss,wall_seconds\n";
  char buf[128];
  for (const auto& row : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.3f\n", row.epoch,
                  row.train_loss, row.dev_loss, row.wall_seconds);
    out += buf;
  }
  return out;
}

}  // namespace nesum::seq2seq
