#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nesum/corpus.hpp"

namespace nesum::seq2seq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kReserved = 4;

  std::vector<std::string> id_to_token;  // starts with <pad> <sos> <eos> <unk>
  std::unordered_map<std::string, int> token_to_id;

  int size() const { return static_cast<int>(id_to_token.size()); }
  int lookup(const std::string& token) const;
  const std::string& token(int id) const { return id_to_token.at(id); }

  /// Most frequent tokens up to max_size - 4 plus the reserved symbols.
  /// Frequency ties break lexicographically (smaller string first). Throws
  /// ArgumentError when the stream holds no tokens at all.
  static Vocab build(const std::vector<std::vector<std::string>>& documents,
                     std::size_t max_size);
};

// ---------------------------------------------------------------------------
// Configuration and parameters
// ---------------------------------------------------------------------------

struct ModelConfig {
  int embed_dim = 300;
  int hidden_dim = 256;
  int energy_dim = 64;
  double dropout = 0.1;      // on the outputs of both recurrent units
  int ner_feature_dim = 0;   // 0 (plain) or 17 (entity feature channel)
  int max_src_len = 400;
  int max_tgt_len = 30;
  double teacher_forcing = 1.0;
  double learning_rate = 0.05;
  int batch_size = 16;
  int max_epochs = 200;
  std::uint64_t seed = 0;

  void validate() const;  // throws ArgumentError
};

/// Gated recurrent unit, single layer:
///   z = sigmoid(Wz x + Uz h + bz)
///   r = sigmoid(Wr x + Ur h + br)
///   n = tanh(Wn x + Un (r .* h) + bn)
///   h' = (1 - z) .* n + z .* h
struct GruParams {
  Matrix wz, wr, wn;  // hidden x input
  Matrix uz, ur, un;  // hidden x hidden
  Vector bz, br, bn;  // hidden

  int input_dim() const { return static_cast<int>(wz.cols()); }
  int hidden_dim() const { return static_cast<int>(wz.rows()); }
};

/// All learnable tensors. Encoder input is the embedding, optionally with
/// the 17-dim entity one-hot appended; decoder input is the embedding of the
/// previous token with the attention context appended. The two energy
/// projections realize the bilinear attention score as a low-rank
/// factorization: score(q, s) = (dec_energy q) . (enc_energy s), equal to
/// q^T W s with W = dec_energy^T enc_energy. The output projection carries a
/// bias.
struct ModelParams {
  Matrix embedding;   // vocab x embed_dim
  GruParams encoder;  // input embed_dim + ner_feature_dim
  GruParams decoder;  // input embed_dim + hidden_dim
  Matrix enc_energy;  // energy_dim x hidden_dim
  Matrix dec_energy;  // energy_dim x hidden_dim
  Matrix out_w;       // vocab x hidden_dim
  Vector out_b;       // vocab

  /// Seeded init: embeddings uniform(-0.1, 0.1), recurrent and projection
  /// weights uniform(-1/sqrt(hidden), 1/sqrt(hidden)), biases zero. The fill
  /// order is fixed so a given (config, vocab) pair always produces the same
  /// tensors.
  static ModelParams init(const ModelConfig& config, int vocab_size);
  static ModelParams zeros(const ModelConfig& config, int vocab_size);

  bool all_finite() const;
  void check_shapes(const ModelConfig& config, int vocab_size) const;  // throws
  void add_scaled(const ModelParams& other, double factor);  // this += factor*other
};

// ---------------------------------------------------------------------------
// Entity feature channel
// ---------------------------------------------------------------------------

inline constexpr int kNerFeatureDim = 17;

enum class NerSpecial { pad, sos, eos };

/// One-hot index: B(type t) -> 2t, I(type t) -> 2t + 1, O -> 14, padding ->
/// 15, and both sequence boundary symbols -> 16.
int ner_feature_index(const IobTag& tag);
int ner_feature_index(NerSpecial special);

Vector ner_one_hot(const IobTag& tag);
Vector ner_one_hot(NerSpecial special);

// ---------------------------------------------------------------------------
// Examples
// ---------------------------------------------------------------------------

struct Example {
  std::vector<int> src;      // source token ids, non-empty
  std::vector<int> src_ner;  // one-hot indices; empty unless ner_feature_dim=17
  std::vector<int> tgt;      // target token ids ending with kEos
};

struct BatchStats {
  int truncated_src = 0;
  int truncated_tgt = 0;
};

// ---------------------------------------------------------------------------
// Forward operations
// ---------------------------------------------------------------------------

struct EncodeResult {
  Matrix states;  // hidden_dim x steps, one column per source position
  bool truncated = false;

  Vector final_state() const { return states.col(states.cols() - 1); }
};

/// Runs the encoder over the source (inference mode, no dropout). Sources
/// longer than max_src_len are truncated and flagged. src_ner must be present
/// exactly when the config enables the entity channel, with matching length.
EncodeResult encode(const ModelParams& params, const ModelConfig& config,
                    std::span<const int> src, std::span<const int> src_ner = {});

/// Attention weights from the previous decoder state over encoder states.
/// Positions at or beyond valid_len (when >= 0) are padding: they get weight
/// exactly 0 and are excluded before normalization. The rest is a softmax of
/// the low-rank bilinear scores, so weights are non-negative and sum to 1.
Vector attention_weights(const ModelParams& params, const Vector& dec_hidden_prev,
                         const Matrix& enc_states, Eigen::Index valid_len = -1);

/// c = sum_i weights_i * enc_states_i.
Vector context_vector(const Vector& weights, const Matrix& enc_states);

struct StepResult {
  Vector logits;     // vocab
  Vector hidden;     // hidden_dim
  Vector attention;  // one weight per encoder state
};

/// One decoder step (inference mode): attention from dec_hidden_prev, input
/// [embedding(prev_token); context], then the recurrent unit and the output
/// projection. ban_unk forces the <unk> logit to -inf.
StepResult decode_step(const ModelParams& params, const ModelConfig& config,
                       int prev_token, const Vector& dec_hidden_prev,
                       const Matrix& enc_states, bool ban_unk = false,
                       Eigen::Index valid_len = -1);

// ---------------------------------------------------------------------------
// Loss, gradients, training
// ---------------------------------------------------------------------------

/// Batch loss: mean over examples of the per-example mean token negative
/// log-likelihood (padding never enters; examples are processed unpadded).
/// In training mode dropout masks and teacher-forcing draws come from a
/// splitmix64 stream seeded with step_seed, so a fixed seed freezes them.
/// Targets longer than max_tgt_len are truncated (terminal <eos> kept) and
/// counted in stats.
double forward_loss(const ModelParams& params, const ModelConfig& config,
                    std::span<const Example> batch, bool training = true,
                    std::uint64_t step_seed = 0, BatchStats* stats = nullptr);

struct LossAndGrads {
  double loss = 0.0;
  ModelParams grads;
};

/// Reverse-mode gradients of forward_loss with respect to every tensor,
/// for the same (training, step_seed) pair.
LossAndGrads gradients(const ModelParams& params, const ModelConfig& config,
                       std::span<const Example> batch, bool training = true,
                       std::uint64_t step_seed = 0);

struct TrainLogRow {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_loss = 0.0;
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelParams best_params;
  int best_epoch = 0;
  double best_dev_loss = 0.0;
  std::vector<TrainLogRow> log;
};

/// Plain SGD over seeded-shuffled mini-batches. After every epoch the dev
/// loss is evaluated with dropout off; training stops as soon as an epoch's
/// dev loss exceeds the best seen (or at max_epochs) and the snapshot with
/// the lowest dev loss is returned. Throws NumericError naming the batch
/// index when the loss or an updated tensor stops being finite.
TrainResult train(const ModelParams& initial, const ModelConfig& config,
                  std::span<const Example> train_set,
                  std::span<const Example> dev_set);

/// Greedy decoding from <sos>: argmax token per step with <unk> banned (the
/// reserved <pad>/<sos> ids are never emitted either), stopping at <eos> or
/// max_tgt_len. Returns surface tokens without <sos>/<eos>.
std::vector<std::string> greedy_decode(const ModelParams& params,
                                       const ModelConfig& config, const Vocab& vocab,
                                       std::span<const int> src,
                                       std::span<const int> src_ner = {});

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct Checkpoint {
  ModelConfig config;
  Vocab vocab;
  ModelParams params;
};

/// Versioned JSON container: config, vocabulary, and every tensor with its
/// shape and row-major data. Loading validates shapes against the config.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Training log serialization: CSV with a header row and one row per epoch.
std::string train_log_to_csv(const std::vector<TrainLogRow>& log);

}  // namespace nesum::seq2seq
