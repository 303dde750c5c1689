#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lattice/autodiff.hpp"
#include "lattice/curriculum.hpp"
#include "lattice/dtm.hpp"
#include "lattice/timeseries.hpp"

namespace lattice::detector {

using autodiff::Tape;
using autodiff::Tensor;
using autodiff::Var;

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t hidden_dim = 100;
  std::size_t window_size = 10;
  double learning_rate = 0.01;
  std::size_t max_epochs = 200;    ///< global epoch cap across all stages
  std::uint64_t seed = 0;
  double detect_threshold = 0.5;   ///< tau for the attack decision rule
  double tau_gt = 0.1;             ///< deviation threshold when labels must be
                                   ///< derived from the automaton

  /// Throws ConfigError when any size or rate is zero/non-positive or the
  /// threshold leaves [0, 1].
  void validate() const;
};

/// Network shapes derived from a schema: V graph nodes (one per sensor and
/// actuator), node feature width F (widest encoding slice), the hidden width,
/// and the flat encoding length.
struct ModelDims {
  std::size_t nodes = 0;
  std::size_t feature_width = 0;
  std::size_t hidden = 0;
  std::size_t encoding = 0;

  static ModelDims of(const Schema& schema, std::size_t hidden_dim);
};

/// Generator: learned node-adjacency matrix P gated into an edge matrix E,
/// two graph-propagation layers, column max-pooling into one spatial vector
/// per window step, a recurrent cell over the window, and a linear projection
/// of the final hidden state onto the encoding length.
struct GeneratorParams {
  Tensor P;                      ///< nodes x nodes adjacency parameter
  Tensor W_c, b_c, W_w, b_w;     ///< candidate/write gates producing E
  Tensor W0, W1;                 ///< propagation transforms (F x H, H x H)
  Tensor Wi, Ui, bi;             ///< recurrent input gate
  Tensor Wf, Uf, bf;             ///< recurrent forget gate
  Tensor Wo, Uo, bo;             ///< recurrent output gate
  Tensor Wg, Ug, bg;             ///< recurrent candidate
  Tensor W_out, b_out;           ///< projection to the encoding length

  std::vector<std::pair<std::string, Tensor*>> entries();
  std::vector<std::pair<std::string, const Tensor*>> entries() const;
  bool operator==(const GeneratorParams&) const = default;
};

/// Discriminator: two ReLU hidden layers and a 4-logit head over
/// {real-normal, real-attack, adversarial-normal, adversarial-attack}.
struct DiscriminatorParams {
  Tensor W1, b1, W2, b2, W3, b3;

  std::vector<std::pair<std::string, Tensor*>> entries();
  std::vector<std::pair<std::string, const Tensor*>> entries() const;
  bool operator==(const DiscriminatorParams&) const = default;
};

/// The adversarial-sample class paired with real class `y` (0 normal,
/// 1 attack) is 2 + y.
inline constexpr std::size_t kRealNormal = 0;
inline constexpr std::size_t kRealAttack = 1;
inline constexpr std::size_t kAdvNormal = 2;
inline constexpr std::size_t kAdvAttack = 3;

/// Seeded initialization: P uniform in [-0.1, 0.1]; weight matrices uniform
/// in [-1/sqrt(fan_in), 1/sqrt(fan_in)]; biases and the 4-logit head zero.
/// Draw order is fixed, so equal seeds give equal parameters.
GeneratorParams init_generator(const ModelDims& dims, std::mt19937_64& rng);
DiscriminatorParams init_discriminator(const ModelDims& dims, std::mt19937_64& rng);

/// Per-tape parameter handles.
struct GenVars {
  Var P, W_c, b_c, W_w, b_w, W0, W1;
  Var Wi, Ui, bi, Wf, Uf, bf, Wo, Uo, bo, Wg, Ug, bg;
  Var W_out, b_out;
};
struct DiscVars {
  Var W1, b1, W2, b2, W3, b3;
};
GenVars bind(Tape& tape, const GeneratorParams& params);
DiscVars bind(Tape& tape, const DiscriminatorParams& params);

/// E = sigmoid(P W_w + b_w) ⊙ tanh(P W_c + b_c); entries lie in (-1, 1).
Var gated_edges(Tape& tape, Var P, Var W_c, Var b_c, Var W_w, Var b_w);

/// Row-normalized (|E| + I) mixing matrix; every row sums to 1.
Var mixing_matrix(Tape& tape, Var E);

/// Two propagation layers: H2 = ReLU(A ReLU(A H0 W0) W1) with A from
/// mixing_matrix(E).
Var gcn_forward(Tape& tape, Var E, Var H0, Var W0, Var W1);

/// Node feature matrix for one encoded state: row per actuator then sensor,
/// each holding its own encoding slice zero-padded to the feature width.
Tensor node_features(const EncodedState& encoded, const Schema& schema);

/// Full generator pass over one window of per-step node feature matrices;
/// returns the adversarial encoding (1 x encoding length).
Var generator_forward(Tape& tape, const GenVars& vars, std::span<const Tensor> window_features);

/// Logits (1 x 4) for one encoded sample.
Var discriminator_logits(Tape& tape, const DiscVars& vars, Var x);

/// Softmax class probabilities for one encoded sample, forward only.
std::array<double, 4> discriminator_probabilities(const DiscriminatorParams& params,
                                                  const EncodedState& encoded);

struct DetectorModel {
  Schema schema;
  std::size_t window_size = 0;
  std::size_t hidden_dim = 0;
  double detect_threshold = 0.5;
  GeneratorParams gen;
  DiscriminatorParams disc;

  void save(const std::string& path) const;
  static DetectorModel load(const std::string& path);
  bool operator==(const DetectorModel&) const = default;
};

/// Forward-only adversarial sample for a window of encoded states (the last
/// window_size entries are used; shorter windows repeat the first entry).
EncodedState generate_sample(const DetectorModel& model,
                             std::span<const EncodedState> window);

struct TraceRecord {
  std::size_t epoch = 0;        ///< 1-based
  std::size_t stage = 0;        ///< curriculum stage during the epoch
  std::size_t merged = 0;       ///< training-set size during the epoch
  double d_loss = 0.0;          ///< mean per-classification discriminator loss
  double g_loss = 0.0;          ///< mean generator confusion loss
  bool merged_bucket = false;   ///< a bucket was merged after this epoch
  bool forced = false;          ///< that merge came from the epoch cap
};

struct TrainResult {
  DetectorModel model;
  std::vector<TraceRecord> trace;
};

/// Adversarial training under the scheduler: per batch, one discriminator
/// step on real samples (classes 0/1 by label) and detached generated samples
/// (classes 2/3 by the paired real label), then one generator step minimizing
/// the cross-entropy of generated samples against their real counterpart
/// class. Epoch losses are reported to the scheduler, which merges buckets as
/// stages converge. Labels come from the episode when present, otherwise from
/// automaton ground truth at cfg.tau_gt.
TrainResult train(const Episode& episode, const Schema& schema,
                  const dtm::TimedAutomaton& automaton, curriculum::Scheduler& scheduler,
                  const TrainConfig& cfg);

/// Per-sample labels: Attack iff P(real-attack) + P(adversarial-attack) > tau
/// on the discriminator output for the sample's encoding. The first
/// window_size - 1 samples inherit the first computed prediction.
/// Throws ConfigError unless 0 <= tau <= 1.
std::vector<Label> detect(const Episode& episode, const Schema& schema,
                          const DetectorModel& model, double tau);

/// JSON-lines rendering of a training trace (one object per epoch).
std::string trace_to_json_lines(const std::vector<TraceRecord>& trace);

}  // namespace lattice::detector
