#ifndef EASTE_MODEL_HPP
#define EASTE_MODEL_HPP

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "easte/corpus.hpp"
#include "easte/labeling.hpp"

namespace easte {

enum class ContextKind { bag, self_attention };

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 64;
  ContextKind context = ContextKind::self_attention;
  // Per-head class counts including the NONE class at index 0.
  std::array<std::size_t, 3> head_sizes{};
  std::uint64_t seed = 0;
};

/// Token ids for the train split; id 0 is reserved for unknown tokens.
class Vocabulary {
public:
  static constexpr std::size_t unk_id = 0;

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words); // in id order, [0] == "<unk>"

  static Vocabulary build(const Corpus& corpus);

  std::size_t size() const { return words_.size(); }
  std::size_t id_of(const std::string& surface) const; // unk_id if absent
  const std::vector<std::string>& words() const { return words_; }

private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ModelParams {
  // embeddings.row(0) is the sentinel slot embedding; token id t lives
  // at row t + 1.
  Eigen::MatrixXd embeddings;
  Eigen::MatrixXd attn_query, attn_key, attn_value; // unused under bag context
  std::array<Eigen::MatrixXd, 3> head_weights;
  std::array<Eigen::VectorXd, 3> head_biases;
};

/// Gradients share the parameter layout.
using Gradients = ModelParams;

/// Per-slot logit rows for the three heads (entity, aspect, sentiment).
struct HeadLogits {
  std::array<Eigen::MatrixXd, 3> heads; // rows == slot count

  std::size_t slot_count() const { return static_cast<std::size_t>(heads[0].rows()); }
};

struct TrainConfig {
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  std::size_t batch_size = 1;
  std::uint64_t shuffle_seed = 0;
};

struct EpochLosses {
  double joint = 0.0;
  std::array<double, 3> per_head{};
};

struct JointLoss {
  double joint = 0.0;
  std::array<double, 3> per_head{};
};

/// Gold classes per slot per head; 0 is NONE, label i sits at i + 1.
struct GoldClasses {
  std::array<std::vector<std::size_t>, 3> per_head;

  std::size_t slot_count() const { return per_head[0].size(); }
};

ModelConfig make_model_config(const Vocabulary& vocab, const LabelInventory& inventory,
                              std::size_t embed_dim = 64,
                              ContextKind context = ContextKind::self_attention,
                              std::uint64_t seed = 0);

/// Slot inputs for one sentence: sentinel plus token ids.
std::vector<std::size_t> token_ids(const Vocabulary& vocab, const std::vector<Token>& tokens);

GoldClasses gold_classes(const TokenLabeling& labeling, const LabelInventory& inventory);

ModelParams init_model(const ModelConfig& config);

HeadLogits forward(const ModelConfig& config, const ModelParams& params,
                   const std::vector<std::size_t>& ids);

JointLoss joint_loss(const HeadLogits& logits, const GoldClasses& gold);

Gradients grad(const ModelConfig& config, const ModelParams& params,
               const std::vector<std::size_t>& ids, const GoldClasses& gold);

void sgd_step(ModelParams& params, const Gradients& grads, double learning_rate);

struct TrainResult {
  ModelParams params;
  std::vector<EpochLosses> history;
};

TrainResult train(const Corpus& corpus, const Vocabulary& vocab,
                  const ModelConfig& mconfig, const TrainConfig& tconfig);

/// Decoded prediction plus the slot indices of its run, for the token
/// evaluation regime.
struct SlotQuad {
  Quad quad;
  std::vector<std::size_t> slots;
};

std::vector<SlotQuad> predict_quads(const ModelConfig& config, const ModelParams& params,
                                    const Vocabulary& vocab, const LabelInventory& inventory,
                                    const ReviewSentence& sentence);

/// Per-slot argmax accuracy over all three heads against the gold labeling.
double token_accuracy(const ModelConfig& config, const ModelParams& params,
                      const Vocabulary& vocab, const LabelInventory& inventory,
                      const Corpus& corpus);

/// Central finite differences on a deterministic parameter sample vs the
/// analytic gradient; returns the max relative error.
double gradient_check(const ModelConfig& config, const ModelParams& params,
                      const std::vector<std::size_t>& ids, const GoldClasses& gold,
                      double epsilon, std::uint64_t sample_seed = 0);

/// Checkpoint I/O: JSON with config, vocabulary, and little-endian f32
/// tensors (base64). Loading validates shapes.
std::string save_checkpoint(const ModelConfig& config, const Vocabulary& vocab,
                            const ModelParams& params);

struct Checkpoint {
  ModelConfig config;
  Vocabulary vocab;
  ModelParams params;
};

Checkpoint load_checkpoint(const std::string& json);

} // namespace easte

#endif // EASTE_MODEL_HPP
