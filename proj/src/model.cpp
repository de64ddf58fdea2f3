#include "easte/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "easte/error.hpp"

namespace easte {

namespace {

// Portable deterministic uniform in [-scale, scale): the distribution is
// defined here rather than via std::uniform_real_distribution, whose output
// is implementation-specific.
class UniformSource {
public:
  explicit UniformSource(std::uint64_t seed) : rng_(seed) {}

  double symmetric(double scale) {
    double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53; // [0, 1)
    return (2.0 * u - 1.0) * scale;
  }

private:
  std::mt19937_64 rng_;
};

void fill_uniform(Eigen::MatrixXd& m, double scale, UniformSource& src) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = src.symmetric(scale);
}

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double mx = logits.row(r).maxCoeff();
    Eigen::ArrayXd ex = (logits.row(r).array() - mx).exp();
    probs.row(r) = ex / ex.sum();
  }
  return probs;
}

struct ForwardCache {
  Eigen::MatrixXd inputs;  // slot embeddings X
  Eigen::MatrixXd attn;    // row-softmax attention weights A
  Eigen::MatrixXd values;  // X * Wv
  Eigen::MatrixXd context; // encoder output H
  HeadLogits logits;
};

ForwardCache run_forward(const ModelConfig& config, const ModelParams& params,
                         const std::vector<std::size_t>& ids) {
  const std::size_t slots = ids.size() + 1;
  const Eigen::Index d = static_cast<Eigen::Index>(config.embed_dim);

  ForwardCache cache;
  cache.inputs.resize(static_cast<Eigen::Index>(slots), d);
  cache.inputs.row(0) = params.embeddings.row(0); // sentinel
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= config.vocab_size)
      throw VocabularyError("token id " + std::to_string(ids[i]) + " outside vocabulary of size " +
                            std::to_string(config.vocab_size));
    cache.inputs.row(static_cast<Eigen::Index>(i + 1)) =
        params.embeddings.row(static_cast<Eigen::Index>(ids[i] + 1));
  }

  if (config.context == ContextKind::self_attention) {
    Eigen::MatrixXd queries = cache.inputs * params.attn_query;
    Eigen::MatrixXd keys = cache.inputs * params.attn_key;
    cache.values = cache.inputs * params.attn_value;
    Eigen::MatrixXd scores = queries * keys.transpose() / std::sqrt(static_cast<double>(d));
    cache.attn = row_softmax(scores);
    cache.context = cache.attn * cache.values + cache.inputs; // residual
  } else {
    // bag context: each slot sees itself plus the mean embedding
    Eigen::RowVectorXd mean = cache.inputs.colwise().mean();
    cache.context = cache.inputs.rowwise() + mean;
  }

  for (int h = 0; h < 3; ++h) {
    cache.logits.heads[h] =
        (cache.context * params.head_weights[h]).rowwise() + params.head_biases[h].transpose();
  }
  return cache;
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string("non-finite values in ") + what);
}

} // namespace

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary() : words_{"<unk>"} { index_["<unk>"] = 0; }

Vocabulary::Vocabulary(const std::vector<std::string>& words) : words_(words) {
  if (words_.empty() || words_[0] != "<unk>")
    throw ConfigError("vocabulary must start with <unk>");
  for (std::size_t i = 0; i < words_.size(); ++i) index_[words_[i]] = i;
}

Vocabulary Vocabulary::build(const Corpus& corpus) {
  Vocabulary vocab;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& token : tokenize(sentence.text)) {
      if (vocab.index_.emplace(token.surface, vocab.words_.size()).second)
        vocab.words_.push_back(token.surface);
    }
  }
  return vocab;
}

std::size_t Vocabulary::id_of(const std::string& surface) const {
  auto it = index_.find(surface);
  return it == index_.end() ? unk_id : it->second;
}

std::vector<std::size_t> token_ids(const Vocabulary& vocab, const std::vector<Token>& tokens) {
  std::vector<std::size_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id_of(t.surface));
  return ids;
}

GoldClasses gold_classes(const TokenLabeling& labeling, const LabelInventory& inventory) {
  GoldClasses gold;
  for (int h = 0; h < 3; ++h) gold.per_head[h].assign(labeling.slot_count(), 0);
  for (std::size_t s = 0; s < labeling.slot_count(); ++s) {
    const SlotTriple& t = labeling.labels[s];
    if (t.none()) continue;
    auto e = inventory.entity_index(t.entity);
    auto a = inventory.aspect_index(t.aspect);
    auto p = inventory.sentiment_index(t.sentiment);
    if (!e || !a || !p) throw InventoryError("slot triple outside inventory");
    gold.per_head[0][s] = *e + 1;
    gold.per_head[1][s] = *a + 1;
    gold.per_head[2][s] = *p + 1;
  }
  return gold;
}

ModelConfig make_model_config(const Vocabulary& vocab, const LabelInventory& inventory,
                              std::size_t embed_dim, ContextKind context, std::uint64_t seed) {
  ModelConfig config;
  config.vocab_size = vocab.size();
  config.embed_dim = embed_dim;
  config.context = context;
  config.head_sizes = {inventory.entities().size() + 1, inventory.aspects().size() + 1,
                       inventory.sentiments().size() + 1};
  config.seed = seed;
  return config;
}

ModelParams init_model(const ModelConfig& config) {
  if (config.embed_dim < 8)
    throw ConfigError("embed_dim must be at least 8, got " + std::to_string(config.embed_dim));
  if (config.vocab_size == 0) throw ConfigError("vocab_size must be positive");
  for (std::size_t h = 0; h < 3; ++h)
    if (config.head_sizes[h] < 2)
      throw ConfigError("head sizes must include at least NONE plus one class");

  const Eigen::Index d = static_cast<Eigen::Index>(config.embed_dim);
  UniformSource src(config.seed);

  ModelParams params;
  params.embeddings.resize(static_cast<Eigen::Index>(config.vocab_size + 1), d);
  fill_uniform(params.embeddings, 1.0, src); // fan-in 1 per embedding entry
  params.attn_query.resize(d, d);
  params.attn_key.resize(d, d);
  params.attn_value.resize(d, d);
  double scale = 1.0 / std::sqrt(static_cast<double>(d));
  fill_uniform(params.attn_query, scale, src);
  fill_uniform(params.attn_key, scale, src);
  fill_uniform(params.attn_value, scale, src);
  for (int h = 0; h < 3; ++h) {
    params.head_weights[h].resize(d, static_cast<Eigen::Index>(config.head_sizes[h]));
    fill_uniform(params.head_weights[h], scale, src);
    params.head_biases[h] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.head_sizes[h]));
  }
  return params;
}

HeadLogits forward(const ModelConfig& config, const ModelParams& params,
                   const std::vector<std::size_t>& ids) {
  return run_forward(config, params, ids).logits;
}

JointLoss joint_loss(const HeadLogits& logits, const GoldClasses& gold) {
  if (logits.slot_count() != gold.slot_count())
    throw ConfigError("logit slots (" + std::to_string(logits.slot_count()) +
                      ") do not match gold slots (" + std::to_string(gold.slot_count()) + ")");
  JointLoss loss;
  const double slots = static_cast<double>(gold.slot_count());
  for (int h = 0; h < 3; ++h) {
    const Eigen::MatrixXd& lg = logits.heads[h];
    double sum = 0.0;
    for (Eigen::Index r = 0; r < lg.rows(); ++r) {
      double mx = lg.row(r).maxCoeff();
      double lse = mx + std::log((lg.row(r).array() - mx).exp().sum());
      sum += lse - lg(r, static_cast<Eigen::Index>(gold.per_head[h][static_cast<std::size_t>(r)]));
    }
    loss.per_head[h] = sum / slots;
  }
  // mean over the three output gates
  loss.joint = (loss.per_head[0] + loss.per_head[1] + loss.per_head[2]) / 3.0;
  return loss;
}

Gradients grad(const ModelConfig& config, const ModelParams& params,
               const std::vector<std::size_t>& ids, const GoldClasses& gold) {
  ForwardCache cache = run_forward(config, params, ids);
  const std::size_t slots = ids.size() + 1;
  if (slots != gold.slot_count())
    throw ConfigError("input slots do not match gold slots");
  const Eigen::Index d = static_cast<Eigen::Index>(config.embed_dim);
  const Eigen::Index n = static_cast<Eigen::Index>(slots);

  Gradients grads;
  grads.embeddings = Eigen::MatrixXd::Zero(params.embeddings.rows(), params.embeddings.cols());
  grads.attn_query = Eigen::MatrixXd::Zero(d, d);
  grads.attn_key = Eigen::MatrixXd::Zero(d, d);
  grads.attn_value = Eigen::MatrixXd::Zero(d, d);

  // d(joint)/d(logits): (softmax - onehot) / (slots * 3)
  Eigen::MatrixXd d_context = Eigen::MatrixXd::Zero(n, d);
  const double inv = 1.0 / (static_cast<double>(slots) * 3.0);
  for (int h = 0; h < 3; ++h) {
    Eigen::MatrixXd d_logits = row_softmax(cache.logits.heads[h]);
    for (Eigen::Index r = 0; r < n; ++r)
      d_logits(r, static_cast<Eigen::Index>(gold.per_head[h][static_cast<std::size_t>(r)])) -= 1.0;
    d_logits *= inv;
    grads.head_weights[h] = cache.context.transpose() * d_logits;
    grads.head_biases[h] = d_logits.colwise().sum().transpose();
    d_context += d_logits * params.head_weights[h].transpose();
  }

  Eigen::MatrixXd d_inputs;
  if (config.context == ContextKind::self_attention) {
    // H = A V + X
    Eigen::MatrixXd d_values = cache.attn.transpose() * d_context;
    Eigen::MatrixXd d_attn = d_context * cache.values.transpose();
    // softmax backward per row
    Eigen::MatrixXd d_scores(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      double dot = (d_attn.row(r).array() * cache.attn.row(r).array()).sum();
      d_scores.row(r) = cache.attn.row(r).array() * (d_attn.row(r).array() - dot);
    }
    d_scores /= std::sqrt(static_cast<double>(d));
    Eigen::MatrixXd queries = cache.inputs * params.attn_query;
    Eigen::MatrixXd keys = cache.inputs * params.attn_key;
    Eigen::MatrixXd d_queries = d_scores * keys;
    Eigen::MatrixXd d_keys = d_scores.transpose() * queries;

    grads.attn_query = cache.inputs.transpose() * d_queries;
    grads.attn_key = cache.inputs.transpose() * d_keys;
    grads.attn_value = cache.inputs.transpose() * d_values;

    d_inputs = d_context + d_queries * params.attn_query.transpose() +
               d_keys * params.attn_key.transpose() + d_values * params.attn_value.transpose();
  } else {
    // H_i = X_i + mean_j X_j
    Eigen::RowVectorXd col_sum = d_context.colwise().sum();
    d_inputs = d_context;
    d_inputs.rowwise() += col_sum / static_cast<double>(slots);
  }

  grads.embeddings.row(0) += d_inputs.row(0);
  for (std::size_t i = 0; i < ids.size(); ++i)
    grads.embeddings.row(static_cast<Eigen::Index>(ids[i] + 1)) +=
        d_inputs.row(static_cast<Eigen::Index>(i + 1));
  return grads;
}

void sgd_step(ModelParams& params, const Gradients& grads, double learning_rate) {
  check_finite(grads.embeddings, "embedding gradients");
  for (int h = 0; h < 3; ++h) {
    check_finite(grads.head_weights[h], "head weight gradients");
    if (!grads.head_biases[h].allFinite()) throw NumericError("non-finite head bias gradients");
  }
  params.embeddings -= learning_rate * grads.embeddings;
  if (params.attn_query.size() > 0 && grads.attn_query.size() > 0) {
    check_finite(grads.attn_query, "attention gradients");
    check_finite(grads.attn_key, "attention gradients");
    check_finite(grads.attn_value, "attention gradients");
    params.attn_query -= learning_rate * grads.attn_query;
    params.attn_key -= learning_rate * grads.attn_key;
    params.attn_value -= learning_rate * grads.attn_value;
  }
  for (int h = 0; h < 3; ++h) {
    params.head_weights[h] -= learning_rate * grads.head_weights[h];
    params.head_biases[h] -= learning_rate * grads.head_biases[h];
  }
}

TrainResult train(const Corpus& corpus, const Vocabulary& vocab, const ModelConfig& mconfig,
                  const TrainConfig& tconfig) {
  if (corpus.sentences.empty()) throw ConfigError("cannot train on an empty corpus");
  if (tconfig.epochs == 0) throw ConfigError("epochs must be positive");
  if (tconfig.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(tconfig.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");

  struct Instance {
    std::vector<std::size_t> ids;
    GoldClasses gold;
  };
  std::vector<Instance> instances;
  instances.reserve(corpus.sentences.size());
  for (const auto& sentence : corpus.sentences) {
    TokenLabeling labeling = encode_labels(sentence, *corpus.inventory);
    instances.push_back(
        {token_ids(vocab, labeling.tokens), gold_classes(labeling, *corpus.inventory)});
  }

  TrainResult result;
  result.params = init_model(mconfig);
  std::mt19937_64 shuffle_rng(tconfig.shuffle_seed);

  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < tconfig.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLosses epoch_losses;
    std::size_t b = 0;
    while (b < order.size()) {
      std::size_t batch_end = std::min(b + tconfig.batch_size, order.size());
      Gradients accum;
      bool first = true;
      for (std::size_t k = b; k < batch_end; ++k) {
        const Instance& inst = instances[order[k]];
        JointLoss loss = joint_loss(forward(mconfig, result.params, inst.ids), inst.gold);
        epoch_losses.joint += loss.joint;
        for (int h = 0; h < 3; ++h) epoch_losses.per_head[h] += loss.per_head[h];
        Gradients g = grad(mconfig, result.params, inst.ids, inst.gold);
        if (first) {
          accum = std::move(g);
          first = false;
        } else {
          accum.embeddings += g.embeddings;
          accum.attn_query += g.attn_query;
          accum.attn_key += g.attn_key;
          accum.attn_value += g.attn_value;
          for (int h = 0; h < 3; ++h) {
            accum.head_weights[h] += g.head_weights[h];
            accum.head_biases[h] += g.head_biases[h];
          }
        }
      }
      double batch_scale = 1.0 / static_cast<double>(batch_end - b);
      sgd_step(result.params, accum, tconfig.learning_rate * batch_scale);
      b = batch_end;
    }
    double n = static_cast<double>(instances.size());
    epoch_losses.joint /= n;
    for (int h = 0; h < 3; ++h) epoch_losses.per_head[h] /= n;
    result.history.push_back(epoch_losses);
  }
  return result;
}

std::vector<SlotQuad> predict_quads(const ModelConfig& config, const ModelParams& params,
                                    const Vocabulary& vocab, const LabelInventory& inventory,
                                    const ReviewSentence& sentence) {
  std::vector<Token> tokens = tokenize(sentence.text);
  HeadLogits logits = forward(config, params, token_ids(vocab, tokens));

  TokenLabeling labeling;
  labeling.tokens = tokens;
  labeling.labels.assign(tokens.size() + 1, SlotTriple{});

  auto argmax_low_tie = [](const Eigen::MatrixXd& m, Eigen::Index r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < m.cols(); ++c)
      if (m(r, c) > m(r, best)) best = c;
    return static_cast<std::size_t>(best);
  };

  for (std::size_t s = 0; s < labeling.slot_count(); ++s) {
    Eigen::Index r = static_cast<Eigen::Index>(s);
    std::size_t e = argmax_low_tie(logits.heads[0], r);
    std::size_t a = argmax_low_tie(logits.heads[1], r);
    std::size_t p = argmax_low_tie(logits.heads[2], r);
    // partial triples are coerced to fully NONE
    if (e == 0 || a == 0 || p == 0) continue;
    labeling.labels[s] = SlotTriple{inventory.entities()[e - 1], inventory.aspects()[a - 1],
                                    inventory.sentiments()[p - 1]};
  }

  // decode runs, keeping slot indices for the token-regime matcher
  std::vector<SlotQuad> out;
  if (!labeling.labels[0].none()) {
    const SlotTriple& t = labeling.labels[0];
    out.push_back({Quad{std::nullopt, t.entity, t.aspect, t.sentiment}, {0}});
  }
  std::size_t i = 1;
  while (i < labeling.labels.size()) {
    if (labeling.labels[i].none()) {
      ++i;
      continue;
    }
    std::size_t run_start = i;
    while (i + 1 < labeling.labels.size() && labeling.labels[i + 1] == labeling.labels[run_start])
      ++i;
    std::string target;
    std::vector<std::size_t> slots;
    for (std::size_t s = run_start; s <= i; ++s) {
      if (s > run_start) target += ' ';
      target += labeling.tokens[s - 1].surface;
      slots.push_back(s);
    }
    const SlotTriple& t = labeling.labels[run_start];
    out.push_back({Quad{target, t.entity, t.aspect, t.sentiment}, std::move(slots)});
    ++i;
  }
  return out;
}

double token_accuracy(const ModelConfig& config, const ModelParams& params,
                      const Vocabulary& vocab, const LabelInventory& inventory,
                      const Corpus& corpus) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const auto& sentence : corpus.sentences) {
    TokenLabeling gold_labeling = encode_labels(sentence, inventory);
    GoldClasses gold = gold_classes(gold_labeling, inventory);
    HeadLogits logits = forward(config, params, token_ids(vocab, gold_labeling.tokens));
    for (std::size_t s = 0; s < gold.slot_count(); ++s) {
      Eigen::Index r = static_cast<Eigen::Index>(s);
      bool ok = true;
      for (int h = 0; h < 3; ++h) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < logits.heads[h].cols(); ++c)
          if (logits.heads[h](r, c) > logits.heads[h](r, best)) best = c;
        if (static_cast<std::size_t>(best) != gold.per_head[h][s]) ok = false;
      }
      correct += ok ? 1 : 0;
      ++total;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(total);
}

double gradient_check(const ModelConfig& config, const ModelParams& params,
                      const std::vector<std::size_t>& ids, const GoldClasses& gold,
                      double epsilon, std::uint64_t sample_seed) {
  if (epsilon < 1e-7 || epsilon > 1e-3)
    throw ConfigError("epsilon must lie in [1e-7, 1e-3]");

  Gradients analytic = grad(config, params, ids, gold);

  struct Slot {
    Eigen::MatrixXd* param;
    const Eigen::MatrixXd* grad;
  };
  ModelParams probe = params;
  std::vector<Slot> tensors = {
      {&probe.embeddings, &analytic.embeddings},
      {&probe.attn_query, &analytic.attn_query},
      {&probe.attn_key, &analytic.attn_key},
      {&probe.attn_value, &analytic.attn_value},
  };
  for (int h = 0; h < 3; ++h)
    tensors.push_back({&probe.head_weights[h], &analytic.head_weights[h]});

  std::size_t total_entries = 0;
  for (const auto& t : tensors) total_entries += static_cast<std::size_t>(t.grad->size());

  // sample roughly 1% of entries, at least 16
  std::size_t samples = std::max<std::size_t>(16, total_entries / 100);
  std::mt19937_64 rng(sample_seed);

  double max_rel = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    std::size_t flat = rng() % total_entries;
    Eigen::MatrixXd* m = nullptr;
    const Eigen::MatrixXd* g = nullptr;
    for (const auto& t : tensors) {
      if (flat < static_cast<std::size_t>(t.grad->size())) {
        m = t.param;
        g = t.grad;
        break;
      }
      flat -= static_cast<std::size_t>(t.grad->size());
    }
    Eigen::Index idx = static_cast<Eigen::Index>(flat);
    double orig = (*m)(idx);
    (*m)(idx) = orig + epsilon;
    double up = joint_loss(forward(config, probe, ids), gold).joint;
    (*m)(idx) = orig - epsilon;
    double down = joint_loss(forward(config, probe, ids), gold).joint;
    (*m)(idx) = orig;

    double numeric = (up - down) / (2.0 * epsilon);
    double analytic_v = (*g)(idx);
    double rel = std::abs(analytic_v - numeric) /
                 std::max({std::abs(analytic_v), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

} // namespace easte
