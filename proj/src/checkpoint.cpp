#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "easte/error.hpp"
#include "easte/model.hpp"

namespace easte {

namespace {

const char* const kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += kB64[v & 63];
    i += 3;
  }
  std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    std::uint32_t v = bytes[i] << 16;
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += "==";
  } else if (rem == 2) {
    std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kB64[(v >> 18) & 63];
    out += kB64[(v >> 12) & 63];
    out += kB64[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    int v = value_of(c);
    if (v < 0) throw ParseError("invalid base64 in checkpoint");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

// Tensors are stored as little-endian IEEE-754 binary32.
std::string encode_tensor(const Eigen::MatrixXd& m) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(static_cast<std::size_t>(m.size()) * 4);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      float f = static_cast<float>(m(r, c));
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      bytes.push_back(static_cast<std::uint8_t>(bits & 0xFF));
      bytes.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xFF));
      bytes.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xFF));
      bytes.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xFF));
    }
  }
  return base64_encode(bytes);
}

Eigen::MatrixXd decode_tensor(const nlohmann::json& entry) {
  auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
  if (shape.size() != 2) throw ParseError("tensor shape must have two dimensions");
  std::vector<std::uint8_t> bytes = base64_decode(entry.at("data").get<std::string>());
  std::size_t expected = static_cast<std::size_t>(shape[0] * shape[1]) * 4;
  if (bytes.size() != expected)
    throw ParseError("tensor data length " + std::to_string(bytes.size()) +
                     " does not match shape (expected " + std::to_string(expected) + " bytes)");
  Eigen::MatrixXd m(shape[0], shape[1]);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::uint32_t bits = static_cast<std::uint32_t>(bytes[i]) |
                           (static_cast<std::uint32_t>(bytes[i + 1]) << 8) |
                           (static_cast<std::uint32_t>(bytes[i + 2]) << 16) |
                           (static_cast<std::uint32_t>(bytes[i + 3]) << 24);
      float f;
      std::memcpy(&f, &bits, 4);
      m(r, c) = static_cast<double>(f);
      i += 4;
    }
  }
  return m;
}

nlohmann::ordered_json tensor_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json j;
  j["shape"] = {m.rows(), m.cols()};
  j["data"] = encode_tensor(m);
  return j;
}

} // namespace

std::string save_checkpoint(const ModelConfig& config, const Vocabulary& vocab,
                            const ModelParams& params) {
  nlohmann::ordered_json j;
  j["format"] = "easte-checkpoint-v1";
  j["config"]["vocab_size"] = config.vocab_size;
  j["config"]["embed_dim"] = config.embed_dim;
  j["config"]["context"] = config.context == ContextKind::bag ? "bag" : "self_attention";
  j["config"]["head_sizes"] = config.head_sizes;
  j["config"]["seed"] = config.seed;
  j["vocab"] = vocab.words();

  auto& tensors = j["tensors"];
  tensors["embeddings"] = tensor_json(params.embeddings);
  if (config.context == ContextKind::self_attention) {
    tensors["attn_query"] = tensor_json(params.attn_query);
    tensors["attn_key"] = tensor_json(params.attn_key);
    tensors["attn_value"] = tensor_json(params.attn_value);
  }
  const char* head_names[3] = {"entity", "aspect", "sentiment"};
  for (int h = 0; h < 3; ++h) {
    tensors[std::string("head_") + head_names[h]] = tensor_json(params.head_weights[h]);
    Eigen::MatrixXd bias = params.head_biases[h].transpose();
    tensors[std::string("bias_") + head_names[h]] = tensor_json(bias);
  }
  return j.dump();
}

Checkpoint load_checkpoint(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "easte-checkpoint-v1")
      throw ParseError("unknown checkpoint format");

    Checkpoint ckpt;
    ckpt.config.vocab_size = j.at("config").at("vocab_size").get<std::size_t>();
    ckpt.config.embed_dim = j.at("config").at("embed_dim").get<std::size_t>();
    std::string context = j.at("config").at("context").get<std::string>();
    if (context == "bag")
      ckpt.config.context = ContextKind::bag;
    else if (context == "self_attention")
      ckpt.config.context = ContextKind::self_attention;
    else
      throw ParseError("unknown context kind '" + context + "'");
    auto sizes = j.at("config").at("head_sizes").get<std::vector<std::size_t>>();
    if (sizes.size() != 3) throw ParseError("head_sizes must have three entries");
    ckpt.config.head_sizes = {sizes[0], sizes[1], sizes[2]};
    ckpt.config.seed = j.at("config").at("seed").get<std::uint64_t>();

    ckpt.vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
    if (ckpt.vocab.size() != ckpt.config.vocab_size)
      throw ParseError("vocabulary size does not match config");

    const auto& tensors = j.at("tensors");
    ckpt.params.embeddings = decode_tensor(tensors.at("embeddings"));
    if (ckpt.params.embeddings.rows() != static_cast<Eigen::Index>(ckpt.config.vocab_size + 1) ||
        ckpt.params.embeddings.cols() != static_cast<Eigen::Index>(ckpt.config.embed_dim))
      throw ParseError("embedding tensor shape does not match config");

    Eigen::Index d = static_cast<Eigen::Index>(ckpt.config.embed_dim);
    if (ckpt.config.context == ContextKind::self_attention) {
      ckpt.params.attn_query = decode_tensor(tensors.at("attn_query"));
      ckpt.params.attn_key = decode_tensor(tensors.at("attn_key"));
      ckpt.params.attn_value = decode_tensor(tensors.at("attn_value"));
      for (const auto* m :
           {&ckpt.params.attn_query, &ckpt.params.attn_key, &ckpt.params.attn_value})
        if (m->rows() != d || m->cols() != d)
          throw ParseError("attention tensor shape does not match config");
    }

    const char* head_names[3] = {"entity", "aspect", "sentiment"};
    for (int h = 0; h < 3; ++h) {
      ckpt.params.head_weights[h] = decode_tensor(tensors.at(std::string("head_") + head_names[h]));
      Eigen::MatrixXd bias = decode_tensor(tensors.at(std::string("bias_") + head_names[h]));
      Eigen::Index classes = static_cast<Eigen::Index>(ckpt.config.head_sizes[h]);
      if (ckpt.params.head_weights[h].rows() != d || ckpt.params.head_weights[h].cols() != classes)
        throw ParseError("head weight shape does not match config");
      if (bias.rows() != 1 || bias.cols() != classes)
        throw ParseError("head bias shape does not match config");
      ckpt.params.head_biases[h] = bias.transpose();
    }
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint record: ") + e.what());
  }
}

} // namespace easte
