#include "easte/predictions.hpp"

#include <nlohmann/json.hpp>

#include "easte/error.hpp"

namespace easte {

std::string write_predictions(const PredictionFile& file) {
  nlohmann::ordered_json j;
  if (!file.config_json.empty()) {
    nlohmann::json cfg = nlohmann::json::parse(file.config_json, nullptr, false);
    j["config"] = cfg.is_discarded() ? nlohmann::json(file.config_json) : cfg;
  } else {
    j["config"] = nlohmann::json::object();
  }
  auto& preds = j["predictions"] = nlohmann::ordered_json::object();
  for (const auto& [id, quads] : file.predictions) {
    auto& arr = preds[id] = nlohmann::ordered_json::array();
    for (const auto& pq : quads) {
      nlohmann::ordered_json q;
      if (pq.quad.target)
        q["target"] = *pq.quad.target;
      else
        q["target"] = nullptr;
      q["entity"] = pq.quad.entity;
      q["aspect"] = pq.quad.aspect;
      q["sentiment"] = pq.quad.sentiment;
      q["slots"] = pq.slots;
      arr.push_back(std::move(q));
    }
  }
  j["errors"] = file.errors;
  return j.dump(2);
}

PredictionFile read_predictions(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad predictions JSON: ") + e.what());
  }
  PredictionFile file;
  try {
    if (j.contains("config")) file.config_json = j["config"].dump();
    for (const auto& [id, arr] : j.at("predictions").items()) {
      std::vector<PredQuad> quads;
      for (const auto& q : arr) {
        PredQuad pq;
        if (!q.at("target").is_null()) pq.quad.target = q.at("target").get<std::string>();
        pq.quad.entity = q.at("entity").get<std::string>();
        pq.quad.aspect = q.at("aspect").get<std::string>();
        pq.quad.sentiment = q.at("sentiment").get<std::string>();
        if (q.contains("slots")) pq.slots = q.at("slots").get<std::vector<std::size_t>>();
        quads.push_back(std::move(pq));
      }
      file.predictions.emplace(id, std::move(quads));
    }
    if (j.contains("errors"))
      file.errors = j.at("errors").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad predictions record: ") + e.what());
  }
  return file;
}

} // namespace easte
