#ifndef EASTE_PREDICTIONS_HPP
#define EASTE_PREDICTIONS_HPP

#include <map>
#include <string>

#include "easte/eval.hpp"

namespace easte {

/// Predictions file shared by both regimes: quads per sentence id, plus
/// per-sentence error records and the resolved run configuration.
struct PredictionFile {
  PredictionMap predictions;
  std::map<std::string, std::string> errors; // sentence id -> message
  std::string config_json;                   // resolved RunConfig, verbatim
};

std::string write_predictions(const PredictionFile& file);
PredictionFile read_predictions(const std::string& json);

} // namespace easte

#endif // EASTE_PREDICTIONS_HPP
