#ifndef EASTE_COMPLETION_HPP
#define EASTE_COMPLETION_HPP

#include <optional>
#include <string>

namespace easte {

/// Hex SHA-256 of arbitrary bytes; keys fixture files and the run log.
std::string sha256_hex(const std::string& bytes);

enum class CompletionSource { endpoint, fixture };

struct Completion {
  std::string prompt_hash;
  std::string raw_text; // verbatim, untrimmed
  CompletionSource source = CompletionSource::fixture;
};

struct EndpointConfig {
  std::string base_url;   // e.g. http://host:port
  std::string path = "/v1/completions";
  std::string model_id;
  std::string token_env = "EASTE_API_TOKEN";
  // Field names of the request body and the response text, configurable
  // so the client stays vendor-agnostic.
  std::string prompt_field = "input";
  std::string response_field = "output";
  double temperature = 0.0;
  std::size_t max_tokens = 256;
  int max_retries = 3;
  int timeout_seconds = 30;
};

/// Load an endpoint config from a key=value file.
EndpointConfig load_endpoint_config(const std::string& path);

/// Obtains completions either from an HTTP endpoint or from a fixture
/// directory holding one file per prompt digest. Every completion is
/// appended to the run log when one is configured.
class CompletionClient {
public:
  static CompletionClient fixture(std::string fixture_dir);
  static CompletionClient endpoint(EndpointConfig config);

  void set_run_log(std::string path) { run_log_ = std::move(path); }

  /// Throws TransportError / MissingFixtureError on failure.
  Completion complete(const std::string& prompt) const;

private:
  CompletionClient() = default;

  void log(const Completion& c) const;

  std::optional<std::string> fixture_dir_;
  std::optional<EndpointConfig> endpoint_;
  std::optional<std::string> run_log_;
};

} // namespace easte

#endif // EASTE_COMPLETION_HPP
