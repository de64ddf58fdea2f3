#include "easte/completion.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "easte/error.hpp"

// httplib is pulled in only here to keep its heavy header out of the library
// interface.
#include <httplib.h>

namespace easte {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

} // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

EndpointConfig load_endpoint_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open endpoint config " + path);

  EndpointConfig config;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("endpoint config line " + std::to_string(lineno) + " is not key=value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key == "base_url")
      config.base_url = value;
    else if (key == "path")
      config.path = value;
    else if (key == "model_id")
      config.model_id = value;
    else if (key == "token_env")
      config.token_env = value;
    else if (key == "prompt_field")
      config.prompt_field = value;
    else if (key == "response_field")
      config.response_field = value;
    else if (key == "temperature")
      config.temperature = std::stod(value);
    else if (key == "max_tokens")
      config.max_tokens = std::stoul(value);
    else if (key == "max_retries")
      config.max_retries = std::stoi(value);
    else if (key == "timeout_seconds")
      config.timeout_seconds = std::stoi(value);
    else
      throw ConfigError("unknown endpoint config key '" + key + "'");
  }
  if (config.base_url.empty()) throw ConfigError("endpoint config is missing base_url");
  return config;
}

CompletionClient CompletionClient::fixture(std::string fixture_dir) {
  CompletionClient client;
  client.fixture_dir_ = std::move(fixture_dir);
  return client;
}

CompletionClient CompletionClient::endpoint(EndpointConfig config) {
  CompletionClient client;
  client.endpoint_ = std::move(config);
  return client;
}

void CompletionClient::log(const Completion& c) const {
  if (!run_log_) return;
  nlohmann::ordered_json j;
  j["prompt_hash"] = c.prompt_hash;
  j["raw_text"] = c.raw_text;
  j["timestamp"] = iso_timestamp();
  j["source"] = c.source == CompletionSource::fixture ? "fixture" : "endpoint";
  std::ofstream out(*run_log_, std::ios::app);
  out << j.dump() << '\n';
}

Completion CompletionClient::complete(const std::string& prompt) const {
  Completion completion;
  completion.prompt_hash = sha256_hex(prompt);

  if (fixture_dir_) {
    std::filesystem::path file =
        std::filesystem::path(*fixture_dir_) / (completion.prompt_hash + ".txt");
    std::ifstream in(file, std::ios::binary);
    if (!in) throw MissingFixtureError(completion.prompt_hash);
    std::ostringstream buf;
    buf << in.rdbuf();
    completion.raw_text = buf.str();
    completion.source = CompletionSource::fixture;
    log(completion);
    return completion;
  }

  const EndpointConfig& ep = *endpoint_;
  nlohmann::ordered_json body;
  body["model"] = ep.model_id;
  body[ep.prompt_field] = prompt;
  body["temperature"] = ep.temperature;
  body["max_tokens"] = ep.max_tokens;

  httplib::Client http(ep.base_url);
  http.set_connection_timeout(ep.timeout_seconds, 0);
  http.set_read_timeout(ep.timeout_seconds, 0);
  httplib::Headers headers;
  if (const char* token = std::getenv(ep.token_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);

  std::string last_failure;
  for (int attempt = 0; attempt < ep.max_retries; ++attempt) {
    if (attempt > 0) {
      // exponential backoff: 0.2s, 0.4s, 0.8s, ...
      std::this_thread::sleep_for(std::chrono::milliseconds(200 << (attempt - 1)));
    }
    auto res = http.Post(ep.path, headers, body.dump(), "application/json");
    if (!res) {
      last_failure = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_failure = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200)
      throw TransportError("endpoint returned status " + std::to_string(res->status));

    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains(ep.response_field))
      throw TransportError("endpoint response has no '" + ep.response_field + "' field");
    completion.raw_text = j[ep.response_field].get<std::string>();
    completion.source = CompletionSource::endpoint;
    log(completion);
    return completion;
  }
  throw TransportError("exhausted " + std::to_string(ep.max_retries) + " attempts (" +
                       last_failure + ")");
}

} // namespace easte
