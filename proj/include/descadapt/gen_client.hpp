#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace descadapt {

struct GenRequest {
  std::string prompt;
  int max_tokens = 512;
  double temperature = 0.0;
  std::vector<std::string> stop;
};

struct GenResponse {
  std::string text;
  std::string model_tag;
  double latency_ms = 0.0;
};

/// Throws ArgumentError for an empty prompt, max_tokens < 1 or a negative temperature.
void validate(const GenRequest& req);

/// Cuts `text` at the earliest occurrence of any stop sequence.
std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop);

/// SHA-256 of the UTF-8 prompt bytes, lowercase hex.
std::string sha256_hex(std::string_view data);
/// First 16 hex characters of sha256_hex; used as the mock/record filename.
std::string prompt_hash(std::string_view prompt);

/// Anything that turns a prompt into a completion.
class GeneratorClient {
 public:
  virtual ~GeneratorClient() = default;
  virtual GenResponse complete(const GenRequest& req) = 0;
};

struct HttpClientOptions {
  std::string endpoint;  // e.g. http://localhost:8080/v1
  std::string api_key;   // sent as a bearer token when non-empty
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  std::ptrdiff_t max_in_flight = 4;
};

/// POSTs {prompt, max_tokens, temperature, stop} to {endpoint}/complete and
/// expects {text, model_tag}. Retries connection failures, 429 and 5xx with
/// jittered exponential backoff; the total time budget is `timeout`.
class HttpGeneratorClient final : public GeneratorClient {
 public:
  explicit HttpGeneratorClient(HttpClientOptions options);
  GenResponse complete(const GenRequest& req) override;

 private:
  HttpClientOptions options_;
  std::string scheme_host_port_;
  std::string base_path_;
  std::counting_semaphore<1024> in_flight_;
};

/// Replays <dir>/<prompt_hash>.json files; no network.
class MockGeneratorClient final : public GeneratorClient {
 public:
  explicit MockGeneratorClient(std::filesystem::path dir);
  GenResponse complete(const GenRequest& req) override;

 private:
  std::filesystem::path dir_;
};

/// Persists {hash(prompt) -> response} so a MockGeneratorClient over `dir`
/// replays it byte-identically.
void record_mode(const GenRequest& req, const GenResponse& live_response,
                 const std::filesystem::path& dir);

/// Forwards to another client and records every response.
class RecordingGeneratorClient final : public GeneratorClient {
 public:
  RecordingGeneratorClient(std::shared_ptr<GeneratorClient> inner, std::filesystem::path dir);
  GenResponse complete(const GenRequest& req) override;

 private:
  std::shared_ptr<GeneratorClient> inner_;
  std::filesystem::path dir_;
};

enum class ClientMode { none, mock, http, record };

std::optional<ClientMode> parse_client_mode(std::string_view name);

/// Builds a client from GEN_ENDPOINT / GEN_API_KEY / GEN_MOCK_DIR, with
/// explicit overrides taking precedence. Returns nullptr for ClientMode::none.
std::shared_ptr<GeneratorClient> make_client(ClientMode mode,
                                             std::optional<std::string> mock_dir = std::nullopt,
                                             std::optional<std::string> endpoint = std::nullopt);

}  // namespace descadapt
