#include "descadapt/gen_client.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "httplib.h"
#include "json.hpp"

#include "descadapt/error.hpp"

namespace descadapt {

namespace fs = std::filesystem;
using json = nlohmann::json;

void validate(const GenRequest& req) {
  if (req.prompt.empty()) throw ArgumentError("generation request has an empty prompt");
  if (req.max_tokens < 1) throw ArgumentError("generation request needs max_tokens >= 1");
  if (req.temperature < 0.0) throw ArgumentError("generation request has a negative temperature");
}

std::string truncate_at_stop(std::string text, const std::vector<std::string>& stop) {
  auto cut = std::string::npos;
  for (const auto& s : stop) {
    if (s.empty()) continue;
    cut = std::min(cut, text.find(s));
  }
  if (cut != std::string::npos) text.resize(cut);
  return text;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("EVP_Digest(sha256) failed");
  }
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
  return out.str();
}

std::string prompt_hash(std::string_view prompt) { return sha256_hex(prompt).substr(0, 16); }

// ---------------------------------------------------------------------------

HttpGeneratorClient::HttpGeneratorClient(HttpClientOptions options)
    : options_(std::move(options)), in_flight_(std::max<std::ptrdiff_t>(1, options_.max_in_flight)) {
  const auto& ep = options_.endpoint;
  auto scheme_end = ep.find("://");
  if (ep.empty() || scheme_end == std::string::npos) {
    throw ArgumentError("generator endpoint must look like http(s)://host[:port][/path]: " + ep);
  }
  auto path_begin = ep.find('/', scheme_end + 3);
  scheme_host_port_ = ep.substr(0, path_begin);
  base_path_ = path_begin == std::string::npos ? std::string() : ep.substr(path_begin);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

GenResponse HttpGeneratorClient::complete(const GenRequest& req) {
  validate(req);
  json body = {{"prompt", req.prompt},
               {"max_tokens", req.max_tokens},
               {"temperature", req.temperature},
               {"stop", req.stop}};
  const auto payload = body.dump();
  const auto path = base_path_ + "/complete";

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  thread_local std::mt19937 jitter_rng{std::random_device{}()};
  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + options_.timeout;

  int last_status = 0;
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) break;

    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(remaining);
    cli.set_read_timeout(remaining);
    cli.set_write_timeout(remaining);
    if (!options_.api_key.empty()) cli.set_bearer_token_auth(options_.api_key);

    auto res = cli.Post(path, payload, "application/json");
    bool transient = false;
    if (!res) {
      last_status = 0;
      last_error = "connection failed: " + httplib::to_string(res.error());
      transient = true;
    } else if (res->status >= 200 && res->status < 300) {
      json parsed = json::parse(res->body, nullptr, false);
      if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("text") ||
          !parsed["text"].is_string()) {
        throw ProtocolError("malformed completion body from " + options_.endpoint);
      }
      GenResponse out;
      out.text = truncate_at_stop(parsed["text"].get<std::string>(), req.stop);
      if (parsed.contains("model_tag") && parsed["model_tag"].is_string()) {
        out.model_tag = parsed["model_tag"].get<std::string>();
      }
      out.latency_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      return out;
    } else {
      last_status = res->status;
      last_error = "HTTP status " + std::to_string(res->status);
      transient = res->status == 429 || res->status >= 500;
    }
    if (!transient || attempt == options_.max_retries) break;

    const auto base = options_.backoff_base * (1LL << attempt);
    std::uniform_real_distribution<double> jitter(0.5, 1.5);
    auto wait = std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(base.count()) * jitter(jitter_rng)));
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    std::this_thread::sleep_for(std::min(wait, std::max(left, std::chrono::milliseconds(0))));
  }
  throw TransportError("generator request to " + options_.endpoint + " failed: " + last_error,
                       last_status);
}

// ---------------------------------------------------------------------------

MockGeneratorClient::MockGeneratorClient(fs::path dir) : dir_(std::move(dir)) {}

GenResponse MockGeneratorClient::complete(const GenRequest& req) {
  validate(req);
  const auto hash = prompt_hash(req.prompt);
  const auto file = dir_ / (hash + ".json");
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw MockNotFoundError("no canned response for prompt hash " + hash + " in " + dir_.string(),
                            hash);
  }
  json parsed = json::parse(in, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("text") ||
      !parsed["text"].is_string()) {
    throw ProtocolError("malformed canned response " + file.string());
  }
  GenResponse out;
  out.text = truncate_at_stop(parsed["text"].get<std::string>(), req.stop);
  out.model_tag = parsed.value("model_tag", std::string("mock"));
  return out;
}

void record_mode(const GenRequest& req, const GenResponse& live_response, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create record directory " + dir.string() + ": " + ec.message());
  const auto file = dir / (prompt_hash(req.prompt) + ".json");
  json entry = {{"prompt", req.prompt},
                {"text", live_response.text},
                {"model_tag", live_response.model_tag}};
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << entry.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + file.string());
}

RecordingGeneratorClient::RecordingGeneratorClient(std::shared_ptr<GeneratorClient> inner,
                                                   fs::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  if (!inner_) throw ArgumentError("recording client needs an inner client");
}

GenResponse RecordingGeneratorClient::complete(const GenRequest& req) {
  auto resp = inner_->complete(req);
  record_mode(req, resp, dir_);
  return resp;
}

// ---------------------------------------------------------------------------

std::optional<ClientMode> parse_client_mode(std::string_view name) {
  if (name == "none") return ClientMode::none;
  if (name == "mock") return ClientMode::mock;
  if (name == "http") return ClientMode::http;
  if (name == "record") return ClientMode::record;
  return std::nullopt;
}

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace

std::shared_ptr<GeneratorClient> make_client(ClientMode mode, std::optional<std::string> mock_dir,
                                             std::optional<std::string> endpoint) {
  if (!mock_dir) mock_dir = env("GEN_MOCK_DIR");
  if (!endpoint) endpoint = env("GEN_ENDPOINT");

  auto http = [&]() -> std::shared_ptr<GeneratorClient> {
    if (!endpoint) throw ArgumentError("GEN_ENDPOINT is not set");
    HttpClientOptions opts;
    opts.endpoint = *endpoint;
    opts.api_key = env("GEN_API_KEY").value_or("");
    return std::make_shared<HttpGeneratorClient>(std::move(opts));
  };

  switch (mode) {
    case ClientMode::none:
      return nullptr;
    case ClientMode::mock:
      if (!mock_dir) throw ArgumentError("GEN_MOCK_DIR is not set");
      return std::make_shared<MockGeneratorClient>(*mock_dir);
    case ClientMode::http:
      return http();
    case ClientMode::record:
      if (!mock_dir) throw ArgumentError("GEN_MOCK_DIR is not set");
      return std::make_shared<RecordingGeneratorClient>(http(), *mock_dir);
  }
  return nullptr;
}

}  // namespace descadapt
