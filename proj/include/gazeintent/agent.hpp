#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace gazeintent {

inline constexpr std::string_view kInterpretTemplate = "interpret.v1";
inline constexpr std::string_view kPlanTemplate = "plan.v1";
inline constexpr std::string_view kDefaultModel = "gpt-4o-2024-08-06";

inline constexpr const char* kEndpointEnv = "GAZEINTENT_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "GAZEINTENT_API_KEY";
inline constexpr const char* kModelEnv = "GAZEINTENT_MODEL";

struct AgentRequest {
  std::string prompt_template_id;
  std::map<std::string, std::string> variables;
  std::string model_id = std::string(kDefaultModel);
  double temperature = 1.0;
  int max_tokens = 1024;
};

struct AgentResponse {
  std::string text;
  double latency_ms = 0;
  int prompt_tokens = 0;
  int completion_tokens = 0;
  int attempts = 1;
};

nlohmann::json to_json(const AgentRequest& req);
nlohmann::json to_json(const AgentResponse& resp);
AgentRequest request_from_json(const nlohmann::json& j);
AgentResponse response_from_json(const nlohmann::json& j);

/// "<template id>#<fnv1a-64 of the canonical variables JSON>".
std::string request_key(const AgentRequest& req);

/// Versioned prompt text with {{name}} placeholders.
const std::string& prompt_template(std::string_view id);
/// Throws UnknownTemplate for unknown ids or placeholders left unbound.
std::string render_prompt(std::string_view id, const std::map<std::string, std::string>& variables);

class AgentGateway {
 public:
  virtual ~AgentGateway() = default;
  virtual AgentResponse complete(const AgentRequest& req) = 0;
};

/// Offline agent. Answers from a canned table keyed by request_key, then
/// from per-template wildcard entries, then from an optional responder.
/// Never touches the network.
class MockAgent : public AgentGateway {
 public:
  using Responder = std::function<std::optional<std::string>(const AgentRequest&)>;

  void add(const AgentRequest& req, std::string text);
  void add_wildcard(std::string template_id, std::string text);
  void set_responder(Responder responder) { responder_ = std::move(responder); }

  /// Throws NoCannedResponse when nothing answers.
  AgentResponse complete(const AgentRequest& req) override;

  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> exact_;
  std::map<std::string, std::string> wildcard_;
  Responder responder_;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_s = 30;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// POST transport. Implementations throw Error(Timeout) on timeouts and
/// Error(HttpError) on connection failures.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& req) = 0;
};

/// cpp-httplib backed transport.
class HttpTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& req) override;
};

/// Transport that refuses every call. Used to prove a code path is offline.
class FailingTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest& req) override;
  long calls() const noexcept { return calls_.load(); }

 private:
  std::atomic<long> calls_{0};
};

struct RetryPolicy {
  int max_attempts = 3;
  double base_delay_s = 0.5;
  std::uint64_t jitter_seed = 0;
};

struct RemoteAgentConfig {
  std::string endpoint;  // full chat-completions URL
  std::string api_key;
  std::string model_id = std::string(kDefaultModel);
  double timeout_s = 30;
  RetryPolicy retry;

  /// Reads GAZEINTENT_ENDPOINT, GAZEINTENT_API_KEY and GAZEINTENT_MODEL.
  static RemoteAgentConfig from_env();
};

/// Client for OpenAI-compatible chat-completions endpoints.
class RemoteAgent : public AgentGateway {
 public:
  using Sleeper = std::function<void(std::chrono::duration<double>)>;

  RemoteAgent(RemoteAgentConfig cfg, std::shared_ptr<Transport> transport, Sleeper sleeper = {});

  /// Retries 5xx, 429 and timeouts with exponential backoff. Throws
  /// CredentialMissing before any I/O when no key is configured.
  AgentResponse complete(const AgentRequest& req) override;

  /// Request body sent for `req`.
  nlohmann::json request_body(const AgentRequest& req) const;
  /// Delay before retry number `retry` (1-based).
  double backoff_delay(int retry) const;

 private:
  RemoteAgentConfig cfg_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
};

/// Append-only JSON-lines log of agent exchanges. Appends are serialized.
class Journal {
 public:
  explicit Journal(const std::filesystem::path& path);

  void append(const nlohmann::json& line);
  void record_exchange(const AgentRequest& req, const AgentResponse& resp,
                       std::chrono::system_clock::time_point sent,
                       std::chrono::system_clock::time_point received);

  static std::vector<nlohmann::json> load(const std::filesystem::path& path);
  /// Strict mock holding every exchange of a journal, no responder.
  static std::shared_ptr<MockAgent> replay_agent(const std::vector<nlohmann::json>& lines);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

/// Forwards to another gateway and journals each exchange.
class JournalingAgent : public AgentGateway {
 public:
  JournalingAgent(std::shared_ptr<AgentGateway> inner, std::shared_ptr<Journal> journal)
      : inner_(std::move(inner)), journal_(std::move(journal)) {}

  AgentResponse complete(const AgentRequest& req) override;

 private:
  std::shared_ptr<AgentGateway> inner_;
  std::shared_ptr<Journal> journal_;
};

}  // namespace gazeintent
