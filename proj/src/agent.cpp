#include "gazeintent/agent.hpp"

#include <cstdlib>
#include <iomanip>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "gazeintent/error.hpp"
#include "gazeintent/rng.hpp"

namespace gazeintent {

namespace detail {
// Generated at configure time from assets/prompts.
const std::map<std::string, std::string, std::less<>>& embedded_prompts();
}  // namespace detail

using nlohmann::json;

json to_json(const AgentRequest& req) {
  return {{"prompt_template_id", req.prompt_template_id},
          {"variables", req.variables},
          {"model_id", req.model_id},
          {"temperature", req.temperature},
          {"max_tokens", req.max_tokens}};
}

json to_json(const AgentResponse& resp) {
  return {{"text", resp.text},
          {"latency_ms", resp.latency_ms},
          {"prompt_tokens", resp.prompt_tokens},
          {"completion_tokens", resp.completion_tokens},
          {"attempts", resp.attempts}};
}

AgentRequest request_from_json(const json& j) {
  AgentRequest req;
  req.prompt_template_id = j.at("prompt_template_id").get<std::string>();
  req.variables = j.at("variables").get<std::map<std::string, std::string>>();
  req.model_id = j.value("model_id", std::string(kDefaultModel));
  req.temperature = j.value("temperature", 1.0);
  req.max_tokens = j.value("max_tokens", 1024);
  return req;
}

AgentResponse response_from_json(const json& j) {
  AgentResponse resp;
  resp.text = j.at("text").get<std::string>();
  resp.latency_ms = j.value("latency_ms", 0.0);
  resp.prompt_tokens = j.value("prompt_tokens", 0);
  resp.completion_tokens = j.value("completion_tokens", 0);
  resp.attempts = j.value("attempts", 1);
  return resp;
}

std::string request_key(const AgentRequest& req) {
  // std::map keeps the keys sorted, so dump() is canonical
  const std::string canon = json(req.variables).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << req.prompt_template_id << '#' << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

const std::string& prompt_template(std::string_view id) {
  const auto& prompts = detail::embedded_prompts();
  const auto it = prompts.find(id);
  if (it == prompts.end()) throw Error(ErrorCode::UnknownTemplate, "no prompt template '" + std::string(id) + "'");
  return it->second;
}

std::string render_prompt(std::string_view id, const std::map<std::string, std::string>& variables) {
  const std::string& tmpl = prompt_template(id);
  static const std::regex placeholder(R"(\{\{([a-z_]+)\}\})");
  std::string out;
  auto last = tmpl.cbegin();
  for (std::sregex_iterator it(tmpl.begin(), tmpl.end(), placeholder), end; it != end; ++it) {
    const auto& m = *it;
    const auto var = variables.find(m[1].str());
    if (var == variables.end()) {
      throw Error(ErrorCode::UnknownTemplate,
                  "template '" + std::string(id) + "' needs variable '" + m[1].str() + "'");
    }
    out.append(last, m[0].first);
    out += var->second;
    last = m[0].second;
  }
  out.append(last, tmpl.cend());
  return out;
}

// --- mock ---------------------------------------------------------------

void MockAgent::add(const AgentRequest& req, std::string text) {
  std::lock_guard lock(mu_);
  exact_[request_key(req)] = std::move(text);
}

void MockAgent::add_wildcard(std::string template_id, std::string text) {
  std::lock_guard lock(mu_);
  wildcard_[std::move(template_id)] = std::move(text);
}

std::size_t MockAgent::size() const {
  std::lock_guard lock(mu_);
  return exact_.size() + wildcard_.size();
}

AgentResponse MockAgent::complete(const AgentRequest& req) {
  AgentResponse resp;
  {
    std::lock_guard lock(mu_);
    if (const auto it = exact_.find(request_key(req)); it != exact_.end()) {
      resp.text = it->second;
      return resp;
    }
    if (const auto it = wildcard_.find(req.prompt_template_id); it != wildcard_.end()) {
      resp.text = it->second;
      return resp;
    }
  }
  if (responder_) {
    if (auto text = responder_(req)) {
      resp.text = std::move(*text);
      return resp;
    }
  }
  throw Error(ErrorCode::NoCannedResponse, "no canned response for " + request_key(req));
}

// --- transports ---------------------------------------------------------

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) throw Error(ErrorCode::HttpError, "bad endpoint URL '" + url + "'");
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

HttpResponse HttpTransport::post(const HttpRequest& req) {
  const ParsedUrl url = parse_url(req.url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.origin.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::HttpError, "built without TLS support; cannot reach " + url.origin);
  }
#endif
  httplib::Client client(url.origin);
  const auto secs = static_cast<time_t>(req.timeout_s);
  const auto usecs = static_cast<time_t>((req.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : req.headers) {
    if (k == "Content-Type") {
      content_type = v;
    } else {
      headers.emplace(k, v);
    }
  }
  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(url.path, headers, req.body, content_type);
  if (!res) {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read && elapsed >= 0.9 * req.timeout_s)) {
      throw Error(ErrorCode::Timeout, "no reply from " + url.origin + " within " + std::to_string(req.timeout_s) + " s");
    }
    throw Error(ErrorCode::HttpError, url.origin + ": " + httplib::to_string(err));
  }
  return {res->status, res->body};
}

HttpResponse FailingTransport::post(const HttpRequest& req) {
  ++calls_;
  throw Error(ErrorCode::HttpError, "network access is disabled (attempted POST " + req.url + ")");
}

// --- remote -------------------------------------------------------------

RemoteAgentConfig RemoteAgentConfig::from_env() {
  RemoteAgentConfig cfg;
  if (const char* v = std::getenv(kEndpointEnv)) cfg.endpoint = v;
  if (const char* v = std::getenv(kApiKeyEnv)) cfg.api_key = v;
  if (const char* v = std::getenv(kModelEnv); v && *v) cfg.model_id = v;
  return cfg;
}

RemoteAgent::RemoteAgent(RemoteAgentConfig cfg, std::shared_ptr<Transport> transport, Sleeper sleeper)
    : cfg_(std::move(cfg)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  if (!transport_) transport_ = std::make_shared<HttpTransport>();
  if (!sleeper_) sleeper_ = [](std::chrono::duration<double> d) { std::this_thread::sleep_for(d); };
}

json RemoteAgent::request_body(const AgentRequest& req) const {
  return {{"model", req.model_id.empty() ? cfg_.model_id : req.model_id},
          {"temperature", req.temperature},
          {"max_tokens", req.max_tokens},
          {"messages", json::array({{{"role", "user"},
                                     {"content", render_prompt(req.prompt_template_id, req.variables)}}})}};
}

double RemoteAgent::backoff_delay(int retry) const {
  Rng rng(derive_seed(cfg_.retry.jitter_seed, static_cast<std::uint64_t>(retry)));
  return cfg_.retry.base_delay_s * std::ldexp(1.0, retry - 1) * (1.0 + 0.25 * rng.uniform());
}

AgentResponse RemoteAgent::complete(const AgentRequest& req) {
  if (cfg_.api_key.empty()) {
    throw Error(ErrorCode::CredentialMissing, std::string(kApiKeyEnv) + " is not set");
  }
  if (cfg_.endpoint.empty()) {
    throw Error(ErrorCode::CredentialMissing, std::string(kEndpointEnv) + " is not set");
  }
  HttpRequest http;
  http.url = cfg_.endpoint;
  http.timeout_s = cfg_.timeout_s;
  http.headers = {{"Authorization", "Bearer " + cfg_.api_key}, {"Content-Type", "application/json"}};
  http.body = request_body(req).dump();

  const auto start = std::chrono::steady_clock::now();
  const int max_attempts = std::max(1, cfg_.retry.max_attempts);
  std::optional<Error> last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) sleeper_(std::chrono::duration<double>(backoff_delay(attempt - 1)));
    HttpResponse res;
    try {
      res = transport_->post(http);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Timeout) throw;
      last = e;
      continue;
    }
    if (res.status == 429 || res.status >= 500) {
      last = Error(ErrorCode::HttpError, "status " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
      continue;
    }
    if (res.status != 200) {
      throw Error(ErrorCode::HttpError, "status " + std::to_string(res.status) + ": " + res.body.substr(0, 200));
    }
    AgentResponse out;
    try {
      const json body = json::parse(res.body);
      out.text = body.at("choices").at(0).at("message").at("content").get<std::string>();
      if (body.contains("usage")) {
        out.prompt_tokens = body["usage"].value("prompt_tokens", 0);
        out.completion_tokens = body["usage"].value("completion_tokens", 0);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedAgentOutput, std::string("chat completion body: ") + e.what());
    }
    out.attempts = attempt;
    out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
  }
  throw Error(last->code(), "gave up after " + std::to_string(max_attempts) + " attempts; " + last->what());
}

// --- journal ------------------------------------------------------------

namespace {

std::string iso_time(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::ostringstream out;
  out << buf << '.' << std::setw(3) << std::setfill('0') << ms % 1000 << 'Z';
  return out.str();
}

}  // namespace

Journal::Journal(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw Error(ErrorCode::ScenarioInvalid, "cannot open journal " + path.string());
}

void Journal::append(const json& line) {
  std::lock_guard lock(mu_);
  out_ << line.dump() << '\n';
  out_.flush();
}

void Journal::record_exchange(const AgentRequest& req, const AgentResponse& resp,
                              std::chrono::system_clock::time_point sent,
                              std::chrono::system_clock::time_point received) {
  append({{"type", "exchange"},
          {"key", request_key(req)},
          {"request", to_json(req)},
          {"response", to_json(resp)},
          {"sent", iso_time(sent)},
          {"received", iso_time(received)}});
}

std::vector<json> Journal::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ScenarioInvalid, "cannot read journal " + path.string());
  std::vector<json> lines;
  std::string line;
  long n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      lines.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ScenarioInvalid, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return lines;
}

std::shared_ptr<MockAgent> Journal::replay_agent(const std::vector<json>& lines) {
  auto mock = std::make_shared<MockAgent>();
  for (const json& line : lines) {
    if (line.value("type", "") != "exchange") continue;
    try {
      mock->add(request_from_json(line.at("request")), line.at("response").at("text").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ScenarioInvalid, std::string("journal exchange: ") + e.what());
    }
  }
  return mock;
}

AgentResponse JournalingAgent::complete(const AgentRequest& req) {
  const auto sent = std::chrono::system_clock::now();
  AgentResponse resp = inner_->complete(req);
  journal_->record_exchange(req, resp, sent, std::chrono::system_clock::now());
  return resp;
}

}  // namespace gazeintent
