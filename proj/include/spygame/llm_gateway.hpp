#pragma once

// Remote chat-completion endpoints as players: prompt rendering, HTTP with
// retries and rate limiting, and parsing free text into Decisions.

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spygame/agents.hpp"
#include "spygame/json_codec.hpp"

namespace spygame {

/// Connection-level failure, or retries exhausted.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The endpoint answered with a status we do not retry.
class EndpointError : public std::runtime_error {
 public:
  EndpointError(int status, std::string body)
      : std::runtime_error("endpoint returned status " + std::to_string(status) +
                           ": " + body.substr(0, 500)),
        status_(status),
        body_(std::move(body)) {}
  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EndpointConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string token_env;  // name of the variable holding the bearer token
  double timeout_seconds = 60.0;
  int max_retries = 3;
  double requests_per_minute = 0.0;  // 0 means unlimited
  double temperature = 1.0;
  double backoff_base_seconds = 0.5;
  double backoff_max_seconds = 30.0;
  // Optional second endpoint that rewrites unparseable replies.
  std::shared_ptr<EndpointConfig> sanitizer;
};

void validate_endpoint(const EndpointConfig& config);
EndpointConfig endpoint_from_json(const Json& j);
Json to_json(const EndpointConfig& config);

struct ChatMessage {
  std::string role;
  std::string content;
  bool operator==(const ChatMessage&) const = default;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// One HTTP round trip. Throws TransportError when no response arrives.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body,
                            const std::map<std::string, std::string>& headers) = 0;
  /// Cheap reachability probe used before a run starts.
  virtual bool reachable() { return true; }
};

std::shared_ptr<Transport> make_http_transport(const std::string& base_url,
                                               double timeout_seconds);

/// Token bucket shared by every game using one endpoint.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  explicit RateLimiter(double requests_per_minute);
  /// Blocks until a token is available.
  void acquire();
  /// Seconds until the next token, after taking one if available now.
  double try_acquire(Clock::time_point now);

 private:
  std::mutex mu_;
  double rate_per_second_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
};

class Gateway {
 public:
  using Sleeper = std::function<void(double seconds)>;

  /// A null transport means HTTP to config.base_url.
  explicit Gateway(EndpointConfig config,
                   std::shared_ptr<Transport> transport = nullptr,
                   Sleeper sleeper = nullptr);

  /// Returns the assistant text. Transport errors and 429/5xx responses are
  /// retried with exponential backoff up to max_retries; other statuses
  /// throw EndpointError at once.
  std::string complete(const std::vector<ChatMessage>& messages);

  bool reachable();
  const EndpointConfig& config() const { return config_; }
  Gateway* sanitizer() { return sanitizer_.get(); }
  /// HTTP requests sent so far, including retries.
  std::size_t requests_sent() const { return requests_; }

  Json request_body(const std::vector<ChatMessage>& messages) const;

 private:
  EndpointConfig config_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
  RateLimiter limiter_;
  std::unique_ptr<Gateway> sanitizer_;
  std::atomic<std::size_t> requests_{0};
};

struct PromptTemplateSet {
  std::string system;
  std::map<RequestKind, std::string> templates;
  std::string rules;
};

/// The shipped templates. They are original text, not the ones used by any
/// published study.
const PromptTemplateSet& default_templates();

/// Replaces {name} placeholders; "{{" and "}}" are literal braces. An
/// unbound placeholder throws TemplateError.
std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& bindings);

std::string render_identity(const Observation& observation);
/// Public transcript with seats rendered as "Player#".
std::string render_transcript(const Observation& observation);
std::string format_instructions(RequestKind kind, const Observation& observation);

std::vector<ChatMessage> render_prompt(RequestKind kind,
                                       const Observation& observation,
                                       const PromptTemplateSet& templates);

struct ParseResult {
  std::optional<Decision> decision;
  std::string error;
  std::string raw;

  bool ok() const { return decision.has_value(); }
};

/// Strict labeled-field grammar ("KEY: value" per line or separated by
/// " / "). Out-of-range certainty is a failure, never clamped.
ParseResult parse_decision(const std::string& raw, RequestKind kind);

/// Empty when the decision fits the observation (targets in range, no self
/// targets), otherwise the reason.
std::string check_decision(const Decision& decision, const Observation& observation);

/// render, complete, parse. A failed parse goes through the sanitizer once
/// when configured; up to max_retries fresh completions follow. Exhaustion
/// and transport/endpoint errors come back as a refusal. Every raw text is
/// returned in raw_completions.
AgentReply remote_decide(Gateway& gateway, const PromptTemplateSet& templates,
                         const Observation& observation, RequestKind kind);

class LlmAgent : public Agent {
 public:
  LlmAgent(std::shared_ptr<Gateway> gateway,
           const PromptTemplateSet& templates = default_templates())
      : gateway_(std::move(gateway)), templates_(templates) {}

  AgentReply decide(const Observation& observation, RequestKind request) override {
    return remote_decide(*gateway_, templates_, observation, request);
  }

 private:
  std::shared_ptr<Gateway> gateway_;
  PromptTemplateSet templates_;
};

}  // namespace spygame
