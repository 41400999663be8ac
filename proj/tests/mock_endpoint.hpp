#pragma once

// Scripted stand-ins for a chat-completion endpoint.

#include <functional>
#include <mutex>
#include <regex>
#include <string>
#include <vector>

#include "spygame/llm_gateway.hpp"

namespace spygame::testing {

inline std::string chat_body(const std::string& content) {
  Json j;
  j["choices"] = Json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}});
  return j.dump();
}

/// Every request goes to `reply`, which sees the decoded request body and
/// the call index. Requests are kept for inspection.
class MockTransport : public Transport {
 public:
  using Reply = std::function<HttpResponse(const Json& request, std::size_t call)>;

  explicit MockTransport(Reply reply) : reply_(std::move(reply)) {}

  HttpResponse post(const std::string&, const std::string& body,
                    const std::map<std::string, std::string>& headers) override {
    std::size_t call;
    Json request = Json::parse(body);
    {
      std::lock_guard lock(mu_);
      call = requests_.size();
      requests_.push_back(request);
      headers_.push_back(headers);
    }
    return reply_(request, call);
  }

  bool reachable() override { return up; }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return requests_.size();
  }
  std::vector<Json> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::vector<std::map<std::string, std::string>> headers() const {
    std::lock_guard lock(mu_);
    return headers_;
  }

  bool up = true;

 private:
  Reply reply_;
  mutable std::mutex mu_;
  std::vector<Json> requests_;
  std::vector<std::map<std::string, std::string>> headers_;
};

/// Replies with the given texts in order, repeating the last one.
inline std::shared_ptr<MockTransport> scripted_texts(std::vector<std::string> texts) {
  return std::make_shared<MockTransport>([texts](const Json&, std::size_t call) {
    return HttpResponse{200, chat_body(texts[std::min(call, texts.size() - 1)])};
  });
}

inline std::string user_prompt(const Json& request) {
  return request["messages"].back()["content"].get<std::string>();
}

/// A well-behaved player: reads its seat and the request kind from the
/// prompt and answers in the strict grammar. Questions and answers never
/// mention any place.
inline std::string competent_reply(const std::string& prompt) {
  static const std::regex self_re(R"(You are Player(\d+)\.)");
  static const std::regex players_re(R"(with (\d+) players)");
  std::smatch m;
  int self = 1;
  int n = 7;
  if (std::regex_search(prompt, m, self_re)) self = std::stoi(m[1].str());
  if (std::regex_search(prompt, m, players_re)) n = std::stoi(m[1].str());
  const int other = self % n + 1;
  if (prompt.find("ACTION: question | accuse") != std::string::npos) {
    return "REASONING: keep probing\nACTION: question\nTARGET: Player" + std::to_string(other) +
           "\nTEXT: What did you do this morning?";
  }
  if (prompt.find("ANSWER:") != std::string::npos) {
    return "REASONING: stay vague\nANSWER: The usual routine, nothing special.";
  }
  if (prompt.find("VOTE: agree | disagree") != std::string::npos) {
    return "REASONING: unsure\nVOTE: disagree";
  }
  if (prompt.find("CERTAINTY:") != std::string::npos) {
    return "REASONING: no idea yet\nLOCATION: library\nCERTAINTY: 2";
  }
  return "REASONING: gut feeling\nVOTE: Player" + std::to_string(other);
}

inline std::shared_ptr<MockTransport> competent_endpoint() {
  return std::make_shared<MockTransport>([](const Json& req, std::size_t) {
    return HttpResponse{200, chat_body(competent_reply(user_prompt(req)))};
  });
}

inline EndpointConfig mock_config(int max_retries = 3) {
  EndpointConfig c;
  c.base_url = "http://mock.invalid";
  c.model = "mock-model";
  c.max_retries = max_retries;
  return c;
}

/// Gateway that never sleeps between retries.
inline std::shared_ptr<Gateway> mock_gateway(std::shared_ptr<Transport> t, int max_retries = 3) {
  return std::make_shared<Gateway>(mock_config(max_retries), std::move(t), [](double) {});
}

}  // namespace spygame::testing
