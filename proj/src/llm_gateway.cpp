#include "spygame/llm_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace spygame {

// ---------------------------------------------------------------- config

void validate_endpoint(const EndpointConfig& c) {
  if (c.base_url.rfind("http://", 0) != 0 && c.base_url.rfind("https://", 0) != 0) {
    throw ConfigError("endpoint base_url must start with http:// or https://, got '" +
                      c.base_url + "'");
  }
  if (c.model.empty()) throw ConfigError("endpoint model is empty");
  if (c.path.empty() || c.path[0] != '/') {
    throw ConfigError("endpoint path must start with '/'");
  }
  if (!(c.timeout_seconds > 0)) throw ConfigError("endpoint timeout must be > 0");
  if (c.max_retries < 0) throw ConfigError("endpoint max_retries must be >= 0");
  if (c.requests_per_minute < 0) {
    throw ConfigError("endpoint requests_per_minute must be >= 0");
  }
  if (c.temperature < 0) throw ConfigError("endpoint temperature must be >= 0");
  if (c.backoff_base_seconds < 0 || c.backoff_max_seconds < 0) {
    throw ConfigError("endpoint backoff must be >= 0");
  }
  if (c.sanitizer) validate_endpoint(*c.sanitizer);
}

EndpointConfig endpoint_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("endpoint must be an object");
  static const std::set<std::string> known = {
      "base_url",    "path",          "model",
      "token_env",   "timeout_seconds", "max_retries",
      "requests_per_minute", "temperature", "backoff_base_seconds",
      "backoff_max_seconds", "sanitizer"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown endpoint key '" + key + "'");
  }
  EndpointConfig c;
  try {
    c.base_url = j.at("base_url").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.path = j.value("path", c.path);
    c.token_env = j.value("token_env", c.token_env);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
    c.temperature = j.value("temperature", c.temperature);
    c.backoff_base_seconds = j.value("backoff_base_seconds", c.backoff_base_seconds);
    c.backoff_max_seconds = j.value("backoff_max_seconds", c.backoff_max_seconds);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad endpoint: ") + e.what());
  }
  if (j.contains("sanitizer") && !j["sanitizer"].is_null()) {
    c.sanitizer = std::make_shared<EndpointConfig>(endpoint_from_json(j["sanitizer"]));
  }
  validate_endpoint(c);
  return c;
}

Json to_json(const EndpointConfig& c) {
  Json j;
  j["base_url"] = c.base_url;
  j["path"] = c.path;
  j["model"] = c.model;
  j["token_env"] = c.token_env;
  j["timeout_seconds"] = c.timeout_seconds;
  j["max_retries"] = c.max_retries;
  j["requests_per_minute"] = c.requests_per_minute;
  j["temperature"] = c.temperature;
  j["backoff_base_seconds"] = c.backoff_base_seconds;
  j["backoff_max_seconds"] = c.backoff_max_seconds;
  if (c.sanitizer) j["sanitizer"] = to_json(*c.sanitizer);
  return j;
}

// ---------------------------------------------------------------- transport

namespace {

class HttpTransport : public Transport {
 public:
  HttpTransport(std::string base_url, double timeout)
      : base_url_(std::move(base_url)), timeout_(timeout) {}

  HttpResponse post(const std::string& path, const std::string& body,
                    const std::map<std::string, std::string>& headers) override {
    // One client per call; httplib clients are not meant for concurrent use.
    httplib::Client client(base_url_);
    configure(client);
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client.Post(path, h, body, "application/json");
    if (!res) {
      throw TransportError("POST " + base_url_ + path + ": " +
                           httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

  bool reachable() override {
    httplib::Client client(base_url_);
    configure(client);
    return static_cast<bool>(client.Get("/"));
  }

 private:
  void configure(httplib::Client& client) const {
    const auto secs = static_cast<time_t>(timeout_);
    const auto usecs = static_cast<time_t>((timeout_ - std::floor(timeout_)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
  }

  std::string base_url_;
  double timeout_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(const std::string& base_url,
                                               double timeout_seconds) {
  return std::make_shared<HttpTransport>(base_url, timeout_seconds);
}

RateLimiter::RateLimiter(double requests_per_minute)
    : rate_per_second_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, requests_per_minute / 60.0)),
      tokens_(capacity_),
      last_(Clock::now()) {}

double RateLimiter::try_acquire(Clock::time_point now) {
  std::lock_guard lock(mu_);
  if (rate_per_second_ <= 0) return 0.0;
  const double elapsed = std::chrono::duration<double>(now - last_).count();
  if (elapsed > 0) {
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_second_);
    last_ = now;
  }
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return 0.0;
  }
  return (1.0 - tokens_) / rate_per_second_;
}

void RateLimiter::acquire() {
  for (;;) {
    const double wait = try_acquire(Clock::now());
    if (wait <= 0) return;
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
  }
}

// ---------------------------------------------------------------- gateway

Gateway::Gateway(EndpointConfig config, std::shared_ptr<Transport> transport,
                 Sleeper sleeper)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      sleeper_(std::move(sleeper)),
      limiter_(config_.requests_per_minute) {
  validate_endpoint(config_);
  if (!transport_) transport_ = make_http_transport(config_.base_url, config_.timeout_seconds);
  if (!sleeper_) {
    sleeper_ = [](double s) {
      std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };
  }
  if (config_.sanitizer) {
    // A sanitizer on the same host shares the transport (and any mock).
    auto t = config_.sanitizer->base_url == config_.base_url ? transport_ : nullptr;
    sanitizer_ = std::make_unique<Gateway>(*config_.sanitizer, t, sleeper_);
  }
}

Json Gateway::request_body(const std::vector<ChatMessage>& messages) const {
  Json body;
  body["model"] = config_.model;
  body["messages"] = Json::array();
  for (const auto& m : messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["temperature"] = config_.temperature;
  return body;
}

std::string Gateway::complete(const std::vector<ChatMessage>& messages) {
  const std::string payload = request_body(messages).dump();
  std::map<std::string, std::string> headers;
  if (!config_.token_env.empty()) {
    const char* token = std::getenv(config_.token_env.c_str());
    if (!token || !*token) {
      throw ConfigError("environment variable " + config_.token_env + " is not set");
    }
    headers["Authorization"] = std::string("Bearer ") + token;
  }

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleeper_(std::min(config_.backoff_max_seconds,
                        config_.backoff_base_seconds * std::ldexp(1.0, attempt - 1)));
    }
    limiter_.acquire();
    ++requests_;
    HttpResponse res;
    try {
      res = transport_->post(config_.path, payload, headers);
    } catch (const TransportError& e) {
      last_error = e.what();
      continue;
    }
    if (res.status >= 200 && res.status < 300) {
      try {
        const Json j = Json::parse(res.body);
        const Json& content = j.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw EndpointError(res.status, res.body);
        return content.get<std::string>();
      } catch (const Json::exception&) {
        throw EndpointError(res.status, res.body);
      }
    }
    if (res.status == 429 || res.status >= 500) {
      last_error = "status " + std::to_string(res.status);
      continue;
    }
    throw EndpointError(res.status, res.body);
  }
  throw TransportError("gave up after " + std::to_string(config_.max_retries + 1) +
                       " attempt(s): " + last_error);
}

bool Gateway::reachable() { return transport_->reachable(); }

// ---------------------------------------------------------------- prompts

namespace {

const char* kRules =
    "You are playing a hidden-role party game with {num_players} players. "
    "All players but one are citizens. Citizens know a secret location and "
    "each holds a character card that belongs to it. The remaining player is "
    "the spy, who does not know the location.\n"
    "Each turn the current leader either asks one other player a question or "
    "accuses one other player of being the spy. A questioned player answers "
    "and leads the next turn. An accusation starts a day vote in which every "
    "player except the accuser and the accused votes agree or disagree. A "
    "unanimous agree ends the game at once: the citizens win if the accused "
    "was the spy and the spy wins otherwise.\n"
    "From turn {guess_start_turn} on, the spy privately names a location and "
    "a certainty from 0 to 10 at the end of every turn. A certainty of "
    "{certainty_threshold} or more reveals the guess and ends the game, and "
    "the spy wins exactly when the guess is right.\n"
    "After turn {final_turn} every player votes for the most suspicious "
    "player. The spy wins if a single citizen gets the most votes.\n"
    "Citizens should show that they know the location without naming it. "
    "The spy should blend in while working out the location.";

const char* kBody =
    "{rules}\n\n{identity}\n\nTranscript so far:\n{transcript}\n\n{format_instructions}";

std::string answer_context(const Observation& obs) {
  for (auto it = obs.public_transcript.rbegin(); it != obs.public_transcript.rend(); ++it) {
    if (const auto* q = it->as<ev::Question>(); q && q->target == obs.self) {
      return player_name(q->asker) + " asked you: \"" + q->text + "\"";
    }
  }
  return "Answer the question put to you.";
}

}  // namespace

const PromptTemplateSet& default_templates() {
  static const PromptTemplateSet set = [] {
    PromptTemplateSet s;
    s.system =
        "You are a player in a turn-based social deduction game. Follow the "
        "reply format exactly.";
    s.rules = kRules;
    for (RequestKind k : {RequestKind::LeaderAction, RequestKind::Answer,
                          RequestKind::DayBallot, RequestKind::SpyGuess,
                          RequestKind::FinalBallot}) {
      s.templates[k] = kBody;
    }
    return s;
  }();
  return set;
}

std::string render_template(const std::string& tmpl,
                            const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    const char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out += '{';
      ++i;
      continue;
    }
    if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out += '}';
      ++i;
      continue;
    }
    if (c != '{') {
      out += c;
      continue;
    }
    const auto close = tmpl.find('}', i);
    if (close == std::string::npos) {
      throw TemplateError("unterminated placeholder at offset " + std::to_string(i));
    }
    const std::string name = tmpl.substr(i + 1, close - i - 1);
    const auto it = bindings.find(name);
    if (it == bindings.end()) throw TemplateError("unbound placeholder {" + name + "}");
    out += it->second;
    i = close;
  }
  return out;
}

std::string render_identity(const Observation& obs) {
  std::string s = "You are " + player_name(obs.self) + ". ";
  if (obs.role == Role::Spy) {
    return s + "You are the spy. You do not know the location.";
  }
  s += "You are a citizen. The location is " +
       (obs.location ? obs.location->name : std::string("unknown")) + ".";
  if (obs.character) s += " Your character is " + *obs.character + ".";
  return s;
}

std::string render_transcript(const Observation& obs) {
  std::ostringstream os;
  os << "-- Turn 1 --\n";
  for (const auto& e : obs.public_transcript) {
    if (const auto* t = e.as<ev::TurnStart>()) {
      os << "-- Turn " << t->turn << ": " << player_name(t->leader) << " leads --\n";
    } else if (const auto* r = e.as<ev::Reasoning>()) {
      if (r->player == obs.self) os << "(your private reasoning) " << r->text << "\n";
    } else if (const auto* q = e.as<ev::Question>()) {
      os << player_name(q->asker) << " to " << player_name(q->target) << ": "
         << q->text << "\n";
    } else if (const auto* a = e.as<ev::Answer>()) {
      os << player_name(a->responder) << ": " << a->text << "\n";
    } else if (const auto* a = e.as<ev::Accusation>()) {
      os << player_name(a->accuser) << " accuses " << player_name(a->accused)
         << " of being the spy.\n";
    } else if (const auto* b = e.as<ev::DayVoteBallot>()) {
      os << player_name(b->voter) << " votes " << (b->agree ? "agree" : "disagree")
         << ".\n";
    } else if (const auto* d = e.as<ev::DayVoteResult>()) {
      os << "The day vote is " << (d->unanimous ? "unanimous" : "not unanimous")
         << ".\n";
    } else if (const auto* g = e.as<ev::GuessAnnounced>()) {
      os << "The spy announces the guess '" << g->location_text << "', which is "
         << (g->correct ? "right" : "wrong") << ".\n";
    } else if (const auto* b = e.as<ev::FinalVoteBallot>()) {
      os << player_name(b->voter) << " votes for " << player_name(b->target) << ".\n";
    } else if (const auto* g = e.as<ev::GameEnd>()) {
      os << "Game over: " << to_string(g->winner) << " win.\n";
    }
  }
  return os.str();
}

std::string format_instructions(RequestKind kind, const Observation& obs) {
  const std::string reasoning = "REASONING: <your reasoning>\n";
  switch (kind) {
    case RequestKind::LeaderAction:
      return "You lead this turn. Ask one other player a question, or accuse "
             "one other player of being the spy.\nReply with these labeled "
             "lines:\n" +
             reasoning +
             "ACTION: question | accuse\nTARGET: Player<number>\n"
             "TEXT: <your question, left out when accusing>";
    case RequestKind::Answer:
      return answer_context(obs) + "\nReply with these labeled lines:\n" + reasoning +
             "ANSWER: <your answer>";
    case RequestKind::DayBallot: {
      std::string ctx = "An accusation is under vote.";
      if (obs.accusation) {
        ctx = player_name(obs.accusation->accuser) + " accuses " +
              player_name(obs.accusation->accused) + " of being the spy.";
      }
      return ctx + " Do you agree?\nReply with these labeled lines:\n" + reasoning +
             "VOTE: agree | disagree";
    }
    case RequestKind::SpyGuess:
      return "Name the location you believe this is and how sure you are.\n"
             "Reply with these labeled lines:\n" +
             reasoning + "LOCATION: <location>\nCERTAINTY: <integer from 0 to 10>";
    case RequestKind::FinalBallot:
      return "Vote for the player you find most suspicious, other than "
             "yourself.\nReply with these labeled lines:\n" +
             reasoning + "VOTE: Player<number>";
  }
  throw TemplateError("unknown request kind");
}

std::vector<ChatMessage> render_prompt(RequestKind kind, const Observation& obs,
                                       const PromptTemplateSet& templates) {
  const auto it = templates.templates.find(kind);
  if (it == templates.templates.end()) {
    throw TemplateError("no template for request kind " + std::string(to_string(kind)));
  }
  const std::string rules = render_template(
      templates.rules,
      {{"num_players", std::to_string(obs.num_players)},
       {"guess_start_turn", std::to_string(obs.guess_start_turn)},
       {"certainty_threshold", std::to_string(obs.certainty_threshold)},
       {"final_turn", std::to_string(obs.final_turn)}});
  const std::string body =
      render_template(it->second, {{"rules", rules},
                                   {"identity", render_identity(obs)},
                                   {"transcript", render_transcript(obs)},
                                   {"format_instructions", format_instructions(kind, obs)}});
  return {{"system", templates.system}, {"user", body}};
}

// ---------------------------------------------------------------- parsing

namespace {

std::string trim(std::string s) {
  const char* junk = " \t\r\n*_\"'`";
  const auto b = s.find_first_not_of(junk);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(junk);
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::map<std::string, std::string> labeled_fields(const std::string& raw) {
  static const std::regex marker(
      R"((^|\n|/)[ \t*#_>-]*(REASONING|ACTION|TARGET|TEXT|QUESTION|ANSWER|VOTE|LOCATION|CERTAINTY)[ \t*_]*:)",
      std::regex::icase);
  struct Hit {
    std::string key;
    std::size_t begin;  // start of the marker, separator included
    std::size_t value;  // first character after the colon
  };
  std::vector<Hit> hits;
  for (auto it = std::sregex_iterator(raw.begin(), raw.end(), marker);
       it != std::sregex_iterator(); ++it) {
    hits.push_back({lower((*it)[2].str()), static_cast<std::size_t>(it->position()),
                    static_cast<std::size_t>(it->position() + it->length())});
  }
  std::map<std::string, std::string> fields;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const std::size_t end = i + 1 < hits.size() ? hits[i + 1].begin : raw.size();
    fields.emplace(hits[i].key, trim(raw.substr(hits[i].value, end - hits[i].value)));
  }
  return fields;
}

std::optional<PlayerId> parse_target(const std::string& text) {
  static const std::regex re(R"(^\s*(?:player)?\s*#?\s*(\d+)\s*[.!]?\s*$)",
                             std::regex::icase);
  std::smatch m;
  const std::string t = trim(text);
  if (!std::regex_match(t, m, re)) return std::nullopt;
  const long n = std::stol(m[1].str());
  if (n < 1 || n > 1000) return std::nullopt;
  return static_cast<PlayerId>(n - 1);
}

}  // namespace

ParseResult parse_decision(const std::string& raw, RequestKind kind) {
  ParseResult r;
  r.raw = raw;
  const auto fields = labeled_fields(raw);
  auto get = [&](const char* key) -> std::optional<std::string> {
    const auto it = fields.find(key);
    if (it == fields.end() || it->second.empty()) return std::nullopt;
    return it->second;
  };
  auto fail = [&](std::string why) {
    r.error = std::move(why);
    return r;
  };

  Decision d;
  if (auto reasoning = get("reasoning")) d.reasoning.push_back(*reasoning);

  switch (kind) {
    case RequestKind::LeaderAction: {
      const auto action = get("action");
      if (!action) return fail("missing ACTION");
      const auto target_text = get("target");
      if (!target_text) return fail("missing TARGET");
      const auto target = parse_target(*target_text);
      if (!target) return fail("bad TARGET '" + *target_text + "'");
      const std::string a = lower(*action);
      if (a.find("accus") != std::string::npos) {
        d.action = act::Accuse{*target};
      } else if (a.find("question") != std::string::npos ||
                 a.find("ask") != std::string::npos) {
        auto text = get("text");
        if (!text) text = get("question");
        if (!text) return fail("question without TEXT");
        d.action = act::AskQuestion{*target, *text};
      } else {
        return fail("unknown ACTION '" + *action + "'");
      }
      break;
    }
    case RequestKind::Answer: {
      auto text = get("answer");
      if (!text) text = get("text");
      if (!text) return fail("missing ANSWER");
      d.action = act::Answer{*text};
      break;
    }
    case RequestKind::DayBallot: {
      auto vote = get("vote");
      if (!vote) vote = get("action");
      if (!vote) return fail("missing VOTE");
      const std::string v = lower(*vote);
      static const std::regex yes(R"(^(agree|yes|y)\b.*)");
      static const std::regex no(R"(^(disagree|no|n)\b.*)");
      if (std::regex_match(v, yes)) {
        d.action = act::DayBallot{true};
      } else if (std::regex_match(v, no)) {
        d.action = act::DayBallot{false};
      } else {
        return fail("bad VOTE '" + *vote + "'");
      }
      break;
    }
    case RequestKind::SpyGuess: {
      const auto location = get("location");
      if (!location) return fail("missing LOCATION");
      const auto certainty = get("certainty");
      if (!certainty) return fail("missing CERTAINTY");
      static const std::regex num(R"(^(-?\d+)(\s*/\s*10)?\s*\.?$)");
      std::smatch m;
      if (!std::regex_match(*certainty, m, num)) {
        return fail("CERTAINTY is not an integer: '" + *certainty + "'");
      }
      const long c = std::stol(m[1].str());
      if (c < 0 || c > 10) {
        return fail("CERTAINTY out of range: " + std::to_string(c));
      }
      d.action = act::SpyGuess{*location, static_cast<int>(c)};
      break;
    }
    case RequestKind::FinalBallot: {
      auto vote = get("vote");
      if (!vote) vote = get("target");
      if (!vote) return fail("missing VOTE");
      const auto target = parse_target(*vote);
      if (!target) return fail("bad VOTE '" + *vote + "'");
      d.action = act::FinalBallot{*target};
      break;
    }
  }
  r.decision = std::move(d);
  return r;
}

std::string check_decision(const Decision& d, const Observation& obs) {
  auto seat_ok = [&](PlayerId t) -> std::string {
    if (t < 0 || t >= obs.num_players) return player_name(t) + " is not at the table";
    if (t == obs.self) return "cannot target yourself";
    return {};
  };
  if (obs.request && kind_of(d.action) != *obs.request) {
    return "decision answers " + std::string(to_string(kind_of(d.action))) +
           " but " + std::string(to_string(*obs.request)) + " was requested";
  }
  return std::visit(
      [&](const auto& a) -> std::string {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, act::AskQuestion>) {
          if (a.text.empty()) return "empty question";
          return seat_ok(a.target);
        } else if constexpr (std::is_same_v<T, act::Accuse> ||
                             std::is_same_v<T, act::FinalBallot>) {
          return seat_ok(a.target);
        } else if constexpr (std::is_same_v<T, act::Answer>) {
          return a.text.empty() ? "empty answer" : "";
        } else if constexpr (std::is_same_v<T, act::SpyGuess>) {
          if (a.location_text.empty()) return "empty location";
          if (a.certainty < 0 || a.certainty > 10) return "certainty out of range";
          return {};
        } else {
          return {};
        }
      },
      d.action);
}

namespace {

std::vector<ChatMessage> sanitizer_prompt(const std::string& raw, RequestKind kind,
                                          const Observation& obs) {
  return {{"system",
           "Rewrite the player's reply into the labeled format below. Keep its "
           "meaning, do not add anything, and output only the labeled lines.\n" +
               format_instructions(kind, obs)},
          {"user", raw}};
}

}  // namespace

AgentReply remote_decide(Gateway& gateway, const PromptTemplateSet& templates,
                         const Observation& obs, RequestKind kind) {
  AgentReply reply;
  std::vector<ChatMessage> messages;
  try {
    messages = render_prompt(kind, obs, templates);
  } catch (const std::exception& e) {
    reply.refusal = std::string("prompt: ") + e.what();
    return reply;
  }
  const int budget = gateway.config().max_retries + 1;
  std::string last_error;
  for (int i = 0; i < budget; ++i) {
    std::string raw;
    try {
      raw = gateway.complete(messages);
    } catch (const std::exception& e) {
      reply.refusal = std::string("endpoint: ") + e.what();
      return reply;
    }
    reply.raw_completions.push_back(raw);
    ParseResult parsed = parse_decision(raw, kind);
    if (!parsed.ok() && gateway.sanitizer()) {
      try {
        std::string fixed = gateway.sanitizer()->complete(sanitizer_prompt(raw, kind, obs));
        reply.raw_completions.push_back(fixed);
        parsed = parse_decision(fixed, kind);
      } catch (const std::exception& e) {
        parsed.error += std::string("; sanitizer: ") + e.what();
      }
    }
    if (parsed.ok()) {
      const std::string why = check_decision(*parsed.decision, obs);
      if (why.empty()) {
        reply.decision = std::move(parsed.decision);
        return reply;
      }
      last_error = why;
    } else {
      last_error = parsed.error;
    }
  }
  reply.refusal = "no usable decision after " + std::to_string(budget) +
                  " completion(s): " + last_error;
  return reply;
}

}  // namespace spygame
