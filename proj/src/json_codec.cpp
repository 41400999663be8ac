#include "spygame/json_codec.hpp"

namespace spygame {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const Json& field(const Json& j, const char* name) {
  if (!j.is_object()) throw SchemaError(0, name, "expected an object");
  const auto it = j.find(name);
  if (it == j.end()) throw SchemaError(0, name, "missing");
  return *it;
}

std::int64_t get_int(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_integer()) throw SchemaError(0, name, "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t get_u64(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw SchemaError(0, name, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

PlayerId get_seat(const Json& j, const char* name) {
  const auto v = get_int(j, name);
  if (v < 0 || v > 1000) throw SchemaError(0, name, "seat out of range");
  return static_cast<PlayerId>(v);
}

bool get_bool(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_boolean()) throw SchemaError(0, name, "expected a boolean");
  return v.get<bool>();
}

std::string get_string(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_string()) throw SchemaError(0, name, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> get_strings(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_array()) throw SchemaError(0, name, "expected an array");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) throw SchemaError(0, name, "expected strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

int get_certainty(const Json& j) {
  const auto c = get_int(j, "certainty");
  if (c < 0 || c > 10) {
    throw SchemaError(0, "certainty",
                      "must lie in [0, 10], got " + std::to_string(c));
  }
  return static_cast<int>(c);
}

template <typename F>
auto with_field_context(const char* name, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw SchemaError(0, name, e.what());
  }
}

}  // namespace

Json to_json(const LocationCard& card) {
  Json j;
  j["name"] = card.name;
  j["aliases"] = card.aliases;
  j["characters"] = card.characters;
  return j;
}

LocationCard card_from_json(const Json& j) {
  LocationCard card;
  card.name = get_string(j, "name");
  card.aliases = j.contains("aliases") ? get_strings(j, "aliases")
                                       : std::vector<std::string>{};
  card.characters = get_strings(j, "characters");
  return card;
}

Json to_json(const GameConfig& c, bool include_deck) {
  Json j;
  j["num_players"] = c.num_players;
  j["certainty_threshold"] = c.certainty_threshold;
  j["final_turn"] = c.final_turn;
  j["guess_start_turn"] = c.guess_start_turn;
  j["seed"] = c.seed;
  j["vote_sources"] = to_string(c.vote_sources);
  j["ballot_disclosure"] = to_string(c.ballot_disclosure);
  if (include_deck) {
    Json deck = Json::array();
    for (const auto& card : c.location_deck) deck.push_back(to_json(card));
    j["location_deck"] = std::move(deck);
  }
  return j;
}

GameConfig config_from_json(const Json& j) {
  GameConfig c;
  if (!j.is_object()) throw SchemaError(0, "config", "expected an object");
  if (j.contains("num_players")) {
    c.num_players = static_cast<int>(get_int(j, "num_players"));
  }
  if (j.contains("certainty_threshold")) {
    c.certainty_threshold = static_cast<int>(get_int(j, "certainty_threshold"));
  }
  if (j.contains("final_turn")) {
    c.final_turn = static_cast<int>(get_int(j, "final_turn"));
  }
  if (j.contains("guess_start_turn")) {
    c.guess_start_turn = static_cast<int>(get_int(j, "guess_start_turn"));
  }
  if (j.contains("seed")) c.seed = get_u64(j, "seed");
  if (j.contains("vote_sources")) {
    c.vote_sources = with_field_context("vote_sources", [&] {
      return vote_sources_from_string(get_string(j, "vote_sources"));
    });
  }
  if (j.contains("ballot_disclosure")) {
    c.ballot_disclosure = with_field_context("ballot_disclosure", [&] {
      return ballot_disclosure_from_string(get_string(j, "ballot_disclosure"));
    });
  }
  if (j.contains("location_deck")) {
    const Json& deck = field(j, "location_deck");
    if (!deck.is_array()) {
      throw SchemaError(0, "location_deck", "expected an array");
    }
    for (const auto& card : deck) c.location_deck.push_back(card_from_json(card));
  }
  return c;
}

Json to_json(const Assignment& a) {
  Json j;
  j["location"] = to_json(a.location);
  j["spy_seat"] = a.spy_seat;
  Json chars = Json::object();
  for (const auto& [seat, name] : a.character_of) {
    chars[std::to_string(seat)] = name;
  }
  j["character_of"] = std::move(chars);
  j["first_leader"] = a.first_leader;
  return j;
}

Assignment assignment_from_json(const Json& j) {
  Assignment a;
  a.location = card_from_json(field(j, "location"));
  a.spy_seat = get_seat(j, "spy_seat");
  const Json& chars = field(j, "character_of");
  if (!chars.is_object()) {
    throw SchemaError(0, "character_of", "expected an object");
  }
  for (const auto& [key, value] : chars.items()) {
    if (!value.is_string()) {
      throw SchemaError(0, "character_of", "expected string values");
    }
    try {
      a.character_of[std::stoi(key)] = value.get<std::string>();
    } catch (const std::logic_error&) {
      throw SchemaError(0, "character_of", "keys must be seat numbers");
    }
  }
  a.first_leader = get_seat(j, "first_leader");
  return a;
}

Json to_json(const Outcome& o) {
  Json j;
  j["winner"] = to_string(o.winner);
  j["cause"] = to_string(o.cause);
  return j;
}

Outcome outcome_from_json(const Json& j) {
  Outcome o;
  o.winner = with_field_context(
      "winner", [&] { return winner_from_string(get_string(j, "winner")); });
  o.cause = with_field_context(
      "cause", [&] { return end_cause_from_string(get_string(j, "cause")); });
  if (spy_wins_by(o.cause) != (o.winner == Winner::Spy)) {
    throw SchemaError(0, "winner", "winner does not match the end cause");
  }
  return o;
}

Json to_json(const GameEvent& e) {
  Json j;
  j["seq"] = e.seq;
  j["type"] = event_tag(e.body);
  std::visit(overloaded{
                 [&](const ev::TurnStart& t) {
                   j["turn"] = t.turn;
                   j["leader"] = t.leader;
                 },
                 [&](const ev::Reasoning& r) {
                   j["player"] = r.player;
                   j["text"] = r.text;
                 },
                 [&](const ev::Question& q) {
                   j["asker"] = q.asker;
                   j["target"] = q.target;
                   j["text"] = q.text;
                 },
                 [&](const ev::Answer& a) {
                   j["responder"] = a.responder;
                   j["text"] = a.text;
                 },
                 [&](const ev::Accusation& a) {
                   j["accuser"] = a.accuser;
                   j["accused"] = a.accused;
                 },
                 [&](const ev::DayVoteBallot& b) {
                   j["voter"] = b.voter;
                   j["agree"] = b.agree;
                 },
                 [&](const ev::DayVoteResult& r) { j["unanimous"] = r.unanimous; },
                 [&](const ev::SecretGuess& g) {
                   j["location_text"] = g.location_text;
                   j["certainty"] = g.certainty;
                 },
                 [&](const ev::GuessAnnounced& g) {
                   j["location_text"] = g.location_text;
                   j["correct"] = g.correct;
                 },
                 [&](const ev::FinalVoteBallot& b) {
                   j["voter"] = b.voter;
                   j["target"] = b.target;
                 },
                 [&](const ev::GameEnd& g) {
                   j["winner"] = to_string(g.winner);
                   j["cause"] = to_string(g.cause);
                   if (!g.detail.empty()) j["detail"] = g.detail;
                 },
                 [&](const ev::RawCompletion& r) {
                   j["player"] = r.player;
                   j["text"] = r.text;
                 },
             },
             e.body);
  return j;
}

GameEvent event_from_json(const Json& j) {
  GameEvent e;
  e.seq = get_u64(j, "seq");
  const std::string type = get_string(j, "type");
  if (type == "TurnStart") {
    const auto turn = get_int(j, "turn");
    if (turn < 1) throw SchemaError(0, "turn", "must be at least 1");
    e.body = ev::TurnStart{static_cast<int>(turn), get_seat(j, "leader")};
  } else if (type == "Reasoning") {
    e.body = ev::Reasoning{get_seat(j, "player"), get_string(j, "text")};
  } else if (type == "Question") {
    e.body = ev::Question{get_seat(j, "asker"), get_seat(j, "target"),
                          get_string(j, "text")};
  } else if (type == "Answer") {
    e.body = ev::Answer{get_seat(j, "responder"), get_string(j, "text")};
  } else if (type == "Accusation") {
    e.body = ev::Accusation{get_seat(j, "accuser"), get_seat(j, "accused")};
  } else if (type == "DayVoteBallot") {
    e.body = ev::DayVoteBallot{get_seat(j, "voter"), get_bool(j, "agree")};
  } else if (type == "DayVoteResult") {
    e.body = ev::DayVoteResult{get_bool(j, "unanimous")};
  } else if (type == "SecretGuess") {
    e.body = ev::SecretGuess{get_string(j, "location_text"), get_certainty(j)};
  } else if (type == "GuessAnnounced") {
    e.body = ev::GuessAnnounced{get_string(j, "location_text"),
                                get_bool(j, "correct")};
  } else if (type == "FinalVoteBallot") {
    e.body = ev::FinalVoteBallot{get_seat(j, "voter"), get_seat(j, "target")};
  } else if (type == "GameEnd") {
    const Outcome o = outcome_from_json(j);
    e.body = ev::GameEnd{o.winner, o.cause,
                         j.contains("detail") ? get_string(j, "detail") : ""};
  } else if (type == "RawCompletion") {
    e.body = ev::RawCompletion{get_seat(j, "player"), get_string(j, "text")};
  } else {
    throw SchemaError(0, "type", "unknown event tag '" + type + "'");
  }
  return e;
}

Json to_json(const GameState& s) {
  Json j;
  j["config"] = to_json(s.config, true);
  j["assignment"] = to_json(s.assignment);
  j["phase"] = to_string(s.phase);
  j["turn"] = s.turn;
  j["leader"] = s.leader;
  j["questioned"] = s.questioned ? Json(*s.questioned) : Json(nullptr);
  if (s.pending_accusation) {
    j["pending_accusation"] = Json{{"accuser", s.pending_accusation->accuser},
                                   {"accused", s.pending_accusation->accused}};
  } else {
    j["pending_accusation"] = nullptr;
  }
  j["next_leader"] = s.next_leader ? Json(*s.next_leader) : Json(nullptr);
  Json day = Json::array();
  for (const auto& b : s.day_ballots) day.push_back({b.voter, b.agree});
  j["day_ballots"] = std::move(day);
  Json fin = Json::array();
  for (const auto& b : s.final_ballots) fin.push_back({b.voter, b.target});
  j["final_ballots"] = std::move(fin);
  Json transcript = Json::array();
  for (const auto& e : s.transcript) transcript.push_back(to_json(e));
  j["transcript"] = std::move(transcript);
  j["outcome"] = s.outcome ? to_json(*s.outcome) : Json(nullptr);
  j["next_seq"] = s.next_seq;
  return j;
}

std::string_view event_tag(const EventBody& body) {
  static constexpr std::string_view kTags[] = {
      "TurnStart",     "Reasoning",      "Question",       "Answer",
      "Accusation",    "DayVoteBallot",  "DayVoteResult",  "SecretGuess",
      "GuessAnnounced", "FinalVoteBallot", "GameEnd",       "RawCompletion",
  };
  return kTags[body.index()];
}

}  // namespace spygame
