#include "spygame/types.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

#include "spygame/decision.hpp"
#include "spygame/matching.hpp"

namespace spygame {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s,
             const std::array<std::pair<E, std::string_view>, N>& table,
             std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  throw ConfigError("unknown " + std::string(what) + " '" + std::string(s) +
                    "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(
    E v, const std::array<std::pair<E, std::string_view>, N>& table) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::array<std::pair<Winner, std::string_view>, 2> kWinners{{
    {Winner::Spy, "spy"},
    {Winner::Citizens, "citizens"},
}};

constexpr std::array<std::pair<EndCause, std::string_view>, 7> kCauses{{
    {EndCause::DayVoteCitizenEliminated, "DayVoteCitizenEliminated"},
    {EndCause::DayVoteSpyEliminated, "DayVoteSpyEliminated"},
    {EndCause::GuessCorrect, "GuessCorrect"},
    {EndCause::GuessWrong, "GuessWrong"},
    {EndCause::FinalVoteCitizenTopped, "FinalVoteCitizenTopped"},
    {EndCause::FinalVoteSpyToppedOrTie, "FinalVoteSpyToppedOrTie"},
    {EndCause::Aborted, "Aborted"},
}};

constexpr std::array<std::pair<VoteSources, std::string_view>, 2> kVoteSources{{
    {VoteSources::FinalOnly, "final_only"},
    {VoteSources::FinalAndDay, "final_and_day"},
}};

constexpr std::array<std::pair<BallotDisclosure, std::string_view>, 2>
    kDisclosure{{
        {BallotDisclosure::AtGameEnd, "at_game_end"},
        {BallotDisclosure::AtVoteClose, "at_vote_close"},
    }};

constexpr std::array<std::pair<RequestKind, std::string_view>, 5> kRequests{{
    {RequestKind::LeaderAction, "leader_action"},
    {RequestKind::Answer, "answer"},
    {RequestKind::DayBallot, "day_ballot"},
    {RequestKind::SpyGuess, "spy_guess"},
    {RequestKind::FinalBallot, "final_ballot"},
}};

}  // namespace

std::string_view to_string(Winner w) { return enum_name(w, kWinners); }
std::string_view to_string(EndCause c) { return enum_name(c, kCauses); }
std::string_view to_string(VoteSources v) { return enum_name(v, kVoteSources); }
std::string_view to_string(BallotDisclosure d) {
  return enum_name(d, kDisclosure);
}
std::string_view to_string(RequestKind k) { return enum_name(k, kRequests); }

Winner winner_from_string(std::string_view s) {
  return parse_enum(s, kWinners, "winner");
}
EndCause end_cause_from_string(std::string_view s) {
  return parse_enum(s, kCauses, "end cause");
}
VoteSources vote_sources_from_string(std::string_view s) {
  return parse_enum(s, kVoteSources, "vote source mode");
}
BallotDisclosure ballot_disclosure_from_string(std::string_view s) {
  return parse_enum(s, kDisclosure, "ballot disclosure");
}
RequestKind request_kind_from_string(std::string_view s) {
  return parse_enum(s, kRequests, "request kind");
}

std::string player_name(PlayerId seat) {
  return "Player" + std::to_string(seat + 1);
}

void validate_card(const LocationCard& card, int num_players) {
  if (card.name.empty()) throw ConfigError("location card has an empty name");
  const std::string norm_name = normalize_location_text(card.name);
  for (const auto& alias : card.aliases) {
    if (alias.empty()) {
      throw ConfigError("location '" + card.name + "' has an empty alias");
    }
    if (normalize_location_text(alias) == norm_name) {
      throw ConfigError("location '" + card.name +
                        "' lists its own name as an alias");
    }
  }
  std::set<std::string> distinct(card.characters.begin(), card.characters.end());
  if (distinct.size() != card.characters.size()) {
    throw ConfigError("location '" + card.name + "' has duplicate characters");
  }
  if (std::any_of(card.characters.begin(), card.characters.end(),
                  [](const std::string& c) { return c.empty(); })) {
    throw ConfigError("location '" + card.name + "' has an empty character");
  }
  if (static_cast<int>(card.characters.size()) < num_players - 1) {
    throw ConfigError("location '" + card.name + "' has " +
                      std::to_string(card.characters.size()) +
                      " characters; need at least " +
                      std::to_string(num_players - 1));
  }
}

void validate_config(const GameConfig& config) {
  if (config.num_players < 3) {
    throw ConfigError("num_players must be at least 3");
  }
  if (config.certainty_threshold < 0 || config.certainty_threshold > 10) {
    throw ConfigError("certainty_threshold must lie in [0, 10]");
  }
  if (config.guess_start_turn < 2) {
    throw ConfigError("guess_start_turn must be at least 2");
  }
  if (config.final_turn < config.guess_start_turn) {
    throw ConfigError("final_turn must not precede guess_start_turn");
  }
  std::set<std::string> names;
  for (const auto& card : config.location_deck) {
    validate_card(card, config.num_players);
    if (!names.insert(card.name).second) {
      throw ConfigError("duplicate location '" + card.name + "' in deck");
    }
  }
}

RequestKind kind_of(const Action& action) {
  switch (action.index()) {
    case 0:
    case 1:
      return RequestKind::LeaderAction;
    case 2:
      return RequestKind::Answer;
    case 3:
      return RequestKind::DayBallot;
    case 4:
      return RequestKind::SpyGuess;
    default:
      return RequestKind::FinalBallot;
  }
}

}  // namespace spygame
