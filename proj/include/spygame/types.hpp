#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spygame {

/// Seat index in [0, num_players). Rendered externally as "Player<seat+1>".
using PlayerId = int;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A decision or event that the rules do not allow in the current state.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LocationCard {
  std::string name;
  std::vector<std::string> aliases;
  std::vector<std::string> characters;

  bool operator==(const LocationCard&) const = default;
};

/// Throws ConfigError unless the card can staff a game of `num_players`.
void validate_card(const LocationCard& card, int num_players);

enum class VoteSources { FinalOnly, FinalAndDay };

/// When individual day-vote ballots become visible to players.
enum class BallotDisclosure { AtGameEnd, AtVoteClose };

struct GameConfig {
  int num_players = 7;
  int certainty_threshold = 9;
  int final_turn = 9;
  int guess_start_turn = 2;
  std::vector<LocationCard> location_deck;
  std::uint64_t seed = 0;
  VoteSources vote_sources = VoteSources::FinalAndDay;
  BallotDisclosure ballot_disclosure = BallotDisclosure::AtGameEnd;

  bool operator==(const GameConfig&) const = default;
};

void validate_config(const GameConfig& config);

struct Assignment {
  LocationCard location;
  PlayerId spy_seat = 0;
  std::map<PlayerId, std::string> character_of;
  PlayerId first_leader = 0;

  bool operator==(const Assignment&) const = default;
};

enum class Winner { Spy, Citizens };

enum class EndCause {
  DayVoteCitizenEliminated,
  DayVoteSpyEliminated,
  GuessCorrect,
  GuessWrong,
  FinalVoteCitizenTopped,
  FinalVoteSpyToppedOrTie,
  Aborted,
};

struct Outcome {
  Winner winner = Winner::Citizens;
  EndCause cause = EndCause::Aborted;

  bool operator==(const Outcome&) const = default;
};

/// Spy wins exactly for the three spy-favourable causes.
constexpr bool spy_wins_by(EndCause cause) {
  return cause == EndCause::DayVoteCitizenEliminated ||
         cause == EndCause::GuessCorrect ||
         cause == EndCause::FinalVoteCitizenTopped;
}

inline Outcome outcome_for(EndCause cause) {
  return {spy_wins_by(cause) ? Winner::Spy : Winner::Citizens, cause};
}

std::string_view to_string(Winner w);
std::string_view to_string(EndCause c);
std::string_view to_string(VoteSources v);
std::string_view to_string(BallotDisclosure d);
Winner winner_from_string(std::string_view s);
EndCause end_cause_from_string(std::string_view s);
VoteSources vote_sources_from_string(std::string_view s);
BallotDisclosure ballot_disclosure_from_string(std::string_view s);

std::string player_name(PlayerId seat);

}  // namespace spygame
