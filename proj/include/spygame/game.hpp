#pragma once

// SpyGame rules as a deterministic, event-sourced state machine.
//
// Every transition is expressed as a list of events; the state after a
// transition is the fold of those events through apply_event(). Replaying
// a recorded event list therefore reproduces the state exactly.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "spygame/decision.hpp"
#include "spygame/events.hpp"
#include "spygame/types.hpp"

namespace spygame {

enum class Phase {
  AwaitLeaderAction,
  AwaitAnswer,
  AwaitDayVotes,
  AwaitSpyGuess,
  AwaitFinalVotes,
  Ended,
};

std::string_view to_string(Phase phase);

struct PendingAccusation {
  PlayerId accuser = 0;
  PlayerId accused = 0;
  bool operator==(const PendingAccusation&) const = default;
};

struct GameState {
  GameConfig config;
  Assignment assignment;
  Phase phase = Phase::AwaitLeaderAction;
  int turn = 1;
  PlayerId leader = 0;
  // Seat that must answer the open question.
  std::optional<PlayerId> questioned;
  std::optional<PendingAccusation> pending_accusation;
  // Leader of the next turn, fixed once this turn's question or accusation
  // resolves.
  std::optional<PlayerId> next_leader;
  std::vector<ev::DayVoteBallot> day_ballots;
  std::vector<ev::FinalVoteBallot> final_ballots;
  std::vector<GameEvent> transcript;
  std::optional<Outcome> outcome;
  std::uint64_t next_seq = 1;

  bool operator==(const GameState&) const = default;

  bool ended() const { return phase == Phase::Ended; }
  bool is_spy(PlayerId seat) const { return seat == assignment.spy_seat; }
};

struct Transition {
  GameState state;
  std::vector<GameEvent> events;
};

/// Seeds the spy seat, first leader and citizen characters from `rng_seed`.
Assignment deal(const GameConfig& config, const LocationCard& location,
                std::uint64_t rng_seed);

GameState init_game(const GameConfig& config, const Assignment& assignment);

/// Throws ConfigError if the assignment does not fit the config.
void validate_assignment(const GameConfig& config, const Assignment& assignment);

/// Seat whose decision the engine waits for. Throws ProtocolError if ended.
PlayerId pending_actor(const GameState& state);
RequestKind pending_request(const GameState& state);

/// Seats that vote in the open day vote, in ballot order.
std::vector<PlayerId> day_voters(const GameState& state);

/// Applies `decision` taken by `actor`. Pure: equal inputs give equal results.
/// Throws ProtocolError naming the violated rule.
Transition advance(const GameState& state, PlayerId actor,
                   const Decision& decision);

/// Ends the game with cause Aborted (an agent refused or misbehaved).
Transition abort_game(const GameState& state, std::string detail);

/// Appends a sidecar event (raw model output). Game logic is unaffected.
Transition record_sidecar(const GameState& state, ev::RawCompletion raw);

/// The reducer. Folds one event into the state without validating it.
GameState apply_event(GameState state, const GameEvent& event);

/// Final-vote resolution: the spy wins only when a single citizen holds the
/// strict maximum. Throws ProtocolError unless there is exactly one ballot
/// per seat.
Outcome decide_winner(const std::vector<ev::FinalVoteBallot>& ballots,
                      PlayerId spy_seat, int num_players);

/// True when the spy holds or shares the maximum tally.
bool spy_holds_max(const std::vector<ev::FinalVoteBallot>& ballots,
                   PlayerId spy_seat);

enum class Role { Spy, Citizen };

struct Observation {
  PlayerId self = 0;
  int num_players = 0;
  int turn = 1;
  int final_turn = 0;
  int guess_start_turn = 0;
  int certainty_threshold = 0;
  Role role = Role::Citizen;
  // Citizen-only identity. Absent for the spy.
  std::optional<LocationCard> location;
  std::optional<std::string> character;
  std::vector<GameEvent> public_transcript;
  std::optional<RequestKind> request;
  // Accusation under vote, when the request is a day ballot.
  std::optional<PendingAccusation> accusation;

  bool operator==(const Observation&) const = default;
};

/// What `player` may see. Hides the spy seat from citizens, the location from
/// the spy, secret guesses, other players' reasoning, raw completions and any
/// ballot whose vote has not closed (or, under BallotDisclosure::AtGameEnd,
/// any ballot before the game ends).
Observation observation_for(const GameState& state, PlayerId player);

}  // namespace spygame
