#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "spygame/types.hpp"

namespace spygame {

namespace ev {

struct TurnStart {
  int turn = 0;
  PlayerId leader = 0;
  bool operator==(const TurnStart&) const = default;
};

struct Reasoning {
  PlayerId player = 0;
  std::string text;
  bool operator==(const Reasoning&) const = default;
};

struct Question {
  PlayerId asker = 0;
  PlayerId target = 0;
  std::string text;
  bool operator==(const Question&) const = default;
};

struct Answer {
  PlayerId responder = 0;
  std::string text;
  bool operator==(const Answer&) const = default;
};

struct Accusation {
  PlayerId accuser = 0;
  PlayerId accused = 0;
  bool operator==(const Accusation&) const = default;
};

struct DayVoteBallot {
  PlayerId voter = 0;
  bool agree = false;
  bool operator==(const DayVoteBallot&) const = default;
};

struct DayVoteResult {
  bool unanimous = false;
  bool operator==(const DayVoteResult&) const = default;
};

// Private to the spy and the log; never shown to other players.
struct SecretGuess {
  std::string location_text;
  int certainty = 0;
  bool operator==(const SecretGuess&) const = default;
};

struct GuessAnnounced {
  std::string location_text;
  bool correct = false;
  bool operator==(const GuessAnnounced&) const = default;
};

struct FinalVoteBallot {
  PlayerId voter = 0;
  PlayerId target = 0;
  bool operator==(const FinalVoteBallot&) const = default;
};

struct GameEnd {
  Winner winner = Winner::Citizens;
  EndCause cause = EndCause::Aborted;
  std::string detail;
  bool operator==(const GameEnd&) const = default;
};

/// Verbatim model output kept for auditing. Does not affect game logic.
struct RawCompletion {
  PlayerId player = 0;
  std::string text;
  bool operator==(const RawCompletion&) const = default;
};

}  // namespace ev

using EventBody =
    std::variant<ev::TurnStart, ev::Reasoning, ev::Question, ev::Answer,
                 ev::Accusation, ev::DayVoteBallot, ev::DayVoteResult,
                 ev::SecretGuess, ev::GuessAnnounced, ev::FinalVoteBallot,
                 ev::GameEnd, ev::RawCompletion>;

struct GameEvent {
  std::uint64_t seq = 0;
  EventBody body;

  bool operator==(const GameEvent&) const = default;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&body);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(body);
  }
};

/// Tag used in logs, e.g. "DayVoteBallot".
std::string_view event_tag(const EventBody& body);

inline bool is_sidecar(const GameEvent& e) { return e.is<ev::RawCompletion>(); }

}  // namespace spygame
