#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spygame/types.hpp"

namespace spygame {

/// What the engine is waiting for from the acting seat.
enum class RequestKind { LeaderAction, Answer, DayBallot, SpyGuess, FinalBallot };

std::string_view to_string(RequestKind kind);
RequestKind request_kind_from_string(std::string_view s);

namespace act {

struct AskQuestion {
  PlayerId target = 0;
  std::string text;
  bool operator==(const AskQuestion&) const = default;
};

struct Accuse {
  PlayerId target = 0;
  bool operator==(const Accuse&) const = default;
};

struct Answer {
  std::string text;
  bool operator==(const Answer&) const = default;
};

struct DayBallot {
  bool agree = false;
  bool operator==(const DayBallot&) const = default;
};

struct SpyGuess {
  std::string location_text;
  int certainty = 0;
  bool operator==(const SpyGuess&) const = default;
};

struct FinalBallot {
  PlayerId target = 0;
  bool operator==(const FinalBallot&) const = default;
};

}  // namespace act

using Action = std::variant<act::AskQuestion, act::Accuse, act::Answer,
                            act::DayBallot, act::SpyGuess, act::FinalBallot>;

struct Decision {
  Action action;
  // Zero, one or two reasoning steps preceding the action.
  std::vector<std::string> reasoning;

  bool operator==(const Decision&) const = default;
};

/// The request kind a decision answers (questions and accusations are both
/// leader actions).
RequestKind kind_of(const Action& action);

}  // namespace spygame
