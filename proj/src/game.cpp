#include "spygame/game.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "spygame/matching.hpp"
#include "spygame/rng.hpp"

namespace spygame {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Collects events and folds each one into the state as it is emitted.
struct Emitter {
  GameState state;
  std::vector<GameEvent> events;

  void emit(EventBody body) {
    GameEvent e{state.next_seq, std::move(body)};
    state = apply_event(std::move(state), e);
    events.push_back(std::move(e));
  }

  Transition finish() && { return {std::move(state), std::move(events)}; }
};

void require_seat(const GameState& s, PlayerId seat, const char* what) {
  if (seat < 0 || seat >= s.config.num_players) {
    throw ProtocolError(std::string(what) + " must be a seat in [1, " +
                        std::to_string(s.config.num_players) + "], got " +
                        std::to_string(seat + 1));
  }
}

// Phase after a question is answered or a day vote fails.
Phase after_exchange_phase(const GameState& s) {
  if (s.turn >= s.config.guess_start_turn) return Phase::AwaitSpyGuess;
  if (s.turn >= s.config.final_turn) return Phase::AwaitFinalVotes;
  // A TurnStart event follows in the same transition.
  return Phase::AwaitLeaderAction;
}

// Starts the next turn, unless this was the final turn (the reducer has then
// already opened the final vote).
void close_turn(Emitter& em) {
  if (em.state.phase == Phase::AwaitSpyGuess ||
      em.state.phase == Phase::AwaitFinalVotes) {
    return;
  }
  em.emit(ev::TurnStart{em.state.turn + 1, em.state.next_leader.value()});
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::AwaitLeaderAction:
      return "AwaitLeaderAction";
    case Phase::AwaitAnswer:
      return "AwaitAnswer";
    case Phase::AwaitDayVotes:
      return "AwaitDayVotes";
    case Phase::AwaitSpyGuess:
      return "AwaitSpyGuess";
    case Phase::AwaitFinalVotes:
      return "AwaitFinalVotes";
    case Phase::Ended:
      return "Ended";
  }
  return "?";
}

Assignment deal(const GameConfig& config, const LocationCard& location,
                std::uint64_t rng_seed) {
  if (config.num_players < 3) throw ConfigError("num_players must be at least 3");
  validate_card(location, config.num_players);

  Rng rng(rng_seed);
  Assignment a;
  a.location = location;
  a.spy_seat = rng.uniform_int(0, config.num_players - 1);
  a.first_leader = rng.uniform_int(0, config.num_players - 1);

  std::vector<std::string> pool = location.characters;
  for (std::size_t i = pool.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(pool[i - 1], pool[j]);
  }
  std::size_t next = 0;
  for (PlayerId seat = 0; seat < config.num_players; ++seat) {
    if (seat == a.spy_seat) continue;
    a.character_of[seat] = pool[next++];
  }
  return a;
}

void validate_assignment(const GameConfig& config, const Assignment& a) {
  const int n = config.num_players;
  validate_card(a.location, n);
  if (a.spy_seat < 0 || a.spy_seat >= n) {
    throw ConfigError("spy seat out of range");
  }
  if (a.first_leader < 0 || a.first_leader >= n) {
    throw ConfigError("first leader out of range");
  }
  if (a.character_of.count(a.spy_seat) != 0) {
    throw ConfigError("the spy seat must not hold a character");
  }
  if (static_cast<int>(a.character_of.size()) != n - 1) {
    throw ConfigError("exactly one spy is required: " +
                      std::to_string(n - static_cast<int>(a.character_of.size())) +
                      " seats lack a character");
  }
  std::set<std::string> seen;
  for (const auto& [seat, character] : a.character_of) {
    if (seat < 0 || seat >= n) throw ConfigError("character seat out of range");
    if (std::find(a.location.characters.begin(), a.location.characters.end(),
                  character) == a.location.characters.end()) {
      throw ConfigError("character '" + character + "' is not on the card");
    }
    if (!seen.insert(character).second) {
      throw ConfigError("character '" + character + "' is dealt twice");
    }
  }
}

GameState init_game(const GameConfig& config, const Assignment& assignment) {
  validate_config(config);
  validate_assignment(config, assignment);
  GameState s;
  s.config = config;
  s.assignment = assignment;
  s.phase = Phase::AwaitLeaderAction;
  s.turn = 1;
  s.leader = assignment.first_leader;
  return s;
}

std::vector<PlayerId> day_voters(const GameState& s) {
  std::vector<PlayerId> voters;
  if (!s.pending_accusation) return voters;
  for (PlayerId seat = 0; seat < s.config.num_players; ++seat) {
    if (seat == s.pending_accusation->accuser ||
        seat == s.pending_accusation->accused) {
      continue;
    }
    voters.push_back(seat);
  }
  return voters;
}

PlayerId pending_actor(const GameState& s) {
  switch (s.phase) {
    case Phase::AwaitLeaderAction:
      return s.leader;
    case Phase::AwaitAnswer:
      return s.questioned.value();
    case Phase::AwaitDayVotes:
      return day_voters(s).at(s.day_ballots.size());
    case Phase::AwaitSpyGuess:
      return s.assignment.spy_seat;
    case Phase::AwaitFinalVotes:
      return static_cast<PlayerId>(s.final_ballots.size());
    case Phase::Ended:
      break;
  }
  throw ProtocolError("the game has ended; no decision is pending");
}

RequestKind pending_request(const GameState& s) {
  switch (s.phase) {
    case Phase::AwaitLeaderAction:
      return RequestKind::LeaderAction;
    case Phase::AwaitAnswer:
      return RequestKind::Answer;
    case Phase::AwaitDayVotes:
      return RequestKind::DayBallot;
    case Phase::AwaitSpyGuess:
      return RequestKind::SpyGuess;
    case Phase::AwaitFinalVotes:
      return RequestKind::FinalBallot;
    case Phase::Ended:
      break;
  }
  throw ProtocolError("the game has ended; no decision is pending");
}

GameState apply_event(GameState s, const GameEvent& e) {
  std::visit(
      overloaded{
          [&](const ev::TurnStart& t) {
            s.turn = t.turn;
            s.leader = t.leader;
            s.phase = Phase::AwaitLeaderAction;
            s.questioned.reset();
            s.pending_accusation.reset();
            s.next_leader.reset();
          },
          [&](const ev::Reasoning&) {},
          [&](const ev::Question& q) {
            s.questioned = q.target;
            s.phase = Phase::AwaitAnswer;
          },
          [&](const ev::Answer& a) {
            s.questioned.reset();
            s.next_leader = a.responder;
            s.phase = after_exchange_phase(s);
          },
          [&](const ev::Accusation& a) {
            s.pending_accusation = PendingAccusation{a.accuser, a.accused};
            s.day_ballots.clear();
            s.phase = Phase::AwaitDayVotes;
          },
          [&](const ev::DayVoteBallot& b) { s.day_ballots.push_back(b); },
          [&](const ev::DayVoteResult& r) {
            s.day_ballots.clear();
            if (!r.unanimous && s.pending_accusation) {
              s.next_leader = s.pending_accusation->accused;
              s.pending_accusation.reset();
              s.phase = after_exchange_phase(s);
            }
          },
          [&](const ev::SecretGuess& g) {
            if (g.certainty < s.config.certainty_threshold &&
                s.turn >= s.config.final_turn) {
              s.phase = Phase::AwaitFinalVotes;
            }
          },
          [&](const ev::GuessAnnounced&) {},
          [&](const ev::FinalVoteBallot& b) { s.final_ballots.push_back(b); },
          [&](const ev::GameEnd& g) {
            s.outcome = Outcome{g.winner, g.cause};
            s.phase = Phase::Ended;
          },
          [&](const ev::RawCompletion&) {},
      },
      e.body);
  s.transcript.push_back(e);
  s.next_seq = e.seq + 1;
  return s;
}

Transition advance(const GameState& state, PlayerId actor,
                   const Decision& decision) {
  if (state.ended()) throw ProtocolError("the game has ended");
  const PlayerId expected = pending_actor(state);
  if (actor != expected) {
    throw ProtocolError("wrong actor: waiting for " + player_name(expected) +
                        ", got " + player_name(actor));
  }
  const RequestKind want = pending_request(state);
  const RequestKind got = kind_of(decision.action);
  if (want != got) {
    throw ProtocolError("out-of-phase decision: expected " +
                        std::string(to_string(want)) + ", got " +
                        std::string(to_string(got)));
  }

  Emitter em{state, {}};
  for (const auto& r : decision.reasoning) em.emit(ev::Reasoning{actor, r});

  const GameConfig& cfg = state.config;
  std::visit(
      overloaded{
          [&](const act::AskQuestion& q) {
            require_seat(state, q.target, "question target");
            if (q.target == actor) {
              throw ProtocolError("a leader may not question themself");
            }
            if (q.text.empty()) throw ProtocolError("question text is empty");
            em.emit(ev::Question{actor, q.target, q.text});
          },
          [&](const act::Accuse& a) {
            require_seat(state, a.target, "accused");
            if (a.target == actor) {
              throw ProtocolError("a leader may not accuse themself");
            }
            em.emit(ev::Accusation{actor, a.target});
          },
          [&](const act::Answer& a) {
            if (a.text.empty()) throw ProtocolError("answer text is empty");
            em.emit(ev::Answer{actor, a.text});
            close_turn(em);
          },
          [&](const act::DayBallot& b) {
            em.emit(ev::DayVoteBallot{actor, b.agree});
            if (static_cast<int>(em.state.day_ballots.size()) <
                cfg.num_players - 2) {
              return;
            }
            const bool unanimous =
                std::all_of(em.state.day_ballots.begin(),
                            em.state.day_ballots.end(),
                            [](const ev::DayVoteBallot& x) { return x.agree; });
            const PlayerId accused = em.state.pending_accusation->accused;
            em.emit(ev::DayVoteResult{unanimous});
            if (unanimous) {
              const EndCause cause = accused == state.assignment.spy_seat
                                         ? EndCause::DayVoteSpyEliminated
                                         : EndCause::DayVoteCitizenEliminated;
              const Outcome o = outcome_for(cause);
              em.emit(ev::GameEnd{o.winner, o.cause, {}});
            } else {
              close_turn(em);
            }
          },
          [&](const act::SpyGuess& g) {
            if (g.certainty < 0 || g.certainty > 10) {
              throw ProtocolError("certainty must lie in [0, 10], got " +
                                  std::to_string(g.certainty));
            }
            em.emit(ev::SecretGuess{g.location_text, g.certainty});
            if (g.certainty >= cfg.certainty_threshold) {
              const bool correct =
                  match_location(g.location_text, state.assignment.location);
              em.emit(ev::GuessAnnounced{g.location_text, correct});
              const Outcome o = outcome_for(correct ? EndCause::GuessCorrect
                                                    : EndCause::GuessWrong);
              em.emit(ev::GameEnd{o.winner, o.cause, {}});
            } else if (em.state.phase != Phase::AwaitFinalVotes) {
              em.emit(ev::TurnStart{em.state.turn + 1,
                                    em.state.next_leader.value()});
            }
          },
          [&](const act::FinalBallot& b) {
            require_seat(state, b.target, "final vote target");
            if (b.target == actor) {
              throw ProtocolError("self-votes are rejected in the final vote");
            }
            em.emit(ev::FinalVoteBallot{actor, b.target});
            if (static_cast<int>(em.state.final_ballots.size()) ==
                cfg.num_players) {
              const Outcome o =
                  decide_winner(em.state.final_ballots,
                                state.assignment.spy_seat, cfg.num_players);
              em.emit(ev::GameEnd{o.winner, o.cause, {}});
            }
          },
      },
      decision.action);

  return std::move(em).finish();
}

Transition abort_game(const GameState& state, std::string detail) {
  if (state.ended()) throw ProtocolError("the game has ended");
  Emitter em{state, {}};
  em.emit(ev::GameEnd{Winner::Citizens, EndCause::Aborted, std::move(detail)});
  return std::move(em).finish();
}

Transition record_sidecar(const GameState& state, ev::RawCompletion raw) {
  Emitter em{state, {}};
  em.emit(std::move(raw));
  return std::move(em).finish();
}

Outcome decide_winner(const std::vector<ev::FinalVoteBallot>& ballots,
                      PlayerId spy_seat, int num_players) {
  if (static_cast<int>(ballots.size()) != num_players) {
    throw ProtocolError("final vote needs " + std::to_string(num_players) +
                        " ballots, got " + std::to_string(ballots.size()));
  }
  std::vector<int> tally(static_cast<std::size_t>(num_players), 0);
  std::vector<bool> voted(static_cast<std::size_t>(num_players), false);
  for (const auto& b : ballots) {
    if (b.voter < 0 || b.voter >= num_players || b.target < 0 ||
        b.target >= num_players) {
      throw ProtocolError("final ballot references an unknown seat");
    }
    if (voted[static_cast<std::size_t>(b.voter)]) {
      throw ProtocolError(player_name(b.voter) + " voted twice");
    }
    voted[static_cast<std::size_t>(b.voter)] = true;
    ++tally[static_cast<std::size_t>(b.target)];
  }
  const int top = *std::max_element(tally.begin(), tally.end());
  const auto holders = std::count(tally.begin(), tally.end(), top);
  const auto leader = static_cast<PlayerId>(
      std::find(tally.begin(), tally.end(), top) - tally.begin());
  if (holders == 1 && leader != spy_seat) {
    return outcome_for(EndCause::FinalVoteCitizenTopped);
  }
  return outcome_for(EndCause::FinalVoteSpyToppedOrTie);
}

bool spy_holds_max(const std::vector<ev::FinalVoteBallot>& ballots,
                   PlayerId spy_seat) {
  std::map<PlayerId, int> tally;
  for (const auto& b : ballots) ++tally[b.target];
  int top = 0;
  for (const auto& [seat, count] : tally) top = std::max(top, count);
  const auto it = tally.find(spy_seat);
  return top > 0 && it != tally.end() && it->second == top;
}

Observation observation_for(const GameState& s, PlayerId player) {
  if (player < 0 || player >= s.config.num_players) {
    throw ProtocolError("observation requested for an unknown seat");
  }
  Observation obs;
  obs.self = player;
  obs.num_players = s.config.num_players;
  obs.turn = s.turn;
  obs.final_turn = s.config.final_turn;
  obs.guess_start_turn = s.config.guess_start_turn;
  obs.certainty_threshold = s.config.certainty_threshold;
  if (s.is_spy(player)) {
    obs.role = Role::Spy;
  } else {
    obs.role = Role::Citizen;
    obs.location = s.assignment.location;
    obs.character = s.assignment.character_of.at(player);
  }

  // Votes run one at a time, so every day ballot before the latest result
  // belongs to a closed vote.
  std::size_t last_day_result = 0;
  bool any_result = false;
  for (std::size_t i = 0; i < s.transcript.size(); ++i) {
    if (s.transcript[i].is<ev::DayVoteResult>()) {
      last_day_result = i;
      any_result = true;
    }
  }
  const bool ended = s.ended();
  const bool disclose_closed =
      s.config.ballot_disclosure == BallotDisclosure::AtVoteClose;

  for (std::size_t i = 0; i < s.transcript.size(); ++i) {
    const GameEvent& e = s.transcript[i];
    bool visible = true;
    if (e.is<ev::SecretGuess>() || e.is<ev::RawCompletion>()) {
      visible = false;
    } else if (const auto* r = e.as<ev::Reasoning>()) {
      visible = r->player == player;
    } else if (e.is<ev::DayVoteBallot>()) {
      const bool closed = any_result && i < last_day_result;
      visible = ended || (disclose_closed && closed);
    } else if (e.is<ev::FinalVoteBallot>()) {
      visible = ended;
    }
    if (visible) obs.public_transcript.push_back(e);
  }

  if (!ended && pending_actor(s) == player) obs.request = pending_request(s);
  if (s.phase == Phase::AwaitDayVotes) obs.accusation = s.pending_accusation;
  return obs;
}

}  // namespace spygame
