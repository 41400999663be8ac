#pragma once

// Helpers shared by the unit suites and the acceptance binary: game builders
// and scripted corpora.

#include <atomic>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>
#include <vector>

#include "spygame/agents.hpp"
#include "spygame/deck.hpp"
#include "spygame/game.hpp"
#include "spygame/game_log.hpp"
#include "spygame/rng.hpp"
#include "spygame/runner.hpp"

namespace spygame::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("spygame-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<std::string> deck_names() {
  std::vector<std::string> names;
  for (const auto& c : default_deck()) names.push_back(c.name);
  return names;
}

inline LocationCard card(const std::string& name) { return *find_card(default_deck(), name); }

/// Header for a game played with the default deck.
inline RecordHeader make_test_header(GameConfig config, const std::string& location,
                                     std::uint64_t seed, const std::string& spy_id,
                                     const std::string& strength,
                                     const std::string& game_id = "") {
  if (config.location_deck.empty()) config.location_deck = default_deck();
  config.seed = seed;
  RecordHeader h;
  h.game_id = game_id.empty() ? "g" + std::to_string(seed) : game_id;
  h.experiment = "test";
  h.assignment = deal(config, card(location), combine_seed(seed, 1));
  config.location_deck.clear();
  h.config = config;
  h.spy_agent_id = spy_id;
  h.citizen_agent_id = strength;
  h.citizen_strength = strength;
  h.seeds = {{"game", seed}};
  h.started_at = "2024-01-01T00:00:00Z";
  return h;
}

inline AgentTable scripted_table(const RecordHeader& h, const SpyPolicy& spy,
                                 const CitizenProfile& citizens, std::uint64_t seed) {
  AgentTable agents(static_cast<std::size_t>(h.config.num_players));
  for (PlayerId s = 0; s < h.config.num_players; ++s) {
    const auto seat_seed = combine_seed(seed, 1000 + static_cast<std::uint64_t>(s));
    agents[static_cast<std::size_t>(s)] =
        s == h.assignment.spy_seat ? make_scripted_spy(spy, seat_seed)
                                   : make_scripted_citizen(citizens, seat_seed);
  }
  return agents;
}

inline GameRecord scripted_game(const GameConfig& config, const std::string& location,
                                std::uint64_t seed, const std::string& spy_preset,
                                const CitizenProfile& citizens,
                                const std::string& game_id = "") {
  const RecordHeader h =
      make_test_header(config, location, seed, spy_preset,
                       std::string(to_string(citizens.strength)), game_id);
  const SpyPolicy spy = spy_policy_preset(spy_preset, deck_names(), location);
  AgentTable agents = scripted_table(h, spy, citizens, seed);
  GameRecord r = play_game(h, agents);
  r.finished_at = "2024-01-01T00:00:01Z";
  return r;
}

/// A game with randomized rules, location, spy preset and citizen profile.
inline GameRecord random_scripted_game(std::uint64_t seed) {
  Rng rng(seed);
  GameConfig config = default_game_config();
  config.num_players = rng.uniform_int(4, 8);
  config.guess_start_turn = rng.uniform_int(2, 3);
  config.final_turn = rng.uniform_int(config.guess_start_turn, 9);
  config.certainty_threshold = rng.uniform_int(5, 10);
  config.vote_sources = rng.bernoulli(0.5) ? VoteSources::FinalAndDay : VoteSources::FinalOnly;
  config.ballot_disclosure =
      rng.bernoulli(0.5) ? BallotDisclosure::AtGameEnd : BallotDisclosure::AtVoteClose;
  const auto names = deck_names();
  const std::string location = names[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(names.size()) - 1))];
  static const char* presets[] = {"mute", "oracle", "echo", "gambler"};
  const std::string preset = presets[rng.uniform_int(0, 3)];
  CitizenProfile profile = rng.bernoulli(0.5)
                               ? strong_citizen_profile()
                               : weak_citizen_profile(rng.uniform01() * 0.6);
  profile.day_agree_probability = rng.uniform01();
  profile.accuse.accuse_probability = rng.uniform01() * 0.5;
  profile.accuse.min_turn = rng.uniform_int(1, 4);
  return scripted_game(config, location, seed, preset, profile,
                       "rand-" + std::to_string(seed));
}

inline std::vector<GameRecord> random_corpus(std::size_t n, std::uint64_t seed) {
  std::vector<GameRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_scripted_game(combine_seed(seed, i)));
  return out;
}

/// Leader asks the next seat, answers are bland, the spy never guesses, so
/// the game walks to the final vote.
inline GameState walk_to_final_vote(const GameConfig& config, const Assignment& a) {
  GameState s = init_game(config, a);
  while (s.phase != Phase::AwaitFinalVotes) {
    const PlayerId actor = pending_actor(s);
    Decision d;
    switch (pending_request(s)) {
      case RequestKind::LeaderAction:
        d.action = act::AskQuestion{(actor + 1) % config.num_players, "what do you do?"};
        break;
      case RequestKind::Answer:
        d.action = act::Answer{"nothing much"};
        break;
      case RequestKind::SpyGuess:
        d.action = act::SpyGuess{"nowhere", 0};
        break;
      default:
        throw std::logic_error("unexpected request on the way to the final vote");
    }
    s = advance(s, actor, d).state;
  }
  return s;
}

inline Assignment fixed_assignment(const GameConfig& config, PlayerId spy, PlayerId leader,
                                   const std::string& location = "airplane") {
  Assignment a = deal(config, card(location), 7);
  // Re-seat: move the dealt characters off the new spy seat.
  std::vector<std::string> chars;
  for (const auto& [seat, ch] : a.character_of) chars.push_back(ch);
  a.character_of.clear();
  a.spy_seat = spy;
  a.first_leader = leader;
  std::size_t k = 0;
  for (PlayerId s = 0; s < config.num_players; ++s) {
    if (s != spy) a.character_of[s] = chars[k++];
  }
  return a;
}

/// Agent backed by a plain function.
class FnAgent : public Agent {
 public:
  using Fn = std::function<Decision(const Observation&, RequestKind)>;
  explicit FnAgent(Fn fn) : fn_(std::move(fn)) {}
  AgentReply decide(const Observation& obs, RequestKind request) override {
    return AgentReply::of(fn_(obs, request));
  }

 private:
  Fn fn_;
};

enum class Ending { GuessRight, GuessWrong, DayCitizen, DaySpy, FinalVote };

/// A fully scripted 7-seat game: the spy sits in seat 6, seat 0 leads first
/// and the spy is never questioned. Every ending is forced at `end_turn`.
struct Scenario {
  std::string location = "airplane";
  Ending ending = Ending::FinalVote;
  int end_turn = 9;
  // A citizen names the location in the first answer.
  bool exposed = false;
  // A secret guess naming the location, below the announcement threshold.
  bool notice_quietly = false;
  // Final ballots indexed by voter.
  std::vector<PlayerId> final_targets;
  VoteSources vote_sources = VoteSources::FinalOnly;
  std::string spy_id = "scripted";
  std::string strength = "strong";
};

inline constexpr PlayerId kScenarioSpy = 6;

inline GameRecord scenario_game(const Scenario& sc, const std::string& game_id) {
  GameConfig config = default_game_config();
  config.vote_sources = sc.vote_sources;
  config.final_turn = sc.ending == Ending::FinalVote ? sc.end_turn : 9;
  RecordHeader h = make_test_header(config, sc.location, 1, sc.spy_id, sc.strength, game_id);
  h.assignment = fixed_assignment(config, kScenarioSpy, 0, sc.location);

  auto script = [sc](const Observation& o, RequestKind k) {
    Decision d;
    d.reasoning = {"scripted"};
    switch (k) {
      case RequestKind::LeaderAction: {
        if (o.turn == sc.end_turn && sc.ending == Ending::DaySpy) {
          d.action = act::Accuse{kScenarioSpy};
        } else if (o.turn == sc.end_turn && sc.ending == Ending::DayCitizen) {
          d.action = act::Accuse{o.self == 5 ? 4 : 5};
        } else {
          d.action = act::AskQuestion{(o.self + 1) % kScenarioSpy, "what is the weather like?"};
        }
        break;
      }
      case RequestKind::Answer:
        d.action = act::Answer{sc.exposed && o.turn == 1 ? "the " + sc.location + " is busy"
                                                         : "same as always"};
        break;
      case RequestKind::DayBallot:
        d.action = act::DayBallot{true};
        break;
      case RequestKind::SpyGuess: {
        const bool announce = o.turn == sc.end_turn && (sc.ending == Ending::GuessRight ||
                                                        sc.ending == Ending::GuessWrong);
        if (announce) {
          d.action = act::SpyGuess{
              sc.ending == Ending::GuessRight ? sc.location : std::string("moon base"), 10};
        } else if (sc.notice_quietly) {
          d.action = act::SpyGuess{sc.location, 3};
        } else {
          d.action = act::SpyGuess{"moon base", 1};
        }
        break;
      }
      case RequestKind::FinalBallot:
        d.action = act::FinalBallot{sc.final_targets.at(static_cast<std::size_t>(o.self))};
        break;
    }
    return d;
  };
  AgentTable agents;
  for (int s = 0; s < config.num_players; ++s) agents.push_back(std::make_unique<FnAgent>(script));
  GameRecord r = play_game(h, agents);
  r.finished_at = "2024-01-01T00:00:01Z";
  return r;
}

/// Final ballots where seats 0..2 pick the spy and the spy tops the vote 3-2-2.
inline std::vector<PlayerId> spy_topped_ballots() { return {6, 6, 6, 0, 0, 1, 1}; }
/// Final ballots with seat 0 alone on top and no vote on the spy.
inline std::vector<PlayerId> citizen_topped_ballots() { return {1, 0, 0, 0, 0, 0, 0}; }

inline std::vector<GameRecord> scenario_corpus(const std::vector<Scenario>& scenarios,
                                               const std::string& prefix) {
  std::vector<GameRecord> out;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    out.push_back(scenario_game(scenarios[i], prefix + "-" + std::to_string(i)));
  }
  return out;
}

/// 21 games against strong citizens: 13 right guesses, 3 wrong guesses,
/// 3 citizens voted out by day, one final vote the spy tops and one it
/// survives. Final ballots only.
inline std::vector<Scenario> strong_row_scenarios() {
  std::vector<Scenario> out;
  for (int i = 0; i < 13; ++i) out.push_back({.ending = Ending::GuessRight, .end_turn = 2 + i % 4});
  for (int i = 0; i < 3; ++i) out.push_back({.ending = Ending::GuessWrong, .end_turn = 3});
  for (int i = 0; i < 3; ++i) out.push_back({.ending = Ending::DayCitizen, .end_turn = 4});
  out.push_back({.ending = Ending::FinalVote, .end_turn = 9, .final_targets = spy_topped_ballots()});
  out.push_back(
      {.ending = Ending::FinalVote, .end_turn = 9, .final_targets = citizen_topped_ballots()});
  return out;
}

/// 14 games with an exposure: 13 right guesses, one wrong.
inline std::vector<Scenario> exposed_scenarios() {
  std::vector<Scenario> out;
  for (int i = 0; i < 14; ++i) {
    out.push_back({.ending = i < 13 ? Ending::GuessRight : Ending::GuessWrong,
                   .end_turn = 2,
                   .exposed = true,
                   .strength = "weak"});
  }
  return out;
}

/// 10 games, each lost to a unanimous day vote against the spy.
inline std::vector<Scenario> all_caught_scenarios() {
  std::vector<Scenario> out(10, Scenario{.ending = Ending::DaySpy, .end_turn = 3});
  return out;
}

}  // namespace spygame::testing
