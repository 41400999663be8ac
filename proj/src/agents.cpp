#include "spygame/agents.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "spygame/matching.hpp"

namespace spygame {

namespace {

std::string fill(std::string_view tmpl, std::string_view key,
                 std::string_view value) {
  std::string out(tmpl);
  const std::string needle = "{" + std::string(key) + "}";
  for (auto pos = out.find(needle); pos != std::string::npos;
       pos = out.find(needle, pos + value.size())) {
    out.replace(pos, needle.size(), value);
  }
  return out;
}

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& options) {
  return options[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<int>(N) - 1))];
}

PlayerId random_other(Rng& rng, const Observation& obs) {
  PlayerId target = rng.uniform_int(0, obs.num_players - 2);
  if (target >= obs.self) ++target;
  return target;
}

constexpr std::array<std::string_view, 4> kPlainQuestions = {
    "{target}, what do you usually do around here?",
    "{target}, how busy does it get here?",
    "{target}, what would you wear on a normal day here?",
    "{target}, what do you like least about this place?",
};

constexpr std::array<std::string_view, 3> kLeakyQuestions = {
    "{target}, what is your favourite thing about the {location}?",
    "{target}, how often do you come to the {location}?",
    "{target}, what is the first thing you notice in the {location}?",
};

constexpr std::array<std::string_view, 3> kPlainAnswers = {
    "As a {character}, I spend most of my day here keeping busy.",
    "As a {character}, I would say it depends on the time of day.",
    "As a {character}, I mostly come here for work.",
};

constexpr std::array<std::string_view, 3> kLeakyAnswers = {
    "As a {character} at the {location}, I see a lot of people every day.",
    "As a {character}, I love this {location} more than anywhere else.",
    "As a {character}, the {location} feels like a second home to me.",
};

constexpr std::string_view kSafeAnswer =
    "I would rather not say too much, but I feel at home here.";

constexpr std::array<std::string_view, 3> kMimicAnswers = {
    "As a regular here, I mostly keep to my usual routine.",
    "As a regular here, I would say it depends on the day.",
    "As a regular here, I try not to stand out too much.",
};

constexpr std::array<std::string_view, 3> kGenericAnswers = {
    "Hard to say, it really depends on the day.",
    "I just try to get through the day like everyone else.",
    "Nothing special, honestly. Same as always.",
};

PlayerId argmax_seat(const std::vector<double>& scores, PlayerId self) {
  PlayerId best = self == 0 ? 1 : 0;
  for (PlayerId seat = 0; seat < static_cast<PlayerId>(scores.size()); ++seat) {
    if (seat == self) continue;
    if (scores[static_cast<std::size_t>(seat)] >
        scores[static_cast<std::size_t>(best)]) {
      best = seat;
    }
  }
  return best;
}

class ScriptedCitizen final : public Agent {
 public:
  ScriptedCitizen(CitizenProfile profile, std::uint64_t seed)
      : profile_(std::move(profile)), rng_(seed) {}

  AgentReply decide(const Observation& obs, RequestKind request) override {
    if (obs.role != Role::Citizen || !obs.location || !obs.character) {
      return AgentReply::refuse("scripted citizen seated without a character");
    }
    switch (request) {
      case RequestKind::LeaderAction:
        return leader_action(obs);
      case RequestKind::Answer:
        return answer(obs);
      case RequestKind::DayBallot:
        return day_ballot(obs);
      case RequestKind::FinalBallot: {
        const PlayerId target = top_suspect(obs);
        return AgentReply::of(
            {act::FinalBallot{target},
             {"My final vote goes to " + player_name(target) + "."}});
      }
      case RequestKind::SpyGuess:
        break;
    }
    return AgentReply::refuse("citizens do not guess the location");
  }

 private:
  PlayerId top_suspect(const Observation& obs) {
    std::vector<double> scores = base_suspicion(obs);
    const double amp = profile_.accuse.suspicion_noise;
    for (auto& s : scores) s += amp * (2.0 * rng_.uniform01() - 1.0);
    return argmax_seat(scores, obs.self);
  }

  bool leak_now() {
    return profile_.strength == CitizenStrength::Weak &&
           rng_.bernoulli(profile_.leak_probability);
  }

  // Strong citizens never name the location, whatever the template produced.
  std::string guard(std::string text, const Observation& obs,
                    std::string_view fallback) const {
    if (profile_.strength == CitizenStrength::Strong &&
        detect_exposure(text, *obs.location)) {
      return std::string(fallback);
    }
    return text;
  }

  AgentReply leader_action(const Observation& obs) {
    if (obs.turn >= profile_.accuse.min_turn &&
        rng_.bernoulli(profile_.accuse.accuse_probability)) {
      const PlayerId target = top_suspect(obs);
      return AgentReply::of(
          {act::Accuse{target},
           {player_name(target) + " sounds the least like one of us."}});
    }
    const PlayerId target = random_other(rng_, obs);
    const bool leak = leak_now();
    std::string text =
        leak ? fill(pick(rng_, kLeakyQuestions), "location", obs.location->name)
             : std::string(pick(rng_, kPlainQuestions));
    text = guard(fill(text, "target", player_name(target)), obs,
                 player_name(target) + ", what do you do here?");
    return AgentReply::of(
        {act::AskQuestion{target, std::move(text)},
         {"I will question " + player_name(target) + " to hear their answer."}});
  }

  AgentReply answer(const Observation& obs) {
    const bool leak = leak_now();
    std::string text =
        leak ? fill(pick(rng_, kLeakyAnswers), "location", obs.location->name)
             : std::string(pick(rng_, kPlainAnswers));
    text = guard(fill(text, "character", *obs.character), obs, kSafeAnswer);
    return AgentReply::of(
        {act::Answer{std::move(text)},
         {"I should answer in character as a " + *obs.character + "."}});
  }

  AgentReply day_ballot(const Observation& obs) {
    const PlayerId accused = obs.accusation ? obs.accusation->accused : -1;
    const PlayerId top = top_suspect(obs);
    bool agree = false;
    if (profile_.agree_on_top_suspect && accused == top) {
      agree = true;
    } else {
      agree = rng_.bernoulli(profile_.day_agree_probability);
    }
    return AgentReply::of(
        {act::DayBallot{agree},
         {agree ? "The accusation seems plausible." : "I am not convinced."}});
  }

  CitizenProfile profile_;
  Rng rng_;
};

class ScriptedSpy final : public Agent {
 public:
  ScriptedSpy(SpyPolicy policy, std::uint64_t seed)
      : policy_(std::move(policy)), rng_(seed) {}

  AgentReply decide(const Observation& obs, RequestKind request) override {
    switch (request) {
      case RequestKind::LeaderAction: {
        const PlayerId target = random_other(rng_, obs);
        if (obs.turn >= 2 && rng_.bernoulli(policy_.accuse_probability)) {
          return AgentReply::of(
              {act::Accuse{target},
               {"Pointing at " + player_name(target) + " deflects attention."}});
        }
        std::string text =
            fill(pick(rng_, kPlainQuestions), "target", player_name(target));
        return AgentReply::of(
            {act::AskQuestion{target, std::move(text)},
             {"A vague question keeps me hidden."}});
      }
      case RequestKind::Answer: {
        const std::string_view text = policy_.blend == BlendStyle::Mimic
                                          ? pick(rng_, kMimicAnswers)
                                          : pick(rng_, kGenericAnswers);
        return AgentReply::of(
            {act::Answer{std::string(text)}, {"Stay vague and blend in."}});
      }
      case RequestKind::DayBallot: {
        const bool agree = rng_.bernoulli(policy_.day_agree_probability);
        return AgentReply::of({act::DayBallot{agree},
                               {"Eliminating a citizen helps me."}});
      }
      case RequestKind::SpyGuess:
        return guess(obs);
      case RequestKind::FinalBallot: {
        const PlayerId target = random_other(rng_, obs);
        return AgentReply::of(
            {act::FinalBallot{target},
             {"Voting for " + player_name(target) + " spreads suspicion."}});
      }
    }
    return AgentReply::refuse("unknown request");
  }

 private:
  AgentReply guess(const Observation& obs) {
    const auto it = policy_.guess_schedule.find(obs.turn);
    const GuessPlan& plan =
        it != policy_.guess_schedule.end() ? it->second : policy_.default_plan;
    std::string text = plan.text;
    int certainty = plan.certainty;
    switch (plan.source) {
      case GuessSource::Fixed:
        break;
      case GuessSource::Oracle:
        text = policy_.oracle_location;
        break;
      case GuessSource::Random:
        text = policy_.candidate_locations[static_cast<std::size_t>(
            rng_.uniform_int(
                0, static_cast<int>(policy_.candidate_locations.size()) - 1))];
        break;
      case GuessSource::Echo: {
        const auto heard = last_heard(obs);
        if (heard) {
          text = *heard;
        } else {
          text = plan.text;
          certainty = plan.unheard_certainty;
        }
        break;
      }
    }
    return AgentReply::of(
        {act::SpyGuess{text, certainty},
         {"My best guess is " + text + " with certainty " +
          std::to_string(certainty) + "."}});
  }

  std::optional<std::string> last_heard(const Observation& obs) const {
    for (auto it = obs.public_transcript.rbegin();
         it != obs.public_transcript.rend(); ++it) {
      std::string_view text;
      if (const auto* q = it->as<ev::Question>()) {
        if (q->asker == obs.self) continue;
        text = q->text;
      } else if (const auto* a = it->as<ev::Answer>()) {
        if (a->responder == obs.self) continue;
        text = a->text;
      } else {
        continue;
      }
      for (const auto& candidate : policy_.candidate_locations) {
        if (contains_word_phrase(text, candidate)) return candidate;
      }
    }
    return std::nullopt;
  }

  SpyPolicy policy_;
  Rng rng_;
};

}  // namespace

std::string_view to_string(CitizenStrength s) {
  return s == CitizenStrength::Strong ? "strong" : "weak";
}

CitizenStrength citizen_strength_from_string(std::string_view s) {
  if (s == "strong") return CitizenStrength::Strong;
  if (s == "weak") return CitizenStrength::Weak;
  throw ConfigError("unknown citizen strength '" + std::string(s) + "'");
}

void validate_profile(const CitizenProfile& p) {
  if (p.leak_probability < 0.0 || p.leak_probability > 1.0) {
    throw ConfigError("leak_probability must lie in [0, 1]");
  }
  if (p.strength == CitizenStrength::Strong && p.leak_probability != 0.0) {
    throw ConfigError("strong citizens must have leak_probability 0");
  }
  if (p.day_agree_probability < 0.0 || p.day_agree_probability > 1.0 ||
      p.accuse.accuse_probability < 0.0 || p.accuse.accuse_probability > 1.0) {
    throw ConfigError("probabilities must lie in [0, 1]");
  }
  if (p.accuse.suspicion_noise < 0.0) {
    throw ConfigError("suspicion_noise must be non-negative");
  }
}

CitizenProfile strong_citizen_profile() { return {}; }

CitizenProfile weak_citizen_profile(double leak_probability) {
  CitizenProfile p;
  p.strength = CitizenStrength::Weak;
  p.leak_probability = leak_probability;
  validate_profile(p);
  return p;
}

CitizenProfile never_unanimous_profile(double leak_probability) {
  CitizenProfile p;
  p.strength =
      leak_probability > 0.0 ? CitizenStrength::Weak : CitizenStrength::Strong;
  p.leak_probability = leak_probability;
  p.accuse.accuse_probability = 0.0;
  p.day_agree_probability = 0.0;
  p.agree_on_top_suspect = false;
  validate_profile(p);
  return p;
}

void validate_policy(const SpyPolicy& policy) {
  auto check_plan = [&](const GuessPlan& plan) {
    if (plan.certainty < 0 || plan.certainty > 10 ||
        plan.unheard_certainty < 0 || plan.unheard_certainty > 10) {
      throw ConfigError("guess plan certainty must lie in [0, 10]");
    }
    if (plan.source == GuessSource::Oracle && policy.oracle_location.empty()) {
      throw ConfigError("oracle guess source needs the true location");
    }
    if ((plan.source == GuessSource::Echo ||
         plan.source == GuessSource::Random) &&
        policy.candidate_locations.empty()) {
      throw ConfigError("echo/random guess sources need candidate locations");
    }
  };
  for (const auto& [turn, plan] : policy.guess_schedule) {
    if (turn < 2) {
      throw ConfigError("guess schedule entries must start at turn 2 or later");
    }
    check_plan(plan);
  }
  check_plan(policy.default_plan);
  if (policy.accuse_probability < 0.0 || policy.accuse_probability > 1.0 ||
      policy.day_agree_probability < 0.0 ||
      policy.day_agree_probability > 1.0) {
    throw ConfigError("probabilities must lie in [0, 1]");
  }
}

SpyPolicy mute_spy_policy() {
  SpyPolicy p;
  p.name = "mute";
  p.default_plan = {GuessSource::Fixed, "unknown", 0, 0};
  return p;
}

SpyPolicy oracle_spy_policy(std::string true_location) {
  SpyPolicy p;
  p.name = "oracle";
  p.default_plan = {GuessSource::Oracle, "", 10, 0};
  p.oracle_location = std::move(true_location);
  return p;
}

SpyPolicy echo_spy_policy(std::vector<std::string> candidates) {
  SpyPolicy p;
  p.name = "echo";
  p.default_plan = {GuessSource::Echo, "unknown", 10, 0};
  p.candidate_locations = std::move(candidates);
  return p;
}

SpyPolicy gambler_spy_policy(std::vector<std::string> candidates) {
  SpyPolicy p;
  p.name = "gambler";
  p.guess_schedule = {
      {2, {GuessSource::Random, "", 4, 0}},
      {3, {GuessSource::Random, "", 6, 0}},
      {4, {GuessSource::Random, "", 8, 0}},
  };
  p.default_plan = {GuessSource::Random, "", 10, 0};
  p.blend = BlendStyle::Generic;
  p.accuse_probability = 0.2;
  p.candidate_locations = std::move(candidates);
  return p;
}

SpyPolicy spy_policy_preset(std::string_view name,
                            const std::vector<std::string>& candidates,
                            const std::string& true_location) {
  if (name == "mute") return mute_spy_policy();
  if (name == "oracle") return oracle_spy_policy(true_location);
  if (name == "echo") return echo_spy_policy(candidates);
  if (name == "gambler") return gambler_spy_policy(candidates);
  throw ConfigError("unknown spy policy preset '" + std::string(name) + "'");
}

std::unique_ptr<Agent> make_scripted_citizen(const CitizenProfile& profile,
                                             std::uint64_t seed) {
  validate_profile(profile);
  return std::make_unique<ScriptedCitizen>(profile, seed);
}

std::unique_ptr<Agent> make_scripted_spy(const SpyPolicy& policy,
                                         std::uint64_t seed) {
  validate_policy(policy);
  return std::make_unique<ScriptedSpy>(policy, seed);
}

std::vector<double> base_suspicion(const Observation& obs) {
  std::vector<double> scores(static_cast<std::size_t>(obs.num_players), 0.0);
  for (const auto& e : obs.public_transcript) {
    if (const auto* a = e.as<ev::Answer>()) {
      // Citizens answer in character; an answer that avoids it is a tell.
      if (!contains_word_phrase(a->text, "as a")) {
        scores[static_cast<std::size_t>(a->responder)] += 1.0;
      }
    } else if (const auto* acc = e.as<ev::Accusation>()) {
      scores[static_cast<std::size_t>(acc->accused)] += 0.5;
    }
  }
  scores[static_cast<std::size_t>(obs.self)] =
      -std::numeric_limits<double>::infinity();
  return scores;
}

}  // namespace spygame
