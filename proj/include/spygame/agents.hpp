#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spygame/decision.hpp"
#include "spygame/game.hpp"
#include "spygame/rng.hpp"

namespace spygame {

/// What an agent hands back for one request. Either a decision or a
/// refusal; raw model completions (if any) are kept for the log.
struct AgentReply {
  std::optional<Decision> decision;
  std::string refusal;
  std::vector<std::string> raw_completions;

  static AgentReply of(Decision d) { return {std::move(d), {}, {}}; }
  static AgentReply refuse(std::string why) {
    return {std::nullopt, std::move(why), {}};
  }
};

/// The uniform player contract. One instance plays one seat of one game at a
/// time.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentReply decide(const Observation& observation,
                            RequestKind request) = 0;
};

enum class CitizenStrength { Strong, Weak };

std::string_view to_string(CitizenStrength s);
CitizenStrength citizen_strength_from_string(std::string_view s);

struct AccusePolicy {
  // Citizens never accuse before this turn.
  int min_turn = 3;
  double accuse_probability = 0.25;
  // Amplitude of uniform noise added to every suspicion score.
  double suspicion_noise = 1.5;

  bool operator==(const AccusePolicy&) const = default;
};

struct CitizenProfile {
  CitizenStrength strength = CitizenStrength::Strong;
  // Per utterance; must be 0 for strong citizens.
  double leak_probability = 0.0;
  AccusePolicy accuse;
  // Probability of agreeing in a day vote on someone other than the top
  // suspect.
  double day_agree_probability = 0.5;
  bool agree_on_top_suspect = true;

  bool operator==(const CitizenProfile&) const = default;
};

void validate_profile(const CitizenProfile& profile);

CitizenProfile strong_citizen_profile();
CitizenProfile weak_citizen_profile(double leak_probability = 0.3);

/// Citizens that reject every accusation and never accuse; day votes can
/// then never be unanimous.
CitizenProfile never_unanimous_profile(double leak_probability = 0.0);

enum class GuessSource {
  Fixed,   // the plan's text
  Oracle,  // the true location, supplied at construction
  Echo,    // the latest candidate location heard in the public transcript
  Random,  // a uniformly random candidate location
};

struct GuessPlan {
  GuessSource source = GuessSource::Fixed;
  std::string text = "unknown";
  int certainty = 0;
  // Echo only: certainty used when nothing has been heard yet.
  int unheard_certainty = 0;

  bool operator==(const GuessPlan&) const = default;
};

enum class BlendStyle { Generic, Mimic };

struct SpyPolicy {
  std::string name = "custom";
  std::map<int, GuessPlan> guess_schedule;
  GuessPlan default_plan;
  BlendStyle blend = BlendStyle::Mimic;
  double accuse_probability = 0.0;
  double day_agree_probability = 1.0;
  // Locations the Echo and Random sources draw from.
  std::vector<std::string> candidate_locations;
  // Oracle source only; filled in by whoever builds the game.
  std::string oracle_location;

  bool operator==(const SpyPolicy&) const = default;
};

void validate_policy(const SpyPolicy& policy);

/// Presets used by the default experiment.
SpyPolicy mute_spy_policy();
SpyPolicy oracle_spy_policy(std::string true_location);
SpyPolicy echo_spy_policy(std::vector<std::string> candidates);
SpyPolicy gambler_spy_policy(std::vector<std::string> candidates);

/// Returns the preset called `name` ("mute", "oracle", "echo", "gambler").
SpyPolicy spy_policy_preset(std::string_view name,
                            const std::vector<std::string>& candidates,
                            const std::string& true_location);

std::unique_ptr<Agent> make_scripted_citizen(const CitizenProfile& profile,
                                             std::uint64_t seed);
std::unique_ptr<Agent> make_scripted_spy(const SpyPolicy& policy,
                                         std::uint64_t seed);

/// Suspicion scores a scripted citizen derives from the public transcript
/// (before noise). Exposed for tests.
std::vector<double> base_suspicion(const Observation& observation);

}  // namespace spygame
