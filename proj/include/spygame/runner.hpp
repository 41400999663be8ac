#pragma once

// Experiment orchestration: a matrix of spy agents x citizen teams x
// locations x trials, each game seeded independently and logged to its own
// file.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spygame/agents.hpp"
#include "spygame/game_log.hpp"
#include "spygame/llm_gateway.hpp"

namespace spygame {

struct SpySpec {
  std::string id;
  // Scripted spies: a preset name ("mute", "oracle", "echo", "gambler").
  std::string preset;
  // Remote spies.
  std::optional<EndpointConfig> endpoint;
};

struct CitizenSpec {
  std::string id;
  CitizenProfile profile;
  std::optional<EndpointConfig> endpoint;
};

struct ExperimentConfig {
  std::string name = "experiment";
  GameConfig game;  // location_deck is the experiment's deck
  std::vector<std::string> locations;  // empty means the whole deck
  std::vector<SpySpec> spies;
  std::vector<CitizenSpec> citizens;
  int trials = 3;
  std::uint64_t base_seed = 0;
  int parallelism = 1;
  std::filesystem::path output_dir = "runs";
  bool fsync = true;
};

void validate_experiment(const ExperimentConfig& config);

/// Relative output_dir values are resolved against `base_dir`.
ExperimentConfig experiment_from_json(const Json& j,
                                      const std::filesystem::path& base_dir = {});
Json to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// 7 locations x {strong, weak} x {oracle, echo, mute, gambler} x 3 trials.
ExperimentConfig default_experiment();

struct ScheduledGame {
  std::string game_id;
  std::size_t spy = 0;      // index into config.spies
  std::size_t citizens = 0; // index into config.citizens
  std::string location;
  int trial = 0;
  std::uint64_t seed = 0;
};

/// Stable per-game seed; any single game can be rerun on its own.
std::uint64_t game_seed(std::uint64_t base_seed, const std::string& spy_id,
                        const std::string& citizen_id, const std::string& location,
                        int trial);

/// Pure function of the config; ordered by location, citizens, spy, trial.
std::vector<ScheduledGame> schedule(const ExperimentConfig& config);

/// Seats' agents for one game, indexed by seat.
using AgentTable = std::vector<std::unique_ptr<Agent>>;

/// Plays one game to the end. Raw completions are logged as sidecar events
/// before the decision is applied. A refusal, an agent exception or an
/// illegal decision aborts the game. When `writer` is set, every event is
/// appended as it happens and the outcome line is written at the end; the
/// caller commits.
GameRecord play_game(const RecordHeader& header, AgentTable& agents,
                     GameLogWriter* writer = nullptr);

struct GameSummary {
  std::string game_id;
  std::uint64_t seed = 0;
  std::string status;  // "completed", "aborted", "skipped", "failed"
  std::string outcome; // cause, when the game ended
  std::filesystem::path path;
  std::string error;
};

struct RunSummary {
  std::size_t scheduled = 0;
  std::size_t completed = 0;
  std::size_t aborted = 0;  // ended with cause Aborted, or failed to log
  std::size_t skipped = 0;  // unreachable endpoint or run stopped early
  std::vector<GameSummary> games;
  std::vector<std::string> errors;
  double wall_seconds = 0;
  bool stopped_early = false;
};

Json to_json(const RunSummary& summary);

struct RunOptions {
  // Skip the endpoint reachability probe.
  bool skip_preflight = false;
  // Keep existing complete logs instead of replaying those games.
  bool resume = true;
  // Test hook: builds the transport for an endpoint (default HTTP).
  std::function<std::shared_ptr<Transport>(const EndpointConfig&)> transport_factory;
};

/// Runs every scheduled game with at most config.parallelism workers and
/// writes run_summary.json next to the logs.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Header for one scheduled game (assignment dealt from its seed).
RecordHeader make_header(const ExperimentConfig& config, const ScheduledGame& game);

std::string utc_timestamp();

}  // namespace spygame
