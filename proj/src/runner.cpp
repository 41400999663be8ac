#include "spygame/runner.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "spygame/deck.hpp"
#include "spygame/rng.hpp"

namespace spygame {

namespace fs = std::filesystem;

namespace {

// Seed streams derived from one game seed.
constexpr std::uint64_t kDealStream = 1;
constexpr std::uint64_t kAgentStream = 1000;

bool is_preset(std::string_view name) {
  return name == "mute" || name == "oracle" || name == "echo" || name == "gambler";
}

CitizenProfile profile_from_json(const Json& j) {
  const auto strength =
      citizen_strength_from_string(j.value("strength", std::string("strong")));
  CitizenProfile p = strength == CitizenStrength::Strong
                         ? strong_citizen_profile()
                         : weak_citizen_profile(j.value("leak_probability", 0.3));
  p.day_agree_probability = j.value("day_agree_probability", p.day_agree_probability);
  p.agree_on_top_suspect = j.value("agree_on_top_suspect", p.agree_on_top_suspect);
  if (j.contains("accuse")) {
    const Json& a = j["accuse"];
    p.accuse.min_turn = a.value("min_turn", p.accuse.min_turn);
    p.accuse.accuse_probability = a.value("accuse_probability", p.accuse.accuse_probability);
    p.accuse.suspicion_noise = a.value("suspicion_noise", p.accuse.suspicion_noise);
  }
  return p;
}

Json profile_to_json(const CitizenProfile& p) {
  Json j;
  j["strength"] = std::string(to_string(p.strength));
  j["leak_probability"] = p.leak_probability;
  j["day_agree_probability"] = p.day_agree_probability;
  j["agree_on_top_suspect"] = p.agree_on_top_suspect;
  j["accuse"] = {{"min_turn", p.accuse.min_turn},
                 {"accuse_probability", p.accuse.accuse_probability},
                 {"suspicion_noise", p.accuse.suspicion_noise}};
  return j;
}

std::vector<std::string> deck_names(const std::vector<LocationCard>& deck) {
  std::vector<std::string> names;
  for (const auto& c : deck) names.push_back(c.name);
  return names;
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

void validate_experiment(const ExperimentConfig& c) {
  if (c.name.empty()) throw ConfigError("experiment name is empty");
  if (c.trials < 1) throw ConfigError("trials must be at least 1");
  if (c.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (c.spies.empty()) throw ConfigError("no spy agents configured");
  if (c.citizens.empty()) throw ConfigError("no citizen teams configured");
  if (c.game.location_deck.empty()) throw ConfigError("the deck is empty");
  validate_config(c.game);
  for (const auto& loc : c.locations) {
    if (!find_card(c.game.location_deck, loc)) {
      throw ConfigError("location '" + loc + "' is not in the deck");
    }
  }
  std::set<std::string> ids;
  for (const auto& s : c.spies) {
    if (s.id.empty()) throw ConfigError("spy id is empty");
    if (!ids.insert("spy:" + s.id).second) throw ConfigError("duplicate spy id '" + s.id + "'");
    if (s.endpoint.has_value() == !s.preset.empty()) {
      throw ConfigError("spy '" + s.id + "' needs exactly one of preset or endpoint");
    }
    if (!s.preset.empty() && !is_preset(s.preset)) {
      throw ConfigError("spy '" + s.id + "': unknown preset '" + s.preset + "'");
    }
    if (s.endpoint) validate_endpoint(*s.endpoint);
  }
  for (const auto& cit : c.citizens) {
    if (cit.id.empty()) throw ConfigError("citizen id is empty");
    if (!ids.insert("cit:" + cit.id).second) {
      throw ConfigError("duplicate citizen id '" + cit.id + "'");
    }
    validate_profile(cit.profile);
    if (cit.endpoint) validate_endpoint(*cit.endpoint);
  }
}

ExperimentConfig experiment_from_json(const Json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("experiment config must be an object");
  static const std::set<std::string> known = {
      "name",  "output_dir", "base_seed", "trials", "parallelism", "fsync",
      "game",  "deck",       "locations", "spies",  "citizens"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown experiment key '" + key + "'");
  }
  ExperimentConfig c;
  try {
    c.name = j.value("name", c.name);
    c.trials = j.value("trials", c.trials);
    c.parallelism = j.value("parallelism", c.parallelism);
    c.base_seed = j.value("base_seed", c.base_seed);
    c.fsync = j.value("fsync", c.fsync);
    c.output_dir = j.value("output_dir", c.output_dir.string());
    if (c.output_dir.is_relative() && !base_dir.empty()) c.output_dir = base_dir / c.output_dir;
    c.game = j.contains("game") ? config_from_json(j["game"]) : default_game_config();
    if (j.contains("deck")) {
      c.game.location_deck.clear();
      for (const auto& card : j["deck"]) c.game.location_deck.push_back(card_from_json(card));
    } else {
      c.game.location_deck = default_deck();
    }
    c.locations = j.value("locations", std::vector<std::string>{});
    for (const auto& s : j.at("spies")) {
      SpySpec spec;
      spec.id = s.at("id").get<std::string>();
      spec.preset = s.value("preset", std::string());
      if (s.contains("endpoint")) spec.endpoint = endpoint_from_json(s["endpoint"]);
      c.spies.push_back(std::move(spec));
    }
    for (const auto& s : j.at("citizens")) {
      CitizenSpec spec;
      spec.id = s.at("id").get<std::string>();
      spec.profile = profile_from_json(s);
      if (s.contains("endpoint")) spec.endpoint = endpoint_from_json(s["endpoint"]);
      c.citizens.push_back(std::move(spec));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  } catch (const SchemaError& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  validate_experiment(c);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["output_dir"] = c.output_dir.string();
  j["base_seed"] = c.base_seed;
  j["trials"] = c.trials;
  j["parallelism"] = c.parallelism;
  j["fsync"] = c.fsync;
  j["game"] = to_json(c.game, false);
  j["deck"] = Json::array();
  for (const auto& card : c.game.location_deck) j["deck"].push_back(to_json(card));
  j["locations"] = c.locations;
  j["spies"] = Json::array();
  for (const auto& s : c.spies) {
    Json sj{{"id", s.id}};
    if (!s.preset.empty()) sj["preset"] = s.preset;
    if (s.endpoint) sj["endpoint"] = to_json(*s.endpoint);
    j["spies"].push_back(std::move(sj));
  }
  j["citizens"] = Json::array();
  for (const auto& cit : c.citizens) {
    Json cj{{"id", cit.id}};
    cj.update(profile_to_json(cit.profile));
    if (cit.endpoint) cj["endpoint"] = to_json(*cit.endpoint);
    j["citizens"].push_back(std::move(cj));
  }
  return j;
}

ExperimentConfig load_experiment(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return experiment_from_json(j, path.parent_path());
}

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.name = "default";
  c.game = default_game_config();
  c.game.location_deck = default_deck();
  c.trials = 3;
  c.base_seed = 20240601;
  c.parallelism = 4;
  c.output_dir = "runs/default";
  for (const char* preset : {"oracle", "echo", "mute", "gambler"}) {
    c.spies.push_back({preset, preset, std::nullopt});
  }
  c.citizens.push_back({"strong", strong_citizen_profile(), std::nullopt});
  c.citizens.push_back({"weak", weak_citizen_profile(), std::nullopt});
  return c;
}

std::uint64_t game_seed(std::uint64_t base_seed, const std::string& spy_id,
                        const std::string& citizen_id, const std::string& location,
                        int trial) {
  // Length-prefixed fields so ("ab","c") and ("a","bc") differ.
  std::string key;
  for (const std::string* part : {&spy_id, &citizen_id, &location}) {
    key += std::to_string(part->size()) + ":" + *part + ";";
  }
  key += std::to_string(trial);
  return combine_seed(base_seed, fnv1a64(key));
}

std::vector<ScheduledGame> schedule(const ExperimentConfig& c) {
  const auto locations = c.locations.empty() ? deck_names(c.game.location_deck) : c.locations;
  std::vector<ScheduledGame> out;
  out.reserve(locations.size() * c.citizens.size() * c.spies.size() *
              static_cast<std::size_t>(c.trials));
  for (const auto& loc : locations) {
    for (std::size_t ci = 0; ci < c.citizens.size(); ++ci) {
      for (std::size_t si = 0; si < c.spies.size(); ++si) {
        for (int t = 1; t <= c.trials; ++t) {
          ScheduledGame g;
          g.spy = si;
          g.citizens = ci;
          g.location = loc;
          g.trial = t;
          g.seed = game_seed(c.base_seed, c.spies[si].id, c.citizens[ci].id, loc, t);
          g.game_id = c.name + "-" + c.spies[si].id + "-vs-" + c.citizens[ci].id + "-" +
                      loc + "-t" + std::to_string(t);
          out.push_back(std::move(g));
        }
      }
    }
  }
  return out;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RecordHeader make_header(const ExperimentConfig& c, const ScheduledGame& g) {
  const auto card = find_card(c.game.location_deck, g.location);
  if (!card) throw ConfigError("location '" + g.location + "' is not in the deck");
  GameConfig config = c.game;
  config.seed = g.seed;
  RecordHeader h;
  h.game_id = g.game_id;
  h.experiment = c.name;
  const std::uint64_t deal_seed = combine_seed(g.seed, kDealStream);
  h.assignment = deal(config, *card, deal_seed);
  config.location_deck.clear();
  h.config = config;
  h.spy_agent_id = c.spies[g.spy].id;
  h.citizen_agent_id = c.citizens[g.citizens].id;
  h.citizen_strength = std::string(to_string(c.citizens[g.citizens].profile.strength));
  h.seeds = {{"game", g.seed}, {"deal", deal_seed},
             {"agents", combine_seed(g.seed, kAgentStream)}};
  return h;
}

GameRecord play_game(const RecordHeader& header, AgentTable& agents,
                     GameLogWriter* writer) {
  GameRecord record;
  record.header = header;
  GameState state = init_game(header.config, header.assignment);
  if (static_cast<int>(agents.size()) != header.config.num_players) {
    throw ConfigError("need one agent per seat");
  }
  auto take = [&](Transition t) {
    for (const auto& e : t.events) {
      if (writer) writer->append_event(e);
      record.events.push_back(e);
    }
    state = std::move(t.state);
  };

  while (!state.ended()) {
    const PlayerId actor = pending_actor(state);
    const RequestKind kind = pending_request(state);
    const Observation obs = observation_for(state, actor);
    AgentReply reply;
    try {
      reply = agents[static_cast<std::size_t>(actor)]->decide(obs, kind);
    } catch (const std::exception& e) {
      reply = AgentReply::refuse(std::string("agent error: ") + e.what());
    }
    for (auto& raw : reply.raw_completions) {
      take(record_sidecar(state, ev::RawCompletion{actor, std::move(raw)}));
    }
    if (!reply.decision) {
      take(abort_game(state, player_name(actor) + " refused " +
                                 std::string(to_string(kind)) + ": " + reply.refusal));
      break;
    }
    try {
      take(advance(state, actor, *reply.decision));
    } catch (const ProtocolError& e) {
      take(abort_game(state, player_name(actor) + " broke a rule: " + e.what()));
    }
  }

  record.outcome = state.outcome;
  record.finished_at = utc_timestamp();
  if (writer) writer->write_outcome(*record.outcome, record.finished_at);
  return record;
}

Json to_json(const RunSummary& s) {
  Json j;
  j["scheduled"] = s.scheduled;
  j["completed"] = s.completed;
  j["aborted"] = s.aborted;
  j["skipped"] = s.skipped;
  j["stopped_early"] = s.stopped_early;
  j["wall_seconds"] = s.wall_seconds;
  j["errors"] = s.errors;
  j["games"] = Json::array();
  for (const auto& g : s.games) {
    Json gj{{"game_id", g.game_id}, {"seed", g.seed}, {"status", g.status}};
    if (!g.outcome.empty()) gj["outcome"] = g.outcome;
    if (!g.path.empty()) gj["path"] = g.path.string();
    if (!g.error.empty()) gj["error"] = g.error;
    j["games"].push_back(std::move(gj));
  }
  return j;
}

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate_experiment(config);
  const auto started = std::chrono::steady_clock::now();
  fs::create_directories(config.output_dir);

  const auto games = schedule(config);
  RunSummary summary;
  summary.scheduled = games.size();
  summary.games.resize(games.size());

  // One gateway per remote spec, shared by every game that uses it.
  auto make_gateway = [&](const EndpointConfig& ep) {
    auto transport = options.transport_factory ? options.transport_factory(ep) : nullptr;
    return std::make_shared<Gateway>(ep, transport);
  };
  std::vector<std::shared_ptr<Gateway>> spy_gw(config.spies.size());
  std::vector<std::shared_ptr<Gateway>> cit_gw(config.citizens.size());
  std::vector<std::string> spy_down(config.spies.size());
  std::vector<std::string> cit_down(config.citizens.size());
  for (std::size_t i = 0; i < config.spies.size(); ++i) {
    if (!config.spies[i].endpoint) continue;
    spy_gw[i] = make_gateway(*config.spies[i].endpoint);
    if (!options.skip_preflight && !spy_gw[i]->reachable()) {
      spy_down[i] = "spy '" + config.spies[i].id + "': endpoint " +
                    config.spies[i].endpoint->base_url + " unreachable";
      summary.errors.push_back(spy_down[i]);
    }
  }
  for (std::size_t i = 0; i < config.citizens.size(); ++i) {
    if (!config.citizens[i].endpoint) continue;
    cit_gw[i] = make_gateway(*config.citizens[i].endpoint);
    if (!options.skip_preflight && !cit_gw[i]->reachable()) {
      cit_down[i] = "citizens '" + config.citizens[i].id + "': endpoint " +
                    config.citizens[i].endpoint->base_url + " unreachable";
      summary.errors.push_back(cit_down[i]);
    }
  }
  const auto candidates = deck_names(config.game.location_deck);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex error_mu;

  auto run_one = [&](std::size_t index) {
    const ScheduledGame& g = games[index];
    GameSummary& out = summary.games[index];
    out.game_id = g.game_id;
    out.seed = g.seed;
    out.path = config.output_dir / (g.game_id + ".jsonl");
    const std::string& down =
        !spy_down[g.spy].empty() ? spy_down[g.spy] : cit_down[g.citizens];
    if (!down.empty()) {
      out.status = "skipped";
      out.error = down;
      return;
    }
    if (stop) {
      out.status = "skipped";
      out.error = "run stopped early";
      return;
    }
    try {
      if (options.resume && fs::exists(out.path)) {
        const GameRecord existing = load_game(out.path);
        if (existing.complete() && existing.header.game_id == g.game_id) {
          const auto cause = existing.outcome->cause;
          out.status = cause == EndCause::Aborted ? "aborted" : "completed";
          out.outcome = std::string(to_string(cause));
          return;
        }
      }
      RecordHeader header = make_header(config, g);
      header.started_at = utc_timestamp();

      AgentTable agents(static_cast<std::size_t>(config.game.num_players));
      const std::uint64_t agent_seed = header.seeds.at("agents");
      for (PlayerId seat = 0; seat < config.game.num_players; ++seat) {
        const auto s = static_cast<std::size_t>(seat);
        const std::uint64_t seed = combine_seed(agent_seed, s);
        if (seat == header.assignment.spy_seat) {
          const SpySpec& spec = config.spies[g.spy];
          if (spec.endpoint) {
            agents[s] = std::make_unique<LlmAgent>(spy_gw[g.spy]);
          } else {
            agents[s] = make_scripted_spy(
                spy_policy_preset(spec.preset, candidates, g.location), seed);
          }
        } else {
          const CitizenSpec& spec = config.citizens[g.citizens];
          if (spec.endpoint) {
            agents[s] = std::make_unique<LlmAgent>(cit_gw[g.citizens]);
          } else {
            agents[s] = make_scripted_citizen(spec.profile, seed);
          }
        }
      }

      GameLogWriter writer(out.path, header, config.fsync);
      const GameRecord record = play_game(header, agents, &writer);
      writer.commit();
      const auto cause = record.outcome->cause;
      out.status = cause == EndCause::Aborted ? "aborted" : "completed";
      out.outcome = std::string(to_string(cause));
    } catch (const std::exception& e) {
      // Typically a disk failure; the partial file keeps its .partial name.
      out.status = "failed";
      out.error = e.what();
      stop = true;
      std::lock_guard lock(error_mu);
      summary.errors.push_back(g.game_id + ": " + e.what());
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), games.size());
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < games.size(); i = next++) run_one(i);
    });
  }
  for (auto& t : pool) t.join();

  for (const auto& g : summary.games) {
    if (g.status == "completed") {
      ++summary.completed;
    } else if (g.status == "aborted" || g.status == "failed") {
      ++summary.aborted;
    } else {
      ++summary.skipped;
    }
  }
  summary.stopped_early = stop;
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  try {
    write_file_atomic(config.output_dir / "run_summary.json", to_json(summary).dump(2) + "\n");
  } catch (const std::exception& e) {
    summary.errors.push_back(std::string("summary: ") + e.what());
  }
  return summary;
}

}  // namespace spygame
