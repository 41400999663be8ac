#include "spygame/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <ostream>

#include "spygame/annotation.hpp"
#include "spygame/deck.hpp"
#include "spygame/metrics.hpp"
#include "spygame/runner.hpp"

namespace spygame {

namespace fs = std::filesystem;

namespace {

std::vector<LocationCard> load_deck(const std::string& path) {
  if (path.empty()) return default_deck();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open deck " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const Json& cards = j.is_object() && j.contains("deck") ? j["deck"] : j;
  if (!cards.is_array()) throw ConfigError(path + ": expected an array of cards");
  std::vector<LocationCard> deck;
  for (const auto& c : cards) deck.push_back(card_from_json(c));
  return deck;
}

void print_warnings(const std::vector<GameRecord>& records, std::ostream& err) {
  for (const auto& r : records) {
    for (const auto& w : r.warnings) err << r.header.game_id << ": " << w << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SpyGame experiments, logs and metrics", "spygame"};
  app.require_subcommand(1);

  // run
  std::string run_config;
  std::string run_output;
  int run_parallelism = 0;
  bool run_no_preflight = false;
  bool run_fresh = false;
  auto* run = app.add_subcommand("run", "Run an experiment matrix");
  run->add_option("config", run_config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--output", run_output, "Override the output directory");
  run->add_option("--parallelism", run_parallelism, "Override the worker count")
      ->check(CLI::PositiveNumber);
  run->add_flag("--no-preflight", run_no_preflight, "Skip endpoint reachability probes");
  run->add_flag("--fresh", run_fresh, "Replay games even when a complete log exists");

  // replay
  std::string replay_log;
  auto* replay = app.add_subcommand("replay", "Re-simulate a game log and compare");
  replay->add_option("log", replay_log, "Game log (.jsonl)")
      ->required()
      ->check(CLI::ExistingFile);

  // metrics
  std::string metrics_dir;
  std::string group_by = "spy,citizens";
  std::string vote_sources;
  std::string deck_path;
  bool include_aborted = false;
  bool strict_caught = false;
  bool csv = false;
  auto* metrics = app.add_subcommand("metrics", "Gameplay metrics table");
  metrics->add_option("dir", metrics_dir, "Directory of game logs")
      ->required()
      ->check(CLI::ExistingDirectory);
  metrics->add_option("--group-by", group_by, "spy,citizens | spy | citizens | location | none")
      ->check(CLI::IsMember({"spy,citizens", "citizens,spy", "matchup", "spy",
                             "citizens", "location", "none"}));
  metrics->add_option("--vote-sources", vote_sources, "final_and_day | final_only")
      ->check(CLI::IsMember({"final_and_day", "final_only"}));
  metrics->add_flag("--include-aborted", include_aborted, "Count aborted games");
  metrics->add_flag("--strict-caught", strict_caught,
                    "A spy sharing the final-vote maximum is not caught");
  metrics->add_flag("--csv", csv, "CSV instead of a text table");
  metrics->add_option("--deck", deck_path, "Deck JSON (default: built-in deck)")
      ->check(CLI::ExistingFile);

  // stats
  std::string stats_dir;
  auto* stats = app.add_subcommand("stats", "Corpus averages per citizen strength");
  stats->add_option("dir", stats_dir, "Directory of game logs")
      ->required()
      ->check(CLI::ExistingDirectory);

  // kappa
  std::vector<std::string> kappa_files;
  auto* kappa = app.add_subcommand("kappa", "Fleiss' kappa over annotation files");
  kappa->add_option("annotations", kappa_files, "Annotation JSONL files")
      ->required()
      ->check(CLI::ExistingFile);

  // freq
  std::string freq_dir;
  std::vector<std::string> freq_files;
  std::string freq_group = "spy,citizens";
  std::string freq_base = "annotated";
  auto* freq = app.add_subcommand("freq", "Category frequencies per group");
  freq->add_option("dir", freq_dir, "Directory of game logs")
      ->required()
      ->check(CLI::ExistingDirectory);
  freq->add_option("annotations", freq_files, "Annotation JSONL files")
      ->required()
      ->check(CLI::ExistingFile);
  freq->add_option("--group-by", freq_group, "spy,citizens | spy | citizens | location | none")
      ->check(CLI::IsMember({"spy,citizens", "citizens,spy", "matchup", "spy",
                             "citizens", "location", "none"}));
  freq->add_option("--base", freq_base, "annotated | spy (reasoning steps counted in N)")
      ->check(CLI::IsMember({"annotated", "spy"}));

  // default-config
  auto* defaults = app.add_subcommand("default-config", "Print the default experiment config");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      ExperimentConfig config = load_experiment(run_config);
      if (!run_output.empty()) config.output_dir = run_output;
      if (run_parallelism > 0) config.parallelism = run_parallelism;
      RunOptions options;
      options.skip_preflight = run_no_preflight;
      options.resume = !run_fresh;
      const RunSummary s = run_experiment(config, options);
      out << "scheduled " << s.scheduled << ", completed " << s.completed
          << ", aborted " << s.aborted << ", skipped " << s.skipped << " in "
          << s.wall_seconds << " s\n";
      out << "logs in " << config.output_dir.string() << "\n";
      for (const auto& e : s.errors) err << "error: " << e << "\n";
      return s.stopped_early ? kExitRuntime : kExitOk;
    }
    if (*replay) {
      const GameRecord record = load_game(replay_log);
      for (const auto& w : record.warnings) err << "warning: " << w << "\n";
      const ReplayReport r = validate_replay(record);
      out << "game " << record.header.game_id << ": "
          << (r.identical ? "identical" : "DIVERGENT") << ", "
          << (r.complete ? "complete" : "incomplete") << "\n";
      if (r.divergent_seq) out << "divergent seq " << *r.divergent_seq << "\n";
      if (!r.detail.empty()) out << r.detail << "\n";
      return r.identical ? kExitOk : kExitValidation;
    }
    if (*metrics) {
      const auto deck = load_deck(deck_path);
      const auto records = load_corpus(metrics_dir);
      print_warnings(records, err);
      ReportOptions options;
      options.group_by = group_by_from_string(group_by);
      if (!vote_sources.empty()) options.vote_sources = vote_sources_from_string(vote_sources);
      options.include_aborted = include_aborted;
      options.tie_counts_as_caught = !strict_caught;
      const MetricReport report = build_report(records, deck, options);
      out << (csv ? render_report_csv(report) : render_report_text(report));
      return kExitOk;
    }
    if (*stats) {
      const auto records = load_corpus(stats_dir);
      print_warnings(records, err);
      out << render_corpus_stats(corpus_stats(records));
      return kExitOk;
    }
    if (*kappa) {
      const std::vector<fs::path> paths(kappa_files.begin(), kappa_files.end());
      out << render_kappa(load_annotations(paths));
      return kExitOk;
    }
    if (*freq) {
      const auto records = load_corpus(freq_dir);
      print_warnings(records, err);
      const std::vector<fs::path> paths(freq_files.begin(), freq_files.end());
      const auto sets = load_annotations(paths);
      validate_annotations(sets, records);
      const auto table = category_frequencies(
          sets, records, group_by_from_string(freq_group),
          freq_base == "spy" ? FrequencyBase::SpySteps : FrequencyBase::AnnotatedSteps);
      out << render_frequencies(table);
      return kExitOk;
    }
    if (*defaults) {
      out << to_json(default_experiment()).dump(2) << "\n";
      return kExitOk;
    }
  } catch (const SchemaError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IntegrityError& e) {
    err << "integrity: " << e.what() << "\n";
    return kExitValidation;
  } catch (const AnnotationError& e) {
    err << "annotations: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DeckError& e) {
    err << "deck: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace spygame
