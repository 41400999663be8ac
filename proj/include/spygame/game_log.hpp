#pragma once

// One game per file: a header line, then one line per event, then an outcome
// line. Every line is a UTF-8 JSON object.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spygame/game.hpp"
#include "spygame/json_codec.hpp"

namespace spygame {

inline constexpr int kLogSchemaVersion = 1;

class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecordHeader {
  int schema_version = kLogSchemaVersion;
  std::string game_id;
  std::string experiment;
  GameConfig config;  // location_deck is not stored
  std::string spy_agent_id;
  std::string citizen_agent_id;
  std::string citizen_strength;  // "strong" / "weak"
  Assignment assignment;
  std::map<std::string, std::uint64_t> seeds;
  std::string started_at;

  bool operator==(const RecordHeader&) const = default;
};

struct GameRecord {
  RecordHeader header;
  std::vector<GameEvent> events;
  std::optional<Outcome> outcome;
  std::string finished_at;
  // Load-time notes such as a dropped truncated line.
  std::vector<std::string> warnings;

  bool operator==(const GameRecord&) const = default;
  bool complete() const { return outcome.has_value(); }
  const std::string& location() const { return header.assignment.location.name; }
};

/// Append-only writer for one game file. Lines become durable (flushed and,
/// by default, fsynced) before each call returns. The file lives under a
/// ".partial" name until commit() renames it, so a crash never leaves a torn
/// record under the final name.
class GameLogWriter {
 public:
  GameLogWriter(std::filesystem::path final_path, const RecordHeader& header,
                bool fsync_each_line = true);
  ~GameLogWriter();
  GameLogWriter(const GameLogWriter&) = delete;
  GameLogWriter& operator=(const GameLogWriter&) = delete;

  /// Throws IntegrityError unless event.seq == last + 1.
  void append_event(const GameEvent& event);
  void write_outcome(const Outcome& outcome, const std::string& finished_at);
  /// Renames the partial file to its final path.
  void commit();

  const std::filesystem::path& partial_path() const { return partial_; }
  std::uint64_t last_seq() const { return last_seq_; }

 private:
  void write_line(const std::string& line);

  std::filesystem::path final_;
  std::filesystem::path partial_;
  int fd_ = -1;
  bool fsync_;
  bool outcome_written_ = false;
  bool committed_ = false;
  std::uint64_t last_seq_ = 0;
};

/// Free-function form of GameLogWriter::append_event.
void append_event(GameLogWriter& sink, const GameEvent& event);

Json header_to_json(const RecordHeader& h);
RecordHeader header_from_json(const Json& j);
std::string outcome_line(const Outcome& outcome, const std::string& finished_at);

/// Full file text; load_game(serialize_record(r)) reproduces r.
std::string serialize_record(const GameRecord& record);

/// Parses file text. A final line without its newline that fails to parse
/// is dropped with a warning; any other bad line throws SchemaError with its
/// line number.
GameRecord parse_record(const std::string& text);
GameRecord load_game(const std::filesystem::path& path);

/// Writes a complete record at once (used for rewrites and fixtures).
void write_record(const std::filesystem::path& path, const GameRecord& record);

/// All "*.jsonl" files in `dir`, sorted by name.
std::vector<std::filesystem::path> list_game_logs(
    const std::filesystem::path& dir);
std::vector<GameRecord> load_corpus(const std::filesystem::path& dir);

/// FNV-1a of the record text with timestamps blanked.
std::uint64_t record_fingerprint(const GameRecord& record);

struct ReplayReport {
  bool identical = false;
  bool complete = false;
  // First recorded event that the engine does not reproduce.
  std::optional<std::uint64_t> divergent_seq;
  std::string detail;
};

/// Re-runs the recorded decisions through the engine and compares every
/// emitted event, then checks that folding the events through the reducer
/// yields the same terminal state and outcome.
ReplayReport validate_replay(const GameRecord& record);

/// Table-1 style averages.
struct CorpusRow {
  std::string group;
  std::size_t games = 0;
  double mean_turns = 0;
  double mean_reasoning_steps = 0;
  double mean_utterances = 0;
  // Pooled over utterances: total words / total utterances.
  double words_per_utterance = 0;
  std::size_t total_turns = 0;
  std::size_t total_reasoning_steps = 0;
  std::size_t total_utterances = 0;
  std::size_t total_words = 0;
};

struct CorpusStats {
  std::vector<CorpusRow> groups;
  CorpusRow overall;
};

/// Groups by citizen strength ("Spy vs. strong") when `group_by_citizens`,
/// otherwise only the overall row is filled. Throws std::invalid_argument on
/// an empty corpus.
CorpusStats corpus_stats(const std::vector<GameRecord>& records,
                         bool group_by_citizens = true);

std::string render_corpus_stats(const CorpusStats& stats);

/// Terminal turn of a record: the turn of the last TurnStart, or 1.
int terminal_turn(const GameRecord& record);
std::size_t count_words(std::string_view text);

}  // namespace spygame
