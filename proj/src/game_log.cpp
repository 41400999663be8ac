#include "spygame/game_log.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <system_error>

#include "spygame/rng.hpp"

namespace spygame {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
  throw std::system_error(errno, std::generic_category(), what);
}

SchemaError at_line(std::size_t line, const SchemaError& e) {
  // Re-anchor a field error produced by the codec to its line.
  std::string msg = e.what();
  const std::string prefix = "field '" + e.field() + "': ";
  if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
  return SchemaError(line, e.field(), msg);
}

std::optional<std::pair<PlayerId, Action>> decision_from_event(
    const GameEvent& e, const GameState& state) {
  if (const auto* q = e.as<ev::Question>()) {
    return std::make_pair(q->asker, Action{act::AskQuestion{q->target, q->text}});
  }
  if (const auto* a = e.as<ev::Accusation>()) {
    return std::make_pair(a->accuser, Action{act::Accuse{a->accused}});
  }
  if (const auto* a = e.as<ev::Answer>()) {
    return std::make_pair(a->responder, Action{act::Answer{a->text}});
  }
  if (const auto* b = e.as<ev::DayVoteBallot>()) {
    return std::make_pair(b->voter, Action{act::DayBallot{b->agree}});
  }
  if (const auto* g = e.as<ev::SecretGuess>()) {
    return std::make_pair(state.assignment.spy_seat,
                          Action{act::SpyGuess{g->location_text, g->certainty}});
  }
  if (const auto* b = e.as<ev::FinalVoteBallot>()) {
    return std::make_pair(b->voter, Action{act::FinalBallot{b->target}});
  }
  return std::nullopt;
}

void check_seat(PlayerId seat, int n, std::size_t line, const char* name) {
  if (seat >= n) {
    throw SchemaError(line, name,
                      "seat " + std::to_string(seat) + " exceeds num_players");
  }
}

void check_event_seats(const GameEvent& e, int n, std::size_t line) {
  if (const auto* t = e.as<ev::TurnStart>()) check_seat(t->leader, n, line, "leader");
  if (const auto* r = e.as<ev::Reasoning>()) check_seat(r->player, n, line, "player");
  if (const auto* q = e.as<ev::Question>()) {
    check_seat(q->asker, n, line, "asker");
    check_seat(q->target, n, line, "target");
  }
  if (const auto* a = e.as<ev::Answer>()) check_seat(a->responder, n, line, "responder");
  if (const auto* a = e.as<ev::Accusation>()) {
    check_seat(a->accuser, n, line, "accuser");
    check_seat(a->accused, n, line, "accused");
  }
  if (const auto* b = e.as<ev::DayVoteBallot>()) check_seat(b->voter, n, line, "voter");
  if (const auto* b = e.as<ev::FinalVoteBallot>()) {
    check_seat(b->voter, n, line, "voter");
    check_seat(b->target, n, line, "target");
  }
  if (const auto* r = e.as<ev::RawCompletion>()) check_seat(r->player, n, line, "player");
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

GameLogWriter::GameLogWriter(fs::path final_path, const RecordHeader& header,
                             bool fsync_each_line)
    : final_(std::move(final_path)), fsync_(fsync_each_line) {
  partial_ = final_;
  partial_ += ".partial";
  if (final_.has_parent_path()) fs::create_directories(final_.parent_path());
  fd_ = ::open(partial_.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_APPEND | O_CLOEXEC,
               0644);
  if (fd_ < 0) throw_errno("cannot open " + partial_.string());
  write_line(header_to_json(header).dump());
}

GameLogWriter::~GameLogWriter() {
  if (fd_ >= 0) ::close(fd_);
}

void GameLogWriter::write_line(const std::string& line) {
  if (fd_ < 0) throw IntegrityError("log writer is closed");
  const std::string buf = line + "\n";
  std::size_t done = 0;
  while (done < buf.size()) {
    const ssize_t n = ::write(fd_, buf.data() + done, buf.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw_errno("write to " + partial_.string());
    }
    done += static_cast<std::size_t>(n);
  }
  if (fsync_ && ::fdatasync(fd_) != 0) throw_errno("fdatasync");
}

void GameLogWriter::append_event(const GameEvent& event) {
  if (outcome_written_) {
    throw IntegrityError("event appended after the outcome line");
  }
  if (event.seq != last_seq_ + 1) {
    throw IntegrityError("sequence gap: expected " +
                         std::to_string(last_seq_ + 1) + ", got " +
                         std::to_string(event.seq));
  }
  write_line(to_json(event).dump());
  last_seq_ = event.seq;
}

void GameLogWriter::write_outcome(const Outcome& outcome,
                                  const std::string& finished_at) {
  if (outcome_written_) throw IntegrityError("outcome already written");
  write_line(outcome_line(outcome, finished_at));
  outcome_written_ = true;
}

void GameLogWriter::commit() {
  if (committed_) return;
  if (!outcome_written_) {
    throw IntegrityError("cannot commit a game log without its outcome");
  }
  if (::fsync(fd_) != 0) throw_errno("fsync");
  ::close(fd_);
  fd_ = -1;
  fs::rename(partial_, final_);
  committed_ = true;
}

void append_event(GameLogWriter& sink, const GameEvent& event) {
  sink.append_event(event);
}

Json header_to_json(const RecordHeader& h) {
  Json j;
  j["type"] = "header";
  j["schema_version"] = h.schema_version;
  j["game_id"] = h.game_id;
  j["experiment"] = h.experiment;
  j["config"] = to_json(h.config, false);
  j["spy_agent_id"] = h.spy_agent_id;
  j["citizen_agent_id"] = h.citizen_agent_id;
  j["citizen_strength"] = h.citizen_strength;
  j["location"] = h.assignment.location.name;
  j["spy_seat"] = h.assignment.spy_seat;
  j["assignment"] = to_json(h.assignment);
  Json seeds = Json::object();
  for (const auto& [k, v] : h.seeds) seeds[k] = v;
  j["seeds"] = std::move(seeds);
  j["started_at"] = h.started_at;
  return j;
}

RecordHeader header_from_json(const Json& j) {
  if (!j.is_object() || j.value("type", "") != "header") {
    throw SchemaError(0, "type", "first line must be the header");
  }
  RecordHeader h;
  auto str = [&](const char* name) {
    if (!j.contains(name) || !j[name].is_string()) {
      throw SchemaError(0, name, "expected a string");
    }
    return j[name].get<std::string>();
  };
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw SchemaError(0, "schema_version", "expected an integer");
  }
  h.schema_version = j["schema_version"].get<int>();
  if (h.schema_version != kLogSchemaVersion) {
    throw SchemaError(0, "schema_version",
                      "unsupported version " + std::to_string(h.schema_version));
  }
  h.game_id = str("game_id");
  h.experiment = str("experiment");
  if (!j.contains("config")) throw SchemaError(0, "config", "missing");
  h.config = config_from_json(j["config"]);
  h.spy_agent_id = str("spy_agent_id");
  h.citizen_agent_id = str("citizen_agent_id");
  h.citizen_strength = str("citizen_strength");
  if (!j.contains("assignment")) throw SchemaError(0, "assignment", "missing");
  h.assignment = assignment_from_json(j["assignment"]);
  if (str("location") != h.assignment.location.name) {
    throw SchemaError(0, "location", "does not match the dealt card");
  }
  if (!j.contains("spy_seat") || !j["spy_seat"].is_number_integer() ||
      j["spy_seat"].get<int>() != h.assignment.spy_seat) {
    throw SchemaError(0, "spy_seat", "does not match the assignment");
  }
  if (j.contains("seeds")) {
    for (const auto& [k, v] : j["seeds"].items()) {
      if (!v.is_number_unsigned() && !v.is_number_integer()) {
        throw SchemaError(0, "seeds", "expected integers");
      }
      h.seeds[k] = v.get<std::uint64_t>();
    }
  }
  h.started_at = str("started_at");
  try {
    validate_config(h.config);
    validate_assignment(h.config, h.assignment);
  } catch (const ConfigError& e) {
    throw SchemaError(0, "assignment", e.what());
  }
  return h;
}

std::string outcome_line(const Outcome& outcome, const std::string& finished_at) {
  Json j;
  j["type"] = "outcome";
  j["winner"] = to_string(outcome.winner);
  j["cause"] = to_string(outcome.cause);
  j["finished_at"] = finished_at;
  return j.dump();
}

std::string serialize_record(const GameRecord& record) {
  std::string out = header_to_json(record.header).dump();
  out.push_back('\n');
  for (const auto& e : record.events) {
    out += to_json(e).dump();
    out.push_back('\n');
  }
  if (record.outcome) {
    out += outcome_line(*record.outcome, record.finished_at);
    out.push_back('\n');
  }
  return out;
}

GameRecord parse_record(const std::string& text) {
  GameRecord record;
  std::vector<std::string> lines;
  std::size_t start = 0;
  bool last_unterminated = false;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      last_unterminated = true;
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty()) throw SchemaError(1, "", "empty game log");

  bool have_header = false;
  std::size_t game_ends = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    Json j;
    try {
      j = Json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      if (last_unterminated && i + 1 == lines.size() && have_header) {
        record.warnings.push_back("line " + std::to_string(line_no) +
                                  ": truncated final line dropped");
        break;
      }
      throw SchemaError(line_no, "", std::string("malformed JSON: ") + e.what());
    }
    try {
      if (!have_header) {
        record.header = header_from_json(j);
        have_header = true;
        continue;
      }
      if (record.outcome) {
        throw SchemaError(0, "type", "content after the outcome line");
      }
      if (j.is_object() && j.value("type", "") == "outcome") {
        record.outcome = outcome_from_json(j);
        if (!j.contains("finished_at") || !j["finished_at"].is_string()) {
          throw SchemaError(0, "finished_at", "expected a string");
        }
        record.finished_at = j["finished_at"].get<std::string>();
        continue;
      }
      GameEvent e = event_from_json(j);
      const std::uint64_t want = record.events.size() + 1;
      if (e.seq != want) {
        throw SchemaError(0, "seq",
                          "expected " + std::to_string(want) + ", got " +
                              std::to_string(e.seq));
      }
      check_event_seats(e, record.header.config.num_players, line_no);
      if (const auto* end = e.as<ev::GameEnd>()) {
        ++game_ends;
        if (game_ends > 1) throw SchemaError(0, "type", "second GameEnd event");
        (void)end;
      }
      record.events.push_back(std::move(e));
    } catch (const SchemaError& e) {
      if (e.line() != 0) throw;
      throw at_line(line_no, e);
    }
  }
  if (!have_header) throw SchemaError(1, "", "missing header line");

  if (record.outcome) {
    const ev::GameEnd* end =
        record.events.empty() ? nullptr : record.events.back().as<ev::GameEnd>();
    if (end == nullptr) {
      // The GameEnd may be followed only by sidecar events.
      for (auto it = record.events.rbegin(); it != record.events.rend(); ++it) {
        if ((end = it->as<ev::GameEnd>()) != nullptr) break;
        if (!is_sidecar(*it)) break;
      }
    }
    if (end == nullptr) {
      throw SchemaError(lines.size(), "type", "outcome without a GameEnd event");
    }
    if (end->winner != record.outcome->winner || end->cause != record.outcome->cause) {
      throw SchemaError(lines.size(), "cause", "outcome does not match GameEnd");
    }
  } else {
    record.warnings.push_back("record has no outcome line (incomplete game)");
  }
  return record;
}

GameRecord load_game(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open game log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_record(buf.str());
}

void write_record(const fs::path& path, const GameRecord& record) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_record(record);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<fs::path> list_game_logs(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir.string());
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<GameRecord> load_corpus(const fs::path& dir) {
  std::vector<GameRecord> records;
  for (const auto& path : list_game_logs(dir)) {
    try {
      records.push_back(load_game(path));
    } catch (const SchemaError& e) {
      throw SchemaError(e.line(), e.field(),
                        path.filename().string() + ": " + e.what());
    }
  }
  return records;
}

std::uint64_t record_fingerprint(const GameRecord& record) {
  GameRecord copy = record;
  copy.header.started_at.clear();
  copy.finished_at.clear();
  return fnv1a64(serialize_record(copy));
}

ReplayReport validate_replay(const GameRecord& record) {
  ReplayReport report;
  auto diverge = [&](std::uint64_t seq, std::string detail) {
    report.identical = false;
    report.divergent_seq = seq;
    report.detail = std::move(detail);
    return report;
  };

  GameState initial;
  try {
    initial = init_game(record.header.config, record.header.assignment);
  } catch (const ConfigError& e) {
    report.detail = std::string("header does not describe a valid game: ") + e.what();
    return report;
  }

  const auto& events = record.events;
  GameState state = initial;
  std::size_t i = 0;
  bool truncated = false;
  while (i < events.size()) {
    const GameEvent& e = events[i];
    Transition tr;
    if (const auto* raw = e.as<ev::RawCompletion>()) {
      tr = record_sidecar(state, *raw);
    } else {
      if (state.ended()) return diverge(e.seq, "event after the game ended");
      Decision decision;
      std::size_t j = i;
      while (j < events.size() && events[j].is<ev::Reasoning>()) {
        decision.reasoning.push_back(events[j].as<ev::Reasoning>()->text);
        ++j;
      }
      if (j == events.size()) {
        truncated = true;
        break;
      }
      const GameEvent& action = events[j];
      const auto* end = action.as<ev::GameEnd>();
      try {
        if (end != nullptr && end->cause == EndCause::Aborted && j == i) {
          tr = abort_game(state, end->detail);
        } else if (auto mapped = decision_from_event(action, state)) {
          decision.action = mapped->second;
          tr = advance(state, mapped->first, decision);
        } else {
          return diverge(action.seq,
                         "engine awaits " +
                             std::string(to_string(pending_request(state))) +
                             " but the log has " +
                             std::string(event_tag(action.body)));
        }
      } catch (const ProtocolError& err) {
        return diverge(action.seq, std::string("engine rejects decision: ") +
                                       err.what());
      }
    }
    for (std::size_t k = 0; k < tr.events.size(); ++k) {
      if (i + k >= events.size()) {
        truncated = true;
        break;
      }
      if (!(tr.events[k] == events[i + k])) {
        return diverge(events[i + k].seq,
                       "expected " + to_json(tr.events[k]).dump() + ", log has " +
                           to_json(events[i + k]).dump());
      }
    }
    if (truncated) break;
    state = std::move(tr.state);
    i += tr.events.size();
  }

  if (!truncated) {
    GameState folded = initial;
    for (const auto& e : events) folded = apply_event(std::move(folded), e);
    if (to_json(folded).dump() != to_json(state).dump()) {
      return diverge(events.empty() ? 0 : events.back().seq,
                     "reducer fold does not reproduce the engine state");
    }
  }
  report.complete = !truncated && state.ended();
  if (record.outcome) {
    if (!state.outcome || !(*state.outcome == *record.outcome)) {
      return diverge(events.empty() ? 0 : events.back().seq,
                     "outcome line does not match the replayed outcome");
    }
  }
  report.identical = true;
  report.detail = report.complete ? "identical" : "identical prefix (incomplete)";
  return report;
}

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool space = std::isspace(c) != 0;
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

int terminal_turn(const GameRecord& record) {
  int turn = 1;
  for (const auto& e : record.events) {
    if (const auto* t = e.as<ev::TurnStart>()) turn = t->turn;
  }
  return turn;
}

namespace {

void accumulate(CorpusRow& row, const GameRecord& r) {
  ++row.games;
  row.total_turns += static_cast<std::size_t>(terminal_turn(r));
  for (const auto& e : r.events) {
    if (e.is<ev::Reasoning>()) ++row.total_reasoning_steps;
    if (const auto* q = e.as<ev::Question>()) {
      ++row.total_utterances;
      row.total_words += count_words(q->text);
    } else if (const auto* a = e.as<ev::Answer>()) {
      ++row.total_utterances;
      row.total_words += count_words(a->text);
    }
  }
}

void finalize(CorpusRow& row) {
  const auto g = static_cast<double>(row.games);
  row.mean_turns = static_cast<double>(row.total_turns) / g;
  row.mean_reasoning_steps = static_cast<double>(row.total_reasoning_steps) / g;
  row.mean_utterances = static_cast<double>(row.total_utterances) / g;
  row.words_per_utterance =
      row.total_utterances == 0
          ? 0.0
          : static_cast<double>(row.total_words) /
                static_cast<double>(row.total_utterances);
}

}  // namespace

CorpusStats corpus_stats(const std::vector<GameRecord>& records,
                         bool group_by_citizens) {
  if (records.empty()) throw std::invalid_argument("corpus is empty");
  CorpusStats stats;
  std::map<std::string, CorpusRow> groups;
  stats.overall.group = "Total";
  for (const auto& r : records) {
    accumulate(stats.overall, r);
    if (group_by_citizens) {
      const std::string key = "Spy vs. " + r.header.citizen_strength;
      auto& row = groups[key];
      row.group = key;
      accumulate(row, r);
    }
  }
  finalize(stats.overall);
  for (auto& [key, row] : groups) {
    finalize(row);
    stats.groups.push_back(row);
  }
  return stats;
}

std::string render_corpus_stats(const CorpusStats& stats) {
  std::ostringstream os;
  auto row_line = [&](const CorpusRow& r) {
    os << std::left << std::setw(18) << r.group << std::right << std::setw(7)
       << r.games << std::setw(8) << fixed(r.mean_turns, 2) << std::setw(17)
       << fixed(r.mean_reasoning_steps, 2) << std::setw(12)
       << fixed(r.mean_utterances, 2) << std::setw(17)
       << fixed(r.words_per_utterance, 2) << "\n";
  };
  os << std::left << std::setw(18) << "" << std::right << std::setw(7) << "Games"
     << std::setw(8) << "Turns" << std::setw(17) << "Reasoning Steps"
     << std::setw(12) << "Utterances" << std::setw(17) << "Words/Utterance"
     << "\n";
  for (const auto& r : stats.groups) row_line(r);
  row_line(stats.overall);
  return os.str();
}

}  // namespace spygame
