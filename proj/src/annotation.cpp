#include "spygame/annotation.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace spygame {

namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "Exposure",
    "Dissociation",
    "MemoryDistortion",
    "CharacterAmbiguityTeam",
    "CharacterAmbiguityGoal",
    "None",
};

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string gap_message(const std::vector<IncompleteAnnotationError::Gap>& gaps) {
  std::string out = "incomplete annotations, " + std::to_string(gaps.size()) +
                    " missing label(s):";
  for (const auto& g : gaps) {
    out += " [" + g.annotator + ": " + to_string(g.item) + "]";
  }
  return out;
}

}  // namespace

std::string_view to_string(Label label) {
  return kLabelNames.at(static_cast<std::size_t>(label));
}

Label label_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == s) return static_cast<Label>(i);
  }
  throw AnnotationError("unknown label '" + std::string(s) + "'");
}

std::string to_string(const ItemKey& item) {
  return "(" + item.game_id + ", " + std::to_string(item.seq) + ")";
}

std::vector<AnnotationSet> parse_annotations(const std::string& text) {
  std::vector<AnnotationSet> sets;
  std::map<std::string, std::size_t> index;
  std::set<std::pair<std::string, ItemKey>> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw SchemaError(lineno, "", std::string("not JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError(lineno, "", "expected an object");
    auto str_field = [&](const char* name) {
      if (!j.contains(name) || !j[name].is_string() ||
          j[name].get_ref<const std::string&>().empty()) {
        throw SchemaError(lineno, name, "missing or not a non-empty string");
      }
      return j[name].get<std::string>();
    };
    const std::string annotator = str_field("annotator");
    AnnotationEntry entry;
    entry.item.game_id = str_field("game_id");
    if (!j.contains("seq") || !j["seq"].is_number_unsigned()) {
      throw SchemaError(lineno, "seq", "missing or not a positive integer");
    }
    entry.item.seq = j["seq"].get<std::uint64_t>();
    try {
      entry.label = label_from_string(str_field("label"));
    } catch (const AnnotationError& e) {
      throw SchemaError(lineno, "label", e.what());
    }
    if (!seen.emplace(annotator, entry.item).second) {
      throw AnnotationError("line " + std::to_string(lineno) + ": annotator '" +
                            annotator + "' labeled " + to_string(entry.item) +
                            " twice");
    }
    auto [it, fresh] = index.emplace(annotator, sets.size());
    if (fresh) sets.push_back(AnnotationSet{annotator, {}});
    sets[it->second].entries.push_back(std::move(entry));
  }
  return sets;
}

std::vector<AnnotationSet> load_annotations(
    const std::vector<std::filesystem::path>& paths) {
  std::string all;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    all += buf.str();
    if (!all.empty() && all.back() != '\n') all += '\n';
  }
  return parse_annotations(all);
}

std::string serialize_annotations(const std::vector<AnnotationSet>& sets) {
  std::string out;
  for (const auto& set : sets) {
    for (const auto& e : set.entries) {
      Json j;
      j["annotator"] = set.annotator;
      j["game_id"] = e.item.game_id;
      j["seq"] = e.item.seq;
      j["label"] = std::string(to_string(e.label));
      out += j.dump() + "\n";
    }
  }
  return out;
}

IncompleteAnnotationError::IncompleteAnnotationError(std::vector<Gap> gaps)
    : AnnotationError(gap_message(gaps)), gaps_(std::move(gaps)) {}

AgreementMatrix build_matrix(const std::vector<AnnotationSet>& sets,
                             std::vector<ItemKey> universe) {
  if (sets.size() < 2) {
    throw AnnotationError("agreement needs at least 2 annotators, got " +
                          std::to_string(sets.size()));
  }
  std::vector<std::map<ItemKey, Label>> by_annotator;
  for (const auto& set : sets) {
    auto& labels = by_annotator.emplace_back();
    for (const auto& e : set.entries) labels[e.item] = e.label;
  }
  if (universe.empty()) {
    std::set<ItemKey> all;
    for (const auto& labels : by_annotator) {
      for (const auto& [item, label] : labels) all.insert(item);
    }
    universe.assign(all.begin(), all.end());
  }

  AgreementMatrix m;
  m.raters = static_cast<int>(sets.size());
  m.items = std::move(universe);
  m.counts.assign(m.items.size(), {});
  std::vector<IncompleteAnnotationError::Gap> gaps;
  for (std::size_t i = 0; i < m.items.size(); ++i) {
    for (std::size_t a = 0; a < sets.size(); ++a) {
      const auto it = by_annotator[a].find(m.items[i]);
      if (it == by_annotator[a].end()) {
        gaps.push_back({sets[a].annotator, m.items[i]});
        continue;
      }
      ++m.counts[i][static_cast<std::size_t>(it->second)];
    }
  }
  if (!gaps.empty()) throw IncompleteAnnotationError(std::move(gaps));
  return m;
}

double fleiss_kappa(const std::vector<std::vector<int>>& counts) {
  if (counts.empty()) throw AnnotationError("kappa needs at least one item");
  long long n = -1;
  std::vector<long long> totals;
  long long agree_pairs = 0;
  for (const auto& row : counts) {
    long long sum = 0;
    for (int c : row) {
      if (c < 0) throw AnnotationError("negative count in agreement matrix");
      sum += c;
      agree_pairs += static_cast<long long>(c) * (c - 1);
    }
    if (n < 0) n = sum;
    if (sum != n) {
      throw AnnotationError("every item needs the same number of ratings");
    }
    if (totals.size() < row.size()) totals.resize(row.size(), 0);
    for (std::size_t j = 0; j < row.size(); ++j) totals[j] += row[j];
  }
  if (n < 2) {
    throw AnnotationError("kappa needs at least 2 raters per item, got " +
                          std::to_string(n));
  }
  const auto items = static_cast<long long>(counts.size());
  long long square_sum = 0;
  for (long long t : totals) square_sum += t * t;

  // Integer sums first, so the result does not depend on item or category order.
  const double p_bar = static_cast<double>(agree_pairs) /
                       static_cast<double>(items * n * (n - 1));
  const double scale = static_cast<double>(items * n);
  const double p_e = static_cast<double>(square_sum) / (scale * scale);
  if (square_sum == items * n * items * n) return 1.0;
  return (p_bar - p_e) / (1.0 - p_e);
}

double fleiss_kappa(const AgreementMatrix& matrix) {
  std::vector<std::vector<int>> rows;
  rows.reserve(matrix.counts.size());
  for (const auto& r : matrix.counts) rows.emplace_back(r.begin(), r.end());
  return fleiss_kappa(rows);
}

std::string_view agreement_band(double kappa) {
  if (kappa < 0.0) return "poor agreement";
  if (kappa <= 0.20) return "slight agreement";
  if (kappa <= 0.40) return "fair agreement";
  if (kappa <= 0.60) return "moderate agreement";
  if (kappa <= 0.80) return "substantial agreement";
  return "almost perfect agreement";
}

Label consolidate(std::span<const Label> labels) {
  std::array<int, kNumLabels> votes{};
  for (Label l : labels) ++votes[static_cast<std::size_t>(l)];
  const int top = *std::max_element(votes.begin(), votes.end());
  if (top == 0) return Label::None;
  int holders = 0;
  std::size_t winner = 0;
  for (std::size_t j = 0; j < votes.size(); ++j) {
    if (votes[j] == top) {
      ++holders;
      winner = j;
    }
  }
  return holders == 1 ? static_cast<Label>(winner) : Label::None;
}

namespace {

struct EventIndex {
  std::map<std::string, const GameRecord*> games;

  explicit EventIndex(const std::vector<GameRecord>& records) {
    for (const auto& r : records) games[r.header.game_id] = &r;
  }

  const GameEvent* find(const ItemKey& item) const {
    const auto it = games.find(item.game_id);
    if (it == games.end()) return nullptr;
    const auto& events = it->second->events;
    // seq is contiguous from 1 in a validated record
    if (item.seq == 0 || item.seq > events.size()) return nullptr;
    const GameEvent& e = events[item.seq - 1];
    return e.seq == item.seq ? &e : nullptr;
  }
};

bool is_citizen_utterance(const GameEvent& e, PlayerId spy) {
  if (const auto* q = e.as<ev::Question>()) return q->asker != spy;
  if (const auto* a = e.as<ev::Answer>()) return a->responder != spy;
  return false;
}

}  // namespace

void validate_annotations(const std::vector<AnnotationSet>& sets,
                          const std::vector<GameRecord>& records) {
  const EventIndex index(records);
  for (const auto& set : sets) {
    for (const auto& e : set.entries) {
      const GameEvent* event = index.find(e.item);
      const std::string where = set.annotator + " " + to_string(e.item);
      if (!event) {
        throw AnnotationError(where + ": no such event");
      }
      const PlayerId spy =
          index.games.at(e.item.game_id)->header.assignment.spy_seat;
      const bool utterance = is_citizen_utterance(*event, spy);
      const bool step = event->is<ev::Reasoning>();
      bool ok = false;
      switch (e.label) {
        case Label::Exposure:
          ok = utterance;
          break;
        case Label::None:
          ok = utterance || step;
          break;
        default:
          ok = step;
          break;
      }
      if (!ok) {
        throw AnnotationError(where + ": label " + std::string(to_string(e.label)) +
                              " cannot attach to a " + std::string(event_tag(event->body)) +
                              " event");
      }
    }
  }
}

FrequencyTable category_frequencies(const std::vector<AnnotationSet>& sets,
                                    const std::vector<GameRecord>& records,
                                    GroupBy group_by, FrequencyBase base) {
  const EventIndex index(records);
  std::map<ItemKey, std::vector<Label>> votes;
  for (const auto& set : sets) {
    for (const auto& e : set.entries) votes[e.item].push_back(e.label);
  }

  std::map<std::string, FrequencyRow> rows;
  for (const auto& r : records) {
    const std::string key = group_key(r.header, group_by);
    auto& row = rows[key];
    row.group = key;
    const PlayerId spy = r.header.assignment.spy_seat;
    for (const auto& e : r.events) {
      if (is_citizen_utterance(e, spy)) ++row.citizen_utterances;
      if (base == FrequencyBase::SpySteps) {
        if (const auto* s = e.as<ev::Reasoning>(); s && s->player == spy) {
          ++row.steps;
        }
      }
    }
  }

  for (const auto& [item, labels] : votes) {
    const GameEvent* event = index.find(item);
    if (!event) continue;
    const auto& header = index.games.at(item.game_id)->header;
    auto& row = rows[group_key(header, group_by)];
    const bool step = event->is<ev::Reasoning>();
    if (step && base == FrequencyBase::AnnotatedSteps) ++row.steps;
    switch (consolidate(labels)) {
      case Label::Exposure:
        if (!step) ++row.exposure;
        break;
      case Label::Dissociation:
        if (step) ++row.dissociation;
        break;
      case Label::MemoryDistortion:
        if (step) ++row.memory_distortion;
        break;
      case Label::CharacterAmbiguityTeam:
        if (step) {
          ++row.ambiguity_team;
          ++row.character_ambiguity;
        }
        break;
      case Label::CharacterAmbiguityGoal:
        if (step) {
          ++row.ambiguity_goal;
          ++row.character_ambiguity;
        }
        break;
      case Label::None:
        break;
    }
  }

  FrequencyTable table;
  table.total.group = "Total";
  for (auto& [key, row] : rows) {
    auto& t = table.total;
    t.steps += row.steps;
    t.character_ambiguity += row.character_ambiguity;
    t.ambiguity_team += row.ambiguity_team;
    t.ambiguity_goal += row.ambiguity_goal;
    t.memory_distortion += row.memory_distortion;
    t.dissociation += row.dissociation;
    t.citizen_utterances += row.citizen_utterances;
    t.exposure += row.exposure;
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string render_frequencies(const FrequencyTable& table) {
  const std::vector<std::string> header = {
      "Group", "N", "CharAmbiguity(%)", "Team(%)", "Goal(%)",
      "MemoryDistortion(%)", "Dissociation(%)", "Exposure(%)"};
  auto cells = [](const FrequencyRow& r) {
    auto p = [&](std::size_t k) { return fixed(FrequencyRow::pct(k, r.steps), 2); };
    return std::vector<std::string>{
        r.group,
        std::to_string(r.steps),
        p(r.character_ambiguity),
        p(r.ambiguity_team),
        p(r.ambiguity_goal),
        p(r.memory_distortion),
        p(r.dissociation),
        fixed(FrequencyRow::pct(r.exposure, r.citizen_utterances), 2) + " (" +
            std::to_string(r.exposure) + "/" +
            std::to_string(r.citizen_utterances) + ")"};
  };
  std::vector<std::vector<std::string>> t = {header};
  for (const auto& r : table.rows) t.push_back(cells(r));
  t.push_back(cells(table.total));
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : t) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream os;
  for (const auto& row : t) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << row[c];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[c])) << row[c];
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string render_kappa(const std::vector<AnnotationSet>& sets) {
  const AgreementMatrix m = build_matrix(sets);
  std::ostringstream os;
  const double k = fleiss_kappa(m);
  os << "items " << m.items.size() << ", raters " << m.raters << "\n";
  os << "overall kappa " << fixed(k, 4) << " (" << agreement_band(k) << ")\n";
  // One-vs-rest kappa per category, for categories that were used at all.
  for (int j = 0; j < kNumLabels; ++j) {
    std::vector<std::vector<int>> binary;
    int used = 0;
    for (const auto& row : m.counts) {
      binary.push_back({row[static_cast<std::size_t>(j)],
                        m.raters - row[static_cast<std::size_t>(j)]});
      used += row[static_cast<std::size_t>(j)];
    }
    if (used == 0) continue;
    const double kj = fleiss_kappa(binary);
    os << "  " << to_string(static_cast<Label>(j)) << " " << fixed(kj, 4) << " ("
       << agreement_band(kj) << ")\n";
  }
  return os.str();
}

}  // namespace spygame
