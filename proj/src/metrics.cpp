#include "spygame/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "spygame/deck.hpp"

namespace spygame {

namespace {

template <typename Pred>
Ratio count_ratio(FactsView facts, Pred&& in_numerator,
                  bool (*in_denominator)(const GameFacts&)) {
  Ratio r;
  for (const auto& f : facts) {
    if (!in_denominator(f)) continue;
    ++r.denominator;
    if (in_numerator(f)) ++r.numerator;
  }
  return r;
}

bool any_game(const GameFacts&) { return true; }

bool spy_holds_strict_max(const std::vector<ev::FinalVoteBallot>& ballots,
                          PlayerId spy) {
  std::map<PlayerId, int> tally;
  for (const auto& b : ballots) ++tally[b.target];
  const auto it = tally.find(spy);
  if (it == tally.end()) return false;
  for (const auto& [seat, c] : tally) {
    if (seat != spy && c >= it->second) return false;
  }
  return true;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string cell(const std::optional<double>& v, int digits) {
  return v ? fixed(*v, digits) : "-";
}

std::string cell_n(const Ratio& r, int digits) {
  return cell(r.percent(), digits) + " (" + std::to_string(r.denominator) + ")";
}

}  // namespace

GameFacts derive_facts(const GameRecord& record,
                       const std::vector<LocationCard>& deck,
                       const FactsOptions& options) {
  const auto card = find_card(deck, record.location());
  if (!card) {
    throw DeckError("game " + record.header.game_id + ": location '" +
                    record.location() + "' is not in the deck");
  }
  GameFacts f;
  f.game_id = record.header.game_id;
  f.spy_agent = record.header.spy_agent_id;
  f.citizen_strength = record.header.citizen_strength;
  f.location = card->name;
  f.spy_seat = record.header.assignment.spy_seat;
  f.vote_sources = options.vote_sources.value_or(record.header.config.vote_sources);
  f.tie_counts_as_caught = options.tie_counts_as_caught;
  f.end_turn = terminal_turn(record);

  const PlayerId spy = f.spy_seat;
  const bool count_day = f.vote_sources == VoteSources::FinalAndDay;
  std::optional<PlayerId> accused;
  std::vector<ev::FinalVoteBallot> final_ballots;
  std::optional<EndCause> cause;
  for (const auto& e : record.events) {
    if (const auto* g = e.as<ev::SecretGuess>()) {
      if (match_location(g->location_text, *card)) f.noticed = true;
    } else if (const auto* g = e.as<ev::GuessAnnounced>()) {
      f.guess_attempted = true;
      f.guess_correct = g->correct;
    } else if (const auto* q = e.as<ev::Question>()) {
      if (q->asker != spy && detect_exposure(q->text, *card)) {
        f.exposure_occurred = true;
      }
    } else if (const auto* a = e.as<ev::Answer>()) {
      if (a->responder != spy && detect_exposure(a->text, *card)) {
        f.exposure_occurred = true;
      }
    } else if (const auto* a = e.as<ev::Accusation>()) {
      accused = a->accused;
    } else if (const auto* b = e.as<ev::DayVoteBallot>()) {
      if (count_day && b->agree && b->voter != spy && accused) {
        f.suspicion_ballots.emplace_back(b->voter, *accused);
      }
    } else if (const auto* b = e.as<ev::FinalVoteBallot>()) {
      final_ballots.push_back(*b);
      if (b->voter != spy) f.suspicion_ballots.emplace_back(b->voter, b->target);
    } else if (const auto* end = e.as<ev::GameEnd>()) {
      cause = end->cause;
    }
  }

  f.aborted = !cause || *cause == EndCause::Aborted || !record.complete();
  if (!f.aborted) {
    f.spy_won = spy_wins_by(*cause);
    f.spy_lost = !f.spy_won;
    if (*cause == EndCause::DayVoteSpyEliminated) {
      f.spy_caught = true;
    } else if (*cause == EndCause::FinalVoteSpyToppedOrTie) {
      f.spy_caught = options.tie_counts_as_caught
                         ? spy_holds_max(final_ballots, spy)
                         : spy_holds_strict_max(final_ballots, spy);
    }
  }
  return f;
}

Ratio win_rate(FactsView facts) {
  return count_ratio(facts, [](const GameFacts& f) { return f.spy_won; }, any_game);
}

std::optional<double> living_round(FactsView facts) {
  if (facts.empty()) return std::nullopt;
  double sum = 0;
  for (const auto& f : facts) sum += f.end_turn;
  return sum / static_cast<double>(facts.size());
}

Ratio guess_success(FactsView facts) {
  return count_ratio(
      facts, [](const GameFacts& f) { return f.guess_correct; },
      [](const GameFacts& f) { return f.guess_attempted; });
}

Ratio notice_rate(FactsView facts) {
  return count_ratio(facts, [](const GameFacts& f) { return f.noticed; }, any_game);
}

Ratio information_catching(FactsView facts) {
  return count_ratio(
      facts, [](const GameFacts& f) { return f.guess_correct; },
      [](const GameFacts& f) { return f.exposure_occurred; });
}

Ratio information_deduction(FactsView facts) {
  return count_ratio(
      facts, [](const GameFacts& f) { return f.guess_correct; },
      [](const GameFacts& f) { return !f.exposure_occurred; });
}

Ratio caught_rate(FactsView facts) {
  return count_ratio(
      facts, [](const GameFacts& f) { return f.spy_caught; },
      [](const GameFacts& f) { return f.spy_lost; });
}

Ratio vote_rate(FactsView facts) {
  Ratio r;
  for (const auto& f : facts) {
    for (const auto& [voter, target] : f.suspicion_ballots) {
      ++r.denominator;
      if (target == f.spy_seat) ++r.numerator;
    }
  }
  return r;
}

double tally_entropy(std::span<const int> tallies) {
  double total = 0;
  for (int t : tallies) total += t;
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (int t : tallies) {
    if (t <= 0) continue;
    const double p = t / total;
    h -= p * std::log(p);
  }
  return h;
}

double ballot_entropy(const std::vector<std::pair<PlayerId, PlayerId>>& ballots) {
  std::map<PlayerId, int> tally;
  for (const auto& [voter, target] : ballots) ++tally[target];
  std::vector<int> counts;
  for (const auto& [seat, c] : tally) counts.push_back(c);
  return tally_entropy(counts);
}

std::optional<double> vote_entropy(FactsView facts) {
  double sum = 0;
  std::size_t games = 0;
  for (const auto& f : facts) {
    if (f.suspicion_ballots.empty()) continue;
    sum += ballot_entropy(f.suspicion_ballots);
    ++games;
  }
  if (games == 0) return std::nullopt;
  return sum / static_cast<double>(games);
}

GroupBy group_by_from_string(std::string_view s) {
  if (s == "spy,citizens" || s == "citizens,spy" || s == "matchup") {
    return GroupBy::SpyAndCitizens;
  }
  if (s == "spy") return GroupBy::Spy;
  if (s == "citizens") return GroupBy::Citizens;
  if (s == "location") return GroupBy::Location;
  if (s == "none") return GroupBy::None;
  throw ConfigError("unknown grouping '" + std::string(s) + "'");
}

namespace {

std::string make_key(const std::string& spy, const std::string& citizens,
                     const std::string& location, GroupBy group_by) {
  switch (group_by) {
    case GroupBy::SpyAndCitizens:
      return spy + " vs " + citizens;
    case GroupBy::Spy:
      return spy;
    case GroupBy::Citizens:
      return "vs " + citizens;
    case GroupBy::Location:
      return location;
    case GroupBy::None:
      break;
  }
  return "all";
}

}  // namespace

std::string group_key(const GameFacts& f, GroupBy group_by) {
  return make_key(f.spy_agent, f.citizen_strength, f.location, group_by);
}

std::string group_key(const RecordHeader& h, GroupBy group_by) {
  return make_key(h.spy_agent_id, h.citizen_strength, h.assignment.location.name,
                  group_by);
}

MetricRow compute_row(std::string group, FactsView facts) {
  MetricRow row;
  row.group = std::move(group);
  row.games = facts.size();
  row.wr = win_rate(facts);
  row.lr = living_round(facts);
  row.gs = guess_success(facts);
  row.nr = notice_rate(facts);
  row.ic = information_catching(facts);
  row.id = information_deduction(facts);
  row.cr = caught_rate(facts);
  row.vr = vote_rate(facts);
  row.ve = vote_entropy(facts);
  return row;
}

MetricReport report_from_facts(const std::vector<GameFacts>& facts,
                               const ReportOptions& options) {
  MetricReport report;
  report.include_aborted = options.include_aborted;

  std::map<std::string, std::vector<GameFacts>> groups;
  std::map<std::string, std::size_t> aborted;
  std::vector<GameFacts> pooled;
  std::set<std::string> modes;
  for (const auto& f : facts) {
    const std::string key = group_key(f, options.group_by);
    groups[key];
    modes.insert(std::string(to_string(f.vote_sources)));
    if (f.aborted) {
      ++aborted[key];
      if (!options.include_aborted) continue;
    }
    groups[key].push_back(f);
    pooled.push_back(f);
  }
  for (auto& [key, members] : groups) {
    if (members.empty()) {
      report.warnings.push_back("group '" + key +
                                "' has no usable games and is omitted");
      continue;
    }
    MetricRow row = compute_row(key, members);
    row.aborted = aborted[key];
    report.rows.push_back(std::move(row));
  }
  std::size_t total_aborted = 0;
  for (const auto& [key, n] : aborted) total_aborted += n;
  report.total = compute_row("Total", pooled);
  report.total.aborted = total_aborted;
  for (const auto& m : modes) {
    if (!report.vote_sources.empty()) report.vote_sources += ",";
    report.vote_sources += m;
  }
  if (report.vote_sources.empty()) {
    report.vote_sources = std::string(
        to_string(options.vote_sources.value_or(VoteSources::FinalAndDay)));
  }
  return report;
}

MetricReport build_report(const std::vector<GameRecord>& records,
                          const std::vector<LocationCard>& deck,
                          const ReportOptions& options) {
  FactsOptions fo;
  fo.vote_sources = options.vote_sources;
  fo.tie_counts_as_caught = options.tie_counts_as_caught;
  std::vector<GameFacts> facts;
  facts.reserve(records.size());
  for (const auto& r : records) facts.push_back(derive_facts(r, deck, fo));
  return report_from_facts(facts, options);
}

std::string render_report_text(const MetricReport& report) {
  const std::vector<std::string> header = {
      "Group", "Games", "WR(%)", "LR", "GS(%)", "NR(%)",
      "IC(%)", "ID(%)", "CR(%)", "VR(%)", "VE"};
  auto cells = [](const MetricRow& r) {
    return std::vector<std::string>{
        r.group,           std::to_string(r.games), cell(r.wr.percent(), 2),
        cell(r.lr, 2),     cell_n(r.gs, 2),        cell(r.nr.percent(), 2),
        cell_n(r.ic, 2),   cell_n(r.id, 2),        cell_n(r.cr, 2),
        cell_n(r.vr, 1),   cell(r.ve, 3)};
  };
  std::vector<std::vector<std::string>> table = {header};
  for (const auto& r : report.rows) table.push_back(cells(r));
  table.push_back(cells(report.total));

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::ostringstream os;
  os << "# vote sources: " << report.vote_sources << "; aborted games "
     << (report.include_aborted ? "included" : "excluded") << " ("
     << report.total.aborted << ")\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i + 1 == table.size()) {
      std::size_t line = 0;
      for (auto w : width) line += w + 2;
      os << std::string(line - 2, '-') << "\n";
    }
    for (std::size_t c = 0; c < table[i].size(); ++c) {
      if (c == 0) {
        os << std::left << std::setw(static_cast<int>(width[c])) << table[i][c];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[c]))
           << table[i][c];
      }
    }
    os << "\n";
  }
  for (const auto& w : report.warnings) os << "# warning: " << w << "\n";
  return os.str();
}

std::string render_report_csv(const MetricReport& report) {
  std::ostringstream os;
  os << "group,games,aborted,wr,lr,gs,gs_n,nr,ic,ic_n,id,id_n,cr,cr_n,vr,vr_n,"
        "ve,vote_sources\n";
  auto row_line = [&](const MetricRow& r) {
    std::string group = r.group;
    if (group.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : group) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      group = quoted + "\"";
    }
    os << group << ',' << r.games << ',' << r.aborted << ','
       << cell(r.wr.percent(), 4) << ',' << cell(r.lr, 4) << ','
       << cell(r.gs.percent(), 4) << ',' << r.gs.denominator << ','
       << cell(r.nr.percent(), 4) << ',' << cell(r.ic.percent(), 4) << ','
       << r.ic.denominator << ',' << cell(r.id.percent(), 4) << ','
       << r.id.denominator << ',' << cell(r.cr.percent(), 4) << ','
       << r.cr.denominator << ',' << cell(r.vr.percent(), 4) << ','
       << r.vr.denominator << ',' << cell(r.ve, 6) << ','
       << report.vote_sources << '\n';
  };
  for (const auto& r : report.rows) row_line(r);
  row_line(report.total);
  return os.str();
}

}  // namespace spygame
