#pragma once

// Gameplay metrics. Every metric is a pure aggregation over GameFacts, the
// per-game booleans and counters extracted from a record.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spygame/game_log.hpp"
#include "spygame/matching.hpp"

namespace spygame {

class DeckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GameFacts {
  std::string game_id;
  std::string spy_agent;
  std::string citizen_strength;
  std::string location;
  PlayerId spy_seat = 0;
  bool spy_won = false;
  int end_turn = 0;
  bool guess_attempted = false;  // a guess was announced
  bool guess_correct = false;    // the announced guess was right
  bool noticed = false;          // some secret guess matched, any certainty
  bool exposure_occurred = false;
  bool spy_lost = false;
  bool spy_caught = false;
  // (voter, target) with voter != spy.
  std::vector<std::pair<PlayerId, PlayerId>> suspicion_ballots;
  bool aborted = false;
  // Settings the facts were derived under.
  VoteSources vote_sources = VoteSources::FinalAndDay;
  bool tie_counts_as_caught = true;
};

struct FactsOptions {
  // Overrides the mode stored in the record's config.
  std::optional<VoteSources> vote_sources;
  // Whether a spy sharing the final-vote maximum counts as caught.
  bool tie_counts_as_caught = true;
};

/// Throws DeckError when the record's location is not in `deck`.
GameFacts derive_facts(const GameRecord& record,
                       const std::vector<LocationCard>& deck,
                       const FactsOptions& options = {});

struct Ratio {
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  /// 100 * numerator / denominator; absent when the denominator is 0.
  std::optional<double> percent() const {
    if (denominator == 0) return std::nullopt;
    return 100.0 * static_cast<double>(numerator) /
           static_cast<double>(denominator);
  }
};

using FactsView = std::span<const GameFacts>;

Ratio win_rate(FactsView facts);
std::optional<double> living_round(FactsView facts);
Ratio guess_success(FactsView facts);
Ratio notice_rate(FactsView facts);
Ratio information_catching(FactsView facts);
Ratio information_deduction(FactsView facts);
Ratio caught_rate(FactsView facts);
Ratio vote_rate(FactsView facts);
std::optional<double> vote_entropy(FactsView facts);

/// Shannon entropy (natural log) of a tally vector; zero entries ignored.
double tally_entropy(std::span<const int> tallies);
/// Entropy of the target distribution of one game's suspicion ballots.
double ballot_entropy(const std::vector<std::pair<PlayerId, PlayerId>>& ballots);

enum class GroupBy { SpyAndCitizens, Spy, Citizens, Location, None };

GroupBy group_by_from_string(std::string_view s);

struct MetricRow {
  std::string group;
  std::size_t games = 0;
  std::size_t aborted = 0;
  Ratio wr;
  std::optional<double> lr;
  Ratio gs;
  Ratio nr;
  Ratio ic;
  Ratio id;
  Ratio cr;
  Ratio vr;
  std::optional<double> ve;
};

MetricRow compute_row(std::string group, FactsView facts);

struct ReportOptions {
  GroupBy group_by = GroupBy::SpyAndCitizens;
  std::optional<VoteSources> vote_sources;
  bool include_aborted = false;
  bool tie_counts_as_caught = true;
};

struct MetricReport {
  std::vector<MetricRow> rows;
  MetricRow total;
  std::string vote_sources;  // mode(s) the ballots were read under
  bool include_aborted = false;
  std::vector<std::string> warnings;
};

std::string group_key(const GameFacts& facts, GroupBy group_by);
std::string group_key(const RecordHeader& header, GroupBy group_by);

MetricReport build_report(const std::vector<GameRecord>& records,
                          const std::vector<LocationCard>& deck,
                          const ReportOptions& options = {});
MetricReport report_from_facts(const std::vector<GameFacts>& facts,
                               const ReportOptions& options = {});

/// Aligned plain-text table; "-" marks an absent value and denominators are
/// printed in parentheses.
std::string render_report_text(const MetricReport& report);
std::string render_report_csv(const MetricReport& report);

}  // namespace spygame
