#pragma once

// Thematic labels over reasoning steps and utterances: agreement (Fleiss'
// kappa) and per-group category frequencies.

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spygame/game_log.hpp"
#include "spygame/metrics.hpp"

namespace spygame {

enum class Label {
  Exposure,
  Dissociation,
  MemoryDistortion,
  CharacterAmbiguityTeam,
  CharacterAmbiguityGoal,
  None,
};
inline constexpr int kNumLabels = 6;

std::string_view to_string(Label label);
Label label_from_string(std::string_view s);

class AnnotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ItemKey {
  std::string game_id;
  std::uint64_t seq = 0;

  auto operator<=>(const ItemKey&) const = default;
  bool operator==(const ItemKey&) const = default;
};

std::string to_string(const ItemKey& item);

struct AnnotationEntry {
  ItemKey item;
  Label label = Label::None;
};

struct AnnotationSet {
  std::string annotator;
  std::vector<AnnotationEntry> entries;
};

/// JSONL, one {annotator, game_id, seq, label} per line. Lines are grouped
/// into one set per annotator in first-seen order. A duplicate label for the
/// same (annotator, item) throws AnnotationError; a malformed line throws
/// SchemaError.
std::vector<AnnotationSet> parse_annotations(const std::string& text);
std::vector<AnnotationSet> load_annotations(
    const std::vector<std::filesystem::path>& paths);
std::string serialize_annotations(const std::vector<AnnotationSet>& sets);

/// Missing labels; what() lists every (annotator, game_id, seq) gap.
class IncompleteAnnotationError : public AnnotationError {
 public:
  struct Gap {
    std::string annotator;
    ItemKey item;
  };
  explicit IncompleteAnnotationError(std::vector<Gap> gaps);
  const std::vector<Gap>& gaps() const { return gaps_; }

 private:
  std::vector<Gap> gaps_;
};

struct AgreementMatrix {
  std::vector<ItemKey> items;
  // counts[i][j]: raters who put item i in category j.
  std::vector<std::array<int, kNumLabels>> counts;
  int raters = 0;
};

/// Items default to the union of everything labeled, sorted. Every annotator
/// must label every item.
AgreementMatrix build_matrix(const std::vector<AnnotationSet>& sets,
                             std::vector<ItemKey> universe = {});

/// Generic form over an items x categories table with constant row sums.
double fleiss_kappa(const std::vector<std::vector<int>>& counts);
double fleiss_kappa(const AgreementMatrix& matrix);

/// Landis and Koch bands ("moderate agreement" for 0.41 to 0.60).
std::string_view agreement_band(double kappa);

/// Plurality label; a tie for first place gives None.
Label consolidate(std::span<const Label> labels);

/// Checks every label points at an existing event of the right kind:
/// Exposure at a citizen Question/Answer, other labels at a Reasoning event
/// (None may sit on either).
void validate_annotations(const std::vector<AnnotationSet>& sets,
                          const std::vector<GameRecord>& records);

enum class FrequencyBase {
  AnnotatedSteps,  // labeled Reasoning events in the group
  SpySteps,        // every spy Reasoning event in the group
};

struct FrequencyRow {
  std::string group;
  std::size_t steps = 0;  // N
  std::size_t character_ambiguity = 0;
  std::size_t ambiguity_team = 0;
  std::size_t ambiguity_goal = 0;
  std::size_t memory_distortion = 0;
  std::size_t dissociation = 0;
  std::size_t citizen_utterances = 0;
  std::size_t exposure = 0;

  static double pct(std::size_t k, std::size_t n) {
    return n == 0 ? 0.0 : 100.0 * static_cast<double>(k) / static_cast<double>(n);
  }
};

struct FrequencyTable {
  std::vector<FrequencyRow> rows;
  FrequencyRow total;
};

FrequencyTable category_frequencies(const std::vector<AnnotationSet>& sets,
                                    const std::vector<GameRecord>& records,
                                    GroupBy group_by = GroupBy::SpyAndCitizens,
                                    FrequencyBase base = FrequencyBase::AnnotatedSteps);

std::string render_frequencies(const FrequencyTable& table);
std::string render_kappa(const std::vector<AnnotationSet>& sets);

}  // namespace spygame
