#include "spygame/matching.hpp"

#include <cctype>
#include <vector>

namespace spygame {

namespace {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

}  // namespace

std::string normalize_location_text(std::string_view text) {
  std::vector<std::string> tokens = tokenize(text);
  std::size_t first = 0;
  if (tokens.size() > 1 &&
      (tokens[0] == "a" || tokens[0] == "an" || tokens[0] == "the")) {
    first = 1;
  }
  std::string out;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

bool match_location(std::string_view guess_text, const LocationCard& card) {
  const std::string guess = normalize_location_text(guess_text);
  if (guess.empty()) return false;
  if (guess == normalize_location_text(card.name)) return true;
  for (const auto& alias : card.aliases) {
    if (guess == normalize_location_text(alias)) return true;
  }
  return false;
}

bool contains_word_phrase(std::string_view text, std::string_view phrase) {
  const auto hay = tokenize(text);
  const auto needle = tokenize(phrase);
  if (needle.empty() || needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (hay[i + j] != needle[j]) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

bool detect_exposure(std::string_view utterance, const LocationCard& card) {
  if (contains_word_phrase(utterance, card.name)) return true;
  for (const auto& alias : card.aliases) {
    if (contains_word_phrase(utterance, alias)) return true;
  }
  return false;
}

}  // namespace spygame
