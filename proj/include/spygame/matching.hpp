#pragma once

#include <string>
#include <string_view>

#include "spygame/types.hpp"

namespace spygame {

/// Lowercases ASCII, strips punctuation, collapses whitespace and drops a
/// leading article ("a", "an", "the").
std::string normalize_location_text(std::string_view text);

/// Whether a spy's guess names the card (its canonical name or any alias).
bool match_location(std::string_view guess_text, const LocationCard& card);

/// Whether an utterance literally contains the card's name or an alias as a
/// case-insensitive whole-word match.
bool detect_exposure(std::string_view utterance, const LocationCard& card);

/// Whole-word, case-insensitive search for `phrase` inside `text`.
bool contains_word_phrase(std::string_view text, std::string_view phrase);

}  // namespace spygame
