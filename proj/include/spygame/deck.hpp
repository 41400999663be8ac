#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "spygame/types.hpp"

namespace spygame {

/// Seven locations with seven characters each. "school", "airplane" and
/// "restaurant" follow the game's published examples; the others are
/// original and non-canonical.
const std::vector<LocationCard>& default_deck();

GameConfig default_game_config();

/// Looks up a card by canonical name (exact match).
std::optional<LocationCard> find_card(const std::vector<LocationCard>& deck,
                                      std::string_view name);

}  // namespace spygame
