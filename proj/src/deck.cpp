#include "spygame/deck.hpp"

namespace spygame {

const std::vector<LocationCard>& default_deck() {
  static const std::vector<LocationCard> deck = {
      {"school",
       {"schools"},
       {"student", "principal", "teacher", "janitor", "librarian", "coach",
        "counselor"}},
      {"airplane",
       {"airplanes", "plane", "aircraft"},
       {"pilot", "flight attendant", "first-class passenger",
        "economy passenger", "co-pilot", "air marshal", "mechanic"}},
      {"restaurant",
       {"restaurants"},
       {"chef", "waiter", "sommelier", "dishwasher", "host", "food critic",
        "manager"}},
      {"hospital",
       {"hospitals"},
       {"doctor", "nurse", "surgeon", "patient", "receptionist", "paramedic",
        "pharmacist"}},
      {"beach",
       {"beaches"},
       {"lifeguard", "surfer", "ice cream vendor", "tourist", "photographer",
        "sunbather", "fisherman"}},
      {"bank",
       {"banks"},
       {"teller", "branch manager", "security guard", "customer",
        "loan officer", "robber", "accountant"}},
      {"submarine",
       {"submarines", "sub"},
       {"captain", "sonar operator", "navigator", "cook", "engineer",
        "radio officer", "sailor"}},
  };
  return deck;
}

GameConfig default_game_config() {
  GameConfig config;
  config.location_deck = default_deck();
  return config;
}

std::optional<LocationCard> find_card(const std::vector<LocationCard>& deck,
                                      std::string_view name) {
  for (const auto& card : deck) {
    if (card.name == name) return card;
  }
  return std::nullopt;
}

}  // namespace spygame
