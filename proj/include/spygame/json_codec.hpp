#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "spygame/game.hpp"

namespace spygame {

using Json = nlohmann::ordered_json;

/// A log or config document that does not follow the schema.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::size_t line, std::string field, const std::string& message)
      : std::runtime_error(format(line, field, message)),
        line_(line),
        field_(std::move(field)) {}

  /// 1-based line number, or 0 when not line-oriented.
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(std::size_t line, const std::string& field,
                            const std::string& message) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + message;
  }

  std::size_t line_;
  std::string field_;
};

Json to_json(const LocationCard& card);
LocationCard card_from_json(const Json& j);

/// Game settings without the deck (records store only the dealt card).
Json to_json(const GameConfig& config, bool include_deck);
GameConfig config_from_json(const Json& j);

Json to_json(const Assignment& a);
Assignment assignment_from_json(const Json& j);

Json to_json(const Outcome& o);
Outcome outcome_from_json(const Json& j);

/// One event as a flat object {"seq":..,"type":..,...}. Field checks throw
/// SchemaError with the offending field name (line 0).
Json to_json(const GameEvent& e);
GameEvent event_from_json(const Json& j);

/// Full dump used to compare states byte for byte.
Json to_json(const GameState& s);

}  // namespace spygame
