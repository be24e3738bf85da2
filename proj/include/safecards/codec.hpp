#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "safecards/engine.hpp"
#include "safecards/view.hpp"

namespace safecards {

inline constexpr int kStateSchemaVersion = 1;

using Json = nlohmann::json;

Json card_to_json(const Card& card, const ContentPack& pack);

Json move_to_json(const Move& move, const Deck& deck, const ContentPack& pack);
// Throws ParseError for malformed documents and IllegalMove/UNKNOWN_CARD or
// UNKNOWN_CATEGORY for ids that do not exist.
Move move_from_json(const Json& doc, const Deck& deck, const ContentPack& pack);

// Redacted cards (kNoCard) are written as null. CardsPlayed carries the text
// of every visible card.
Json event_to_json(const Event& event, const Deck& deck, const ContentPack& pack);
Event event_from_json(const Json& doc, const Deck& deck, const ContentPack& pack);

Json view_to_json(const PlayerView& view);

// Self-contained state document (embeds the pack). See docs/state-format.md.
Json state_to_json(const GameState& state);
std::string serialize_state(const GameState& state);
// Throws ParseError, VersionError, or ValidationError (CARD_CONSERVATION etc).
GameState state_from_json(const Json& doc);
GameState deserialize_state(const std::string& document);

// One compact JSON object per line.
std::string events_to_jsonl(const std::vector<Event>& events, const Deck& deck, const ContentPack& pack);
std::vector<Event> events_from_jsonl(const std::string& text, const Deck& deck, const ContentPack& pack);

}  // namespace safecards
