#pragma once

#include <string>
#include <vector>

#include "safecards/engine.hpp"

namespace safecards {

// JSON-lines transcript of one game:
//   {"type":"transcript","schema_version":1,"event_count":N,"initial_state":{...}}
//   N engine events, one per line
//   {"type":"final","outcome":{...},"state":{...}}
// A transcript with event_count 0 may omit the final line.
std::string write_transcript(const GameState& initial, const std::vector<Event>& events, const GameState& final_state);

struct ReplayResult {
  GameState initial;
  GameState final_state;
  std::vector<Event> events;
  Outcome outcome;
};

// Replays the events over the initial state and checks the result against the
// recorded final state. Throws ParseError for malformed input and
// ReplayMismatch for truncated or inconsistent transcripts.
ReplayResult replay_transcript(const std::string& text);

std::string outcome_text(const Outcome& outcome);

}  // namespace safecards
