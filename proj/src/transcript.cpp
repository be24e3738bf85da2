#include "safecards/transcript.hpp"

#include <sstream>

#include "safecards/codec.hpp"

namespace safecards {

namespace {

Json outcome_to_json(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::kWon:
      return {{"kind", "won"}, {"seat", o.seat}};
    case Outcome::Kind::kStalled:
      return {{"kind", "stalled"}};
    case Outcome::Kind::kNone:
      break;
  }
  return {{"kind", "none"}};
}

}  // namespace

std::string outcome_text(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::kWon:
      return "won by seat " + std::to_string(o.seat);
    case Outcome::Kind::kStalled:
      return "stalled";
    case Outcome::Kind::kNone:
      break;
  }
  return "in progress";
}

std::string write_transcript(const GameState& initial, const std::vector<Event>& events, const GameState& final_state) {
  std::string out;
  Json header = {{"type", "transcript"},
                 {"schema_version", kStateSchemaVersion},
                 {"event_count", events.size()},
                 {"initial_state", state_to_json(initial)}};
  out += header.dump() + '\n';
  out += events_to_jsonl(events, *initial.deck, initial.pack());
  Json final_line = {{"type", "final"}, {"outcome", outcome_to_json(is_terminal(final_state))},
                     {"state", state_to_json(final_state)}};
  out += final_line.dump() + '\n';
  return out;
}

ReplayResult replay_transcript(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::optional<GameState> initial;
  std::optional<GameState> recorded_final;
  std::size_t expected = 0;
  ReplayResult result;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const Json doc = Json::parse(line);
      const auto type = doc.at("type").get<std::string>();
      if (!initial) {
        if (type != "transcript") throw Error(ErrorCode::kParse, "first line must be the transcript header");
        if (doc.at("schema_version").get<int>() != kStateSchemaVersion) {
          throw Error(ErrorCode::kVersion, "unsupported transcript schema version");
        }
        expected = doc.at("event_count").get<std::size_t>();
        initial = state_from_json(doc.at("initial_state"));
        continue;
      }
      if (recorded_final) throw Error(ErrorCode::kParse, "line " + std::to_string(line_no) + ": data after final line");
      if (type == "final") {
        recorded_final = state_from_json(doc.at("state"));
      } else {
        result.events.push_back(event_from_json(doc, *initial->deck, initial->pack()));
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, "transcript line " + std::to_string(line_no) + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIllegalMove) {
      throw Error(ErrorCode::kParse, "transcript line " + std::to_string(line_no) + ": " + e.what());
    }
    throw;
  }
  if (!initial) throw Error(ErrorCode::kParse, "empty transcript");
  if (result.events.size() != expected) {
    throw Error(ErrorCode::kReplayMismatch, "transcript truncated: header declares " + std::to_string(expected) +
                                                " events, found " + std::to_string(result.events.size()));
  }
  if (!recorded_final && expected > 0) throw Error(ErrorCode::kReplayMismatch, "transcript truncated: no final state");

  result.final_state = replay_events(*initial, result.events);
  if (recorded_final && !(*recorded_final == result.final_state)) {
    throw Error(ErrorCode::kReplayMismatch, "replayed state differs from the recorded final state");
  }
  result.initial = std::move(*initial);
  result.outcome = is_terminal(result.final_state);
  return result;
}

}  // namespace safecards
