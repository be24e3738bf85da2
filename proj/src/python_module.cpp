// Python bindings. Structured values cross the boundary as JSON text; the
// pure-Python package decodes them.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "safecards/codec.hpp"
#include "safecards/policies.hpp"
#include "safecards/simulator.hpp"
#include "safecards/transcript.hpp"
#include "safecards/view.hpp"

namespace py = pybind11;
using namespace safecards;

namespace {

Ruleset ruleset_arg(const std::string& name) {
  const auto r = parse_ruleset(name);
  if (!r) throw Error(ErrorCode::kConfig, "unknown ruleset '" + name + "'");
  return *r;
}

PackPtr pack_arg(const std::string& pack_json) {
  if (pack_json.empty()) return default_pack_ptr();
  return std::make_shared<const ContentPack>(load_pack(pack_json));
}

std::string outcome_kind(const Outcome& o) {
  switch (o.kind) {
    case Outcome::Kind::kWon: return "won";
    case Outcome::Kind::kStalled: return "stalled";
    case Outcome::Kind::kNone: break;
  }
  return "none";
}

py::list violations_list(const std::vector<Violation>& vs) {
  py::list out;
  for (const auto& v : vs) out.append(py::make_tuple(v.code, v.path, v.message));
  return out;
}

std::string events_json(const std::vector<Event>& events, const GameState& s) {
  Json arr = Json::array();
  for (const auto& e : events) arr.push_back(event_to_json(e, *s.deck, s.pack()));
  return arr.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Card game engine core";

  static py::exception<Error> error_type(m, "SafecardsError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object cls = error_type;
      py::object err = cls(std::string(e.what()));
      err.attr("code") = std::string(error_code_name(e.code()));
      err.attr("rule_code") = e.rule_code().empty() ? py::object(py::none()) : py::str(e.rule_code());
      err.attr("violations") = violations_list(e.violations());
      PyErr_SetObject(error_type.ptr(), err.ptr());
    }
  });

  py::class_<GameState>(m, "State")
      .def_property_readonly("ruleset", [](const GameState& s) { return std::string(ruleset_name(s.config.ruleset)); })
      .def_property_readonly("player_count", [](const GameState& s) { return s.config.player_count; })
      .def_property_readonly("current_seat", [](const GameState& s) { return s.current_seat; })
      .def_property_readonly("turn_index", [](const GameState& s) { return s.turn_index; })
      .def_property_readonly("phase", [](const GameState& s) { return std::string(phase_name(s.phase)); })
      .def_property_readonly("hand_sizes",
                             [](const GameState& s) {
                               std::vector<int> out;
                               for (const auto& h : s.hands) out.push_back(static_cast<int>(h.size()));
                               return out;
                             })
      .def_property_readonly("draw_pile_size", [](const GameState& s) { return s.draw_pile.size(); })
      .def("legal_moves_json",
           [](const GameState& s) {
             Json arr = Json::array();
             for (const auto& mv : legal_moves(s)) arr.push_back(move_to_json(mv, *s.deck, s.pack()));
             return arr.dump();
           })
      .def(
          "apply_json",
          [](const GameState& s, int seat, const std::string& move_json) {
            Json doc;
            try {
              doc = Json::parse(move_json);
            } catch (const Json::exception& e) {
              throw Error(ErrorCode::kParse, e.what());
            }
            Transition t = apply_move(s, seat, move_from_json(doc, *s.deck, s.pack()));
            const std::string events = events_json(t.events, t.state);
            return py::make_tuple(std::move(t.state), events);
          },
          py::arg("seat"), py::arg("move_json"))
      .def("view_json", [](const GameState& s, int seat) { return view_to_json(player_view(s, seat)).dump(); })
      .def("to_json", [](const GameState& s) { return serialize_state(s); })
      .def_static("from_json", [](const std::string& text) { return deserialize_state(text); })
      .def("outcome",
           [](const GameState& s) {
             const Outcome o = is_terminal(s);
             return py::make_tuple(outcome_kind(o), o.seat < 0 ? py::object(py::none()) : py::int_(o.seat));
           })
      .def("check", [](const GameState& s) { return violations_list(check_state(s)); })
      .def("state_hash", [](const GameState& s) { return state_hash(s); })
      .def("__eq__", [](const GameState& a, const GameState& b) { return a == b; })
      .def("__repr__", [](const GameState& s) {
        return "<State " + std::string(ruleset_name(s.config.ruleset)) + " turn " + std::to_string(s.turn_index) +
               " seat " + std::to_string(s.current_seat) + " " + std::string(phase_name(s.phase)) + ">";
      });

  m.def(
      "new_game",
      [](const std::string& ruleset, int players, uint64_t seed, int hand_size, int penalty_draw,
         bool strict_precedence, int turn_cap, const std::string& pack_json) {
        GameConfig cfg;
        cfg.ruleset = ruleset_arg(ruleset);
        cfg.player_count = players;
        cfg.seed = seed;
        cfg.hand_size = hand_size;
        cfg.penalty_draw = penalty_draw;
        cfg.strict_precedence = strict_precedence;
        cfg.turn_cap = turn_cap;
        cfg.pack = pack_arg(pack_json);
        return new_game(cfg);
      },
      py::arg("ruleset") = "v1-base", py::arg("players") = 4, py::arg("seed") = 0, py::arg("hand_size") = 7,
      py::arg("penalty_draw") = 2, py::arg("strict_precedence") = true, py::arg("turn_cap") = 500,
      py::arg("pack_json") = "");

  m.def(
      "deck_json",
      [](const std::string& ruleset, const std::string& pack_json) {
        const PackPtr pack = pack_arg(pack_json);
        const Deck d = build_deck(*pack, ruleset_arg(ruleset));
        Json out = {{"main_pile", Json::array()}, {"challenge_pile", Json::array()}};
        for (CardIndex c : d.main_pile) out["main_pile"].push_back(card_to_json(d.card(c), *pack));
        for (CardIndex c : d.challenge_pile) out["challenge_pile"].push_back(card_to_json(d.card(c), *pack));
        return out.dump();
      },
      py::arg("ruleset") = "v1-base", py::arg("pack_json") = "");

  m.def("default_pack_json", [] { return serialize_pack(default_pack()); });

  m.def(
      "validate_pack",
      [](const std::string& text, bool lenient) {
        try {
          load_pack(text, {lenient});
        } catch (const Error& e) {
          if (e.code() == ErrorCode::kValidation) return violations_list(e.violations());
          throw;
        }
        return py::list();
      },
      py::arg("text"), py::arg("lenient") = false);

  m.def(
      "policy_move_json",
      [](const GameState& s, const std::string& policy, uint64_t seed, double tf_accuracy) {
        const auto p = make_policy(policy, tf_accuracy);
        Pcg32 rng(seed, 1);
        const auto moves = legal_moves(s);
        return move_to_json(p->choose(player_view(s, s.current_seat), moves, rng), *s.deck, s.pack()).dump();
      },
      py::arg("state"), py::arg("policy") = "random", py::arg("seed") = 0, py::arg("tf_accuracy") = 0.5);

  m.def(
      "simulate",
      [](int games, const std::string& ruleset, const std::vector<std::string>& policies, uint64_t seed, int players,
         int threads, double tf_accuracy, bool check_invariants, int turn_cap, const std::string& format) {
        SimConfig c;
        c.games = games;
        c.base.ruleset = ruleset_arg(ruleset);
        c.base.player_count = players;
        c.base.turn_cap = turn_cap;
        c.policies = policies;
        c.master_seed = seed;
        c.parallelism = threads;
        c.tf_accuracy = tf_accuracy;
        c.check_invariants = check_invariants;
        if (format != "csv" && format != "jsonl") throw Error(ErrorCode::kConfig, "format must be csv or jsonl");
        SimStats st;
        {
          py::gil_scoped_release release;
          st = run_simulation(c);
        }
        return export_stats(st, format == "csv" ? StatsFormat::kCsv : StatsFormat::kJsonl);
      },
      py::arg("games"), py::arg("ruleset") = "v1-base", py::arg("policies") = std::vector<std::string>{"random"},
      py::arg("seed") = 0, py::arg("players") = 4, py::arg("threads") = 1, py::arg("tf_accuracy") = 0.5,
      py::arg("check_invariants") = false, py::arg("turn_cap") = 500, py::arg("format") = "jsonl");

  m.def(
      "record",
      [](const std::string& ruleset, uint64_t seed, const std::vector<std::string>& policies, int players,
         double tf_accuracy) {
        GameConfig cfg;
        cfg.ruleset = ruleset_arg(ruleset);
        cfg.seed = seed;
        cfg.player_count = players;
        const GameRun run = play_game(cfg, expand_policies(policies, players), tf_accuracy);
        return write_transcript(run.initial, run.events, run.final_state);
      },
      py::arg("ruleset") = "v1-base", py::arg("seed") = 0, py::arg("policies") = std::vector<std::string>{"random"},
      py::arg("players") = 4, py::arg("tf_accuracy") = 0.5);

  m.def("replay", [](const std::string& text) {
    ReplayResult r = replay_transcript(text);
    const std::string events = events_json(r.events, r.final_state);
    return py::make_tuple(std::move(r.initial), std::move(r.final_state), events, outcome_text(r.outcome));
  });
}
