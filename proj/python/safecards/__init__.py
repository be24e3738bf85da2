"""Card game engine: rules, bots, simulation and transcripts.

The compiled core lives in ``safecards._core``; this package turns its JSON
payloads into plain Python values.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable

from . import _core
from ._core import SafecardsError, State

__all__ = [
    "Game",
    "SafecardsError",
    "State",
    "deck",
    "default_pack",
    "new_game",
    "record",
    "replay",
    "simulate",
    "validate_pack",
]


class Game:
    """Mutable convenience wrapper around an immutable engine ``State``."""

    def __init__(self, state: State):
        self.state = state
        self.events: list[dict[str, Any]] = []

    @property
    def current_seat(self) -> int:
        return self.state.current_seat

    @property
    def finished(self) -> bool:
        return self.state.phase == "Finished"

    def legal_moves(self) -> list[dict[str, Any]]:
        return json.loads(self.state.legal_moves_json())

    def play(self, move: dict[str, Any], seat: int | None = None) -> list[dict[str, Any]]:
        seat = self.state.current_seat if seat is None else seat
        self.state, events = self.state.apply_json(seat, json.dumps(move))
        fresh = json.loads(events)
        self.events.extend(fresh)
        return fresh

    def bot_move(self, policy: str = "random", seed: int = 0, tf_accuracy: float = 0.5) -> dict[str, Any]:
        return json.loads(_core.policy_move_json(self.state, policy, seed, tf_accuracy))

    def view(self, seat: int) -> dict[str, Any]:
        return json.loads(self.state.view_json(seat))

    def outcome(self) -> tuple[str, int | None]:
        return self.state.outcome()

    def to_json(self) -> str:
        return self.state.to_json()

    @classmethod
    def from_json(cls, text: str) -> "Game":
        return cls(State.from_json(text))


def new_game(ruleset: str = "v1-base", players: int = 4, seed: int = 0, *, hand_size: int = 7,
             penalty_draw: int = 2, strict_precedence: bool = True, turn_cap: int = 500,
             pack: dict[str, Any] | None = None) -> Game:
    pack_json = json.dumps(pack) if pack is not None else ""
    return Game(_core.new_game(ruleset, players, seed, hand_size, penalty_draw, strict_precedence, turn_cap,
                               pack_json))


def deck(ruleset: str = "v1-base", pack: dict[str, Any] | None = None) -> dict[str, list[dict[str, Any]]]:
    return json.loads(_core.deck_json(ruleset, json.dumps(pack) if pack is not None else ""))


def default_pack() -> dict[str, Any]:
    return json.loads(_core.default_pack_json())


def validate_pack(pack: dict[str, Any] | str, lenient: bool = False) -> list[tuple[str, str, str]]:
    """Violations as (code, path, message); empty for a valid pack."""
    text = pack if isinstance(pack, str) else json.dumps(pack)
    return list(_core.validate_pack(text, lenient))


def simulate(games: int, ruleset: str = "v1-base", policies: Iterable[str] = ("random",), seed: int = 0, *,
             players: int = 4, threads: int = 1, tf_accuracy: float = 0.5, check_invariants: bool = False,
             turn_cap: int = 500) -> dict[str, Any]:
    """Runs seeded bot games; returns the summary with per-game records under "games"."""
    text = _core.simulate(games, ruleset, list(policies), seed, players, threads, tf_accuracy, check_invariants,
                          turn_cap, "jsonl")
    rows = [json.loads(line) for line in text.splitlines() if line]
    summary = next(r for r in rows if r["type"] == "summary")
    summary["games"] = [r for r in rows if r["type"] == "game"]
    return summary


def simulate_csv(games: int, ruleset: str = "v1-base", policies: Iterable[str] = ("random",), seed: int = 0,
                 **kwargs: Any) -> list[dict[str, str]]:
    text = _core.simulate(games, ruleset, list(policies), seed, kwargs.get("players", 4), kwargs.get("threads", 1),
                          kwargs.get("tf_accuracy", 0.5), kwargs.get("check_invariants", False),
                          kwargs.get("turn_cap", 500), "csv")
    return list(csv.DictReader(io.StringIO(text)))


def record(ruleset: str = "v1-base", seed: int = 0, policies: Iterable[str] = ("random",), players: int = 4,
           tf_accuracy: float = 0.5) -> str:
    """Plays one bot game and returns its JSON-lines transcript."""
    return _core.record(ruleset, seed, list(policies), players, tf_accuracy)


def replay(transcript: str) -> dict[str, Any]:
    initial, final, events, outcome = _core.replay(transcript)
    return {"initial": initial, "final": final, "events": json.loads(events), "outcome": outcome}
