import json

import pytest

import safecards


def test_deck_composition():
    d = safecards.deck("v1-base")
    kinds = [c["kind"] for c in d["main_pile"]]
    assert len(kinds) == 48
    assert kinds.count("Numbered") == 32
    assert kinds.count("Minus") == 8
    assert kinds.count("Change") == 8
    v2 = safecards.deck("v2")
    assert len(v2["main_pile"]) == 32
    assert len(v2["challenge_pile"]) == 16


def test_new_game_and_views():
    g = safecards.new_game("v1-revised", players=4, seed=42)
    assert g.state.hand_sizes == [7, 7, 7, 7]
    assert g.state.draw_pile_size == 20
    assert g.state.phase == "Opening"
    view = g.view(1)
    assert view["opponents"] == {"0": 7, "2": 7, "3": 7}
    assert view["legal_moves"] == []
    assert safecards.new_game("v1-revised", seed=42).state == g.state


def test_play_a_game_to_the_end():
    g = safecards.new_game("v2", seed=3)
    turns = 0
    while not g.finished:
        move = g.bot_move("greedy", seed=turns)
        assert move in g.legal_moves()
        g.play(move)
        turns += 1
    kind, seat = g.outcome()
    assert kind in ("won", "stalled")
    assert g.state.check() == []
    assert g.events[-1]["type"] in ("GameWon", "GameStalled")


def test_precedence_rejection():
    g = safecards.new_game("v1-base", seed=1)
    with pytest.raises(safecards.SafecardsError) as info:
        g.play({"type": "DrawPenalty"})
    assert info.value.code == "IllegalMove"
    assert info.value.rule_code == "PRECEDENCE"
    with pytest.raises(safecards.SafecardsError) as info:
        g.play(g.legal_moves()[0], seat=(g.current_seat + 1) % 4)
    assert info.value.code == "NotYourTurn"


def test_state_round_trip():
    g = safecards.new_game("v1-base", seed=9)
    for _ in range(10):
        g.play(g.bot_move("random"))
    back = safecards.Game.from_json(g.to_json())
    assert back.state == g.state
    assert back.legal_moves() == g.legal_moves()


def test_simulation_is_deterministic():
    a = safecards.simulate(50, "v1-base", ["random", "greedy", "random", "greedy"], seed=5)
    b = safecards.simulate(50, "v1-base", ["random", "greedy", "random", "greedy"], seed=5, threads=2)
    assert a == b
    assert a["games_played"] == 50
    assert sum(a["wins"]) + a["stalls"] == 50
    rows = safecards.simulate_csv(20, "v2", seed=1)
    assert [r["seat"] for r in rows] == ["0", "1", "2", "3"]


def test_record_and_replay():
    text = safecards.record("v1-revised", seed=4)
    result = safecards.replay(text)
    assert result["outcome"] in ("stalled",) or result["outcome"].startswith("won by seat")
    assert len(result["events"]) == json.loads(text.splitlines()[0])["event_count"]
    truncated = "\n".join(text.splitlines()[:4]) + "\n"
    with pytest.raises(safecards.SafecardsError) as info:
        safecards.replay(truncated)
    assert info.value.code == "ReplayMismatch"


def test_pack_validation():
    pack = safecards.default_pack()
    assert safecards.validate_pack(pack) == []
    pack["advice"] = [a for a in pack["advice"] if not (a["category"] == "scams" and a["rank"] == 3)]
    codes = [v[0] for v in safecards.validate_pack(pack)]
    assert "GAP_IN_RANKS" in codes


def test_config_errors():
    with pytest.raises(safecards.SafecardsError) as info:
        safecards.new_game(players=7)
    assert info.value.code == "ConfigError"
    with pytest.raises(safecards.SafecardsError):
        safecards.simulate(0)
