"""Round trips for the on-disk JSON formats."""

import json

import numpy as np
import pytest

from cpt_games.engine import ActionScriptStrategy, FixedMixStrategy, run_engine
from cpt_games.fileio import (
    distribution_from_dict,
    distribution_to_dict,
    dump_json,
    game_from_dict,
    game_to_dict,
    load_json,
    lottery_from_dict,
    mediated_game_from_dict,
    mediated_game_to_dict,
    write_trace_jsonl,
)
from cpt_games.harness import canonical_replay_instance, random_game
from cpt_games.scripted import counterexample_game


class TestGameDocuments:
    def test_roundtrip_counterexample(self, game, tmp_path):
        doc = game_to_dict(game)
        path = tmp_path / "game.json"
        dump_json(doc, path)
        back = game_from_dict(load_json(path))
        assert back.actions == game.actions
        assert np.array_equal(back.payoffs, game.payoffs)
        assert back.prefs == game.prefs

    def test_roundtrip_random_games(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            g = random_game(rng, (2, 3))
            back = game_from_dict(json.loads(json.dumps(game_to_dict(g))))
            assert np.abs(back.payoffs - g.payoffs).max() == 0.0
            assert back.prefs == g.prefs

    def test_player_count_checked(self, game):
        doc = game_to_dict(game)
        doc["players"] = 3
        with pytest.raises(ValueError):
            game_from_dict(doc)


class TestDistributionDocuments:
    def test_roundtrip(self, mu_star):
        doc = distribution_to_dict(mu_star)
        assert doc["shape"] == [2, 4]
        back = distribution_from_dict(doc)
        assert np.array_equal(back.weights, mu_star.weights)

    def test_flat_layout_is_row_major(self, mu_o):
        doc = distribution_to_dict(mu_o)
        assert doc["weights"][:4] == [0.5, 0.0, 0.5, 0.0]


class TestLotteryDocuments:
    def test_entries_parse(self):
        lot = lottery_from_dict({"entries": [[0.5, 2.0], [0.5, 0.0]]})
        assert np.allclose(lot.probs, [0.5, 0.5])
        assert np.allclose(lot.outcomes, [2.0, 0.0])


class TestMediatedDocuments:
    def test_roundtrip_with_repair_points(self, tmp_path):
        _, _, mg, sigma, repair = canonical_replay_instance()
        doc = mediated_game_to_dict(mg, sigma, repair)
        path = tmp_path / "mediated.json"
        dump_json(doc, path)
        mg2, sigma2, repair2 = mediated_game_from_dict(load_json(path))
        assert mg2.signals == mg.signals
        assert np.abs(mg2.mediator.weights - mg.mediator.weights).max() == 0.0
        for a, b in zip(sigma.maps, sigma2.maps):
            assert np.array_equal(a, b)
        assert set(repair2) == set(repair)
        for key in repair:
            for p, q in zip(repair[key], repair2[key]):
                assert np.array_equal(p, q)


class TestTraceFiles:
    def test_jsonl_structure(self, tmp_path):
        g = counterexample_game()
        strategies = [FixedMixStrategy([1, 0]), ActionScriptStrategy(lambda t: (t - 1) % 4)]
        trace = run_engine(g, strategies, 16, 5)
        path = tmp_path / "trace.jsonl"
        write_trace_jsonl(trace, path)
        lines = [json.loads(l) for l in path.read_text().splitlines()]
        assert lines[0]["horizon"] == 16
        steps = lines[1:]
        assert len(steps) == 16
        assert steps[0]["t"] == 1
        # checkpoints at powers of two and the horizon
        cp_ts = [r["t"] for r in steps if "checkpoint" in r]
        assert cp_ts == [1, 2, 4, 8, 16]
        assert steps[0]["mixes"][0] == [1.0, 0.0]
        assert len(steps[0]["mixes"][1]) == 4
        xi = np.array(steps[-1]["checkpoint"]["xi"]).reshape(2, 4)
        assert np.abs(xi - trace.empirical().weights).max() < 1e-12
