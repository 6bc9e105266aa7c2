"""Calibration scores and the grid forecaster."""

import math

import numpy as np
import pytest

from cpt_games.calibration import (
    CalibratedForecaster,
    ForecastRecord,
    calibration_score,
    make_calibrated_forecaster,
)


def drive(forecaster, nature, t_max, seed):
    """Run forecaster against a Nature callback; returns the score record."""
    rng = np.random.default_rng(seed)
    rec = ForecastRecord(forecaster.n_outcomes)
    ids = [rec.intern(forecaster.grid[k]) for k in range(forecaster.grid.shape[0])]
    state = {"last_mode": 0}
    for t in range(t_max):
        k = forecaster.predict(rng)
        y = nature(t, state, rng)
        state["last_mode"] = int(np.argmax(forecaster.grid[k]))
        forecaster.observe(y)
        rec.append(ids[k], y)
    return rec


class TestCalibrationScore:
    def test_point_mass_on_realized_outcome_scores_zero(self):
        rec = ForecastRecord(3)
        ids = [rec.intern(np.eye(3)[y]) for y in range(3)]
        rng = np.random.default_rng(0)
        for _ in range(200):
            y = int(rng.integers(3))
            rec.append(ids[y], y)
        assert np.all(calibration_score(rec) == 0.0)

    def test_alternating_half_half_schedule_scores_zero(self):
        # odd steps forecast (.5,0,.5,0) and see outcomes 0,2 alternately;
        # even steps forecast (0,.5,0,.5) and see 1,3; at full cycles the
        # conditional frequencies equal the forecasts exactly
        rec = ForecastRecord(4)
        odd = rec.intern(np.array([0.5, 0.0, 0.5, 0.0]))
        even = rec.intern(np.array([0.0, 0.5, 0.0, 0.5]))
        for t in range(1, 41):
            rec.append(odd if t % 2 else even, (t - 1) % 4)
        assert np.all(calibration_score(rec) == 0.0)

    def test_constant_forecast_against_alternating_and_constant(self):
        rec = ForecastRecord(2)
        q = rec.intern(np.array([0.5, 0.5]))
        for t in range(100):
            rec.append(q, t % 2)
        assert np.all(calibration_score(rec) == 0.0)
        rec2 = ForecastRecord(2)
        q2 = rec2.intern(np.array([0.5, 0.5]))
        for t in range(100):
            rec2.append(q2, 0)
        assert np.allclose(calibration_score(rec2), [0.5, 0.5])

    def test_prefix_evaluation(self):
        rec = ForecastRecord(2)
        q = rec.intern(np.array([1.0, 0.0]))
        rec.append(q, 0)
        rec.append(q, 1)
        assert np.all(calibration_score(rec, t=1) == 0.0)
        assert calibration_score(rec, t=2)[1] == pytest.approx(0.5)


class TestForecaster:
    def test_grid_pitch(self):
        fc = make_calibrated_forecaster(3, 0.25)
        assert fc.resolution == 4
        assert fc.grid.shape == (math.comb(4 + 2, 2), 3)

    def test_epsilon_validated(self):
        with pytest.raises(ValueError):
            make_calibrated_forecaster(2, 0.0)

    def test_deterministic_given_rng(self):
        a = CalibratedForecaster(2, 0.2)
        b = CalibratedForecaster(2, 0.2)
        rng_a = np.random.default_rng(5)
        rng_b = np.random.default_rng(5)
        for t in range(200):
            ka = a.predict(rng_a)
            kb = b.predict(rng_b)
            assert ka == kb
            a.observe(t % 2)
            b.observe(t % 2)

    def test_reset_restores_initial_state(self):
        fc = CalibratedForecaster(2, 0.2)
        seq1 = drive(fc, lambda t, s, r: t % 2, 100, 9)
        fc.reset()
        seq2 = drive(fc, lambda t, s, r: t % 2, 100, 9)
        assert seq1.forecasts == seq2.forecasts

    @pytest.mark.parametrize(
        "name,nature,bound",
        [
            ("iid", lambda t, s, rng: int(rng.random() < 0.7), 0.22),
            ("constant", lambda t, s, rng: 0, 0.11),
            ("flip", lambda t, s, rng: 1 - s["last_mode"], 0.25),
        ],
    )
    def test_moderate_horizon_scores(self, name, nature, bound):
        # smoke-scale version of the acceptance run (t = 1e5 there)
        fc = CalibratedForecaster(2, 0.1)
        rec = drive(fc, nature, 20000, seed=42)
        assert float(calibration_score(rec).max()) <= bound
