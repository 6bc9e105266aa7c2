"""Calibration scoring and an epsilon-grid calibrated forecaster.

A forecaster repeatedly predicts a distribution over a finite outcome set;
Nature then reveals an outcome.  The calibration score of outcome ``y`` is
the frequency-weighted discrepancy between each distinct forecast and the
empirical outcome rate on the steps it was issued:

    score(y) = sum_q |rho(q, y, t) - q(y)| * N(q, t) / t

where N counts the steps forecasting q and rho is the empirical frequency
of y on those steps (zero when N is zero).  Forecast equality is dictionary
identity: forecasts are indices into a finite dictionary of vectors, so the
bookkeeping is exact.

The forecaster restricts its predictions to the simplex grid of pitch
``epsilon`` and drives its internal (pairwise-swap) regret under the
quadratic checking loss ``|q - indicator(y)|^2`` to zero by playing the
invariant distribution of the positive-part regret matrix.  Vanishing
internal regret over the grid forces every forecast's conditional outcome
frequency toward the forecast itself up to the grid pitch, which is what
the score measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import simplex_grid

__all__ = [
    "ForecastRecord",
    "calibration_score",
    "CalibratedForecaster",
    "make_calibrated_forecaster",
]


@dataclass
class ForecastRecord:
    """Log of dictionary forecasts and realized outcomes.

    ``dictionary[id]`` is the forecast vector; ``forecasts[t]`` the id used
    at step t (0-based); ``outcomes[t]`` the realized outcome index.
    """

    n_outcomes: int
    dictionary: list[np.ndarray] = field(default_factory=list)
    forecasts: list[int] = field(default_factory=list)
    outcomes: list[int] = field(default_factory=list)
    _keys: dict = field(default_factory=dict)

    def intern(self, vector: np.ndarray) -> int:
        """Id of a forecast vector, adding it to the dictionary if new."""
        key = np.asarray(vector, dtype=float).tobytes()
        idx = self._keys.get(key)
        if idx is None:
            idx = len(self.dictionary)
            self._keys[key] = idx
            self.dictionary.append(np.asarray(vector, dtype=float).copy())
        return idx

    def append(self, forecast_id: int, outcome: int) -> None:
        if not 0 <= forecast_id < len(self.dictionary):
            raise ValueError("forecast id not in the dictionary")
        if not 0 <= outcome < self.n_outcomes:
            raise ValueError("outcome index out of range")
        self.forecasts.append(forecast_id)
        self.outcomes.append(outcome)

    def __len__(self) -> int:
        return len(self.forecasts)


def calibration_score(record: ForecastRecord, t: int | None = None) -> np.ndarray:
    """Per-outcome calibration scores after the first ``t`` steps."""
    if t is None:
        t = len(record)
    if t < 1 or t > len(record):
        raise ValueError("t must lie in [1, record length]")
    ids = np.asarray(record.forecasts[:t], dtype=np.intp)
    ys = np.asarray(record.outcomes[:t], dtype=np.intp)
    n_ids = len(record.dictionary)
    counts = np.zeros((n_ids, record.n_outcomes))
    np.add.at(counts, (ids, ys), 1.0)
    n_q = counts.sum(axis=1)
    used = n_q > 0
    q_mat = np.array([record.dictionary[k] for k in range(n_ids)])
    rho = np.zeros_like(counts)
    rho[used] = counts[used] / n_q[used, None]
    return (np.abs(rho[used] - q_mat[used]) * (n_q[used, None] / t)).sum(axis=0)


class CalibratedForecaster:
    """Randomized forecaster over the epsilon-grid of the outcome simplex.

    ``predict`` samples a grid forecast from the invariant distribution of
    the normalized positive-part regret matrix (a damped direct solve on
    small grids, warm-started power iteration above); ``observe`` charges
    the quadratic checking loss of the issued forecast against every
    alternative.  Long-run calibration scores are bounded by a constant
    times the grid pitch, almost surely, for any outcome sequence that
    does not react to the current forecast.
    """

    def __init__(self, n_outcomes: int, epsilon: float):
        if not 0.0 < epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        self.n_outcomes = int(n_outcomes)
        self.epsilon = float(epsilon)
        self.resolution = max(1, math.ceil(1.0 / epsilon))
        self.grid = simplex_grid(self.n_outcomes, self.resolution)
        q = self.grid.shape[0]
        # loss[k, y] = ||grid[k] - e_y||^2
        sq = (self.grid**2).sum(axis=1)
        self.loss = sq[:, None] + 1.0 - 2.0 * self.grid
        self._regret = np.zeros((q, q))
        self._play = np.full(q, 1.0 / q)
        self._last: int | None = None

    def reset(self) -> None:
        self._regret.fill(0.0)
        self._play.fill(1.0 / self._play.size)
        self._last = None

    def _invariant_play(self) -> np.ndarray:
        pos = np.maximum(self._regret, 0.0)
        rows = pos.sum(axis=1)
        kappa = rows.max()
        if kappa <= 0.0:
            return self._play
        q = rows.size
        if q <= 320:
            # damped balance equations: the chain moving along positive
            # regrets, restarted uniformly with probability delta, has a
            # unique invariant vector and a provably nonsingular system
            delta = 1e-9
            scale = (1.0 - delta) / kappa
            # A = (I - (1-delta) P)^T with P = pos/kappa + diag(1 - rows/kappa)
            a = -scale * pos.T
            idx = np.arange(q)
            a[idx, idx] = delta + scale * rows
            p = np.linalg.solve(a, np.full(q, delta / q))
            if p.min() >= -1e-9 and np.isfinite(p).all() and p.sum() > 0:
                p = np.maximum(p, 0.0)
                return p / p.sum()
        # fall back to power iteration on the lazy chain
        M = pos * (0.5 / kappa)
        diag = 1.0 - rows * (0.5 / kappa)
        p = self._play
        for _ in range(200):
            nxt = p @ M + p * diag
            if np.abs(nxt - p).sum() <= 1e-11:
                p = nxt
                break
            p = nxt
        p = np.maximum(p, 0.0)
        return p / p.sum()

    def predict(self, rng: np.random.Generator) -> int:
        """Sample the next forecast; returns its grid index."""
        p = self._invariant_play()
        self._play = p
        k = int(np.searchsorted(np.cumsum(p), rng.random(), side="right"))
        self._last = min(k, p.size - 1)
        return self._last

    def forecast_vector(self, k: int) -> np.ndarray:
        return self.grid[k]

    def observe(self, outcome: int) -> None:
        """Charge the checking loss of the last forecast against outcome."""
        if self._last is None:
            raise RuntimeError("observe called before predict")
        k = self._last
        self._regret[k] += self.loss[k, outcome] - self.loss[:, outcome]
        self._last = None


def make_calibrated_forecaster(n_outcomes: int, epsilon: float) -> CalibratedForecaster:
    return CalibratedForecaster(n_outcomes, epsilon)
